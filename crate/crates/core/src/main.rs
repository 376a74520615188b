use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use archliq::acf::estimate_acf;
use archliq::config::{apply, load_config, parse_noise};
use archliq::estimators::{estimate_def1, estimate_def2, EstimatorInputs, Lags};
use archliq::fgn::{fgn_autocovariance, sample_fgn, FgnConfig};
use archliq::liquidity::{sample_liquidity, LiquidityModel};
use archliq::montecarlo::{fmt_float, run_experiment, status_str, ExperimentConfig};
use archliq::poisson::sample_compensated_poisson_increments;
use archliq::rng::{sample_gaussian_iid, SeedSpec};
use archliq::sim::{simulate_recursive, simulate_stationary_series};

#[derive(Parser)]
#[command(
    version,
    about = "Simulate and estimate ARCH(1) models with a liquidity regressor"
)]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path and write t, x_squared, sigma_squared, liquidity.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of points (defaults to the first configured sample size).
        #[arg(long)]
        n: Option<usize>,
        /// Master seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Stream index under the master seed.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long, value_enum, default_value_t = Mode::Recursive)]
        mode: Mode,
        /// `key=value` override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate (alpha0, alpha1, l1) from a column of X^2 observations.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "fgn:H=0.3333333333333333")]
        liquidity: LiquidityModel,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        lag: i64,
        /// Second lag; switches to the two-lag estimator.
        #[arg(long, allow_negative_numbers = true)]
        lag2: Option<i64>,
        #[arg(long, default_value = "gaussian")]
        noise: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the replicated experiment and write raw.csv, summary.csv and histograms.
    Montecarlo {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// `key=value` override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Sample mean, fourth moment and autocovariances of X^2.
    Acf {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare empirical and theoretical autocovariances of a noise generator.
    NoiseCheck {
        #[arg(long, value_enum)]
        kind: NoiseKind,
        #[arg(long, default_value_t = 0.5)]
        hurst: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        max_lag: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Check the squared (liquidity) process instead of the raw noise.
        #[arg(long)]
        squared: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Recursive,
    Stationary,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseKind {
    Fgn,
    Poisson,
    White,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn experiment_config(config: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut cfg = match config {
        Some(p) => load_config(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    for o in overrides {
        let Some((k, v)) = o.split_once('=') else {
            bail!("override {o:?} is not key=value");
        };
        apply(&mut cfg, k, v)?;
    }
    Ok(cfg)
}

/// The `x_squared` column if present, else the first column.
fn read_series(path: &Path) -> Result<Vec<f64>> {
    let mut rdr =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let col = rdr
        .headers()?
        .iter()
        .position(|h| h.trim() == "x_squared")
        .unwrap_or(0);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = rec.get(col).unwrap_or("").trim();
        out.push(
            field
                .parse::<f64>()
                .with_context(|| format!("row {}: bad number {field:?}", i + 2))?,
        );
    }
    Ok(out)
}

fn simulate(
    cfg: ExperimentConfig,
    n: Option<usize>,
    stream: u64,
    mode: Mode,
    out: Option<&Path>,
) -> Result<()> {
    cfg.validate()?;
    let n = n.unwrap_or(cfg.sample_sizes[0]);
    let seed = SeedSpec::new(cfg.master_seed, stream);
    let path = match mode {
        Mode::Recursive => simulate_recursive(
            cfg.params,
            cfg.liquidity,
            seed,
            n,
            cfg.init_x_squared,
            cfg.burn_in,
        )?,
        Mode::Stationary => simulate_stationary_series(cfg.params, cfg.liquidity, seed, n, None)?,
    };
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record(["t", "x_squared", "sigma_squared", "liquidity"])?;
    for t in 0..path.len() {
        w.write_record([
            t.to_string(),
            fmt_float(path.x_squared[t]),
            fmt_float(path.sigma_squared[t]),
            fmt_float(path.liquidity[t]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn estimate(
    data: &Path,
    liquidity: LiquidityModel,
    lag: i64,
    lag2: Option<i64>,
    noise: &str,
    out: Option<&Path>,
) -> Result<()> {
    let x2 = read_series(data)?;
    let lags = match lag2 {
        Some(n2) => Lags::Pair { n1: lag, n2 },
        None => Lags::Single(lag),
    };
    let max_lag = lags.required_max_lag().min(x2.len().saturating_sub(1));
    let acf = estimate_acf(&x2, max_lag)?;
    let inputs = EstimatorInputs::from_acf(&acf, lags, liquidity.covariance(), parse_noise(noise)?);
    let res = match lags {
        Lags::Single(_) => estimate_def1(&inputs)?,
        Lags::Pair { .. } => estimate_def2(&inputs)?,
    };
    let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record([
        "alpha0_hat",
        "alpha1_hat",
        "l1_hat",
        "status",
        "chosen_root",
        "discriminant",
        "alpha1_candidate",
    ])?;
    w.write_record([
        opt(res.estimates.map(|e| e.alpha0)),
        opt(res.estimates.map(|e| e.alpha1)),
        opt(res.estimates.map(|e| e.l1)),
        status_str(res.status).to_string(),
        res.chosen_root
            .map(|r| r.as_str())
            .unwrap_or("")
            .to_string(),
        fmt_float(res.coeffs.discriminant),
        opt(res.alpha1_candidate),
    ])?;
    w.flush()?;
    Ok(())
}

fn acf(data: &Path, max_lag: usize, out: Option<&Path>) -> Result<()> {
    let a = estimate_acf(&read_series(data)?, max_lag)?;
    log::info!(
        "N = {}, mean = {}, fourth moment = {}",
        a.n_obs,
        a.mu_hat,
        a.mu2_hat
    );
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record(["lag", "gamma"])?;
    for (lag, g) in a.gamma_hat.iter().enumerate() {
        w.write_record([lag.to_string(), fmt_float(*g)])?;
    }
    w.flush()?;
    Ok(())
}

fn noise_check(
    kind: NoiseKind,
    hurst: f64,
    lambda: f64,
    n: usize,
    max_lag: usize,
    seed: u64,
    squared: bool,
) -> Result<()> {
    let seed = SeedSpec::new(seed, 0);
    let (values, theory): (Vec<f64>, Box<dyn Fn(i64) -> f64>) = if squared {
        let model = match kind {
            NoiseKind::Fgn => LiquidityModel::FgnSquared { hurst },
            NoiseKind::Poisson => LiquidityModel::CompensatedPoissonSquared { lambda },
            NoiseKind::White => LiquidityModel::WhiteSquared,
        };
        let cov = model.covariance();
        (
            sample_liquidity(model, seed, n)?,
            Box::new(move |k| cov.s(k)),
        )
    } else {
        match kind {
            NoiseKind::Fgn => (
                sample_fgn(seed, FgnConfig::new(hurst, n)?)?,
                Box::new(move |k| fgn_autocovariance(hurst, k)),
            ),
            NoiseKind::Poisson => (
                sample_compensated_poisson_increments(seed, lambda, n)?,
                Box::new(move |k| if k == 0 { lambda } else { 0.0 }),
            ),
            NoiseKind::White => (
                sample_gaussian_iid(seed, n)?,
                Box::new(|k| if k == 0 { 1.0 } else { 0.0 }),
            ),
        }
    };
    let a = estimate_acf(&values, max_lag)?;
    let mut out = io::stdout().lock();
    writeln!(out, "lag,empirical,theoretical,difference")?;
    for (lag, g) in a.gamma_hat.iter().enumerate() {
        let t = theory(lag as i64);
        writeln!(
            out,
            "{lag},{},{},{}",
            fmt_float(*g),
            fmt_float(t),
            fmt_float(g - t)
        )?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Simulate {
            config,
            n,
            seed,
            stream,
            mode,
            overrides,
            out,
        } => {
            let mut cfg = experiment_config(config.as_deref(), &overrides)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            simulate(cfg, n, stream, mode, out.as_deref())
        }
        Command::Estimate {
            data,
            liquidity,
            lag,
            lag2,
            noise,
            out,
        } => estimate(&data, liquidity, lag, lag2, &noise, out.as_deref()),
        Command::Montecarlo {
            config,
            out_dir,
            replications,
            seed,
            threads,
            overrides,
        } => {
            let mut cfg = experiment_config(config.as_deref(), &overrides)?;
            if let Some(d) = out_dir {
                cfg.output_dir = d;
            }
            if let Some(r) = replications {
                cfg.replications = r;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()?;
            }
            let rows = run_experiment(&cfg)?;
            let stdout = io::stdout();
            let mut o = stdout.lock();
            writeln!(o, "N,pct_complex,alpha0_mean,alpha1_mean,l1_mean")?;
            for r in rows {
                let m = |x: Option<archliq::montecarlo::MeanSd>| {
                    x.map(|v| format!("{:.4}", v.mean)).unwrap_or_default()
                };
                writeln!(
                    o,
                    "{},{:.1},{},{},{}",
                    r.sample_size,
                    r.pct_complex,
                    m(r.alpha0),
                    m(r.alpha1),
                    m(r.l1)
                )?;
            }
            Ok(())
        }
        Command::Acf { data, max_lag, out } => acf(&data, max_lag, out.as_deref()),
        Command::NoiseCheck {
            kind,
            hurst,
            lambda,
            n,
            max_lag,
            seed,
            squared,
        } => noise_check(kind, hurst, lambda, n, max_lag, seed, squared),
    }
}
