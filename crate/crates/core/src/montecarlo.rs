//! Replicated simulate-then-estimate experiments and their summaries.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::acf::estimate_acf;
use crate::error::{Error, Result};
use crate::estimators::{estimate_def1, DiscardReason, EstimatorInputs, Lags, Status};
use crate::liquidity::LiquidityModel;
use crate::rng::SeedSpec;
use crate::sim::{validate_regime, ModelParams, NoiseMoments, RegimePurpose, Simulator};

pub const DEFAULT_INIT_X_SQUARED: f64 = 1.7;
pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub liquidity: LiquidityModel,
    pub noise: NoiseMoments,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub lag: i64,
    pub master_seed: u64,
    pub init_x_squared: f64,
    pub burn_in: usize,
    pub output_dir: PathBuf,
    pub bins: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: ModelParams {
                alpha0: 1.0,
                alpha1: 0.1,
                l1: 0.5,
            },
            liquidity: LiquidityModel::FgnSquared { hurst: 1.0 / 3.0 },
            noise: NoiseMoments::gaussian(),
            sample_sizes: vec![100, 1_000, 10_000, 100_000],
            replications: 1_000,
            lag: 1,
            master_seed: 1,
            init_x_squared: DEFAULT_INIT_X_SQUARED,
            burn_in: 0,
            output_dir: PathBuf::from("out"),
            bins: DEFAULT_BINS,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.liquidity.validate()?;
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::Config("no sample sizes given".into()));
        }
        if self.lag == 0 {
            return Err(Error::Config("lag must be nonzero".into()));
        }
        let min = self.lag.unsigned_abs() as usize + 3;
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < min) {
            return Err(Error::Config(format!(
                "sample size {n} below lag + 3 = {min}"
            )));
        }
        if !(self.init_x_squared >= 0.0 && self.init_x_squared.is_finite()) {
            return Err(Error::Config(format!(
                "init_x_squared = {} must be finite and >= 0",
                self.init_x_squared
            )));
        }
        if self.bins == 0 {
            return Err(Error::Config("bins must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub replication: u64,
    pub sample_size: usize,
    pub status: Status,
    pub alpha0: Option<f64>,
    pub alpha1: Option<f64>,
    pub l1: Option<f64>,
    /// Real `alpha1` root, also kept when `l1` came out complex.
    pub alpha1_candidate: Option<f64>,
    pub chosen_root: Option<&'static str>,
    pub discard_reason: Option<&'static str>,
    pub discriminant: f64,
}

impl ReplicationRecord {
    pub fn has_estimates(&self) -> bool {
        self.status != Status::ComplexDiscarded
    }
}

fn reason_str(r: DiscardReason) -> &'static str {
    match r {
        DiscardReason::NegativeDiscriminant => "negative_discriminant",
        DiscardReason::NegativeRadicand => "negative_radicand",
        DiscardReason::NoAdmissibleRoot => "no_admissible_root",
    }
}

pub fn status_str(s: Status) -> &'static str {
    match s {
        Status::Real => "real",
        Status::ComplexDiscarded => "complex_discarded",
        Status::DegenerateLinear => "degenerate_linear",
    }
}

/// Simulate one path under the experiment protocol and estimate from it.
pub fn run_replication(
    cfg: &ExperimentConfig,
    simulator: &Simulator,
    sample_size: usize,
    replication: u64,
) -> Result<ReplicationRecord> {
    let seed = SeedSpec::new(cfg.master_seed, replication);
    let path = simulator.recursive(seed, sample_size, cfg.init_x_squared, cfg.burn_in)?;
    let lags = Lags::Single(cfg.lag);
    let max_lag = lags.required_max_lag().min(sample_size - 1);
    let acf = estimate_acf(&path.x_squared, max_lag)?;
    let inputs = EstimatorInputs::from_acf(&acf, lags, cfg.liquidity.covariance(), cfg.noise);
    let mut record = ReplicationRecord {
        replication,
        sample_size,
        status: Status::ComplexDiscarded,
        alpha0: None,
        alpha1: None,
        l1: None,
        alpha1_candidate: None,
        chosen_root: None,
        discard_reason: None,
        discriminant: f64::NAN,
    };
    match estimate_def1(&inputs) {
        Ok(res) => {
            record.status = res.status;
            record.discriminant = res.coeffs.discriminant;
            record.alpha1_candidate = res.alpha1_candidate;
            record.chosen_root = res.chosen_root.map(|l| l.as_str());
            record.discard_reason = res.discard_reason.map(reason_str);
            if let Some(e) = res.estimates {
                record.alpha0 = Some(e.alpha0);
                record.alpha1 = Some(e.alpha1);
                record.l1 = Some(e.l1);
            }
        }
        Err(Error::Unidentifiable) => {
            record.discard_reason = Some("unidentifiable");
        }
        Err(e) => return Err(e),
    }
    Ok(record)
}

/// All replications for every sample size, sorted by `(N, replication)`.
pub fn run_replications(cfg: &ExperimentConfig) -> Result<Vec<ReplicationRecord>> {
    cfg.validate()?;
    validate_regime(&cfg.params, &cfg.noise, RegimePurpose::Consistency)?;
    let mut all = Vec::with_capacity(cfg.sample_sizes.len() * cfg.replications);
    for &n in &cfg.sample_sizes {
        info!("N = {n}: {} replications", cfg.replications);
        let simulator = Simulator::new(cfg.params, cfg.liquidity, n + cfg.burn_in)?;
        let mut batch = (0..cfg.replications as u64)
            .into_par_iter()
            .map(|r| run_replication(cfg, &simulator, n, r))
            .collect::<Result<Vec<_>>>()?;
        batch.sort_by_key(|r| r.replication);
        all.extend(batch);
    }
    all.sort_by_key(|r| (r.sample_size, r.replication));
    Ok(all)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sample_size: usize,
    pub replications: usize,
    pub n_real: usize,
    pub n_degenerate: usize,
    pub n_complex: usize,
    pub n_negative_discriminant: usize,
    pub n_negative_radicand: usize,
    pub n_no_admissible_root: usize,
    /// `None` when every replication was discarded.
    pub alpha0: Option<MeanSd>,
    pub alpha1: Option<MeanSd>,
    pub l1: Option<MeanSd>,
    pub pct_complex: f64,
    pub pct_alpha0_in_interval: f64,
    pub pct_alpha1_in_interval: f64,
    pub pct_l1_in_interval: f64,
}

fn mean_sd(xs: &[f64]) -> Option<MeanSd> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() == 1 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(MeanSd { mean, sd })
}

fn pct(count: usize, total: usize) -> f64 {
    100.0 * count as f64 / total as f64
}

/// One row per sample size, in increasing order. Moments use the records
/// that produced estimates; every percentage is over all replications.
pub fn summarize(records: &[ReplicationRecord], noise: &NoiseMoments) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no replication records".into()));
    }
    let mut sizes: Vec<usize> = records.iter().map(|r| r.sample_size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let upper = noise.consistency_threshold();
    let rows = sizes
        .into_iter()
        .map(|n| {
            let group: Vec<&ReplicationRecord> =
                records.iter().filter(|r| r.sample_size == n).collect();
            let total = group.len();
            if total == 1 {
                warn!("N = {n}: a single replication, standard deviations reported as 0");
            }
            let count = |pred: &dyn Fn(&ReplicationRecord) -> bool| {
                group.iter().filter(|r| pred(r)).count()
            };
            let reason = |s: &str| count(&|r| r.discard_reason == Some(s));
            let values = |get: fn(&ReplicationRecord) -> Option<f64>| -> Vec<f64> {
                group.iter().filter_map(|r| get(r)).collect()
            };
            SummaryRow {
                sample_size: n,
                replications: total,
                n_real: count(&|r| r.status == Status::Real),
                n_degenerate: count(&|r| r.status == Status::DegenerateLinear),
                n_complex: count(&|r| r.status == Status::ComplexDiscarded),
                n_negative_discriminant: reason("negative_discriminant"),
                n_negative_radicand: reason("negative_radicand"),
                n_no_admissible_root: reason("no_admissible_root"),
                alpha0: mean_sd(&values(|r| r.alpha0)),
                alpha1: mean_sd(&values(|r| r.alpha1)),
                l1: mean_sd(&values(|r| r.l1)),
                pct_complex: pct(count(&|r| r.status == Status::ComplexDiscarded), total),
                pct_alpha0_in_interval: pct(count(&|r| r.alpha0.is_some_and(|a| a >= 0.0)), total),
                pct_alpha1_in_interval: pct(
                    count(&|r| r.alpha1_candidate.is_some_and(|a| a > 0.0 && a < upper)),
                    total,
                ),
                pct_l1_in_interval: pct(count(&|r| r.l1.is_some_and(|l| l > 0.0)), total),
            }
        })
        .collect();
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    Alpha0,
    Alpha1,
    L1,
}

impl Parameter {
    pub const ALL: [Parameter; 3] = [Parameter::Alpha0, Parameter::Alpha1, Parameter::L1];

    pub fn name(&self) -> &'static str {
        match self {
            Parameter::Alpha0 => "alpha0",
            Parameter::Alpha1 => "alpha1",
            Parameter::L1 => "l1",
        }
    }

    pub fn get(&self, r: &ReplicationRecord) -> Option<f64> {
        match self {
            Parameter::Alpha0 => r.alpha0,
            Parameter::Alpha1 => r.alpha1,
            Parameter::L1 => r.l1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Equal-width bins over `[min, max]` of the available estimates; the last
/// bin is closed on the right.
pub fn emit_histogram(
    records: &[ReplicationRecord],
    parameter: Parameter,
    bins: usize,
) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let values: Vec<f64> = records.iter().filter_map(|r| parameter.get(r)).collect();
    if values.is_empty() {
        return Err(Error::NoRealEstimates);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            left: lo + width * i as f64,
            right: if i + 1 == bins {
                hi
            } else {
                lo + width * (i + 1) as f64
            },
            count: 0,
        })
        .collect();
    for v in values {
        let idx = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        out[idx].count += 1;
    }
    Ok(out)
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn write_raw_csv<W: Write>(records: &[ReplicationRecord], out: W) -> Result<()> {
    let mut sorted: Vec<&ReplicationRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.sample_size, r.replication));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "replication",
        "N",
        "alpha0_hat",
        "alpha1_hat",
        "l1_hat",
        "status",
        "chosen_root",
        "discard_reason",
        "discriminant",
    ])?;
    for r in sorted {
        w.write_record([
            r.replication.to_string(),
            r.sample_size.to_string(),
            fmt_opt(r.alpha0),
            fmt_opt(r.alpha1),
            fmt_opt(r.l1),
            status_str(r.status).to_string(),
            r.chosen_root.unwrap_or("").to_string(),
            r.discard_reason.unwrap_or("").to_string(),
            fmt_float(r.discriminant),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "N",
        "replications",
        "n_real",
        "n_degenerate",
        "n_complex",
        "n_negative_discriminant",
        "n_negative_radicand",
        "n_no_admissible_root",
        "alpha0_mean",
        "alpha0_sd",
        "alpha1_mean",
        "alpha1_sd",
        "l1_mean",
        "l1_sd",
        "pct_complex",
        "pct_alpha0_in_interval",
        "pct_alpha1_in_interval",
        "pct_l1_in_interval",
    ])?;
    for r in rows {
        let mut rec = vec![
            r.sample_size.to_string(),
            r.replications.to_string(),
            r.n_real.to_string(),
            r.n_degenerate.to_string(),
            r.n_complex.to_string(),
            r.n_negative_discriminant.to_string(),
            r.n_negative_radicand.to_string(),
            r.n_no_admissible_root.to_string(),
        ];
        for m in [r.alpha0, r.alpha1, r.l1] {
            rec.push(fmt_opt(m.map(|m| m.mean)));
            rec.push(fmt_opt(m.map(|m| m.sd)));
        }
        for p in [
            r.pct_complex,
            r.pct_alpha0_in_interval,
            r.pct_alpha1_in_interval,
            r.pct_l1_in_interval,
        ] {
            rec.push(fmt_float(p));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_left", "bin_right", "count"])?;
    for b in bins {
        w.write_record([fmt_float(b.left), fmt_float(b.right), b.count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Run the experiment and write `raw.csv`, `summary.csv` and one
/// `hist_<param>_<N>.csv` per parameter and sample size with estimates.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let records = run_replications(cfg)?;
    let rows = summarize(&records, &cfg.noise)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    write_raw_csv(&records, create(&cfg.output_dir, "raw.csv")?)?;
    write_summary_csv(&rows, create(&cfg.output_dir, "summary.csv")?)?;
    for &n in &cfg.sample_sizes {
        let group: Vec<ReplicationRecord> = records
            .iter()
            .filter(|r| r.sample_size == n)
            .cloned()
            .collect();
        for p in Parameter::ALL {
            match emit_histogram(&group, p, cfg.bins) {
                Ok(bins) => write_histogram_csv(
                    &bins,
                    create(&cfg.output_dir, &format!("hist_{}_{n}.csv", p.name()))?,
                )?,
                Err(Error::NoRealEstimates) => {
                    warn!("N = {n}: no estimates of {}, histogram skipped", p.name())
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rows)
}
