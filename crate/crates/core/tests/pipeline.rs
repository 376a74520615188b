mod common;

use archliq::acf::estimate_acf;
use archliq::estimators::{estimate_from_acf, Status};
use archliq::liquidity::LiquidityModel;
use archliq::montecarlo::{run_experiment, run_replications, summarize, ExperimentConfig};
use archliq::rng::SeedSpec;
use archliq::sim::{simulate_recursive, ModelParams, NoiseMoments};

#[test]
fn large_sample_estimates_are_close() {
    let p = ModelParams::new(1.0, 0.1, 0.5).unwrap();
    let model = LiquidityModel::FgnSquared { hurst: 2.0 / 3.0 };
    let path = simulate_recursive(p, model, SeedSpec::new(4, 0), 200_000, 1.7, 0).unwrap();
    let acf = estimate_acf(&path.x_squared, 8).unwrap();
    let res = estimate_from_acf(&acf, 1, model.covariance(), NoiseMoments::gaussian()).unwrap();
    assert_eq!(res.status, Status::Real);
    let e = res.estimates.unwrap();
    assert!((e.alpha1 - 0.1).abs() < 0.02, "{e:?}");
    assert!((e.l1 - 0.5).abs() < 0.08, "{e:?}");
    assert!((e.alpha0 - 1.0).abs() < 0.08, "{e:?}");
}

#[test]
fn complex_rate_falls_with_n() {
    let cfg = ExperimentConfig {
        sample_sizes: vec![100, 1_000, 10_000],
        replications: 100,
        master_seed: 3,
        ..Default::default()
    };
    let recs = run_replications(&cfg).unwrap();
    let rows = summarize(&recs, &cfg.noise).unwrap();
    let pct: Vec<f64> = rows.iter().map(|r| r.pct_complex).collect();
    assert!(pct.windows(2).all(|w| w[1] <= w[0]), "{pct:?}");
    assert_eq!(pct[2], 0.0);
}

#[test]
fn experiment_files_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for sub in ["one", "two"] {
        let cfg = ExperimentConfig {
            sample_sizes: vec![200],
            replications: 25,
            output_dir: dir.path().join(sub),
            ..Default::default()
        };
        run_experiment(&cfg).unwrap();
        bytes.push((
            std::fs::read(cfg.output_dir.join("raw.csv")).unwrap(),
            std::fs::read(cfg.output_dir.join("summary.csv")).unwrap(),
        ));
    }
    assert_eq!(bytes[0], bytes[1]);
    let hist = std::fs::read_to_string(dir.path().join("one/hist_alpha1_200.csv")).unwrap();
    let total: usize = hist
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    let raw = String::from_utf8(bytes[0].0.clone()).unwrap();
    let real = raw.lines().filter(|l| l.contains(",real,")).count();
    assert_eq!(total, real);
}
