//! Fractional Gaussian noise: unit-spaced increments of fractional Brownian
//! motion.
//!
//! The default synthesis is circulant embedding (Davies-Harte / Dietrich-Newsam):
//! the Toeplitz covariance of the requested length is embedded in a circulant
//! of size `2^ceil(log2(2 (len - 1)))`, diagonalised by one FFT, and a second
//! FFT of the eigenvalue-weighted complex white noise yields an exact draw.
//! Should the embedding have eigenvalues below `-1e-9` the plan falls back to a
//! Cholesky factor of the Toeplitz matrix.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::rng::{Purpose, SeedSpec};

/// Eigenvalues below this are treated as a failed embedding.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgnConfig {
    pub hurst: f64,
    pub length: usize,
}

impl FgnConfig {
    pub fn new(hurst: f64, length: usize) -> Result<Self> {
        let cfg = Self { hurst, length };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Hurst parameter {} outside (0, 1)",
                self.hurst
            )));
        }
        if self.length == 0 {
            return Err(Error::InvalidArgument(
                "fGn length must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Autocovariance of unit-variance fGn at integer lag `k`:
/// `r_H(k) = ((|k|+1)^{2H} + (|k|-1)^{2H} - 2|k|^{2H}) / 2`.
pub fn fgn_autocovariance(hurst: f64, lag: i64) -> f64 {
    let k = lag.unsigned_abs() as f64;
    if k == 0.0 {
        return 1.0;
    }
    let two_h = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(two_h) + (k - 1.0).powf(two_h) - 2.0 * k.powf(two_h))
}

#[derive(Clone)]
enum Method {
    Circulant {
        size: usize,
        /// `sqrt(lambda_k / size)` after clamping tiny negatives to zero.
        weights: Vec<f64>,
        /// Clamped eigenvalues, retained for covariance introspection.
        eigenvalues: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky {
        /// Row-major packed lower-triangular factor.
        lower: Vec<f64>,
    },
}

/// Which synthesis route a plan uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FgnMethod {
    Circulant,
    Cholesky,
}

/// Precomputed sampler for one `(hurst, length)` pair. Cheap to clone and
/// safe to share between threads.
#[derive(Clone)]
pub struct FgnPlan {
    cfg: FgnConfig,
    method: Method,
}

impl fmt::Debug for FgnPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FgnPlan")
            .field("cfg", &self.cfg)
            .field("method", &self.method())
            .finish()
    }
}

fn embedding_size(length: usize) -> usize {
    (2 * length.saturating_sub(1)).next_power_of_two().max(2)
}

fn packed(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

impl FgnPlan {
    /// Circulant embedding, falling back to Cholesky when the embedding is not
    /// nonnegative definite.
    pub fn new(cfg: FgnConfig) -> Result<Self> {
        cfg.validate()?;
        match Self::circulant(cfg) {
            Ok(plan) => Ok(plan),
            Err(embedding) => {
                log::debug!("circulant embedding rejected ({embedding}); using Cholesky");
                Self::cholesky(cfg).map_err(|cholesky| Error::Generation {
                    embedding,
                    cholesky,
                })
            }
        }
    }

    /// Circulant embedding only. The error string describes why the
    /// embedding was rejected.
    pub fn circulant(cfg: FgnConfig) -> std::result::Result<Self, String> {
        cfg.validate().map_err(|e| e.to_string())?;
        let size = embedding_size(cfg.length);
        let half = size / 2;
        let mut row: Vec<Complex<f64>> = (0..size)
            .map(|k| {
                let lag = if k <= half { k } else { size - k };
                Complex::new(fgn_autocovariance(cfg.hurst, lag as i64), 0.0)
            })
            .collect();
        let fft = FftPlanner::<f64>::new().plan_fft_forward(size);
        fft.process(&mut row);

        let mut eigenvalues = Vec::with_capacity(size);
        for (k, z) in row.iter().enumerate() {
            let lambda = z.re;
            if lambda < -EIGENVALUE_TOLERANCE {
                return Err(format!(
                    "eigenvalue {lambda:.3e} at index {k} of a size-{size} embedding"
                ));
            }
            eigenvalues.push(lambda.max(0.0));
        }
        let weights = eigenvalues
            .iter()
            .map(|l| (l / size as f64).sqrt())
            .collect();
        Ok(Self {
            cfg,
            method: Method::Circulant {
                size,
                weights,
                eigenvalues,
                fft,
            },
        })
    }

    /// Cholesky factorisation of the Toeplitz covariance. O(len^3); intended
    /// for short sequences and as the fallback route.
    pub fn cholesky(cfg: FgnConfig) -> std::result::Result<Self, String> {
        cfg.validate().map_err(|e| e.to_string())?;
        let n = cfg.length;
        let r: Vec<f64> = (0..n)
            .map(|k| fgn_autocovariance(cfg.hurst, k as i64))
            .collect();
        let mut lower = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = r[i - j];
                for k in 0..j {
                    sum -= lower[packed(i, k)] * lower[packed(j, k)];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(format!(
                            "covariance not positive definite: pivot {sum:.3e} at row {i}"
                        ));
                    }
                    lower[packed(i, i)] = sum.sqrt();
                } else {
                    lower[packed(i, j)] = sum / lower[packed(j, j)];
                }
            }
        }
        Ok(Self {
            cfg,
            method: Method::Cholesky { lower },
        })
    }

    pub fn config(&self) -> FgnConfig {
        self.cfg
    }

    pub fn method(&self) -> FgnMethod {
        match self.method {
            Method::Circulant { .. } => FgnMethod::Circulant,
            Method::Cholesky { .. } => FgnMethod::Cholesky,
        }
    }

    /// Draw one fGn sequence of the configured length.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let len = self.cfg.length;
        match &self.method {
            Method::Circulant {
                size, weights, fft, ..
            } => {
                let mut buf: Vec<Complex<f64>> = weights
                    .iter()
                    .map(|w| {
                        let re: f64 = StandardNormal.sample(rng);
                        let im: f64 = StandardNormal.sample(rng);
                        Complex::new(w * re, w * im)
                    })
                    .collect();
                debug_assert_eq!(buf.len(), *size);
                fft.process(&mut buf);
                buf[..len].iter().map(|z| z.re).collect()
            }
            Method::Cholesky { lower } => {
                let z: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
                (0..len)
                    .map(|i| {
                        let row = &lower[packed(i, 0)..=packed(i, i)];
                        row.iter().zip(&z).map(|(l, z)| l * z).sum()
                    })
                    .collect()
            }
        }
    }

    /// The exact covariance matrix of the sequences this plan produces,
    /// reconstructed from its internal representation (inverse transform of
    /// the clamped eigenvalues, or `L L^T`).
    pub fn implied_covariance(&self) -> Vec<Vec<f64>> {
        let len = self.cfg.length;
        match &self.method {
            Method::Circulant {
                size, eigenvalues, ..
            } => {
                let mut buf: Vec<Complex<f64>> =
                    eigenvalues.iter().map(|&l| Complex::new(l, 0.0)).collect();
                FftPlanner::<f64>::new()
                    .plan_fft_inverse(*size)
                    .process(&mut buf);
                let row: Vec<f64> = buf.iter().map(|z| z.re / *size as f64).collect();
                (0..len)
                    .map(|i| (0..len).map(|j| row[i.abs_diff(j)]).collect())
                    .collect()
            }
            Method::Cholesky { lower } => (0..len)
                .map(|i| {
                    (0..len)
                        .map(|j| {
                            (0..=i.min(j))
                                .map(|k| lower[packed(i, k)] * lower[packed(j, k)])
                                .sum()
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// One fGn sequence for the given seed. Builds a fresh plan; callers drawing
/// many sequences of the same length should hold on to an [`FgnPlan`].
pub fn sample_fgn(seed: SeedSpec, cfg: FgnConfig) -> Result<Vec<f64>> {
    let plan = FgnPlan::new(cfg)?;
    Ok(plan.sample(&mut seed.rng(Purpose::Liquidity)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag_autocov(xs: &[f64], lag: usize) -> f64 {
        let n = xs.len();
        let m = xs.iter().sum::<f64>() / n as f64;
        (0..n - lag)
            .map(|t| (xs[t] - m) * (xs[t + lag] - m))
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn autocovariance_formula() {
        for k in 1..20 {
            assert!(fgn_autocovariance(0.5, k).abs() < 1e-15);
        }
        // H = 1 boundary: (4 + 0 - 2) / 2
        assert_eq!(fgn_autocovariance(1.0, 1), 1.0);
        assert_eq!(fgn_autocovariance(0.3, 0), 1.0);
        assert_eq!(fgn_autocovariance(0.3, -4), fgn_autocovariance(0.3, 4));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(FgnConfig::new(0.0, 10).is_err());
        assert!(FgnConfig::new(1.0, 10).is_err());
        assert!(FgnConfig::new(0.5, 0).is_err());
        assert!(FgnConfig::new(0.5, 1).is_ok());
    }

    #[test]
    fn embedding_sizes() {
        assert_eq!(embedding_size(1), 2);
        assert_eq!(embedding_size(2), 2);
        assert_eq!(embedding_size(3), 4);
        assert_eq!(embedding_size(100), 256);
        assert_eq!(embedding_size(129), 256);
        assert_eq!(embedding_size(130), 512);
    }

    #[test]
    fn both_methods_reproduce_toeplitz() {
        for &h in &[0.3, 0.5, 0.7] {
            for len in [1usize, 2, 3, 7, 16, 33, 64] {
                let cfg = FgnConfig::new(h, len).unwrap();
                for plan in [
                    FgnPlan::circulant(cfg).unwrap(),
                    FgnPlan::cholesky(cfg).unwrap(),
                ] {
                    let cov = plan.implied_covariance();
                    for i in 0..len {
                        for j in 0..len {
                            let want = fgn_autocovariance(h, i as i64 - j as i64);
                            assert!(
                                (cov[i][j] - want).abs() < 1e-10,
                                "{:?} H={h} len={len} ({i},{j})",
                                plan.method()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn default_plan_is_circulant() {
        let plan = FgnPlan::new(FgnConfig::new(0.8, 1000).unwrap()).unwrap();
        assert_eq!(plan.method(), FgnMethod::Circulant);
    }

    #[test]
    fn lag_one_hurst_third() {
        let cfg = FgnConfig::new(1.0 / 3.0, 1 << 14).unwrap();
        let xs = sample_fgn(SeedSpec::new(42, 0), cfg).unwrap();
        assert_eq!(xs.len(), 1 << 14);
        let want = fgn_autocovariance(1.0 / 3.0, 1);
        let got = lag_autocov(&xs, 1);
        assert!((got - want).abs() < 0.03, "{got} vs {want}");
    }

    #[test]
    fn white_at_half() {
        let cfg = FgnConfig::new(0.5, 1 << 15).unwrap();
        let xs = sample_fgn(SeedSpec::new(3, 9), cfg).unwrap();
        for lag in 1..4 {
            assert!(lag_autocov(&xs, lag).abs() < 0.03);
        }
    }

    #[test]
    fn cholesky_samples_have_right_variance() {
        let cfg = FgnConfig::new(0.7, 8).unwrap();
        let plan = FgnPlan::cholesky(cfg).unwrap();
        let mut rng = SeedSpec::new(1, 1).rng(Purpose::Liquidity);
        let reps = 40_000;
        let mut acc = [0.0f64; 2];
        for _ in 0..reps {
            let x = plan.sample(&mut rng);
            acc[0] += x[0] * x[0];
            acc[1] += x[3] * x[4];
        }
        assert!((acc[0] / reps as f64 - 1.0).abs() < 0.03);
        let r1 = fgn_autocovariance(0.7, 1);
        assert!((acc[1] / reps as f64 - r1).abs() < 0.03);
    }

    #[test]
    fn deterministic_replay() {
        let cfg = FgnConfig::new(0.25, 500).unwrap();
        let s = SeedSpec::new(77, 2);
        assert_eq!(sample_fgn(s, cfg).unwrap(), sample_fgn(s, cfg).unwrap());
    }
}
