//! Liquidity processes `L_t = (increment_t)^2` and their autocovariances.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fgn::{fgn_autocovariance, FgnConfig, FgnPlan};
use crate::poisson::PoissonSampler;
use crate::rng::{gaussian_vec, Purpose, SeedSpec};

/// A unit-mean, positive, strictly stationary liquidity process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LiquidityModel {
    /// Squared fractional Gaussian noise.
    FgnSquared { hurst: f64 },
    /// Squared compensated Poisson increments, scaled by `1/lambda` so that
    /// `E L = 1` for every intensity.
    CompensatedPoissonSquared { lambda: f64 },
    /// Squared i.i.d. standard normals.
    WhiteSquared,
}

impl LiquidityModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LiquidityModel::FgnSquared { hurst } => FgnConfig::new(hurst, 1).map(|_| ()),
            LiquidityModel::CompensatedPoissonSquared { lambda } => {
                PoissonSampler::new(lambda).map(|_| ())
            }
            LiquidityModel::WhiteSquared => Ok(()),
        }
    }

    pub fn covariance(&self) -> LiquidityCovariance {
        theoretical_covariance(*self)
    }
}

impl fmt::Display for LiquidityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiquidityModel::FgnSquared { hurst } => write!(f, "fgn:H={hurst}"),
            LiquidityModel::CompensatedPoissonSquared { lambda } => {
                write!(f, "poisson:lambda={lambda}")
            }
            LiquidityModel::WhiteSquared => f.write_str("white"),
        }
    }
}

/// Parses `fgn:H=0.333`, `poisson:lambda=1` and `white`.
impl FromStr for LiquidityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("unrecognised liquidity spec '{s}'"));
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s, None),
        };
        let value = |key: &str| -> Result<f64> {
            let arg = arg.ok_or_else(bad)?;
            let (k, v) = arg.split_once('=').ok_or_else(bad)?;
            if !k.trim().eq_ignore_ascii_case(key) {
                return Err(bad());
            }
            v.trim().parse::<f64>().map_err(|_| bad())
        };
        let model = match kind.to_ascii_lowercase().as_str() {
            "fgn" | "fbm" => LiquidityModel::FgnSquared { hurst: value("h")? },
            "poisson" => LiquidityModel::CompensatedPoissonSquared {
                lambda: value("lambda")?,
            },
            "white" if arg.is_none() => LiquidityModel::WhiteSquared,
            _ => return Err(bad()),
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum CovShape {
    Fgn {
        hurst: f64,
    },
    /// Zero off lag 0.
    Uncorrelated,
    /// Explicit `s(0), s(1), ...`; zero beyond the table.
    Table(Vec<f64>),
}

/// Autocovariance `s(n) = Cov(L_0, L_n)` of a liquidity process, with
/// `f(n) = E(L_0 L_n) = s(n) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiquidityCovariance {
    s0: f64,
    shape: CovShape,
}

impl LiquidityCovariance {
    /// Covariance given by an explicit table `s(0), s(1), ..., s(k)`,
    /// with `s(n) = 0` for `n > k`.
    pub fn from_table(values: Vec<f64>) -> Result<Self> {
        let s0 = *values
            .first()
            .ok_or_else(|| Error::Covariance("empty covariance table".into()))?;
        if !(s0 >= 0.0) || values.iter().any(|v| v.abs() > s0 || !v.is_finite()) {
            return Err(Error::Covariance(
                "table must satisfy s(0) >= 0 and |s(n)| <= s(0)".into(),
            ));
        }
        Ok(Self {
            s0,
            shape: CovShape::Table(values),
        })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn s(&self, lag: i64) -> f64 {
        if lag == 0 {
            return self.s0;
        }
        match &self.shape {
            CovShape::Fgn { hurst } => 2.0 * fgn_autocovariance(*hurst, lag).powi(2),
            CovShape::Uncorrelated => 0.0,
            CovShape::Table(t) => t.get(lag.unsigned_abs() as usize).copied().unwrap_or(0.0),
        }
    }

    pub fn f(&self, lag: i64) -> f64 {
        self.s(lag) + 1.0
    }

    /// True when `s(n) = 0` for every `n != 0`.
    pub fn is_uncorrelated(&self) -> bool {
        match &self.shape {
            CovShape::Uncorrelated => true,
            CovShape::Fgn { hurst } => *hurst == 0.5,
            CovShape::Table(t) => t.iter().skip(1).all(|&v| v == 0.0),
        }
    }
}

/// Theoretical autocovariance of the liquidity model.
pub fn theoretical_covariance(model: LiquidityModel) -> LiquidityCovariance {
    match model {
        // Var(Z^2) = 2 and Cov(Z_0^2, Z_n^2) = 2 r_H(n)^2 for unit Gaussians
        LiquidityModel::FgnSquared { hurst } => LiquidityCovariance {
            s0: 2.0,
            shape: CovShape::Fgn { hurst },
        },
        // E(N - lambda)^4 = lambda + 3 lambda^2, rescaled by 1/lambda^2
        LiquidityModel::CompensatedPoissonSquared { lambda } => LiquidityCovariance {
            s0: (lambda + 3.0 * lambda * lambda) / (lambda * lambda) - 1.0,
            shape: CovShape::Uncorrelated,
        },
        LiquidityModel::WhiteSquared => LiquidityCovariance {
            s0: 2.0,
            shape: CovShape::Uncorrelated,
        },
    }
}

/// A liquidity sampler prepared for one path length. Holds the fGn plan so
/// repeated draws of the same length skip the eigen-decomposition.
#[derive(Debug, Clone)]
pub struct LiquiditySampler {
    length: usize,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Fgn(FgnPlan),
    Poisson(PoissonSampler),
    White,
}

impl LiquiditySampler {
    pub fn new(model: LiquidityModel, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidArgument(
                "liquidity length must be at least 1".into(),
            ));
        }
        let kind = match model {
            LiquidityModel::FgnSquared { hurst } => {
                SamplerKind::Fgn(FgnPlan::new(FgnConfig::new(hurst, length)?)?)
            }
            LiquidityModel::CompensatedPoissonSquared { lambda } => {
                SamplerKind::Poisson(PoissonSampler::new(lambda)?)
            }
            LiquidityModel::WhiteSquared => SamplerKind::White,
        };
        Ok(Self { length, kind })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            SamplerKind::Fgn(plan) => plan.sample(rng).into_iter().map(|x| x * x).collect(),
            SamplerKind::Poisson(p) => {
                let lambda = p.lambda();
                (0..self.length)
                    .map(|_| p.sample_increment(rng).powi(2) / lambda)
                    .collect()
            }
            SamplerKind::White => gaussian_vec(rng, self.length)
                .into_iter()
                .map(|x| x * x)
                .collect(),
        }
    }
}

/// `n` liquidity values `L_0, ..., L_{n-1}` for the given seed.
pub fn sample_liquidity(model: LiquidityModel, seed: SeedSpec, n: usize) -> Result<Vec<f64>> {
    let sampler = LiquiditySampler::new(model, n)?;
    Ok(sampler.sample(&mut seed.rng(Purpose::Liquidity)))
}

/// `E(X_1^2 X_2^2 X_3^2)` for centred unit-variance jointly Gaussian
/// variables with the given pairwise correlations (Isserlis).
pub fn gaussian_triple_moment(rho12: f64, rho13: f64, rho23: f64) -> f64 {
    1.0 + 2.0 * (rho12 * rho12 + rho13 * rho13 + rho23 * rho23) + 8.0 * rho12 * rho13 * rho23
}
