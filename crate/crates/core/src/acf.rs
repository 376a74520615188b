//! Sample moments and autocovariances of the squared series.

use crate::error::{Error, Result};

/// Series at least this long are summed with Neumaier compensation.
pub const COMPENSATED_THRESHOLD: usize = 100_000;

/// Sample statistics of `X_1^2, ..., X_N^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfEstimates {
    pub n_obs: usize,
    /// `(1/N) sum X_t^2`
    pub mu_hat: f64,
    /// `(1/N) sum X_t^4`, uncentred.
    pub mu2_hat: f64,
    /// `gamma_hat[n]` for `n = 0..=max_lag`, divisor `N` at every lag.
    pub gamma_hat: Vec<f64>,
}

impl AcfEstimates {
    pub fn max_lag(&self) -> usize {
        self.gamma_hat.len() - 1
    }

    /// `gamma_hat(|lag|)`, or `None` past the estimated range.
    pub fn gamma(&self, lag: i64) -> Option<f64> {
        self.gamma_hat.get(lag.unsigned_abs() as usize).copied()
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

fn sum_iter<I: Iterator<Item = f64>>(it: I, compensated: bool) -> f64 {
    if compensated {
        let mut acc = Neumaier::default();
        it.for_each(|x| acc.add(x));
        acc.total()
    } else {
        it.sum()
    }
}

/// Two-pass estimate of the mean, raw fourth moment and autocovariances
/// `gamma_hat(n) = (1/N) sum_{t=1}^{N-n} (X_t^2 - mean)(X_{t+n}^2 - mean)`.
pub fn estimate_acf(x_squared: &[f64], max_lag: usize) -> Result<AcfEstimates> {
    let n = x_squared.len();
    if n < max_lag + 1 {
        return Err(Error::Dimension { len: n, max_lag });
    }
    let compensated = n >= COMPENSATED_THRESHOLD;
    let nf = n as f64;
    let mu_hat = sum_iter(x_squared.iter().copied(), compensated) / nf;
    let mu2_hat = sum_iter(x_squared.iter().map(|x| x * x), compensated) / nf;
    let centred: Vec<f64> = x_squared.iter().map(|x| x - mu_hat).collect();
    let gamma_hat = (0..=max_lag)
        .map(|lag| {
            sum_iter(
                centred[..n - lag]
                    .iter()
                    .zip(&centred[lag..])
                    .map(|(a, b)| a * b),
                compensated,
            ) / nf
        })
        .collect();
    Ok(AcfEstimates {
        n_obs: n,
        mu_hat,
        mu2_hat,
        gamma_hat,
    })
}
