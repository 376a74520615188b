//! Shared helpers for the integration tests: exact population moments of
//! the squared process, computed independently of the library code.
#![allow(dead_code)]

use archliq::liquidity::LiquidityModel;
use archliq::sim::ModelParams;

/// Unit-variance fGn autocovariance at integer lag `k`.
pub fn fgn_r(hurst: f64, k: i64) -> f64 {
    let k = k.abs() as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(h2) + (k - 1.0).abs().powf(h2) - 2.0 * k.powf(h2))
}

/// Mean and standard error from independent batch statistics.
pub fn batch_mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// `Cov(L_t, L_{t+n})`, from scratch.
pub fn liquidity_cov(model: LiquidityModel, n: i64) -> f64 {
    let n = n.abs();
    match model {
        LiquidityModel::FgnSquared { hurst } => {
            let k = n as f64;
            let h2 = 2.0 * hurst;
            let r = if n == 0 {
                1.0
            } else {
                0.5 * ((k + 1.0).powf(h2) + (k - 1.0).powf(h2) - 2.0 * k.powf(h2))
            };
            2.0 * r * r
        }
        LiquidityModel::CompensatedPoissonSquared { lambda } => {
            if n == 0 {
                // E (N - lambda)^4 = lambda + 3 lambda^2, scaled by 1/lambda^2
                (lambda + 3.0 * lambda * lambda) / (lambda * lambda) - 1.0
            } else {
                0.0
            }
        }
        LiquidityModel::WhiteSquared => {
            if n == 0 {
                2.0
            } else {
                0.0
            }
        }
    }
}

/// Exact moments of a stationary `X_t^2` with Gaussian innovations.
#[derive(Debug, Clone)]
pub struct ExactMoments {
    pub mu: f64,
    pub mu2: f64,
    pub gamma: Vec<f64>,
}

/// `X_t^2 - mu` is AR(1) in `alpha1` driven by a noise `Z` with
/// `Cov(Z_t, Z_{t+n}) = r(n)`, so
/// `gamma(n) = sum_d alpha1^|d| / (1 - alpha1^2) r(n + d)`.
pub fn exact_moments(p: ModelParams, model: LiquidityModel, max_lag: usize) -> ExactMoments {
    let (a0, a, l) = (p.alpha0, p.alpha1, p.l1);
    let (e4, var_eps_sq) = (3.0, 2.0);
    let s = |n: i64| liquidity_cov(model, n);
    let f = |n: i64| s(n) + 1.0;
    let mu = (a0 + l) / (1.0 - a);
    let depth = 400i64;
    // E(sigma_t^2 L_t)
    let c0 = a0 / (1.0 - a)
        + l * (0..depth)
            .map(|i| a.powi(i as i32) * f(-i - 1))
            .sum::<f64>();
    let e_sigma4 =
        (a0 * a0 + l * l * (s(0) + 1.0) + 2.0 * a0 * a * mu + 2.0 * a0 * l + 2.0 * a * l * c0)
            / (1.0 - a * a * e4);
    let r = |n: i64| {
        if n == 0 {
            e_sigma4 * var_eps_sq + l * l * s(0)
        } else {
            l * l * s(n)
        }
    };
    let gamma = (0..=max_lag as i64)
        .map(|n| {
            (-depth..=depth)
                .map(|d| a.powi(d.unsigned_abs() as i32) * r(n + d))
                .sum::<f64>()
                / (1.0 - a * a)
        })
        .collect();
    ExactMoments {
        mu,
        mu2: e4 * e_sigma4,
        gamma,
    }
}
