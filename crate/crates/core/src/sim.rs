//! Simulation of the ARCH model with liquidity
//!
//! ```text
//! X_t = sigma_t eps_t,   sigma_t^2 = alpha0 + alpha1 X_{t-1}^2 + l1 L_{t-1}
//! ```
//!
//! either forward from an initial `X_0^2` (the recursion
//! `sigma_{t+1}^2 = A_t sigma_t^2 + B_t` with `A_t = alpha1 eps_t^2`,
//! `B_t = alpha0 + l1 L_t`), or directly from the truncated stationary series
//! `sigma_{t+1}^2 = sum_{i=0}^{K} (prod_{j<i} A_{t-j}) B_{t-i}`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::liquidity::{LiquidityCovariance, LiquidityModel, LiquiditySampler};
use crate::rng::{gaussian_vec, Purpose, SeedSpec};

/// Any `sigma^2` above this aborts the path.
pub const OVERFLOW_LIMIT: f64 = 1e300;
/// Relative tail tolerance for truncated geometric series.
pub const SERIES_TOLERANCE: f64 = 1e-12;
pub const MIN_TRUNCATION: usize = 64;
pub const MAX_TRUNCATION: usize = 1_000_000;

/// `(alpha0, alpha1, l1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha0: f64,
    pub alpha1: f64,
    pub l1: f64,
}

impl ModelParams {
    pub fn new(alpha0: f64, alpha1: f64, l1: f64) -> Result<Self> {
        let p = Self { alpha0, alpha1, l1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 >= 0.0 && self.alpha0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "alpha0 = {} must be >= 0",
                self.alpha0
            )));
        }
        if !(self.alpha1 > 0.0 && self.alpha1.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "alpha1 = {} must be > 0",
                self.alpha1
            )));
        }
        if !(self.l1 > 0.0 && self.l1.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "l1 = {} must be > 0",
                self.l1
            )));
        }
        Ok(())
    }

    fn require_stationary(&self) -> Result<()> {
        if self.alpha1 < 1.0 {
            Ok(())
        } else {
            Err(Error::Regime {
                bound: "stationarity",
                alpha1: self.alpha1,
                threshold: 1.0,
            })
        }
    }
}

/// Moments of the innovation `eps` entering the estimators and regime checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMoments {
    pub e4: f64,
    pub e6: f64,
    pub e8: f64,
    pub var_eps_sq: f64,
}

impl NoiseMoments {
    pub fn gaussian() -> Self {
        Self {
            e4: 3.0,
            e6: 15.0,
            e8: 105.0,
            var_eps_sq: 2.0,
        }
    }

    /// Moments of a unit-variance innovation; checks the Lyapunov chain
    /// `1 <= e4^(1/2) <= e6^(1/3) <= e8^(1/4)`.
    pub fn new(e4: f64, e6: f64, e8: f64) -> Result<Self> {
        let chain = [1.0, e4.sqrt(), e6.cbrt(), e8.powf(0.25)];
        let tol = 1e-12;
        if chain.iter().any(|v| !v.is_finite()) || chain.windows(2).any(|w| w[1] < w[0] - tol) {
            return Err(Error::InvalidArgument(format!(
                "noise moments e4={e4}, e6={e6}, e8={e8} violate 1 <= e4^1/2 <= e6^1/3 <= e8^1/4"
            )));
        }
        Ok(Self {
            e4,
            e6,
            e8,
            var_eps_sq: e4 - 1.0,
        })
    }

    /// `Var(eps^2) / E(eps^4)`; 2/3 for Gaussian innovations.
    pub fn kurtosis_ratio(&self) -> f64 {
        self.var_eps_sq / self.e4
    }

    pub fn fourth_moment_threshold(&self) -> f64 {
        1.0 / self.e4.sqrt()
    }

    pub fn consistency_threshold(&self) -> f64 {
        1.0 / self.e8.powf(0.25)
    }
}

/// Which moment condition a caller needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimePurpose {
    Stationary,
    FourthMoment,
    Consistency,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub stationary: bool,
    pub fourth_moment: bool,
    pub consistency: bool,
    pub fourth_moment_threshold: f64,
    pub consistency_threshold: f64,
}

/// Check `alpha1` against `1`, `e4^(-1/2)` and `e8^(-1/4)`; fail if the bound
/// needed for `purpose` does not hold.
pub fn validate_regime(
    params: &ModelParams,
    moments: &NoiseMoments,
    purpose: RegimePurpose,
) -> Result<RegimeReport> {
    let a = params.alpha1;
    let report = RegimeReport {
        stationary: a < 1.0,
        fourth_moment: a < moments.fourth_moment_threshold(),
        consistency: a < moments.consistency_threshold(),
        fourth_moment_threshold: moments.fourth_moment_threshold(),
        consistency_threshold: moments.consistency_threshold(),
    };
    let (ok, bound, threshold) = match purpose {
        RegimePurpose::Stationary => (report.stationary, "stationarity", 1.0),
        RegimePurpose::FourthMoment => (
            report.fourth_moment,
            "fourth-moment",
            report.fourth_moment_threshold,
        ),
        RegimePurpose::Consistency => (
            report.consistency,
            "consistency",
            report.consistency_threshold,
        ),
    };
    if ok {
        Ok(report)
    } else {
        Err(Error::Regime {
            bound,
            alpha1: a,
            threshold,
        })
    }
}

/// A simulated path. Index `t` of every vector refers to the same time point;
/// `liquidity[t]` is the `L_t` that feeds `sigma_{t+1}^2`.
///
/// When the path starts at the initial condition (recursive simulation without
/// burn-in), point 0 carries `x_squared[0] = sigma_squared[0] = init` and
/// `eps_squared[0] = 1`.
#[derive(Debug, Clone)]
pub struct SamplePath {
    pub x_squared: Vec<f64>,
    pub sigma_squared: Vec<f64>,
    pub eps_squared: Vec<f64>,
    pub liquidity: Vec<f64>,
    pub params: ModelParams,
    pub seed: SeedSpec,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.x_squared.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_squared.is_empty()
    }
}

fn check_sigma2(index: usize, value: f64) -> Result<()> {
    if value.is_finite() && value <= OVERFLOW_LIMIT {
        Ok(())
    } else {
        Err(Error::Simulation { index, value })
    }
}

/// Forward recursion on explicit noise buffers.
///
/// Point 0 is `init_x_squared`; for `t >= 1`,
/// `sigma_t^2 = alpha0 + alpha1 X_{t-1}^2 + l1 L_{t-1}` and
/// `X_t^2 = sigma_t^2 eps_t^2`. `eps_squared[0]` is ignored and
/// `liquidity` needs at least `eps_squared.len() - 1` entries.
/// Returns `(x_squared, sigma_squared)`.
pub fn run_recursion(
    params: &ModelParams,
    init_x_squared: f64,
    eps_squared: &[f64],
    liquidity: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = eps_squared.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty innovation buffer".into()));
    }
    if liquidity.len() + 1 < n {
        return Err(Error::InvalidArgument(format!(
            "liquidity buffer of length {} too short for {n} points",
            liquidity.len()
        )));
    }
    let mut x2 = Vec::with_capacity(n);
    let mut s2 = Vec::with_capacity(n);
    x2.push(init_x_squared);
    s2.push(init_x_squared);
    for t in 1..n {
        let sigma2 = params.alpha0 + params.alpha1 * x2[t - 1] + params.l1 * liquidity[t - 1];
        check_sigma2(t, sigma2)?;
        s2.push(sigma2);
        x2.push(sigma2 * eps_squared[t]);
    }
    Ok((x2, s2))
}

/// Truncated stationary series on explicit buffers of equal length `n + K + 1`.
/// Returns `sigma^2` at buffer indices `K + 1 ..= n + K`.
pub fn stationary_series(
    params: &ModelParams,
    eps_squared: &[f64],
    liquidity: &[f64],
    truncation: usize,
) -> Result<Vec<f64>> {
    let len = eps_squared.len().min(liquidity.len());
    if len < truncation + 2 {
        return Err(Error::InvalidArgument(format!(
            "buffers of length {len} too short for truncation {truncation}"
        )));
    }
    let a = |t: usize| params.alpha1 * eps_squared[t];
    let b = |t: usize| params.alpha0 + params.l1 * liquidity[t];
    (truncation..len - 1)
        .map(|t| {
            let mut acc = b(t - truncation);
            for i in (0..truncation).rev() {
                acc = b(t - i) + a(t - i) * acc;
            }
            check_sigma2(t + 1, acc)?;
            Ok(acc)
        })
        .collect()
}

/// Smallest truncation whose expected tail is below [`SERIES_TOLERANCE`],
/// both absolutely and relative to the mean, clamped to
/// `[MIN_TRUNCATION, MAX_TRUNCATION]`.
pub fn auto_truncation(params: &ModelParams) -> usize {
    let a = params.alpha1;
    if a <= 0.0 {
        return MIN_TRUNCATION;
    }
    if a >= 1.0 {
        return MAX_TRUNCATION;
    }
    let scale = (params.alpha0 + params.l1).max(f64::MIN_POSITIVE);
    let absolute = (SERIES_TOLERANCE * (1.0 - a) / scale).ln() / a.ln();
    let relative = SERIES_TOLERANCE.ln() / a.ln() - 1.0;
    let k = absolute.max(relative).ceil();
    (k.max(0.0) as usize).clamp(MIN_TRUNCATION, MAX_TRUNCATION)
}

fn check_truncation(params: &ModelParams, truncation: usize) -> Result<()> {
    if truncation == 0 {
        return Err(Error::Config("truncation must be at least 1".into()));
    }
    let tail = params.alpha1.powf(truncation as f64 + 1.0);
    if tail > SERIES_TOLERANCE {
        return Err(Error::Config(format!(
            "truncation {truncation} leaves a relative tail of {tail:.3e} (> {SERIES_TOLERANCE:e}); \
             use at least {}",
            auto_truncation(params)
        )));
    }
    Ok(())
}

/// Prepared simulator for a fixed model, liquidity and buffer length.
/// Construction builds the liquidity sampler once; simulating is then a pure
/// function of the seed.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: ModelParams,
    sampler: LiquiditySampler,
}

impl Simulator {
    pub fn new(params: ModelParams, liquidity: LiquidityModel, buffer_len: usize) -> Result<Self> {
        params.validate()?;
        params.require_stationary()?;
        Ok(Self {
            params,
            sampler: LiquiditySampler::new(liquidity, buffer_len)?,
        })
    }

    pub fn buffer_len(&self) -> usize {
        self.sampler.length()
    }

    fn buffers(&self, seed: SeedSpec) -> (Vec<f64>, Vec<f64>) {
        let len = self.sampler.length();
        let eps_sq = squared_innovations(&mut seed.rng(Purpose::Innovations), len);
        let liq = self.sampler.sample(&mut seed.rng(Purpose::Liquidity));
        (eps_sq, liq)
    }

    /// Recursive simulation; the buffer length must equal `burn_in + n`.
    pub fn recursive(
        &self,
        seed: SeedSpec,
        n: usize,
        init_x_squared: f64,
        burn_in: usize,
    ) -> Result<SamplePath> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(init_x_squared >= 0.0 && init_x_squared.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "initial X^2 = {init_x_squared} must be finite and >= 0"
            )));
        }
        if self.buffer_len() != n + burn_in {
            return Err(Error::InvalidArgument(format!(
                "simulator prepared for {} points, asked for {}",
                self.buffer_len(),
                n + burn_in
            )));
        }
        let (mut eps_sq, mut liq) = self.buffers(seed);
        eps_sq[0] = 1.0;
        let (mut x2, mut s2) = run_recursion(&self.params, init_x_squared, &eps_sq, &liq)?;
        for v in [&mut x2, &mut s2, &mut eps_sq, &mut liq] {
            v.drain(..burn_in);
        }
        Ok(SamplePath {
            x_squared: x2,
            sigma_squared: s2,
            eps_squared: eps_sq,
            liquidity: liq,
            params: self.params,
            seed,
        })
    }

    /// Truncated-series simulation; the buffer length must equal
    /// `n + truncation + 1`.
    pub fn stationary(&self, seed: SeedSpec, n: usize, truncation: usize) -> Result<SamplePath> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        check_truncation(&self.params, truncation)?;
        if self.buffer_len() != n + truncation + 1 {
            return Err(Error::InvalidArgument(format!(
                "simulator prepared for {} buffer entries, need {}",
                self.buffer_len(),
                n + truncation + 1
            )));
        }
        let (eps_sq, liq) = self.buffers(seed);
        let s2 = stationary_series(&self.params, &eps_sq, &liq, truncation)?;
        let start = truncation + 1;
        let x2 = s2
            .iter()
            .zip(&eps_sq[start..])
            .map(|(s, e)| s * e)
            .collect();
        Ok(SamplePath {
            x_squared: x2,
            sigma_squared: s2,
            eps_squared: eps_sq[start..].to_vec(),
            liquidity: liq[start..].to_vec(),
            params: self.params,
            seed,
        })
    }
}

pub(crate) fn squared_innovations<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    gaussian_vec(rng, n).into_iter().map(|e| e * e).collect()
}

/// Simulate by forward recursion from `init_x_squared`, discarding the first
/// `burn_in` points. With `burn_in = 0` the returned path starts with the
/// initial value itself.
pub fn simulate_recursive(
    params: ModelParams,
    liquidity: LiquidityModel,
    seed: SeedSpec,
    n: usize,
    init_x_squared: f64,
    burn_in: usize,
) -> Result<SamplePath> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Simulator::new(params, liquidity, n + burn_in)?.recursive(seed, n, init_x_squared, burn_in)
}

/// Simulate `n` points from the truncated stationary series. `None` picks
/// [`auto_truncation`].
pub fn simulate_stationary_series(
    params: ModelParams,
    liquidity: LiquidityModel,
    seed: SeedSpec,
    n: usize,
    truncation: Option<usize>,
) -> Result<SamplePath> {
    params.validate()?;
    params.require_stationary()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let k = truncation.unwrap_or_else(|| auto_truncation(&params));
    check_truncation(&params, k)?;
    Simulator::new(params, liquidity, n + k + 1)?.stationary(seed, n, k)
}

/// `E(X^2) = (alpha0 + l1) / (1 - alpha1)`.
pub fn theoretical_mean_x_squared(params: &ModelParams) -> Result<f64> {
    params.require_stationary()?;
    Ok((params.alpha0 + params.l1) / (1.0 - params.alpha1))
}

/// `E(sigma_t^2 L_s) = alpha0/(1-alpha1) + l1 sum_i alpha1^i f(t - s - i - 1)`.
/// `None` sizes the truncation so the neglected tail is below 1e-12.
pub fn theoretical_sigma2_liquidity_cross_moment(
    params: &ModelParams,
    cov: &LiquidityCovariance,
    t_minus_s: i64,
    truncation: Option<usize>,
) -> Result<f64> {
    params.require_stationary()?;
    let a = params.alpha1;
    let k = truncation.unwrap_or_else(|| {
        // tail <= l1 (s0 + 1) a^(K+1) / (1 - a)
        let bound = (params.l1 * (cov.s0() + 1.0) / (1.0 - a)).max(f64::MIN_POSITIVE);
        if a <= 0.0 {
            1
        } else {
            let k = ((SERIES_TOLERANCE / bound).ln() / a.ln()).ceil();
            (k.max(1.0) as usize).min(MAX_TRUNCATION)
        }
    });
    let mut sum = 0.0;
    let mut w = 1.0;
    for i in 0..=k {
        sum += w * cov.f(t_minus_s - i as i64 - 1);
        w *= a;
    }
    Ok(params.alpha0 / (1.0 - a) + params.l1 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_params() -> ModelParams {
        ModelParams::new(1.0, 0.1, 0.5).unwrap()
    }

    fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (
            m,
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt(),
        )
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 0.1, 0.5).is_ok());
        assert!(ModelParams::new(-0.1, 0.1, 0.5).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.5).is_err());
        assert!(ModelParams::new(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn noise_moment_chain() {
        let g = NoiseMoments::gaussian();
        assert_eq!(NoiseMoments::new(3.0, 15.0, 105.0).unwrap(), g);
        assert!((g.kurtosis_ratio() - 2.0 / 3.0).abs() < 1e-15);
        assert!(NoiseMoments::new(0.5, 15.0, 105.0).is_err());
        assert!(NoiseMoments::new(3.0, 4.0, 105.0).is_err());
    }

    #[test]
    fn regime_thresholds() {
        let g = NoiseMoments::gaussian();
        let r = validate_regime(
            &ModelParams::new(1.0, 0.1, 0.5).unwrap(),
            &g,
            RegimePurpose::Consistency,
        )
        .unwrap();
        assert!(r.stationary && r.fourth_moment && r.consistency);
        assert!((r.consistency_threshold - 0.3124).abs() < 1e-4);

        let p = ModelParams::new(1.0, 0.5, 0.5).unwrap();
        let r = validate_regime(&p, &g, RegimePurpose::FourthMoment).unwrap();
        assert!(r.stationary && r.fourth_moment && !r.consistency);
        let err = validate_regime(&p, &g, RegimePurpose::Consistency).unwrap_err();
        assert!(err.to_string().contains("consistency"), "{err}");

        let p = ModelParams::new(1.0, 0.99, 0.5).unwrap();
        let r = validate_regime(&p, &g, RegimePurpose::Stationary).unwrap();
        assert!(r.stationary && !r.fourth_moment && !r.consistency);
        assert!(validate_regime(&p, &g, RegimePurpose::FourthMoment).is_err());
    }

    #[test]
    fn first_step_matches_substitution() {
        let p = default_params();
        let path = simulate_recursive(
            p,
            LiquidityModel::FgnSquared { hurst: 1.0 / 3.0 },
            SeedSpec::new(1, 0),
            10,
            1.7,
            0,
        )
        .unwrap();
        assert_eq!(path.x_squared[0], 1.7);
        let want = 1.17 + 0.5 * path.liquidity[0];
        assert!((path.sigma_squared[1] - want).abs() < 1e-14);
    }

    #[test]
    fn unit_innovations_converge_to_fixed_point() {
        let p = ModelParams {
            alpha0: 1.0,
            alpha1: 0.5,
            l1: 1e-300,
        };
        let eps = vec![1.0; 200];
        let liq = vec![1.0; 200];
        let (x2, s2) = run_recursion(&p, 10.0, &eps, &liq).unwrap();
        let fixed = 1.0 / (1.0 - 0.5);
        assert!((s2[199] - fixed).abs() < 1e-12);
        assert!((x2[199] - fixed).abs() < 1e-12);
        // geometric approach: error halves each step
        let e10 = (s2[10] - fixed).abs();
        let e11 = (s2[11] - fixed).abs();
        assert!((e11 / e10 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn overflow_is_reported() {
        let p = ModelParams {
            alpha0: 1.0,
            alpha1: 0.9,
            l1: 1.0,
        };
        let eps = vec![1e10; 100];
        let liq = vec![1.0; 100];
        match run_recursion(&p, 1.0, &eps, &liq) {
            Err(Error::Simulation { index, .. }) => assert!(index > 1 && index < 100),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn zero_a_series_is_b() {
        let p = default_params();
        let eps = vec![0.0; 80];
        let liq: Vec<f64> = (0..80).map(|i| i as f64 * 0.1).collect();
        let k = 10;
        let s2 = stationary_series(&p, &eps, &liq, k).unwrap();
        for (j, s) in s2.iter().enumerate() {
            let t = k + j;
            assert_eq!(*s, p.alpha0 + p.l1 * liq[t]);
        }
    }

    #[test]
    fn series_matches_explicit_sum() {
        let p = ModelParams::new(0.7, 0.3, 0.4).unwrap();
        let eps: Vec<f64> = (0..40).map(|i| 0.5 + (i % 7) as f64 * 0.3).collect();
        let liq: Vec<f64> = (0..40).map(|i| 0.2 + (i % 5) as f64 * 0.4).collect();
        let k = 12;
        let s2 = stationary_series(&p, &eps, &liq, k).unwrap();
        for (j, got) in s2.iter().enumerate() {
            let t = k + j;
            let mut want = 0.0;
            for i in 0..=k {
                let prod: f64 = (0..i).map(|jj| p.alpha1 * eps[t - jj]).product();
                want += prod * (p.alpha0 + p.l1 * liq[t - i]);
            }
            assert!((got - want).abs() < 1e-12 * want, "{got} {want}");
        }
    }

    #[test]
    fn truncation_sizing() {
        let p = default_params();
        assert_eq!(auto_truncation(&p), MIN_TRUNCATION);
        let slow = ModelParams::new(1.0, 0.95, 0.5).unwrap();
        let k = auto_truncation(&slow);
        assert!(k > MIN_TRUNCATION);
        assert!(0.95f64.powf(k as f64 + 1.0) <= SERIES_TOLERANCE);
        assert!(check_truncation(&slow, k).is_ok());
        assert!(check_truncation(&slow, 20).is_err());
        let r = simulate_stationary_series(
            slow,
            LiquidityModel::WhiteSquared,
            SeedSpec::new(0, 0),
            10,
            Some(5),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn truncation_increase_is_invisible() {
        let p = ModelParams::new(1.0, 0.3, 0.5).unwrap();
        let k = auto_truncation(&p);
        let liq = LiquidityModel::WhiteSquared;
        // same buffers: build once at the longer length and run both truncations on it
        let seed = SeedSpec::new(4, 4);
        let n = 2000;
        let len = n + k + 51;
        let eps = squared_innovations(&mut seed.rng(Purpose::Innovations), len);
        let l = crate::liquidity::sample_liquidity(liq, seed, len).unwrap();
        let short = stationary_series(&p, &eps, &l, k).unwrap();
        let long = stationary_series(&p, &eps, &l, k + 50).unwrap();
        // long[j] is at index k + 51 + j; short at k + 1 + j
        for j in 0..n {
            let a = short[j + 50];
            let b = long[j];
            assert!(((a - b) / b).abs() < 1e-9, "{j}: {a} {b}");
        }
    }

    #[test]
    fn recursion_continues_series_exactly() {
        let p = ModelParams::new(1.0, 0.2, 0.5).unwrap();
        let seed = SeedSpec::new(10, 1);
        let path = simulate_stationary_series(
            p,
            LiquidityModel::FgnSquared { hurst: 0.7 },
            seed,
            500,
            None,
        )
        .unwrap();
        // restart the recursion from the first series point with the same noise
        let (x2, s2) =
            run_recursion(&p, path.x_squared[0], &path.eps_squared, &path.liquidity).unwrap();
        for t in 1..path.len() {
            assert!(((s2[t] - path.sigma_squared[t]) / s2[t]).abs() < 1e-13);
            assert!((x2[t] - path.x_squared[t]).abs() <= 1e-13 * x2[t].max(1.0));
        }
    }

    #[test]
    fn path_invariants() {
        let p = default_params();
        for liq in [
            LiquidityModel::FgnSquared { hurst: 1.0 / 3.0 },
            LiquidityModel::CompensatedPoissonSquared { lambda: 1.0 },
            LiquidityModel::WhiteSquared,
        ] {
            let path = simulate_recursive(p, liq, SeedSpec::new(3, 3), 5000, 1.7, 0).unwrap();
            assert_eq!(path.len(), 5000);
            for t in 0..path.len() {
                assert!(path.x_squared[t] >= 0.0);
                assert_eq!(
                    path.x_squared[t],
                    path.sigma_squared[t] * path.eps_squared[t]
                );
                if t > 0 {
                    assert!(path.sigma_squared[t] >= p.alpha0);
                }
            }
            let path = simulate_stationary_series(p, liq, SeedSpec::new(3, 3), 2000, None).unwrap();
            for t in 0..path.len() {
                assert!(path.sigma_squared[t] >= p.alpha0);
                assert_eq!(
                    path.x_squared[t],
                    path.sigma_squared[t] * path.eps_squared[t]
                );
            }
        }
    }

    #[test]
    fn burn_in_drops_prefix() {
        let p = default_params();
        let liq = LiquidityModel::WhiteSquared;
        let full = simulate_recursive(p, liq, SeedSpec::new(6, 0), 300, 1.7, 0).unwrap();
        let burnt = simulate_recursive(p, liq, SeedSpec::new(6, 0), 200, 1.7, 100).unwrap();
        assert_eq!(burnt.len(), 200);
        assert_eq!(&full.x_squared[100..], &burnt.x_squared[..]);
    }

    #[test]
    fn mean_of_x_squared() {
        assert!((theoretical_mean_x_squared(&default_params()).unwrap() - 1.5 / 0.9).abs() < 1e-15);
        let p = ModelParams::new(0.0, 0.5, 1.0).unwrap();
        assert_eq!(theoretical_mean_x_squared(&p).unwrap(), 2.0);
        let bad = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(theoretical_mean_x_squared(&bad).is_err());

        let path = simulate_recursive(
            default_params(),
            LiquidityModel::FgnSquared { hurst: 1.0 / 3.0 },
            SeedSpec::new(2024, 0),
            100_000,
            1.7,
            0,
        )
        .unwrap();
        let (m, _) = mean_sd(&path.x_squared);
        assert!((m - 1.5 / 0.9).abs() < 0.03, "{m}");
    }

    #[test]
    fn recursive_and_series_share_stationary_mean() {
        let p = default_params();
        let liq = LiquidityModel::FgnSquared { hurst: 1.0 / 3.0 };
        let n = 100_000;
        let a = simulate_recursive(p, liq, SeedSpec::new(17, 0), n, 1.7, 512).unwrap();
        let b = simulate_stationary_series(p, liq, SeedSpec::new(17, 1), n, None).unwrap();
        let (ma, sa) = mean_sd(&a.x_squared);
        let (mb, sb) = mean_sd(&b.x_squared);
        let se = (sa * sa / n as f64 + sb * sb / n as f64).sqrt();
        assert!((ma - mb).abs() < 3.0 * se, "{ma} {mb} se {se}");
    }

    #[test]
    fn cross_moment_white_liquidity() {
        let p = default_params();
        let cov = LiquidityModel::WhiteSquared.covariance();
        for d in [0i64, -1, -5] {
            let got = theoretical_sigma2_liquidity_cross_moment(&p, &cov, d, None).unwrap();
            let want = p.alpha0 / 0.9 + p.l1 / 0.9;
            assert!((got - want).abs() < 1e-12, "{d}: {got} {want}");
        }
        // t - s = 1: f(0) = 3 enters with weight 1
        let got = theoretical_sigma2_liquidity_cross_moment(&p, &cov, 1, None).unwrap();
        assert!((got - (p.alpha0 / 0.9 + p.l1 * (3.0 + 0.1 / 0.9))).abs() < 1e-12);
    }

    #[test]
    fn cross_moment_small_l1() {
        let cov = LiquidityModel::FgnSquared { hurst: 1.0 / 3.0 }.covariance();
        let p = ModelParams::new(1.0, 0.1, 1e-9).unwrap();
        let got = theoretical_sigma2_liquidity_cross_moment(&p, &cov, 2, None).unwrap();
        assert!((got - 1.0 / 0.9).abs() < 1e-8);
    }
}
