//! Closed-form moment estimators for `(alpha0, alpha1, l1)`.
//!
//! The centred squared process obeys an AR(1) recursion whose Yule-Walker
//! equations are quadratic in `alpha1`. For any lag `n != 0`
//!
//! ```text
//! alpha1^2 g(n) - alpha1 (g(n+1) + g(n-1)) + g(n) - l1^2 s(n) = 0
//! ```
//!
//! and at lag 0 the same relation holds with the extra term
//! `E(X^4) Var(eps^2) / E(eps^4)`. Eliminating `l1^2` between two such
//! equations leaves one quadratic in `alpha1`:
//!
//! * the *single-lag* family pairs lag `n` with lag 0 ([`estimate_def1`]);
//! * the *two-lag* family pairs lags `n1` and `n2` ([`estimate_def2`]),
//!   whose quadratic has equal leading and constant coefficients.
//!
//! `l1` then follows from the eliminated equation and `alpha0` from the
//! mean `E X^2 = (alpha0 + l1) / (1 - alpha1)`.
//!
//! The quadratic has two roots. Roots outside [`ADMISSIBLE_BAND`] are dropped;
//! between two admissible roots the one that better satisfies the lag
//! equations at a few auxiliary lags wins (see [`select_root`]).

use crate::acf::AcfEstimates;
use crate::error::{Error, Result};
use crate::liquidity::LiquidityCovariance;
use crate::sim::NoiseMoments;

/// Roots outside this interval are never selected. Small negative roots are
/// common in short samples and are kept (their `l1` may still be real); the
/// band mainly removes the reciprocal partner root of magnitude above one.
pub const ADMISSIBLE_BAND: (f64, f64) = (-1.05, 1.05);
/// Number of auxiliary lags used to discriminate between roots.
pub const AUXILIARY_LAGS: usize = 5;
const DEGENERATE_TOL: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lags {
    /// Lag `n` paired with lag 0.
    Single(i64),
    /// Lags `n1` and `n2`, with `l1^2` eliminated through `s(n2)`.
    Pair { n1: i64, n2: i64 },
}

impl Lags {
    fn base(&self) -> i64 {
        match *self {
            Lags::Single(n) => n,
            Lags::Pair { n1, .. } => n1,
        }
    }

    /// Largest autocovariance lag the estimator can make use of, including
    /// the auxiliary lags of the root test.
    pub fn required_max_lag(&self) -> usize {
        let top = match *self {
            Lags::Single(n) => n.unsigned_abs(),
            Lags::Pair { n1, n2 } => n1.unsigned_abs().max(n2.unsigned_abs()),
        };
        top as usize + AUXILIARY_LAGS + 1
    }
}

/// Everything an estimator consumes: the sample (or exact) moments of `X^2`,
/// the lag choice, the known liquidity covariance and the noise moments.
#[derive(Debug, Clone)]
pub struct EstimatorInputs {
    /// `gamma(0), gamma(1), ...`; negative lags by symmetry.
    pub gamma: Vec<f64>,
    /// `E X^2`.
    pub mu: f64,
    /// `E X^4`.
    pub mu2: f64,
    pub lags: Lags,
    pub liquidity: LiquidityCovariance,
    pub noise: NoiseMoments,
}

impl EstimatorInputs {
    pub fn from_acf(
        acf: &AcfEstimates,
        lags: Lags,
        liquidity: LiquidityCovariance,
        noise: NoiseMoments,
    ) -> Self {
        Self {
            gamma: acf.gamma_hat.clone(),
            mu: acf.mu_hat,
            mu2: acf.mu2_hat,
            lags,
            liquidity,
            noise,
        }
    }

    fn gamma_at(&self, lag: i64) -> Option<f64> {
        self.gamma.get(lag.unsigned_abs() as usize).copied()
    }

    fn gamma_req(&self, lag: i64) -> Result<f64> {
        self.gamma_at(lag).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "autocovariance at lag {lag} not available (have lags 0..={})",
                self.gamma.len().saturating_sub(1)
            ))
        })
    }

    /// Residual of the lag-`m` equation (`m != 0`) at `(alpha1, l1^2)`.
    fn lag_residual(&self, m: i64, alpha1: f64, l1_sq: f64) -> Option<f64> {
        let g = self.gamma_at(m)?;
        let up = self.gamma_at(m + 1)?;
        let down = self.gamma_at(m - 1)?;
        Some(alpha1 * alpha1 * g - alpha1 * (up + down) + g - l1_sq * self.liquidity.s(m))
    }
}

/// Coefficients of `a x^2 + b x + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub discriminant: f64,
}

impl QuadCoeffs {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self {
            a,
            b,
            c,
            discriminant: b * b - 4.0 * a * c,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    fn is_degenerate(&self) -> bool {
        self.a.abs() < DEGENERATE_TOL * 1f64.max(self.b.abs()).max(self.c.abs())
    }

    /// `(plus, minus)` roots `(-b +- sqrt(disc)) / 2a`, computed without
    /// cancellation. `None` when the discriminant is negative.
    pub fn real_roots(&self) -> Option<(f64, f64)> {
        if self.discriminant < 0.0 {
            return None;
        }
        let sq = self.discriminant.sqrt();
        if self.b == 0.0 && sq == 0.0 {
            return Some((0.0, 0.0));
        }
        if self.b >= 0.0 {
            let q = -0.5 * (self.b + sq);
            Some((self.c / q, q / self.a))
        } else {
            let q = -0.5 * (self.b - sq);
            Some((q / self.a, self.c / q))
        }
    }
}

/// Quadratic for the single-lag family at lag `n`.
pub fn quad_coeffs_def1(inputs: &EstimatorInputs) -> Result<QuadCoeffs> {
    let n = match inputs.lags {
        Lags::Single(n) if n != 0 => n,
        other => {
            return Err(Error::InvalidArgument(format!(
                "single-lag estimator needs one nonzero lag, got {other:?}"
            )))
        }
    };
    let s0 = inputs.liquidity.s0();
    if !(s0 > 0.0) {
        return Err(Error::Covariance(format!("s(0) = {s0} must be positive")));
    }
    let ratio = inputs.liquidity.s(n) / s0;
    let g_n = inputs.gamma_req(n)?;
    let g_up = inputs.gamma_req(n + 1)?;
    let g_down = inputs.gamma_req(n - 1)?;
    let g1 = inputs.gamma_req(1)?;
    let g0 = inputs.gamma_req(0)?;
    let k = inputs.noise.kurtosis_ratio();
    Ok(QuadCoeffs::new(
        g_n - ratio * g0,
        2.0 * ratio * g1 - (g_up + g_down),
        g_n + ratio * (inputs.mu2 * k - g0),
    ))
}

/// Quadratic for the two-lag family; its constant term equals its leading
/// term.
pub fn quad_coeffs_def2(inputs: &EstimatorInputs) -> Result<QuadCoeffs> {
    let (n1, n2) = match inputs.lags {
        Lags::Pair { n1, n2 } if n1 != n2 && n1 != 0 && n2 != 0 => (n1, n2),
        other => {
            return Err(Error::InvalidArgument(format!(
                "two-lag estimator needs distinct nonzero lags, got {other:?}"
            )))
        }
    };
    let s2 = inputs.liquidity.s(n2);
    if s2 == 0.0 {
        return Err(Error::Covariance(format!(
            "s({n2}) = 0: the liquidity is uncorrelated at this lag, use the single-lag estimator"
        )));
    }
    let ratio = inputs.liquidity.s(n1) / s2;
    let a = inputs.gamma_req(n1)? - ratio * inputs.gamma_req(n2)?;
    let b = ratio * (inputs.gamma_req(n2 + 1)? + inputs.gamma_req(n2 - 1)?)
        - (inputs.gamma_req(n1 + 1)? + inputs.gamma_req(n1 - 1)?);
    Ok(QuadCoeffs::new(a, b, a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Real,
    ComplexDiscarded,
    DegenerateLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscardReason {
    NegativeDiscriminant,
    NegativeRadicand,
    NoAdmissibleRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootLabel {
    Plus,
    Minus,
    Linear,
}

impl RootLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RootLabel::Plus => "plus",
            RootLabel::Minus => "minus",
            RootLabel::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamEstimates {
    pub alpha0: f64,
    pub alpha1: f64,
    pub l1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub status: Status,
    /// Present unless the result was discarded.
    pub estimates: Option<ParamEstimates>,
    pub discard_reason: Option<DiscardReason>,
    pub chosen_root: Option<RootLabel>,
    pub coeffs: QuadCoeffs,
    /// The selected real `alpha1`, kept even when `l1` came out complex.
    pub alpha1_candidate: Option<f64>,
    /// Residuals of the lag equations at the auxiliary lags for the
    /// selected root.
    pub residuals: Vec<(i64, f64)>,
}

impl EstimationResult {
    fn discarded(coeffs: QuadCoeffs, reason: DiscardReason) -> Self {
        Self {
            status: Status::ComplexDiscarded,
            estimates: None,
            discard_reason: Some(reason),
            chosen_root: None,
            coeffs,
            alpha1_candidate: None,
            residuals: Vec::new(),
        }
    }
}

/// One candidate root for [`select_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub root: f64,
    pub label: RootLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootReport {
    pub chosen: Candidate,
    /// `(root, admissible, summed squared residual)` per candidate; the
    /// residual is only computed when more than one root is admissible.
    pub candidates: Vec<(f64, bool, Option<f64>)>,
}

/// Residual context for [`select_root`]: the moments, and how `l1^2` follows
/// from a candidate `alpha1`.
pub struct ResidualContext<'a> {
    pub inputs: &'a EstimatorInputs,
    pub l1_squared: &'a dyn Fn(f64) -> f64,
}

impl ResidualContext<'_> {
    fn auxiliary_lags(&self) -> impl Iterator<Item = i64> {
        let base = self.inputs.lags.base().abs();
        (1..=AUXILIARY_LAGS as i64).map(move |k| base + k)
    }

    fn residuals(&self, alpha1: f64) -> Vec<(i64, f64)> {
        let l1_sq = (self.l1_squared)(alpha1);
        self.auxiliary_lags()
            .filter_map(|m| self.inputs.lag_residual(m, alpha1, l1_sq).map(|r| (m, r)))
            .collect()
    }

    fn score(&self, alpha1: f64) -> f64 {
        self.residuals(alpha1).iter().map(|(_, r)| r * r).sum()
    }
}

fn in_band(x: f64) -> bool {
    x >= ADMISSIBLE_BAND.0 && x <= ADMISSIBLE_BAND.1
}

/// Pick between the two real roots. Roots outside [`ADMISSIBLE_BAND`] are
/// rejected; if both survive, the one with the smaller summed squared
/// residual over the auxiliary lags wins, ties going to a root inside
/// `(0, 1)` and then to the smaller root.
pub fn select_root(
    roots: [Candidate; 2],
    context: &ResidualContext<'_>,
) -> std::result::Result<RootReport, DiscardReason> {
    let admissible: Vec<Candidate> = roots.iter().copied().filter(|c| in_band(c.root)).collect();
    let mut report: Vec<(f64, bool, Option<f64>)> = roots
        .iter()
        .map(|c| (c.root, in_band(c.root), None))
        .collect();
    let chosen = match admissible.as_slice() {
        [] => return Err(DiscardReason::NoAdmissibleRoot),
        [only] => *only,
        [x, y] => {
            let sx = context.score(x.root);
            let sy = context.score(y.root);
            report[0].2 = Some(sx);
            report[1].2 = Some(sy);
            let tie = (sx - sy).abs() <= TIE_TOL * sx.max(sy).max(f64::MIN_POSITIVE)
                || (sx == 0.0 && sy == 0.0);
            if !tie {
                if sx < sy {
                    *x
                } else {
                    *y
                }
            } else {
                let inside = |c: &Candidate| c.root > 0.0 && c.root < 1.0;
                match (inside(x), inside(y)) {
                    (true, false) => *x,
                    (false, true) => *y,
                    _ => {
                        if x.root <= y.root {
                            *x
                        } else {
                            *y
                        }
                    }
                }
            }
        }
        _ => unreachable!("at most two roots"),
    };
    Ok(RootReport {
        chosen,
        candidates: report,
    })
}

fn finish(
    inputs: &EstimatorInputs,
    coeffs: QuadCoeffs,
    l1_squared: &dyn Fn(f64) -> f64,
) -> Result<EstimationResult> {
    let context = ResidualContext { inputs, l1_squared };
    let (chosen, status) = if coeffs.is_degenerate() {
        if coeffs.b.abs() < DEGENERATE_TOL * 1f64.max(coeffs.c.abs()) {
            return Err(Error::Unidentifiable);
        }
        (
            Candidate {
                root: -coeffs.c / coeffs.b,
                label: RootLabel::Linear,
            },
            Status::DegenerateLinear,
        )
    } else {
        let Some((plus, minus)) = coeffs.real_roots() else {
            return Ok(EstimationResult::discarded(
                coeffs,
                DiscardReason::NegativeDiscriminant,
            ));
        };
        let roots = [
            Candidate {
                root: plus,
                label: RootLabel::Plus,
            },
            Candidate {
                root: minus,
                label: RootLabel::Minus,
            },
        ];
        match select_root(roots, &context) {
            Ok(report) => (report.chosen, Status::Real),
            Err(reason) => return Ok(EstimationResult::discarded(coeffs, reason)),
        }
    };

    let alpha1 = chosen.root;
    let residuals = context.residuals(alpha1);
    let l1_sq = l1_squared(alpha1);
    if !(l1_sq >= 0.0) {
        return Ok(EstimationResult {
            chosen_root: Some(chosen.label),
            alpha1_candidate: Some(alpha1),
            residuals,
            ..EstimationResult::discarded(coeffs, DiscardReason::NegativeRadicand)
        });
    }
    let l1 = l1_sq.sqrt();
    let alpha0 = inputs.mu * (1.0 - alpha1) - l1;
    Ok(EstimationResult {
        status,
        estimates: Some(ParamEstimates { alpha0, alpha1, l1 }),
        discard_reason: None,
        chosen_root: Some(chosen.label),
        coeffs,
        alpha1_candidate: Some(alpha1),
        residuals,
    })
}

/// Single-lag estimator: lag `n` together with lag 0.
pub fn estimate_def1(inputs: &EstimatorInputs) -> Result<EstimationResult> {
    let coeffs = quad_coeffs_def1(inputs)?;
    let s0 = inputs.liquidity.s0();
    let g0 = inputs.gamma_req(0)?;
    let g1 = inputs.gamma_req(1)?;
    let noise_term = inputs.mu2 * inputs.noise.kurtosis_ratio();
    let l1_squared = move |a: f64| (a * a * g0 - 2.0 * a * g1 + g0 - noise_term) / s0;
    finish(inputs, coeffs, &l1_squared)
}

/// Two-lag estimator: lags `n1` and `n2`, `s(n2) != 0`.
pub fn estimate_def2(inputs: &EstimatorInputs) -> Result<EstimationResult> {
    let coeffs = quad_coeffs_def2(inputs)?;
    let Lags::Pair { n2, .. } = inputs.lags else {
        unreachable!("validated by quad_coeffs_def2")
    };
    let s2 = inputs.liquidity.s(n2);
    let g = inputs.gamma_req(n2)?;
    let around = inputs.gamma_req(n2 + 1)? + inputs.gamma_req(n2 - 1)?;
    let l1_squared = move |a: f64| (a * a * g - a * around + g) / s2;
    finish(inputs, coeffs, &l1_squared)
}

/// Estimate from sample statistics with the default single-lag estimator.
pub fn estimate_from_acf(
    acf: &AcfEstimates,
    lag: i64,
    liquidity: LiquidityCovariance,
    noise: NoiseMoments,
) -> Result<EstimationResult> {
    estimate_def1(&EstimatorInputs::from_acf(
        acf,
        Lags::Single(lag),
        liquidity,
        noise,
    ))
}
