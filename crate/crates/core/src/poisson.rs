//! Increments of a compensated Poisson process on a unit grid.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::rng::{Purpose, SeedSpec};

/// Above this intensity draws come from a rejection sampler instead of
/// sequential inversion.
pub const INVERSION_MAX_LAMBDA: f64 = 10.0;

/// Sampler for Poisson(lambda) counts.
#[derive(Debug, Clone, Copy)]
pub struct PoissonSampler {
    lambda: f64,
    exp_neg_lambda: f64,
    rejection: Option<Poisson<f64>>,
}

impl PoissonSampler {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Poisson intensity must be positive and finite, got {lambda}"
            )));
        }
        let rejection = if lambda > INVERSION_MAX_LAMBDA {
            Some(Poisson::new(lambda).map_err(|e| Error::InvalidArgument(e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            lambda,
            exp_neg_lambda: (-lambda).exp(),
            rejection,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if let Some(dist) = &self.rejection {
            return dist.sample(rng) as u64;
        }
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = self.exp_neg_lambda;
        let mut cdf = p;
        // the cap only bites when rounding leaves cdf a hair below u
        while u > cdf && k < 1_000 {
            k += 1;
            p *= self.lambda / k as f64;
            cdf += p;
        }
        k
    }

    /// One compensated increment `count - lambda`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_count(rng) as f64 - self.lambda
    }
}

/// `n` i.i.d. compensated Poisson increments with intensity `lambda`
/// (mean 0, variance `lambda`).
pub fn sample_compensated_poisson_increments(
    seed: SeedSpec,
    lambda: f64,
    n: usize,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "requested zero Poisson increments".into(),
        ));
    }
    let sampler = PoissonSampler::new(lambda)?;
    let mut rng = seed.rng(Purpose::Liquidity);
    Ok((0..n).map(|_| sampler.sample_increment(&mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
    }

    #[test]
    fn unit_intensity_moments() {
        let xs = sample_compensated_poisson_increments(SeedSpec::new(1, 2), 1.0, 100_000).unwrap();
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 0.02, "{m}");
        assert!((v - 1.0).abs() < 0.03, "{v}");
    }

    #[test]
    fn support_is_shifted_integers() {
        let xs = sample_compensated_poisson_increments(SeedSpec::new(4, 4), 4.0, 2_000).unwrap();
        for x in xs {
            let k = x + 4.0;
            assert!(k >= 0.0 && k.fract() == 0.0, "{x}");
        }
    }

    #[test]
    fn replay() {
        let s = SeedSpec::new(9, 1);
        assert_eq!(
            sample_compensated_poisson_increments(s, 1.0, 500).unwrap(),
            sample_compensated_poisson_increments(s, 1.0, 500).unwrap()
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(sample_compensated_poisson_increments(SeedSpec::new(0, 0), 0.0, 10).is_err());
        assert!(sample_compensated_poisson_increments(SeedSpec::new(0, 0), 1.0, 0).is_err());
    }

    #[test]
    fn both_regimes_match_moments() {
        for &lambda in &[0.3, 2.5, 10.0, 10.5, 40.0] {
            let xs = sample_compensated_poisson_increments(SeedSpec::new(12, 0), lambda, 200_000)
                .unwrap();
            let (m, v) = mean_var(&xs);
            let se_mean = (lambda / xs.len() as f64).sqrt();
            assert!(m.abs() < 5.0 * se_mean, "lambda {lambda}: mean {m}");
            assert!((v / lambda - 1.0).abs() < 0.03, "lambda {lambda}: var {v}");
        }
    }
}
