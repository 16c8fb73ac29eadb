//! Gaussian observation noise on the multiplication factor.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Per-agent observation noise with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise standard deviation must be finite and >= 0, got {sigma}"
            )));
        }
        Ok(NoiseModel { sigma })
    }

    pub fn exact() -> Self {
        NoiseModel { sigma: 0.0 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Observed factor `max(0, f + N(0, sigma^2))`.
///
/// With `sigma == 0` no sample is drawn and `f` is returned unchanged;
/// noise draws come from a dedicated stream, so skipping them does not
/// shift any other random sequence.
pub fn observe<R: Rng + ?Sized>(f: f64, model: NoiseModel, rng: &mut R) -> f64 {
    if model.sigma == 0.0 {
        return f;
    }
    let g: f64 = rng.sample(StandardNormal);
    (f + model.sigma * g).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_sigma_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for f in [0.0, 0.5, 1.0, 3.5, 17.25] {
            for _ in 0..10 {
                assert_eq!(observe(f, NoiseModel::exact(), &mut rng), f);
            }
        }
    }

    #[test]
    fn clipped_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = NoiseModel::new(2.0).unwrap();
        let mut clipped = 0usize;
        for _ in 0..1_000_000 {
            let x = observe(0.5, m, &mut rng);
            assert!(x >= 0.0);
            clipped += (x == 0.0) as usize;
        }
        // P(N(0.5, 4) < 0) is about 0.40.
        assert!(clipped > 350_000 && clipped < 450_000);
    }

    #[test]
    fn moments_far_from_the_clip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = NoiseModel::new(2.0).unwrap();
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| observe(10.0, m, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 10.0).abs() <= 0.01, "mean {mean}");
        assert!((var.sqrt() - 2.0).abs() <= 0.01, "std {}", var.sqrt());
    }

    #[test]
    fn rejects_negative_sigma() {
        assert!(NoiseModel::new(-1.0).is_err());
        assert!(NoiseModel::new(f64::NAN).is_err());
    }
}
