use rand::Rng;

use crate::error::{check_epsilon, Result};

/// Additive Laplace noise calibrated to `sensitivity / ε`. Outputs are not
/// clipped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceConfig {
    scale: f64,
}

impl LaplaceConfig {
    pub fn new(sensitivity: f64, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            scale: sensitivity / epsilon,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn variance(&self) -> f64 {
        2.0 * self.scale * self.scale
    }

    /// One draw of `Laplace(0, scale)` by inversion.
    #[inline]
    pub fn noise<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        loop {
            let u: f64 = rng.gen::<f64>() - 0.5;
            let tail = 1.0 - 2.0 * u.abs();
            if tail > 0.0 {
                return -self.scale * u.signum() * tail.ln();
            }
        }
    }
}

/// `count + Laplace(sensitivity / ε)`.
pub fn laplace_count<R: Rng + ?Sized>(
    count: u64,
    sensitivity: u64,
    epsilon: f64,
    rng: &mut R,
) -> Result<f64> {
    let cfg = LaplaceConfig::new(sensitivity as f64, epsilon)?;
    Ok(count as f64 + cfg.noise(rng))
}
