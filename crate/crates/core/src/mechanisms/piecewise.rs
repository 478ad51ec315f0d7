use rand::Rng;

use crate::error::{check_epsilon, Error, Result};

/// Piecewise mechanism for a value in `[-1, 1]`.
///
/// The output lies in `[-C, C]` with `C = (e^{ε/2} + 1) / (e^{ε/2} - 1)`. With
/// probability `e^{ε/2} / (e^{ε/2} + 1)` it is uniform on the high-density
/// piece `[l(v), r(v)]`, otherwise uniform on the rest of `[-C, C]`, where
/// `l(v) = (C + 1)/2 · v - (C - 1)/2` and `r(v) = l(v) + C - 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiecewiseConfig {
    c: f64,
    center: f64,
}

impl PiecewiseConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let half = epsilon / 2.0;
        Ok(Self {
            c: 1.0 + 2.0 / half.exp_m1(),
            center: 1.0 / (1.0 + (-half).exp()),
        })
    }

    /// Output bound `C`.
    pub fn bound(&self) -> f64 {
        self.c
    }

    /// Per-report variance for input `v`.
    pub fn variance(&self, v: f64) -> f64 {
        // v²/(e^{ε/2} - 1) + (e^{ε/2} + 3) / (3 (e^{ε/2} - 1)²), written via C.
        let a = (self.c - 1.0) / 2.0; // 1 / (e^{ε/2} - 1)
        v * v * a + a * (1.0 + 4.0 * a) / 3.0
    }

    #[inline]
    pub fn perturb<R: Rng + ?Sized>(&self, v: f64, rng: &mut R) -> f64 {
        let c = self.c;
        let l = (c + 1.0) / 2.0 * v - (c - 1.0) / 2.0;
        let r = l + c - 1.0;
        if rng.gen::<f64>() < self.center {
            l + (r - l) * rng.gen::<f64>()
        } else {
            let left = l + c;
            let u = (left + c - r) * rng.gen::<f64>();
            if u < left {
                -c + u
            } else {
                r + (u - left)
            }
        }
    }
}

pub fn piecewise<R: Rng + ?Sized>(value: f64, epsilon: f64, rng: &mut R) -> Result<f64> {
    if !(-1.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            what: "piecewise input",
            value,
        });
    }
    Ok(PiecewiseConfig::new(epsilon)?.perturb(value, rng))
}
