use rand::Rng;

use super::logistic_keep;
use crate::error::{check_epsilon, Error, Result};

/// Binary randomized response.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RrConfig {
    epsilon: f64,
    keep: f64,
}

impl RrConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            keep: logistic_keep(epsilon, 1.0),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `e^ε / (1 + e^ε)`.
    pub fn keep_probability(&self) -> f64 {
        self.keep
    }

    #[inline]
    pub fn perturb<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> bool {
        if rng.gen::<f64>() < self.keep {
            bit
        } else {
            !bit
        }
    }

    /// Unbiased estimate of the true fraction of ones from the observed one.
    pub fn debias_fraction(&self, observed_fraction: f64) -> f64 {
        (observed_fraction - (1.0 - self.keep)) / (2.0 * self.keep - 1.0)
    }
}

pub fn rr_bit<R: Rng + ?Sized>(bit: bool, epsilon: f64, rng: &mut R) -> Result<bool> {
    Ok(RrConfig::new(epsilon)?.perturb(bit, rng))
}

/// k-ary randomized response over symbols `0..k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrrConfig {
    epsilon: f64,
    k: usize,
    keep: f64,
    other: f64,
}

impl KrrConfig {
    pub fn new(epsilon: f64, k: usize) -> Result<Self> {
        check_epsilon(epsilon)?;
        if k < 2 {
            return Err(Error::InvalidParameter(format!("kRR needs k >= 2, got {k}")));
        }
        let keep = logistic_keep(epsilon, (k - 1) as f64);
        // e^{-ε} · keep, i.e. 1 / (k - 1 + e^ε)
        let other = (-epsilon).exp() * keep;
        Ok(Self {
            epsilon,
            k,
            keep,
            other,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `e^ε / (k - 1 + e^ε)`.
    pub fn keep_probability(&self) -> f64 {
        self.keep
    }

    /// `1 / (k - 1 + e^ε)`, the probability of each specific other symbol.
    pub fn other_probability(&self) -> f64 {
        self.other
    }

    /// `Pr[output = y | input = x]`.
    pub fn transition(&self, x: usize, y: usize) -> f64 {
        if x == y {
            self.keep
        } else {
            self.other
        }
    }

    #[inline]
    pub fn perturb<R: Rng + ?Sized>(&self, value: usize, rng: &mut R) -> usize {
        debug_assert!(value < self.k);
        if rng.gen::<f64>() < self.keep {
            value
        } else {
            let r = rng.gen_range(0..self.k - 1);
            if r >= value {
                r + 1
            } else {
                r
            }
        }
    }

    /// Unbiased estimate of how many of `n` users hold a symbol, given how
    /// many reported it.
    pub fn debias_count(&self, observed: f64, n: f64) -> f64 {
        (observed - n * self.other) / (self.keep - self.other)
    }
}

pub fn krr<R: Rng + ?Sized>(value: usize, cfg: &KrrConfig, rng: &mut R) -> Result<usize> {
    if value >= cfg.k {
        return Err(Error::OutOfRange {
            what: "kRR symbol",
            value: value as f64,
        });
    }
    Ok(cfg.perturb(value, rng))
}

pub fn krr_debias_count(observed_count: u64, n: u64, cfg: &KrrConfig) -> f64 {
    cfg.debias_count(observed_count as f64, n as f64)
}
