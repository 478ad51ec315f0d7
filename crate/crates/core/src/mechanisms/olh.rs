use rand::Rng;

use super::logistic_keep;
use crate::error::{check_epsilon, Error, Result};
use crate::rng::mix64;

/// Optimal local hashing: each user hashes their value into `g'` buckets with
/// a personal seed, then applies kRR over the buckets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OlhConfig {
    epsilon: f64,
    range: u64,
    keep: f64,
}

/// Cap on the hash range; beyond this the channel is noiseless in practice.
const MAX_RANGE: u64 = 1 << 32;

impl OlhConfig {
    /// Hash range `g' = round(e^ε) + 1`.
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let e = epsilon.exp();
        let range = if e >= MAX_RANGE as f64 {
            MAX_RANGE
        } else {
            e.round() as u64 + 1
        };
        Self::with_range(epsilon, range.max(2))
    }

    pub fn with_range(epsilon: f64, range: u64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if range < 2 {
            return Err(Error::InvalidParameter(format!("OLH range must be >= 2, got {range}")));
        }
        Ok(Self {
            epsilon,
            range,
            keep: logistic_keep(epsilon, (range - 1) as f64),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    /// `Pr[report = own hash]`, `e^ε / (e^ε + g' - 1)`.
    pub fn keep_probability(&self) -> f64 {
        self.keep
    }

    /// Probability that a report supports a value the user does not hold.
    pub fn support_probability(&self) -> f64 {
        1.0 / self.range as f64
    }

    #[inline]
    pub fn hash(&self, seed: u64, value: u64) -> u64 {
        bucket(mix64(seed ^ mix64(value)), self.range)
    }

    #[inline]
    pub fn perturb<R: Rng + ?Sized>(&self, value: u64, rng: &mut R) -> OlhReport {
        let seed: u64 = rng.gen();
        let h = self.hash(seed, value);
        let bucket = if rng.gen::<f64>() < self.keep {
            h
        } else {
            let r = rng.gen_range(0..self.range - 1);
            if r >= h {
                r + 1
            } else {
                r
            }
        };
        OlhReport { seed, bucket }
    }
}

/// Maps a uniform 64-bit hash onto `0..range` by multiply-shift.
#[inline]
fn bucket(h: u64, range: u64) -> u64 {
    ((h as u128 * range as u128) >> 64) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OlhReport {
    pub seed: u64,
    pub bucket: u64,
}

/// Reports in column form, which is what the estimator scans.
#[derive(Clone, Debug, Default)]
pub struct OlhReports {
    seeds: Vec<u64>,
    buckets: Vec<u64>,
}

impl OlhReports {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            seeds: Vec::with_capacity(n),
            buckets: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, r: OlhReport) {
        self.seeds.push(r.seed);
        self.buckets.push(r.bucket);
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

impl FromIterator<OlhReport> for OlhReports {
    fn from_iter<I: IntoIterator<Item = OlhReport>>(iter: I) -> Self {
        let mut out = Self::default();
        for r in iter {
            out.push(r);
        }
        out
    }
}

pub fn olh_report<R: Rng + ?Sized>(value: usize, k: usize, cfg: &OlhConfig, rng: &mut R) -> Result<OlhReport> {
    if value >= k {
        return Err(Error::OutOfRange {
            what: "OLH value",
            value: value as f64,
        });
    }
    Ok(cfg.perturb(value as u64, rng))
}

/// Unbiased count estimates for every value in `0..k`.
pub fn olh_estimate(reports: &OlhReports, k: usize, cfg: &OlhConfig) -> Vec<f64> {
    olh_estimate_range(reports, 0..k, cfg)
}

/// Count estimates for a sub-range of values; the estimator for each value
/// is independent of the others.
pub fn olh_estimate_range(
    reports: &OlhReports,
    values: std::ops::Range<usize>,
    cfg: &OlhConfig,
) -> Vec<f64> {
    let n = reports.len() as f64;
    let q = cfg.support_probability();
    let scale = 1.0 / (cfg.keep - q);
    values
        .map(|v| {
            let hv = mix64(v as u64);
            let support = reports
                .seeds
                .iter()
                .zip(&reports.buckets)
                .filter(|(&s, &b)| bucket(mix64(s ^ hv), cfg.range) == b)
                .count() as f64;
            (support - n * q) * scale
        })
        .collect()
}
