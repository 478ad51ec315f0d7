use num_rational::BigRational;
use rand::seq::index;
use rand::Rng;

use super::params::{ParamTriple, Partition};
use crate::domain::EncodedVector;
use crate::error::{invalid, Error, Result};
use crate::math::{hypergeometric_pmf, hypergeometric_pmf_exact};

/// The `s` sampled bits, in sampling order. Nothing else is sent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CriadReport {
    bits: Vec<u8>,
}

impl CriadReport {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(invalid("report bits must be 0 or 1"));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }
}

/// Client side of CRIAD on an explicit length-`d` bit vector.
pub fn criad_client<R: Rng + ?Sized>(
    vector: &EncodedVector,
    params: &ParamTriple,
    partition: &Partition,
    rng: &mut R,
) -> Result<CriadReport> {
    let d = vector.len();
    params.validate(d)?;
    if partition.d() != d || partition.groups() != params.g {
        return Err(invalid("partition does not match d and g"));
    }
    let r = rng.gen_range(0..params.g);
    let mut augmented: Vec<u8> = partition
        .members(r)
        .iter()
        .map(|&p| vector.bits()[p as usize])
        .collect();
    augmented.extend(std::iter::repeat(1u8).take(params.m));

    let zeros = augmented.iter().filter(|&&b| b == 0).count();
    if zeros < params.m {
        let ones: Vec<usize> = (0..augmented.len()).filter(|&i| augmented[i] == 1).collect();
        for i in index::sample(rng, ones.len(), params.m - zeros) {
            augmented[ones[i]] = 0;
        }
    }

    let bits = index::sample(rng, augmented.len(), params.s)
        .into_iter()
        .map(|i| augmented[i])
        .collect();
    Ok(CriadReport { bits })
}

/// Ones after dummies and suppression in a group holding `t` real ones.
#[inline]
pub(crate) fn augmented_ones(params: &ParamTriple, d: usize, t: usize) -> usize {
    t.min(params.ones_cap(d)) + params.m
}

/// Number of ones among `s` draws without replacement from a group holding
/// `t` real ones. Same law as the ones count of [`criad_client`]'s report.
#[inline]
pub(crate) fn sample_ones<R: Rng + ?Sized>(params: &ParamTriple, d: usize, t: usize, rng: &mut R) -> usize {
    let mut ones = augmented_ones(params, d, t);
    let mut remaining = d / params.g + params.m;
    let mut hits = 0;
    for _ in 0..params.s {
        if rng.gen_range(0..remaining) < ones {
            hits += 1;
            ones -= 1;
        }
        remaining -= 1;
    }
    hits
}

fn check_group_ones(params: &ParamTriple, d: usize, t: usize) -> Result<()> {
    params.validate(d)?;
    if t > d / params.g {
        return Err(Error::OutOfRange {
            what: "ones count in a group",
            value: t as f64,
        });
    }
    Ok(())
}

/// `Pr[k ones in the report]`, `k ∈ 0..=s`, for a group holding `t` ones.
pub fn exact_report_distribution(t: usize, params: &ParamTriple, d: usize) -> Result<Vec<f64>> {
    check_group_ones(params, d, t)?;
    let a = augmented_ones(params, d, t);
    let b = d / params.g + params.m - a;
    Ok((0..=params.s)
        .map(|k| hypergeometric_pmf(a, b, params.s, k))
        .collect())
}

/// [`exact_report_distribution`] in exact rational arithmetic.
pub fn exact_report_distribution_rational(
    t: usize,
    params: &ParamTriple,
    d: usize,
) -> Result<Vec<BigRational>> {
    check_group_ones(params, d, t)?;
    let a = augmented_ones(params, d, t);
    let b = d / params.g + params.m - a;
    Ok((0..=params.s)
        .map(|k| hypergeometric_pmf_exact(a, b, params.s, k))
        .collect())
}

/// Running ones total over CRIAD reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CriadTally {
    pub n: u64,
    pub ones: u64,
}

impl CriadTally {
    pub fn add_ones(&mut self, k: usize) {
        self.n += 1;
        self.ones += k as u64;
    }

    pub fn merge(mut self, other: CriadTally) -> CriadTally {
        self.n += other.n;
        self.ones += other.ones;
        self
    }

    /// `(d + g m)/s · ones - n m g`.
    pub fn estimate(&self, params: &ParamTriple, d: usize) -> f64 {
        let scale = (d + params.g * params.m) as f64 / params.s as f64;
        scale * self.ones as f64 - (self.n as usize * params.m * params.g) as f64
    }
}

pub fn criad_aggregate(reports: &[CriadReport], n: usize, d: usize, params: &ParamTriple) -> Result<f64> {
    params.validate(d)?;
    if reports.len() != n {
        return Err(invalid(format!("expected {n} reports, got {}", reports.len())));
    }
    let mut tally = CriadTally::default();
    for r in reports {
        if r.bits.len() != params.s {
            return Err(invalid(format!(
                "report of length {} where s = {}",
                r.bits.len(),
                params.s
            )));
        }
        tally.add_ones(r.ones());
    }
    Ok(tally.estimate(params, d))
}
