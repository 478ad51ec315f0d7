//! Counting via randomized index (CRI).
//!
//! Each user samples one position of their category bit vector uniformly and
//! reports that bit as is. The all-zeros and all-ones vectors would make the
//! sampled bit deterministic, so such users first flip one random bit and
//! report a status flag (`-1` all zeros, `+1` all ones, `0` otherwise) through
//! kRR over three symbols. The collector scales the bit sum by `d` and
//! corrects it with the debiased flag sum.
//!
//! The sampling channel alone has likelihood ratio at most `d - 1`, so the
//! flag gets `ε' = ε - ln(d - 1)`.

use rand::Rng;

use crate::domain::{CategoryView, EncodedVector};
use crate::error::{invalid, Error, Result};
use crate::mechanisms::KrrConfig;
use crate::rng::{tag, RngStream};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriParams {
    epsilon: f64,
    d: usize,
    epsilon_prime: f64,
    flag: KrrConfig,
}

impl CriParams {
    /// Splits a total budget `ε` into the sampling cost `ln(d - 1)` and the
    /// flag budget `ε'`.
    pub fn new(epsilon: f64, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("category size must be >= 2, got {d}")));
        }
        let sampling = ((d - 1) as f64).ln();
        let epsilon_prime = epsilon - sampling;
        if !(epsilon_prime > 0.0) {
            return Err(Error::BudgetInsufficient {
                epsilon,
                required: sampling,
            });
        }
        Self::assemble(epsilon, d, epsilon_prime)
    }

    /// Parameters from the flag budget; the total is `ln(d - 1) + ε'`.
    pub fn from_flag_budget(d: usize, epsilon_prime: f64) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("category size must be >= 2, got {d}")));
        }
        Self::assemble(((d - 1) as f64).ln() + epsilon_prime, d, epsilon_prime)
    }

    fn assemble(epsilon: f64, d: usize, epsilon_prime: f64) -> Result<Self> {
        Ok(Self {
            epsilon,
            d,
            epsilon_prime,
            flag: KrrConfig::new(epsilon_prime, 3)?,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn epsilon_prime(&self) -> f64 {
        self.epsilon_prime
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn flag_channel(&self) -> &KrrConfig {
        &self.flag
    }

    /// Ones count after the extreme-case flip.
    pub fn effective_ones(&self, t: usize) -> usize {
        t.clamp(1, self.d - 1)
    }

    pub fn raw_flag(&self, t: usize) -> Flag {
        if t == self.d {
            Flag::AllOnes
        } else if t == 0 {
            Flag::AllZeros
        } else {
            Flag::Neither
        }
    }

    fn perturb_flag<R: Rng + ?Sized>(&self, flag: Flag, rng: &mut R) -> Flag {
        Flag::from_symbol(self.flag.perturb(flag.symbol(), rng))
    }

    /// Same output law as [`cri_client`], driven by the ones count only.
    #[inline]
    pub fn report_from_ones<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> CriReport {
        let bit = rng.gen_range(0..self.d) < self.effective_ones(t);
        CriReport {
            sampled_bit: bit as u8,
            flag: self.perturb_flag(self.raw_flag(t), rng),
        }
    }
}

/// Status flag symbols. kRR symbol order is `-1, 0, +1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    AllZeros,
    Neither,
    AllOnes,
}

impl Flag {
    pub const ALL: [Flag; 3] = [Flag::AllZeros, Flag::Neither, Flag::AllOnes];

    pub fn value(self) -> i64 {
        match self {
            Flag::AllZeros => -1,
            Flag::Neither => 0,
            Flag::AllOnes => 1,
        }
    }

    pub fn symbol(self) -> usize {
        (self.value() + 1) as usize
    }

    pub fn from_symbol(s: usize) -> Self {
        Self::ALL[s]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CriReport {
    pub sampled_bit: u8,
    pub flag: Flag,
}

/// Client side of CRI on an explicit bit vector.
pub fn cri_client<R: Rng + ?Sized>(
    vector: &EncodedVector,
    params: &CriParams,
    rng: &mut R,
) -> Result<CriReport> {
    let d = params.d();
    if vector.len() != d {
        return Err(invalid(format!("vector length {} != d = {d}", vector.len())));
    }
    let mut bits = vector.bits().to_vec();
    let t = vector.ones();
    let flag = params.raw_flag(t);
    match flag {
        Flag::AllOnes => bits[rng.gen_range(0..d)] = 0,
        Flag::AllZeros => bits[rng.gen_range(0..d)] = 1,
        Flag::Neither => {}
    }
    let z = rng.gen_range(0..d);
    Ok(CriReport {
        sampled_bit: bits[z],
        flag: params.perturb_flag(flag, rng),
    })
}

/// Running sums of CRI reports; merging tallies is associative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CriTally {
    pub n: u64,
    pub ones: u64,
    pub flag_sum: i64,
}

impl CriTally {
    pub fn add(&mut self, r: &CriReport) {
        self.n += 1;
        self.ones += r.sampled_bit as u64;
        self.flag_sum += r.flag.value();
    }

    pub fn merge(mut self, other: CriTally) -> CriTally {
        self.n += other.n;
        self.ones += other.ones;
        self.flag_sum += other.flag_sum;
        self
    }

    /// `d · Σ bits + (2 + e^{ε'}) Σ flags / (e^{ε'} - 1)`.
    pub fn estimate(&self, d: usize, epsilon_prime: f64) -> f64 {
        let theta_bar = d as f64 * self.ones as f64;
        // (2 + e^x) / (e^x - 1) written to survive x = inf
        let em = (-epsilon_prime).exp();
        let gain = (2.0 * em + 1.0) / (1.0 - em);
        theta_bar + gain * self.flag_sum as f64
    }
}

pub fn cri_aggregate(reports: &[CriReport], n: usize, d: usize, epsilon_prime: f64) -> Result<f64> {
    if reports.len() != n {
        return Err(invalid(format!("expected {n} reports, got {}", reports.len())));
    }
    let mut tally = CriTally::default();
    reports.iter().for_each(|r| tally.add(r));
    Ok(tally.estimate(d, epsilon_prime))
}

/// `n d² / 4 + 2n (e^{ε'} + 2) / (e^{ε'} - 1)²`.
pub fn cri_variance_bound(n: usize, d: usize, epsilon_prime: f64) -> f64 {
    let n = n as f64;
    let e = epsilon_prime.exp();
    n * (d * d) as f64 / 4.0 + 2.0 * n * (e + 2.0) / ((e - 1.0) * (e - 1.0))
}

const CLIENT_TAG: u64 = tag("cri/client");

/// Runs CRI over every user of the view; `stream` fixes the trial.
pub fn simulate(view: &CategoryView, params: &CriParams, stream: &RngStream) -> f64 {
    let mut tally = CriTally::default();
    for u in 0..view.n() {
        let mut rng = stream.for_user(u as u64).rng(CLIENT_TAG);
        tally.add(&params.report_from_ones(view.ones(u), &mut rng));
    }
    tally.estimate(params.d(), params.epsilon_prime())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::EncodedVector;

    fn bits(s: &str) -> EncodedVector {
        EncodedVector::parse(s).unwrap()
    }

    #[test]
    fn budget_split() {
        let p = CriParams::new(2.0, 5).unwrap();
        assert!((p.epsilon_prime() - (2.0 - 4f64.ln())).abs() < 1e-15);
        assert!((p.epsilon_prime() - 0.6137).abs() < 1e-4);
        assert!(matches!(
            CriParams::new(1.0, 5),
            Err(Error::BudgetInsufficient { .. })
        ));
        assert!(CriParams::new(4f64.ln(), 5).is_err());
        assert!(CriParams::new(1.0, 1).is_err());
        // d = 2 spends nothing on sampling
        assert_eq!(CriParams::new(0.5, 2).unwrap().epsilon_prime(), 0.5);
    }

    #[test]
    fn aggregate_by_hand() {
        let reports: Vec<CriReport> = [1u8, 0, 0, 1]
            .iter()
            .map(|&b| CriReport {
                sampled_bit: b,
                flag: Flag::Neither,
            })
            .collect();
        assert_eq!(cri_aggregate(&reports, 4, 4, 1.0).unwrap(), 8.0);
        assert!(cri_aggregate(&reports, 5, 4, 1.0).is_err());
    }

    #[test]
    fn noiseless_flags_debias_to_one() {
        let reports = vec![
            CriReport {
                sampled_bit: 0,
                flag: Flag::AllOnes
            };
            10
        ];
        let est = cri_aggregate(&reports, 10, 4, f64::INFINITY).unwrap();
        // θ̄ = 0, nΔπ = Σ flags = 10
        assert_eq!(est, 10.0);
    }

    fn one_rate(v: &EncodedVector, params: &CriParams, draws: u64) -> f64 {
        let stream = RngStream::new(3, 0, 0);
        let ones: u64 = (0..draws)
            .map(|u| {
                let mut rng = stream.for_user(u).rng(0);
                cri_client(v, params, &mut rng).unwrap().sampled_bit as u64
            })
            .sum();
        ones as f64 / draws as f64
    }

    #[test]
    fn sampling_probabilities() {
        let params = CriParams::new(5.0, 4).unwrap();
        let draws = 200_000;
        for (v, p) in [("1111", 0.75), ("1000", 0.25), ("0000", 0.25), ("1100", 0.5)] {
            let rate = one_rate(&bits(v), &params, draws);
            let sd = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((rate - p).abs() < 4.0 * sd, "{v}: {rate}");
        }
    }

    #[test]
    fn client_rejects_wrong_length() {
        let params = CriParams::new(5.0, 4).unwrap();
        let mut rng = RngStream::new(0, 0, 0).rng(0);
        assert!(cri_client(&bits("101"), &params, &mut rng).is_err());
    }

    #[test]
    fn flag_reflects_extremes_without_noise() {
        let params = CriParams::from_flag_budget(4, f64::INFINITY).unwrap();
        let mut rng = RngStream::new(0, 0, 0).rng(0);
        for (v, f) in [("1111", Flag::AllOnes), ("0000", Flag::AllZeros), ("0110", Flag::Neither)] {
            assert_eq!(cri_client(&bits(v), &params, &mut rng).unwrap().flag, f);
        }
    }

    #[test]
    fn tallies_merge() {
        let a = CriTally { n: 2, ones: 1, flag_sum: -1 };
        let b = CriTally { n: 3, ones: 2, flag_sum: 2 };
        assert_eq!(a.merge(b), CriTally { n: 5, ones: 3, flag_sum: 1 });
    }
}
