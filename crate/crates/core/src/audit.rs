//! Exact privacy audit on small domains.
//!
//! For each protocol the output law of every input is computed in closed
//! form (exact rationals for CRIAD), then the largest likelihood ratio over
//! all input pairs and outputs is compared with the claimed budget.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::baselines::rr_index_client;
use crate::cri::{cri_client, CriParams, Flag};
use crate::criad::{criad_client, exact_report_distribution_rational, implied_epsilon, ParamTriple, Partition};
use crate::domain::EncodedVector;
use crate::error::{invalid, Error, Result};
use crate::math::binomial_big;
use crate::mechanisms::RrConfig;

/// Largest `d` the auditor enumerates.
pub const MAX_AUDIT_D: usize = 12;
/// Largest `s` the auditor enumerates.
pub const MAX_AUDIT_S: usize = 4;

/// Comparison slack between measured and claimed log-ratios.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Protocol {
    Cri { epsilon_prime: f64 },
    /// `partition_seed` as in [`Partition::new`]; `0` is contiguous blocks.
    Criad { params: ParamTriple, partition_seed: u64 },
    RrIndex { epsilon: f64 },
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Cri { .. } => "CRI",
            Protocol::Criad { .. } => "CRIAD",
            Protocol::RrIndex { .. } => "RR",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Protocol::Cri { epsilon_prime } => format!("eps'={epsilon_prime}"),
            Protocol::Criad { params, .. } => format!("m={} s={} g={}", params.m, params.s, params.g),
            Protocol::RrIndex { epsilon } => format!("eps={epsilon}"),
        }
    }

    /// Budget the protocol claims for category size `d`.
    pub fn claimed_epsilon(&self, d: usize) -> Result<f64> {
        match self {
            Protocol::Cri { epsilon_prime } => Ok(CriParams::from_flag_budget(d, *epsilon_prime)?.epsilon()),
            Protocol::Criad { params, .. } => implied_epsilon(params, d),
            Protocol::RrIndex { epsilon } => Ok(*epsilon),
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        if !(2..=MAX_AUDIT_D).contains(&d) {
            return Err(Error::Intractable(format!("audit needs 2 <= d <= {MAX_AUDIT_D}, got {d}")));
        }
        match self {
            Protocol::Criad { params, .. } => {
                params.validate(d)?;
                if params.s > MAX_AUDIT_S {
                    return Err(Error::Intractable(format!("audit needs s <= {MAX_AUDIT_S}")));
                }
            }
            Protocol::Cri { epsilon_prime } => {
                CriParams::from_flag_budget(d, *epsilon_prime)?;
            }
            Protocol::RrIndex { epsilon } => {
                RrConfig::new(*epsilon)?;
            }
        }
        Ok(())
    }

    /// Runs the real client once and returns the canonical output label.
    pub fn run_client<R: Rng + ?Sized>(&self, input: &EncodedVector, rng: &mut R) -> Result<String> {
        let d = input.len();
        self.check(d)?;
        match self {
            Protocol::Cri { epsilon_prime } => {
                let p = CriParams::from_flag_budget(d, *epsilon_prime)?;
                let r = cri_client(input, &p, rng)?;
                Ok(cri_label(r.sampled_bit, r.flag))
            }
            Protocol::Criad { params, partition_seed } => {
                let part = Partition::new(d, params.g, *partition_seed)?;
                let r = criad_client(input, params, &part, rng)?;
                Ok(r.bits().iter().map(|b| if *b == 1 { '1' } else { '0' }).collect())
            }
            Protocol::RrIndex { epsilon } => {
                let cfg = RrConfig::new(*epsilon)?;
                Ok(if rr_index_client(input, &cfg, rng)? { "1" } else { "0" }.to_string())
            }
        }
    }
}

fn cri_label(bit: u8, flag: Flag) -> String {
    format!("{bit},{:+}", flag.value())
}

/// Exact output law of one input.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputDistribution {
    /// Canonical output label to probability, in label order.
    pub probs: BTreeMap<String, f64>,
    /// Rational probabilities when every factor is rational.
    pub exact: Option<BTreeMap<String, BigRational>>,
}

impl OutputDistribution {
    pub fn prob(&self, label: &str) -> f64 {
        self.probs.get(label).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }
}

fn rational(num: usize, den: usize) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn bit_strings(s: usize) -> impl Iterator<Item = String> {
    (0..1u32 << s).map(move |x| (0..s).map(|i| if x >> (s - 1 - i) & 1 == 1 { '1' } else { '0' }).collect())
}

/// Exact law of one CRIAD report given the ones count of every group.
fn criad_law(group_ones: &[usize], params: &ParamTriple, d: usize) -> Result<BTreeMap<String, BigRational>> {
    let s = params.s;
    let weight = rational(1, params.g);
    let mut per_k = vec![BigRational::zero(); s + 1];
    for &t in group_ones {
        for (k, p) in exact_report_distribution_rational(t, params, d)?.into_iter().enumerate() {
            per_k[k] += &weight * p;
        }
    }
    // every sequence with k ones is equally likely
    let split: Vec<BigRational> = per_k
        .into_iter()
        .enumerate()
        .map(|(k, p)| p / BigRational::from_integer(binomial_big(s, k).into()))
        .collect();
    Ok(bit_strings(s)
        .map(|seq| {
            let k = seq.bytes().filter(|&b| b == b'1').count();
            (seq, split[k].clone())
        })
        .collect())
}

/// Exact output law of `protocol` on `input`.
pub fn enumerate_distribution(protocol: &Protocol, input: &EncodedVector) -> Result<OutputDistribution> {
    let d = input.len();
    protocol.check(d)?;
    let t = input.ones();
    match protocol {
        Protocol::Cri { epsilon_prime } => {
            let p = CriParams::from_flag_budget(d, *epsilon_prime)?;
            let eff = p.effective_ones(t);
            let raw = p.raw_flag(t);
            let krr = p.flag_channel();
            let mut probs = BTreeMap::new();
            for bit in [0u8, 1] {
                let pb = if bit == 1 { eff as f64 / d as f64 } else { (d - eff) as f64 / d as f64 };
                for f in Flag::ALL {
                    probs.insert(cri_label(bit, f), pb * krr.transition(raw.symbol(), f.symbol()));
                }
            }
            Ok(OutputDistribution { probs, exact: None })
        }
        Protocol::Criad { params, partition_seed } => {
            let part = Partition::new(d, params.g, *partition_seed)?;
            let positions: Vec<u32> = (0..d as u32).filter(|&i| input.bits()[i as usize] == 1).collect();
            let mut counts = vec![0; params.g];
            part.group_counts(&positions, &mut counts);
            let exact = criad_law(&counts, params, d)?;
            let probs = exact.iter().map(|(k, v)| (k.clone(), v.to_f64().unwrap_or(0.0))).collect();
            Ok(OutputDistribution {
                probs,
                exact: Some(exact),
            })
        }
        Protocol::RrIndex { epsilon } => {
            let keep = RrConfig::new(*epsilon)?.keep_probability();
            let f = t as f64 / d as f64;
            let one = keep * f + (1.0 - keep) * (1.0 - f);
            let probs = BTreeMap::from([("0".to_string(), 1.0 - one), ("1".to_string(), one)]);
            Ok(OutputDistribution { probs, exact: None })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub numerator_input: EncodedVector,
    pub denominator_input: EncodedVector,
    pub output: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditVerdict {
    pub protocol: Protocol,
    pub d: usize,
    pub max_log_ratio: f64,
    pub claimed_epsilon: f64,
    pub witness: Witness,
    pub pass: bool,
}

impl AuditVerdict {
    /// The claimed budget is attained, not just respected.
    pub fn tight(&self) -> bool {
        (self.max_log_ratio - self.claimed_epsilon).abs() <= TOLERANCE
    }
}

fn vector_of(x: u32, d: usize) -> EncodedVector {
    EncodedVector::from_bits((0..d).map(|i| (x >> i & 1) as u8).collect()).expect("bits are 0/1")
}

/// One representative input per output law. For CRI, RR and CRIAD with one
/// group the law depends only on the ones count; CRIAD with groups depends on
/// the per-group counts.
fn representatives(protocol: &Protocol, d: usize) -> Result<Vec<EncodedVector>> {
    match protocol {
        Protocol::Criad { params, partition_seed } if params.g > 1 => {
            let part = Partition::new(d, params.g, *partition_seed)?;
            let mut seen: BTreeMap<Vec<usize>, EncodedVector> = BTreeMap::new();
            let mut counts = vec![0; params.g];
            for x in 0..1u32 << d {
                let v = vector_of(x, d);
                let pos: Vec<u32> = (0..d as u32).filter(|&i| x >> i & 1 == 1).collect();
                part.group_counts(&pos, &mut counts);
                seen.entry(counts.clone()).or_insert(v);
            }
            Ok(seen.into_values().collect())
        }
        _ => Ok((0..=d)
            .map(|t| EncodedVector::from_bits((0..d).map(|i| (i < t) as u8).collect()).expect("bits are 0/1"))
            .collect()),
    }
}

/// Largest log-likelihood ratio over all inputs of length `d` and all
/// outputs, against the claimed budget.
pub fn audit(protocol: &Protocol, d: usize) -> Result<AuditVerdict> {
    protocol.check(d)?;
    let claimed = protocol.claimed_epsilon(d)?;
    let inputs = representatives(protocol, d)?;
    let laws: Vec<OutputDistribution> = inputs
        .par_iter()
        .map(|v| enumerate_distribution(protocol, v))
        .collect::<Result<_>>()?;
    for law in &laws {
        if (law.total() - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("output law sums to {}", law.total())));
        }
    }

    // (log ratio, a, b, output)
    let mut best: Option<(f64, usize, usize, String)> = None;
    let labels: Vec<&String> = laws[0].probs.keys().collect();
    for (a, la) in laws.iter().enumerate() {
        for (b, lb) in laws.iter().enumerate() {
            if a == b {
                continue;
            }
            for &out in &labels {
                let lr = log_ratio(la, lb, out);
                if best.as_ref().map_or(true, |(x, ..)| lr > *x) {
                    best = Some((lr, a, b, out.clone()));
                }
            }
        }
    }
    let (max_log_ratio, a, b, output) = match best {
        Some(x) => x,
        // a single law: every ratio is 1
        None => (0.0, 0, 0, labels[0].clone()),
    };
    Ok(AuditVerdict {
        protocol: protocol.clone(),
        d,
        max_log_ratio,
        claimed_epsilon: claimed,
        witness: Witness {
            numerator_input: inputs[a].clone(),
            denominator_input: inputs[b].clone(),
            output,
        },
        pass: max_log_ratio <= claimed + TOLERANCE,
    })
}

fn log_ratio(a: &OutputDistribution, b: &OutputDistribution, out: &str) -> f64 {
    if let (Some(ea), Some(eb)) = (&a.exact, &b.exact) {
        let (pa, pb) = (&ea[out], &eb[out]);
        return match (pa.is_zero(), pb.is_zero()) {
            (true, _) => f64::NEG_INFINITY,
            (false, true) => f64::INFINITY,
            // ratio of exact rationals, so equality with the claim is not a
            // rounding artifact
            _ => (pa / pb).to_f64().map_or(f64::INFINITY, f64::ln),
        };
    }
    let (pa, pb) = (a.prob(out), b.prob(out));
    if pa == 0.0 {
        f64::NEG_INFINITY
    } else if pb == 0.0 {
        f64::INFINITY
    } else {
        pa.ln() - pb.ln()
    }
}
