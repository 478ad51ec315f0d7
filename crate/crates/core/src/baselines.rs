//! Competitor methods: naive value perturbation (NVP) of each user's count,
//! padding-and-sampling (PSP) with OLH, and randomized response on one
//! sampled index.

use rand::seq::index;
use rand::Rng;

use crate::domain::{CategoryView, EncodedVector};
use crate::error::{check_epsilon, invalid, Result};
use crate::mechanisms::{
    olh_estimate, olh_estimate_range, LaplaceConfig, OlhConfig, OlhReport, OlhReports, PiecewiseConfig, RrConfig,
    SwConfig, SwReconstructor,
};
use crate::rng::{tag, RngStream};

const LM_TAG: u64 = tag("nvp/lm");
const PM_TAG: u64 = tag("nvp/pm");
const SW_TAG: u64 = tag("nvp/sw");
const PSP_SPLIT_TAG: u64 = tag("psp/split");
const PSP_LENGTH_TAG: u64 = tag("psp/length");
const PSP_ITEM_TAG: u64 = tag("psp/item");
const RR_TAG: u64 = tag("rr/client");

/// Which mechanism perturbs the per-user count in NVP.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NvpVariant {
    /// `t + Laplace(d/ε)`.
    Lm,
    /// Piecewise mechanism on `2t/d - 1`.
    Pm,
    /// Square Wave on `t/d`, mean of the reconstructed distribution.
    Sw,
}

/// Sum of perturbed per-user counts. `stream` is the trial-level stream.
pub fn nvp_run(view: &CategoryView, epsilon: f64, variant: NvpVariant, stream: &RngStream) -> Result<f64> {
    check_epsilon(epsilon)?;
    let d = view.d() as f64;
    let n = view.n();
    let user_rng = |u: usize, t: u64| stream.for_user(u as u64).rng(t);
    match variant {
        NvpVariant::Lm => {
            let lm = LaplaceConfig::new(d, epsilon)?;
            Ok((0..n)
                .map(|u| view.ones(u) as f64 + lm.noise(&mut user_rng(u, LM_TAG)))
                .sum())
        }
        NvpVariant::Pm => {
            let pm = PiecewiseConfig::new(epsilon)?;
            Ok((0..n)
                .map(|u| {
                    let v = 2.0 * view.ones(u) as f64 / d - 1.0;
                    let y = pm.perturb(v, &mut user_rng(u, PM_TAG));
                    d * (y + 1.0) / 2.0
                })
                .sum())
        }
        NvpVariant::Sw => {
            if n == 0 {
                return Ok(0.0);
            }
            let cfg = SwConfig::for_counts(epsilon, view.d())?;
            let sampler = cfg.sampler();
            let recon = SwReconstructor::new(cfg)?;
            let reports: Vec<f64> = (0..n)
                .map(|u| sampler.perturb(view.ones(u) as f64 / d, &mut user_rng(u, SW_TAG)))
                .collect();
            let grid = recon.reconstruct(&reports)?;
            let step = 1.0 / (cfg.buckets - 1) as f64;
            let mean: f64 = grid
                .probs()
                .iter()
                .enumerate()
                .map(|(i, p)| p * i as f64 * step)
                .sum();
            Ok(n as f64 * d * mean)
        }
    }
}

/// Padding length and user split for PSP.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PspConfig {
    /// Fixed padding length; `None` estimates it from a user sample.
    pub eta: Option<usize>,
    pub percentile: f64,
    pub length_fraction: f64,
}

impl Default for PspConfig {
    fn default() -> Self {
        Self {
            eta: None,
            percentile: 0.9,
            length_fraction: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PspOutcome {
    pub estimate: f64,
    pub eta: usize,
    pub participants: usize,
}

/// PSP client: pad the in-category items with `⊥_{t+1}, ..., ⊥_η` (or keep a
/// uniform `η`-subset), pick one element uniformly and report it through OLH
/// over the `d + η` symbols. Real item at position `p` is symbol `p`,
/// `⊥_j` is symbol `d + j - 1`.
pub fn psp_client<R: Rng + ?Sized>(
    positions: &[u32],
    d: usize,
    eta: usize,
    olh: &OlhConfig,
    rng: &mut R,
) -> Result<OlhReport> {
    if eta == 0 {
        return Err(invalid("padding length must be at least 1"));
    }
    if positions.iter().any(|&p| p as usize >= d) {
        return Err(invalid("item position outside the category"));
    }
    let t = positions.len();
    let symbol = if t >= eta {
        // a uniform element of a uniform η-subset is a uniform element
        let kept = index::sample(rng, t, eta);
        positions[kept.index(rng.gen_range(0..eta))] as u64
    } else {
        let j = rng.gen_range(0..eta);
        if j < t {
            positions[j] as u64
        } else {
            (d + j) as u64
        }
    };
    Ok(olh.perturb(symbol, rng))
}

/// Smallest `η` whose estimated CDF reaches `percentile`, from debiased
/// per-length counts. Negative counts are clipped first.
pub fn padding_length(length_counts: &[f64], percentile: f64) -> usize {
    let clipped: Vec<f64> = length_counts.iter().map(|c| c.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return 0;
    }
    let mut acc = 0.0;
    for (len, c) in clipped.iter().enumerate() {
        acc += c / total;
        if acc >= percentile - 1e-12 {
            return len;
        }
    }
    clipped.len() - 1
}

/// Padding-and-sampling with OLH. `stream` is the trial-level stream.
pub fn psp_run(view: &CategoryView, epsilon: f64, cfg: &PspConfig, stream: &RngStream) -> Result<PspOutcome> {
    check_epsilon(epsilon)?;
    let n = view.n();
    let d = view.d();
    if n == 0 {
        return Err(invalid("no users"));
    }
    let olh = OlhConfig::new(epsilon)?;
    let (eta, users): (usize, Vec<usize>) = match cfg.eta {
        Some(eta) => {
            if eta == 0 || eta > d {
                return Err(invalid(format!("padding length {eta} must lie in 1..={d}")));
            }
            (eta, (0..n).collect())
        }
        None => {
            if !(cfg.length_fraction > 0.0 && cfg.length_fraction < 1.0) || n < 2 {
                return Err(invalid("length reporters need a fraction in (0, 1) and n >= 2"));
            }
            let k = ((n as f64 * cfg.length_fraction).round() as usize).clamp(1, n - 1);
            let mut sample = index::sample(&mut stream.rng(PSP_SPLIT_TAG), n, k).into_vec();
            sample.sort_unstable();
            let mut in_sample = vec![false; n];
            sample.iter().for_each(|&u| in_sample[u] = true);
            let reports: OlhReports = sample
                .iter()
                .map(|&u| olh.perturb(view.ones(u) as u64, &mut stream.for_user(u as u64).rng(PSP_LENGTH_TAG)))
                .collect();
            let eta = padding_length(&olh_estimate(&reports, d + 1, &olh), cfg.percentile);
            let eta = if eta == 0 {
                log::warn!("estimated padding length is 0; using 1");
                1
            } else {
                eta
            };
            (eta, (0..n).filter(|&u| !in_sample[u]).collect())
        }
    };
    let mut reports = OlhReports::with_capacity(users.len());
    for &u in &users {
        let mut rng = stream.for_user(u as u64).rng(PSP_ITEM_TAG);
        reports.push(psp_client(view.positions(u), d, eta, &olh, &mut rng)?);
    }
    let per_item = olh_estimate_range(&reports, 0..d, &olh);
    let sum: f64 = per_item.iter().sum();
    Ok(PspOutcome {
        estimate: sum * eta as f64 * n as f64 / users.len() as f64,
        eta,
        participants: users.len(),
    })
}

/// One uniformly sampled bit, perturbed by binary RR with the full budget.
pub fn rr_index_client<R: Rng + ?Sized>(vector: &EncodedVector, cfg: &RrConfig, rng: &mut R) -> Result<bool> {
    if vector.is_empty() {
        return Err(invalid("empty vector"));
    }
    let z = rng.gen_range(0..vector.len());
    Ok(cfg.perturb(vector.bits()[z] == 1, rng))
}

/// `n d f̂` with `f̂` the debiased fraction of reported ones.
pub fn rr_index_aggregate(ones: u64, n: usize, d: usize, cfg: &RrConfig) -> f64 {
    if n == 0 {
        return 0.0;
    }
    n as f64 * d as f64 * cfg.debias_fraction(ones as f64 / n as f64)
}

/// RR over a sampled index. `stream` is the trial-level stream.
pub fn rr_index_run(view: &CategoryView, epsilon: f64, stream: &RngStream) -> Result<f64> {
    let cfg = RrConfig::new(epsilon)?;
    let d = view.d();
    let ones = (0..view.n())
        .filter(|&u| {
            let mut rng = stream.for_user(u as u64).rng(RR_TAG);
            let bit = rng.gen_range(0..d) < view.ones(u);
            cfg.perturb(bit, &mut rng)
        })
        .count() as u64;
    Ok(rr_index_aggregate(ones, view.n(), d, &cfg))
}
