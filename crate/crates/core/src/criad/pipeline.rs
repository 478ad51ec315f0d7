use rand::seq::index;
use rand::Rng;

use super::client::sample_ones;
use super::params::{Broadcast, ParamTriple, Partition};
use super::select::{select_params, ParamSearch};
use super::CriadTally;
use crate::domain::{CategoryView, PiDistribution};
use crate::error::{check_epsilon, invalid, Result};
use crate::mechanisms::{SwConfig, SwReconstructor};
use crate::rng::{tag, RngStream};

const SPLIT_TAG: u64 = tag("criad/split");
const SW_TAG: u64 = tag("criad/sw");
const PARTITION_TAG: u64 = tag("criad/partition");
const CLIENT_TAG: u64 = tag("criad/client");

/// Fewer prelude users than this gives a noisy `π̂`; we warn but go on.
const MIN_SAMPLE: usize = 100;

/// Output of the `π_t` estimation prelude.
#[derive(Clone, Debug)]
pub struct PiEstimate {
    pub pi: PiDistribution,
    /// Users who reported through SW, ascending.
    pub sample: Vec<usize>,
    /// Everyone else, ascending.
    pub remainder: Vec<usize>,
}

/// Splits off a uniformly random `sample_fraction` of users, has each report
/// `t/d` through Square Wave with the full budget, and reconstructs `π̂`.
///
/// `stream` is the trial-level stream; user `u` draws from
/// `stream.for_user(u)`.
pub fn estimate_pi_pipeline(
    view: &CategoryView,
    sample_fraction: f64,
    sw: &SwConfig,
    stream: &RngStream,
) -> Result<PiEstimate> {
    let n = view.n();
    if n < 2 {
        return Err(invalid("the prelude needs at least two users"));
    }
    if !(sample_fraction > 0.0 && sample_fraction < 1.0) {
        return Err(invalid(format!("sample fraction {sample_fraction} must lie in (0, 1)")));
    }
    let k = ((n as f64 * sample_fraction).round() as usize).clamp(1, n - 1);
    if k < MIN_SAMPLE {
        log::warn!("only {k} users estimate pi; the parameter choice will be noisy");
    }
    let mut sample = index::sample(&mut stream.rng(SPLIT_TAG), n, k).into_vec();
    sample.sort_unstable();
    let mut in_sample = vec![false; n];
    sample.iter().for_each(|&u| in_sample[u] = true);
    let remainder: Vec<usize> = (0..n).filter(|&u| !in_sample[u]).collect();

    let d = view.d();
    let sampler = sw.sampler();
    let recon = SwReconstructor::new(*sw)?;
    let reports: Vec<f64> = sample
        .iter()
        .map(|&u| {
            let mut rng = stream.for_user(u as u64).rng(SW_TAG);
            sampler.perturb(view.ones(u) as f64 / d as f64, &mut rng)
        })
        .collect();
    let grid = recon.reconstruct(&reports)?;
    let pi = grid_to_counts(&grid, d, sw)?;
    Ok(PiEstimate {
        pi,
        sample,
        remainder,
    })
}

/// Spreads each grid point's mass evenly over the counts `t` that round to
/// it. With `B = d + 1` this is the identity.
fn grid_to_counts(grid: &PiDistribution, d: usize, sw: &SwConfig) -> Result<PiDistribution> {
    let probs = grid.probs();
    if probs.len() == d + 1 {
        return Ok(grid.clone());
    }
    let owner: Vec<usize> = (0..=d).map(|t| sw.bucket_of(t as f64 / d as f64)).collect();
    let mut members = vec![0usize; probs.len()];
    owner.iter().for_each(|&b| members[b] += 1);
    let weights = owner
        .iter()
        .map(|&b| probs[b] / members[b] as f64)
        .collect();
    PiDistribution::from_weights(weights)
}

/// How a CRIAD run chooses its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct CriadOptions {
    pub sample_fraction: f64,
    pub sw_smoothing: f64,
    pub sw_iterations: usize,
    pub search: ParamSearch,
    /// Skip the prelude and use these parameters for every user.
    pub params: Option<ParamTriple>,
    /// Skip the prelude and select parameters from the exact `π`.
    pub exact_pi: bool,
    /// Fixed partition seed; by default one is drawn per trial.
    pub partition_seed: Option<u64>,
}

impl Default for CriadOptions {
    fn default() -> Self {
        Self {
            sample_fraction: 0.1,
            sw_smoothing: 1.0,
            sw_iterations: 1000,
            search: ParamSearch::default(),
            params: None,
            exact_pi: false,
            partition_seed: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriadOutcome {
    pub estimate: f64,
    pub broadcast: Broadcast,
    /// `π` the parameters were chosen from, if any.
    pub pi: Option<PiDistribution>,
    /// Users whose reports entered the estimate.
    pub participants: usize,
}

/// End-to-end CRIAD for one trial: optional `π̂` prelude, parameter
/// selection, collection from the remaining users, and rescaling to `n`.
pub fn simulate(view: &CategoryView, epsilon: f64, options: &CriadOptions, stream: &RngStream) -> Result<CriadOutcome> {
    check_epsilon(epsilon)?;
    let d = view.d();
    let n = view.n();
    if n == 0 {
        return Err(invalid("no users"));
    }
    let (params, pi, users): (ParamTriple, Option<PiDistribution>, Option<Vec<usize>>) =
        if let Some(p) = options.params {
            p.validate(d)?;
            (p, None, None)
        } else if options.exact_pi {
            let pi = view.pi()?;
            let p = select_params(d, epsilon, &pi, n, &options.search)?;
            (p, Some(pi), None)
        } else {
            let sw = SwConfig::for_counts(epsilon, d)?
                .with_smoothing(options.sw_smoothing)
                .with_iterations(options.sw_iterations);
            let est = estimate_pi_pipeline(view, options.sample_fraction, &sw, stream)?;
            let p = select_params(d, epsilon, &est.pi, est.remainder.len(), &options.search)?;
            (p, Some(est.pi), Some(est.remainder))
        };

    let partition_seed = options
        .partition_seed
        .unwrap_or_else(|| stream.key(PARTITION_TAG) | 1);
    let partition = Partition::new(d, params.g, partition_seed)?;
    let tally = match &users {
        Some(us) => collect(view, us.iter().copied(), &params, &partition, stream),
        None => collect(view, 0..n, &params, &partition, stream),
    };
    let participants = tally.n as usize;
    let estimate = tally.estimate(&params, d) * n as f64 / participants as f64;
    Ok(CriadOutcome {
        estimate,
        broadcast: Broadcast {
            params,
            partition_seed,
        },
        pi,
        participants,
    })
}

/// Runs the client for each listed user and sums report ones.
pub(crate) fn collect(
    view: &CategoryView,
    users: impl Iterator<Item = usize>,
    params: &ParamTriple,
    partition: &Partition,
    stream: &RngStream,
) -> CriadTally {
    let d = view.d();
    let mut tally = CriadTally::default();
    for u in users {
        let mut rng = stream.for_user(u as u64).rng(CLIENT_TAG);
        let t = if params.g == 1 {
            view.ones(u)
        } else {
            let r = rng.gen_range(0..params.g);
            partition.ones_in_group(view.positions(u), r)
        };
        tally.add_ones(sample_ones(params, d, t, &mut rng));
    }
    tally
}
