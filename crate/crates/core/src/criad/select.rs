use super::params::{expected_bias, implied_epsilon, variance_bound, ParamTriple};
use crate::domain::PiDistribution;
use crate::error::{check_epsilon, invalid, Error, Result};
use crate::math::{divisors, ln_binomial};

/// Slack on the privacy constraint so that exact boundary cases
/// (e.g. `ε = ln 4` with `d = 4, m = s = 1`) stay feasible.
const FEASIBILITY_SLACK: f64 = 1e-12;

/// Search space for [`select_params`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamSearch {
    pub s_max: usize,
    /// Restrict to one group count.
    pub g: Option<usize>,
    /// Restrict to one sample count.
    pub s: Option<usize>,
}

impl Default for ParamSearch {
    fn default() -> Self {
        Self {
            s_max: 64,
            g: None,
            s: None,
        }
    }
}

impl ParamSearch {
    pub fn fixed(s: usize, g: usize) -> Self {
        Self {
            s_max: s,
            g: Some(g),
            s: Some(s),
        }
    }
}

/// `n (d + g m)² / (4 s) + (bias)²`.
pub fn objective(params: &ParamTriple, d: usize, n: usize, pi: &PiDistribution) -> Result<f64> {
    params.validate(d)?;
    let bias = expected_bias(pi, params, d, n)?;
    Ok(variance_bound(params, d, n) + bias * bias)
}

fn feasible(d: usize, g: usize, s: usize, m: usize, epsilon: f64) -> bool {
    ln_binomial(d / g, s) - ln_binomial(m, s) <= epsilon + FEASIBILITY_SLACK
}

/// Smallest `m ∈ s..=d/g` meeting the budget. The implied ε falls as `m`
/// grows and is `0` at `m = d/g`, so this always exists.
fn min_feasible_m(d: usize, g: usize, s: usize, epsilon: f64) -> usize {
    let (mut lo, mut hi) = (s, d / g);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(d, g, s, mid, epsilon) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Minimizes the objective over `(m, s, g)` subject to
/// `ln(C(d/g, s) / C(m, s)) ≤ ε`.
///
/// For fixed `(g, s)` the objective never decreases in `m`, so only the
/// smallest feasible `m` is scored. Ties go to the smallest `g`, then `s`,
/// then `m`.
pub fn select_params(
    d: usize,
    epsilon: f64,
    pi_hat: &PiDistribution,
    n: usize,
    search: &ParamSearch,
) -> Result<ParamTriple> {
    check_epsilon(epsilon)?;
    if d < 2 {
        return Err(invalid(format!("category size must be >= 2, got {d}")));
    }
    if pi_hat.d() != d {
        return Err(invalid(format!("pi is over 0..={}, expected d = {d}", pi_hat.d())));
    }
    if search.s_max == 0 {
        return Err(invalid("s_max must be at least 1"));
    }
    let groups = match search.g {
        Some(g) if g == 0 || d % g != 0 => {
            return Err(invalid(format!("g = {g} must divide d = {d}")));
        }
        Some(g) => vec![g],
        None => divisors(d),
    };
    let mut best: Option<(f64, ParamTriple)> = None;
    for g in groups {
        let len = d / g;
        let samples = match search.s {
            Some(s) => s..=s,
            None => 1..=search.s_max,
        };
        for s in samples {
            if s > len {
                break;
            }
            let m = min_feasible_m(d, g, s, epsilon);
            let params = ParamTriple { m, s, g };
            let score = objective(&params, d, n, pi_hat)?;
            if best.map_or(true, |(b, _)| score < b) {
                best = Some((score, params));
            }
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::InvalidParameter(format!("no admissible (s, g) for d = {d}")))
}

/// Whether `params` meets the budget, using the same slack as the search.
pub fn satisfies_budget(params: &ParamTriple, d: usize, epsilon: f64) -> Result<bool> {
    Ok(implied_epsilon(params, d)? <= epsilon + FEASIBILITY_SLACK)
}
