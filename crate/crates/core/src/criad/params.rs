use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{CategoryView, PiDistribution};
use crate::error::{invalid, Result};
use crate::math::ln_binomial;

/// Dummies `m`, samples `s` and groups `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamTriple {
    pub m: usize,
    pub s: usize,
    pub g: usize,
}

impl ParamTriple {
    /// Validates `g | d` and `1 <= s <= m <= d/g`.
    pub fn new(m: usize, s: usize, g: usize, d: usize) -> Result<Self> {
        let p = Self { m, s, g };
        p.validate(d)?;
        Ok(p)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let Self { m, s, g } = *self;
        if d < 2 {
            return Err(invalid(format!("category size must be >= 2, got {d}")));
        }
        if g == 0 || d % g != 0 {
            return Err(invalid(format!("g = {g} must divide d = {d}")));
        }
        if s == 0 || s > m || m > d / g {
            return Err(invalid(format!(
                "need 1 <= s <= m <= d/g, got s = {s}, m = {m}, d/g = {}",
                d / g
            )));
        }
        Ok(())
    }

    /// Group size `d/g`.
    pub fn group_len(&self, d: usize) -> usize {
        d / self.g
    }

    /// Ones a group may hold before suppression kicks in, `d/g - m`.
    pub fn ones_cap(&self, d: usize) -> usize {
        d / self.g - self.m
    }
}

impl std::fmt::Display for ParamTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.m, self.s, self.g)
    }
}

/// `ln(C(d/g, s) / C(m, s))`.
pub fn implied_epsilon(params: &ParamTriple, d: usize) -> Result<f64> {
    params.validate(d)?;
    Ok(ln_binomial(d / params.g, params.s) - ln_binomial(params.m, params.s))
}

/// `n (d + g m)² / (4 s)`.
pub fn variance_bound(params: &ParamTriple, d: usize, n: usize) -> f64 {
    let width = (d + params.g * params.m) as f64;
    n as f64 * width * width / (4.0 * params.s as f64)
}

/// Expected undercount from suppression predicted by the count
/// distribution: `n Σ_{t > d - mg} π_t (t - d + mg)`.
pub fn expected_bias(pi: &PiDistribution, params: &ParamTriple, d: usize, n: usize) -> Result<f64> {
    if pi.d() != d {
        return Err(invalid(format!("pi is over 0..={}, expected d = {d}", pi.d())));
    }
    let mg = params.m * params.g;
    if mg > d {
        return Err(invalid("m g exceeds d"));
    }
    let start = d - mg + 1;
    let sum: f64 = pi.probs()[start.min(d + 1)..]
        .iter()
        .enumerate()
        .map(|(i, p)| p * (start + i - (d - mg)) as f64)
        .sum();
    Ok(n as f64 * sum)
}

/// Exact expected undercount for the users of `view` under `partition`:
/// each user loses `max(0, t_r - (d/g - m))` ones in every group `r`, and
/// the estimator averages over groups with weight `g · 1/g`.
pub fn exact_suppression_bias(view: &CategoryView, params: &ParamTriple, partition: &Partition) -> f64 {
    let cap = params.ones_cap(view.d());
    let mut counts = vec![0usize; params.g];
    let mut total = 0u64;
    for u in 0..view.n() {
        partition.group_counts(view.positions(u), &mut counts);
        total += counts.iter().map(|&c| c.saturating_sub(cap) as u64).sum::<u64>();
    }
    total as f64
}

/// Assignment of the `d` category positions to `g` groups of `d/g`.
///
/// Seed `0` gives contiguous blocks; any other seed first shuffles the
/// positions deterministically, then cuts contiguous blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    g: usize,
    group_len: usize,
    /// `members[r * group_len + j]` is the `j`-th position of group `r`.
    members: Vec<u32>,
    group_of: Vec<u32>,
}

impl Partition {
    pub fn new(d: usize, g: usize, seed: u64) -> Result<Self> {
        if g == 0 || d % g != 0 {
            return Err(invalid(format!("g = {g} must divide d = {d}")));
        }
        let mut members: Vec<u32> = (0..d as u32).collect();
        if seed != 0 {
            members.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        let group_len = d / g;
        let mut group_of = vec![0u32; d];
        for (i, &p) in members.iter().enumerate() {
            group_of[p as usize] = (i / group_len) as u32;
        }
        for block in members.chunks_mut(group_len) {
            block.sort_unstable();
        }
        Ok(Self {
            g,
            group_len,
            members,
            group_of,
        })
    }

    pub fn contiguous(d: usize, g: usize) -> Result<Self> {
        Self::new(d, g, 0)
    }

    pub fn groups(&self) -> usize {
        self.g
    }

    pub fn d(&self) -> usize {
        self.group_of.len()
    }

    pub fn group_len(&self) -> usize {
        self.group_len
    }

    /// Sorted category positions of group `r`.
    pub fn members(&self, r: usize) -> &[u32] {
        &self.members[r * self.group_len..(r + 1) * self.group_len]
    }

    pub fn group_of(&self, position: usize) -> usize {
        self.group_of[position] as usize
    }

    /// Ones per group for a user holding `positions`.
    pub fn group_counts(&self, positions: &[u32], counts: &mut [usize]) {
        counts.iter_mut().for_each(|c| *c = 0);
        for &p in positions {
            counts[self.group_of[p as usize] as usize] += 1;
        }
    }

    /// Ones of `positions` inside group `r`.
    #[inline]
    pub fn ones_in_group(&self, positions: &[u32], r: usize) -> usize {
        positions
            .iter()
            .filter(|&&p| self.group_of[p as usize] as usize == r)
            .count()
    }
}

/// What the collector sends every user before collection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Broadcast {
    pub params: ParamTriple,
    pub partition_seed: u64,
}

impl std::fmt::Display for Broadcast {
    /// `m=<m>;s=<s>;g=<g>;partition_seed=<seed>`
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "m={};s={};g={};partition_seed={}",
            self.params.m, self.params.s, self.params.g, self.partition_seed
        )
    }
}

impl std::str::FromStr for Broadcast {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut fields = [None; 4];
        for part in s.split(';') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| invalid(format!("bad broadcast field {part:?}")))?;
            let idx = match k.trim() {
                "m" => 0,
                "s" => 1,
                "g" => 2,
                "partition_seed" => 3,
                other => return Err(invalid(format!("unknown broadcast field {other:?}"))),
            };
            let v: u64 = v
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad broadcast value {v:?}")))?;
            fields[idx] = Some(v);
        }
        match fields {
            [Some(m), Some(s), Some(g), Some(seed)] => Ok(Broadcast {
                params: ParamTriple {
                    m: m as usize,
                    s: s as usize,
                    g: g as usize,
                },
                partition_seed: seed,
            }),
            _ => Err(invalid(format!("incomplete broadcast {s:?}"))),
        }
    }
}
