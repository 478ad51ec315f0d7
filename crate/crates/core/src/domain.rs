//! Item domains, categories, user records and their bit-vector encoding.

use crate::error::{invalid, Error, Result};

pub type ItemId = u32;

/// The item universe `1..=size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ItemDomain {
    size: u32,
}

impl ItemDomain {
    pub fn new(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(invalid("item domain must contain at least one item"));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn contains(&self, id: ItemId) -> bool {
        (1..=self.size).contains(&id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum CategoryIds {
    Range { lo: ItemId, hi: ItemId },
    List(Vec<ItemId>),
}

/// The queried subset of the item domain.
///
/// Bit position `l` (0-based) of an encoded vector corresponds to the `l`-th
/// smallest id of the category, i.e. id `lo + l` for a contiguous range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Category {
    ids: CategoryIds,
}

impl Category {
    /// Contiguous inclusive id range `[lo, hi]`.
    pub fn range(lo: ItemId, hi: ItemId) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(invalid(format!("bad category range [{lo}, {hi}]")));
        }
        if hi - lo + 1 < 2 {
            return Err(invalid("category must contain at least two items"));
        }
        Ok(Self {
            ids: CategoryIds::Range { lo, hi },
        })
    }

    /// Arbitrary id set. Ids are sorted and deduplicated.
    pub fn from_ids(mut ids: Vec<ItemId>) -> Result<Self> {
        ids.sort_unstable();
        ids.dedup();
        if ids.first() == Some(&0) {
            return Err(invalid("item ids are 1-based"));
        }
        if ids.len() < 2 {
            return Err(invalid("category must contain at least two items"));
        }
        Ok(Self {
            ids: CategoryIds::List(ids),
        })
    }

    /// Checks that every id of the category lies in `domain`.
    pub fn validate(&self, domain: ItemDomain) -> Result<()> {
        let max = match &self.ids {
            CategoryIds::Range { hi, .. } => *hi,
            CategoryIds::List(ids) => *ids.last().unwrap(),
        };
        if domain.contains(max) {
            Ok(())
        } else {
            Err(invalid(format!(
                "category reaches item {max} outside domain of size {}",
                domain.size()
            )))
        }
    }

    /// Sub-domain size `d`.
    pub fn len(&self) -> usize {
        match &self.ids {
            CategoryIds::Range { lo, hi } => (hi - lo + 1) as usize,
            CategoryIds::List(ids) => ids.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bit position of `id` within the category, if it belongs to it.
    pub fn position(&self, id: ItemId) -> Option<usize> {
        match &self.ids {
            CategoryIds::Range { lo, hi } => {
                (*lo..=*hi).contains(&id).then(|| (id - lo) as usize)
            }
            CategoryIds::List(ids) => ids.binary_search(&id).ok(),
        }
    }

    /// `(lo, hi)` for range categories.
    pub fn bounds(&self) -> Option<(ItemId, ItemId)> {
        match &self.ids {
            CategoryIds::Range { lo, hi } => Some((*lo, *hi)),
            CategoryIds::List(_) => None,
        }
    }

    /// Number of the record's items inside the category.
    pub fn count_in(&self, record: &UserItemSet) -> usize {
        match &self.ids {
            CategoryIds::Range { lo, hi } => {
                let items = record.items();
                let a = items.partition_point(|&x| x < *lo);
                let b = items.partition_point(|&x| x <= *hi);
                b - a
            }
            CategoryIds::List(_) => record
                .items()
                .iter()
                .filter(|&&id| self.position(id).is_some())
                .count(),
        }
    }
}

/// One user's private items: strictly increasing ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UserItemSet {
    items: Vec<ItemId>,
}

impl UserItemSet {
    /// Builds a set from arbitrary ids; sorts and removes duplicates.
    pub fn new(mut items: Vec<ItemId>) -> Self {
        items.sort_unstable();
        items.dedup();
        Self { items }
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl FromIterator<ItemId> for UserItemSet {
    fn from_iter<I: IntoIterator<Item = ItemId>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// A 0/1 vector, one byte per bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedVector {
    bits: Vec<u8>,
}

impl EncodedVector {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(invalid("encoded vector entries must be 0 or 1"));
        }
        Ok(Self { bits })
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    /// Parses a string such as `"1000"`.
    pub fn parse(s: &str) -> Result<Self> {
        s.bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(invalid(format!("not a bit string: {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(|bits| Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }
}

impl std::fmt::Display for EncodedVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// All users' records over a common item domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    domain: ItemDomain,
    records: Vec<UserItemSet>,
}

impl Dataset {
    pub fn new(domain: ItemDomain, records: Vec<UserItemSet>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if let Some(&id) = r.items().last() {
                if !domain.contains(id) {
                    return Err(invalid(format!(
                        "user {i} holds item {id} outside domain of size {}",
                        domain.size()
                    )));
                }
            }
        }
        Ok(Self { domain, records })
    }

    pub fn domain(&self) -> ItemDomain {
        self.domain
    }

    pub fn records(&self) -> &[UserItemSet] {
        &self.records
    }

    /// Number of users `n`.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Encodes the record's items that fall in `category` as a length-`d` bit
/// vector.
pub fn filter_and_encode(record: &UserItemSet, category: &Category) -> EncodedVector {
    let mut bits = vec![0u8; category.len()];
    for &id in record.items() {
        if let Some(pos) = category.position(id) {
            bits[pos] = 1;
        }
    }
    EncodedVector { bits }
}

/// Ground-truth subset count `Q(c)`: total number of category items over all
/// users.
pub fn true_subset_count(dataset: &Dataset, category: &Category) -> u64 {
    dataset
        .records()
        .iter()
        .map(|r| category.count_in(r) as u64)
        .sum()
}

/// Population distribution of per-user ones counts, indexed by `t ∈ 0..=d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiDistribution {
    probs: Vec<f64>,
}

impl PiDistribution {
    /// Accepts any non-negative weights and normalizes them.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("pi distribution"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("pi weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(invalid("pi weights sum to zero"));
        }
        Ok(Self {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Clips negative entries to zero, then normalizes.
    pub fn from_signed_weights(weights: Vec<f64>) -> Result<Self> {
        Self::from_weights(weights.into_iter().map(|w| w.max(0.0)).collect())
    }

    /// All mass on `t`.
    pub fn point_mass(d: usize, t: usize) -> Result<Self> {
        if t > d {
            return Err(invalid(format!("t = {t} exceeds d = {d}")));
        }
        let mut probs = vec![0.0; d + 1];
        probs[t] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// The category size `d` this distribution is defined over.
    pub fn d(&self) -> usize {
        self.probs.len() - 1
    }

    /// `Σ t π_t`, the mean ones count per user.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(t, p)| t as f64 * p)
            .sum()
    }

    pub fn l1_distance(&self, other: &PiDistribution) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Histogram of ones counts `π_t` over the dataset.
pub fn pi_distribution(dataset: &Dataset, category: &Category) -> Result<PiDistribution> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut counts = vec![0u64; category.len() + 1];
    for r in dataset.records() {
        counts[category.count_in(r)] += 1;
    }
    let n = dataset.len() as f64;
    Ok(PiDistribution {
        probs: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// A dataset projected onto one category: each user's bit positions, stored
/// flat. This is what the simulation runners iterate over.
#[derive(Clone, Debug)]
pub struct CategoryView {
    d: usize,
    offsets: Vec<usize>,
    positions: Vec<u32>,
}

impl CategoryView {
    pub fn new(dataset: &Dataset, category: &Category) -> Self {
        let mut offsets = Vec::with_capacity(dataset.len() + 1);
        let mut positions = Vec::new();
        offsets.push(0);
        for r in dataset.records() {
            let start = positions.len();
            positions.extend(
                r.items()
                    .iter()
                    .filter_map(|&id| category.position(id).map(|p| p as u32)),
            );
            positions[start..].sort_unstable();
            offsets.push(positions.len());
        }
        Self {
            d: category.len(),
            offsets,
            positions,
        }
    }

    /// Builds a view directly from per-user ones counts; user `i` holds the
    /// first `counts[i]` positions of the category.
    pub fn from_counts(d: usize, counts: &[usize]) -> Result<Self> {
        let mut offsets = Vec::with_capacity(counts.len() + 1);
        let mut positions = Vec::new();
        offsets.push(0);
        for &t in counts {
            if t > d {
                return Err(invalid(format!("count {t} exceeds d = {d}")));
            }
            positions.extend(0..t as u32);
            offsets.push(positions.len());
        }
        Ok(Self {
            d,
            offsets,
            positions,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Sorted 0-based bit positions held by `user`.
    pub fn positions(&self, user: usize) -> &[u32] {
        &self.positions[self.offsets[user]..self.offsets[user + 1]]
    }

    /// Ones count `t` of `user`.
    pub fn ones(&self, user: usize) -> usize {
        self.offsets[user + 1] - self.offsets[user]
    }

    /// Ones among positions `[lo, hi)`.
    pub fn ones_in(&self, user: usize, lo: usize, hi: usize) -> usize {
        let p = self.positions(user);
        let a = p.partition_point(|&x| (x as usize) < lo);
        let b = p.partition_point(|&x| (x as usize) < hi);
        b - a
    }

    pub fn encode(&self, user: usize) -> EncodedVector {
        let mut bits = vec![0u8; self.d];
        for &p in self.positions(user) {
            bits[p as usize] = 1;
        }
        EncodedVector { bits }
    }

    /// `Q(c)`.
    pub fn truth(&self) -> u64 {
        self.positions.len() as u64
    }

    pub fn pi(&self) -> Result<PiDistribution> {
        self.pi_of(0..self.n())
    }

    /// `π_t` over a subset of users.
    pub fn pi_of(&self, users: impl IntoIterator<Item = usize>) -> Result<PiDistribution> {
        let mut counts = vec![0f64; self.d + 1];
        let mut n = 0usize;
        for u in users {
            counts[self.ones(u)] += 1.0;
            n += 1;
        }
        if n == 0 {
            return Err(Error::Empty("user set"));
        }
        PiDistribution::from_weights(counts)
    }
}
