//! Subset counting under local differential privacy with randomized-index
//! protocols.
//!
//! Users hold small item sets; the collector wants the total number of items
//! that fall inside a category. Instead of perturbing values, the protocols
//! here let each user reveal a few truthfully reported bits of their category
//! bit vector at positions they keep secret:
//!
//! * [`cri`] samples one bit and reports an extreme-case flag through kRR.
//! * [`criad`] appends dummy ones, suppresses excess ones, samples several
//!   bits without replacement inside a random group, and picks its parameters
//!   by minimizing a variance-plus-bias objective.
//!
//! [`baselines`] holds the value-perturbation competitors, [`audit`] computes
//! exact output laws and privacy-loss maxima, and [`experiment`] runs seeded
//! accuracy comparisons.

pub mod audit;
pub mod baselines;
pub mod cri;
pub mod criad;
pub mod data;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod math;
pub mod mechanisms;
pub mod rng;

pub use domain::{
    filter_and_encode, pi_distribution, true_subset_count, Category, CategoryView, Dataset,
    EncodedVector, ItemDomain, ItemId, PiDistribution, UserItemSet,
};
pub use error::{Error, Result};
pub use rng::RngStream;
