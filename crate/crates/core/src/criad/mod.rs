//! Counting via randomized index with augmented dummies (CRIAD).
//!
//! The collector broadcasts `(m, s, g)` and a partition of the `d` category
//! positions into `g` equal groups. Each user picks one group uniformly,
//! appends `m` dummy ones to that group's `d/g` bits, suppresses ones until at
//! least `m` zeros remain, and reports `s` bits sampled without replacement
//! from the `d/g + m` positions. No index or group id leaves the device.
//!
//! The estimator is `(d + g m)/s · Σ ones - n m g`. It is unbiased whenever no
//! user holds more than `d/g - m` ones in a group; suppression otherwise
//! causes a known underestimate. Privacy is `ln(C(d/g, s) / C(m, s))`.

mod client;
mod params;
mod pipeline;
mod select;

pub use client::{
    criad_aggregate, criad_client, exact_report_distribution, exact_report_distribution_rational,
    CriadReport, CriadTally,
};
pub use params::{
    exact_suppression_bias, expected_bias, implied_epsilon, variance_bound, Broadcast, ParamTriple,
    Partition,
};
pub use pipeline::{estimate_pi_pipeline, simulate, CriadOptions, CriadOutcome, PiEstimate};
pub use select::{objective, satisfies_budget, select_params, ParamSearch};
