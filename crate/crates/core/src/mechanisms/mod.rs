//! Primitive local randomizers.
//!
//! Each mechanism has a validated config type whose methods are infallible
//! and cheap, plus a free function matching the checked one-shot form.

mod laplace;
mod olh;
mod piecewise;
mod rr;
mod square_wave;

pub use laplace::{laplace_count, LaplaceConfig};
pub use olh::{olh_estimate, olh_estimate_range, olh_report, OlhConfig, OlhReport, OlhReports};
pub use piecewise::{piecewise, PiecewiseConfig};
pub use rr::{krr, krr_debias_count, rr_bit, KrrConfig, RrConfig};
pub use square_wave::{sw_reconstruct, sw_report, SwConfig, SwReconstructor, SwSampler, MAX_BUCKETS};

/// `1 / (1 + c·e^{-ε})`, which stays finite for `ε = +inf`.
#[inline]
pub(crate) fn logistic_keep(epsilon: f64, others: f64) -> f64 {
    1.0 / (1.0 + others * (-epsilon).exp())
}
