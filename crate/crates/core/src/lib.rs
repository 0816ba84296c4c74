//! Impatient and ageing random walks.
//!
//! A walk `X` moves on a graph with unit-time steps; the time charged for a
//! crossing of an edge depends on how many times that edge was crossed before
//! (`s_0 = 1, s_1, s_2, ...`). Decreasing passage times give an *impatient*
//! walk, increasing ones an *ageing* walk.
//!
//! The crate pairs an analytic engine (electrical-network hitting
//! probabilities, excursion-time series, passage generating functions and
//! closed-form phase classifiers) with a Monte Carlo engine, plus an
//! experiment harness that cross-checks one against the other.
//!
//! ```
//! use impatient::analytic::{lamperti_phase, Phase};
//!
//! // Strong impatience turns the null-recurrent Lamperti walk with c = -0.4
//! // into a positive-recurrent impatient walk.
//! assert_eq!(lamperti_phase(-0.4, 2.0).unwrap(), Phase::PositiveRecurrent);
//! ```
// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod clock;
mod error;
pub mod harness;
pub mod kernels;
pub mod montecarlo;
pub mod numeric;
pub mod passage;

pub use error::{Error, Result};
