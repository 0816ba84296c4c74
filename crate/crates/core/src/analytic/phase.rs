use serde::{Deserialize, Serialize};

use crate::passage::ImpatienceClass;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    PositiveRecurrent,
    NullRecurrent,
    /// The underlying unit-time walk is already transient.
    TransientUnderlying,
    Inconclusive,
}

/// Phase of the impatient Lamperti walk `b(x) ≍ c/x` on `ℤ₊` with passage
/// times `s_j ≍ j^{-α}`.
///
/// Transient if `c > 1/2`; otherwise positive recurrent iff
/// `c < min(0, (α−1)/2)`, null recurrent on the boundary lines and above.
pub fn lamperti_phase(c: f64, alpha: f64) -> Result<Phase> {
    if !(alpha > 0.0) || !c.is_finite() {
        return Err(Error::param(format!("lamperti_phase needs finite c and alpha > 0, got ({c}, {alpha})")));
    }
    Ok(if c > 0.5 {
        Phase::TransientUnderlying
    } else if c < 0f64.min((alpha - 1.0) / 2.0) {
        Phase::PositiveRecurrent
    } else {
        Phase::NullRecurrent
    })
}

/// `(c, α)` sits on a phase boundary line.
pub fn lamperti_boundary(c: f64, alpha: f64) -> bool {
    let eps = 1e-12;
    (c.abs() < eps && alpha >= 1.0) || (alpha < 1.0 && (c - (alpha - 1.0) / 2.0).abs() < eps) || (c - 0.5).abs() < eps
}

/// Phase for `b(x) ≍ D/(x ln x)`: null recurrent for `D ≥ −1/2`; for
/// `D < −1/2` positive recurrent under strong impatience and undecided
/// otherwise.
pub fn log_lamperti_phase(d: f64, class: ImpatienceClass) -> Phase {
    if d >= -0.5 {
        Phase::NullRecurrent
    } else if class.is_strong() {
        Phase::PositiveRecurrent
    } else {
        Phase::Inconclusive
    }
}
