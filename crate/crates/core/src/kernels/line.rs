use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clock::LineLedger;
use super::{Drift, DriftKind, GraphKernel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// `ℤ₊`, reflecting at 0 (from 0 the walk steps to 1).
    HalfLine,
    /// `ℤ`, with `b(0) = 0`.
    FullLine,
}

/// Nearest-neighbour walk on `ℤ` or `ℤ₊` with outward drift.
///
/// From `x ≠ 0` the walk steps away from the origin with probability
/// `(1 + b(x)) / 2`. On the full line `right` is used for `x > 0` and `left`
/// for `x < 0` (as `b(-k)`, still measured outward).
#[derive(Debug, Clone, PartialEq)]
pub struct NearestNeighborKernel {
    domain: Domain,
    right: Drift,
    left: Drift,
}

/// Build a drift kernel; on the full line the drift is mirrored to the left.
pub fn make_drift_kernel(kind: DriftKind, domain: Domain, x_min: u64) -> Result<NearestNeighborKernel> {
    let drift = Drift::new(kind, x_min)?;
    Ok(NearestNeighborKernel { domain, left: drift.clone(), right: drift })
}

impl NearestNeighborKernel {
    pub fn new(domain: Domain, right: Drift) -> Self {
        Self { domain, left: right.clone(), right }
    }

    pub fn two_sided(right: Drift, left: Drift) -> Self {
        Self { domain: Domain::FullLine, right, left }
    }

    pub fn srw(domain: Domain) -> Self {
        Self::new(domain, Drift::zero())
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn right(&self) -> &Drift {
        &self.right
    }

    pub fn left(&self) -> &Drift {
        &self.left
    }

    /// Outward drift at `x`, with `b(0) = 0`.
    pub fn drift_at(&self, x: i64) -> f64 {
        match x {
            0 => 0.0,
            x if x > 0 => self.right.at(x as u64),
            x => self.left.at(x.unsigned_abs()),
        }
    }

    /// Probability of stepping from `x` to `x + 1`.
    pub fn up_probability(&self, x: i64) -> f64 {
        match x {
            0 => match self.domain {
                Domain::HalfLine => 1.0,
                Domain::FullLine => 0.5,
            },
            x if x > 0 => 0.5 * (1.0 + self.right.at(x as u64)),
            x => 0.5 * (1.0 - self.left.at(x.unsigned_abs())),
        }
    }

    fn contains(&self, x: i64) -> bool {
        self.domain == Domain::FullLine || x >= 0
    }
}

impl GraphKernel for NearestNeighborKernel {
    type Vertex = i64;
    type Ledger = LineLedger;

    fn origin(&self) -> i64 {
        0
    }

    fn transitions(&self, v: i64) -> Result<Vec<(i64, f64)>> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        let up = self.up_probability(v);
        if up == 1.0 {
            return Ok(vec![(v + 1, 1.0)]);
        }
        Ok(vec![(v + 1, up), (v - 1, 1.0 - up)])
    }

    fn norm(&self, v: i64) -> u64 {
        v.unsigned_abs()
    }

    #[inline]
    fn step<R: Rng + ?Sized>(&self, v: i64, rng: &mut R) -> Result<i64> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        let u: f64 = rng.random();
        Ok(if u < self.up_probability(v) { v + 1 } else { v - 1 })
    }
}
