//! Unit-time walks: nearest-neighbour walks on `ℤ` and `ℤ₊`, the `ℤ²` orbit
//! walk, simple random walk on `ℤ` / `ℤ²`, and explicit finite graphs.
//!
//! Every kernel consumes exactly one `u64` of RNG output per [`GraphKernel::step`]
//! call, so a fixed seed reproduces a trajectory bit for bit.

mod drift;
mod finite;
mod lattice;
mod line;
mod orbit;

use std::fmt::Debug;
use std::hash::Hash;

use rand::Rng;

use crate::clock::CrossingCounter;
use crate::Result;

pub use drift::{Drift, DriftKind};
pub use finite::FiniteGraphKernel;
pub use lattice::{Lattice, LatticeKernel};
pub use line::{make_drift_kernel, Domain, NearestNeighborKernel};
pub use orbit::{make_orbit_kernel, OrbitKernel};

/// Tolerance used when validating that transition rows sum to one.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A locally finite graph together with a row-stochastic walk on it.
pub trait GraphKernel: Send + Sync + Debug {
    type Vertex: Copy + Eq + Ord + Hash + Debug + Send + Sync;
    /// Crossing-count storage suited to this graph.
    type Ledger: CrossingCounter<Self::Vertex>;

    fn origin(&self) -> Self::Vertex;

    /// Outgoing transition probabilities from `v`.
    fn transitions(&self, v: Self::Vertex) -> Result<Vec<(Self::Vertex, f64)>>;

    /// Graph distance `‖v‖` to the origin.
    fn norm(&self, v: Self::Vertex) -> u64;

    /// Sample the next vertex. Draws exactly one `u64` from `rng`.
    fn step<R: Rng + ?Sized>(&self, v: Self::Vertex, rng: &mut R) -> Result<Self::Vertex>;

    /// `‖e‖ = min(‖v₁‖, ‖v₂‖)`.
    fn edge_norm(&self, e: Edge<Self::Vertex>) -> u64 {
        self.norm(e.lo()).min(self.norm(e.hi()))
    }
}

/// Undirected edge with endpoints stored in canonical (sorted) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge<V> {
    lo: V,
    hi: V,
}

impl<V: Ord + Copy> Edge<V> {
    #[inline]
    pub fn new(a: V, b: V) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn lo(&self) -> V {
        self.lo
    }

    pub fn hi(&self) -> V {
        self.hi
    }
}

/// Pick an entry of a transition row with a single uniform draw.
pub(crate) fn sample_row<V: Copy, R: Rng + ?Sized>(row: &[(V, f64)], rng: &mut R) -> V {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(v, p) in row {
        acc += p;
        if u < acc {
            return v;
        }
    }
    row.last().expect("empty transition row").0
}

/// Check stochasticity and positivity of a row.
pub(crate) fn check_row<V: Debug>(v: V, row: &[(impl Copy, f64)]) -> Result<()> {
    let sum: f64 = row.iter().map(|r| r.1).sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(crate::Error::param(format!("row of {v:?} sums to {sum}")));
    }
    if let Some(bad) = row.iter().find(|r| !(r.1 > 0.0)) {
        return Err(crate::Error::param(format!(
            "row of {v:?} has non-positive probability {}",
            bad.1
        )));
    }
    Ok(())
}

/// Test RNG that returns the same word forever.
#[cfg(test)]
pub(crate) struct ConstRng(pub u64);

#[cfg(test)]
impl rand::RngCore for ConstRng {
    fn next_u32(&mut self) -> u32 {
        (self.0 >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.0
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for (i, b) in dst.iter_mut().enumerate() {
            *b = self.0.to_le_bytes()[i % 8];
        }
    }
}
