use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clock::{crossing_cost, CrossingCounter};
use crate::kernels::{Edge, GraphKernel};
use crate::numeric::KahanSum;
use crate::passage::PassageSchedule;
use crate::{Error, Result};

/// Vertices with a coordinate along a line, for the `max − min` span.
pub trait Position {
    fn line_coordinate(&self) -> Option<i64>;
}

impl Position for i64 {
    fn line_coordinate(&self) -> Option<i64> {
        Some(*self)
    }
}

impl Position for (i64, i64) {
    fn line_coordinate(&self) -> Option<i64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeSample {
    pub t: f64,
    /// `R_t`: distinct edges whose first crossing completed by time `t`.
    pub distinct: u64,
    /// Steps completed by time `t`.
    pub steps: u64,
    pub max_norm: u64,
    /// `max − min` of positions visited, for walks on a line.
    pub span: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeTrace {
    pub samples: Vec<RangeSample>,
    /// Set when `step_cap` ran out before `t_max`; later checkpoints are
    /// missing.
    pub truncated: bool,
}

/// `R_t` at each checkpoint `t ≤ t_max` (ascending) along one trajectory.
///
/// A step is counted at time `t` once it has completed, i.e. when
/// `T(m) ≤ t`.
pub fn range_trace<K, R>(
    kernel: &K,
    schedule: &PassageSchedule,
    t_max: f64,
    checkpoints: &[f64],
    rng: &mut R,
    step_cap: u64,
) -> Result<RangeTrace>
where
    K: GraphKernel,
    K::Vertex: Position,
    R: Rng + ?Sized,
{
    if !(t_max > 0.0) {
        return Err(Error::param("range_trace needs t_max > 0"));
    }
    if checkpoints.windows(2).any(|w| w[1] < w[0]) || checkpoints.iter().any(|&t| !(0.0..=t_max).contains(&t)) {
        return Err(Error::param("checkpoints must be ascending within [0, t_max]"));
    }
    let mut ledger = K::Ledger::default();
    let mut v = kernel.origin();
    let mut clock = KahanSum::new();
    let mut steps = 0u64;
    let mut max_norm = kernel.norm(v);
    let mut bounds = v.line_coordinate().map(|x| (x, x));
    // Next sampled vertex and the time at which the step to it completes.
    let mut pending: Option<(K::Vertex, f64)> = None;
    let mut samples = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        loop {
            let (w, done_at) = match pending {
                Some(p) => p,
                None => {
                    if steps >= step_cap {
                        return Ok(RangeTrace { samples, truncated: true });
                    }
                    let w = kernel.step(v, rng)?;
                    let cost = schedule.s(ledger.count(Edge::new(v, w)));
                    let mut next = clock;
                    next.add(cost);
                    (w, next.value())
                }
            };
            if done_at > t {
                pending = Some((w, done_at));
                break;
            }
            pending = None;
            clock.add(crossing_cost(&mut ledger, Edge::new(v, w), schedule));
            steps += 1;
            v = w;
            max_norm = max_norm.max(kernel.norm(v));
            if let (Some((lo, hi)), Some(x)) = (&mut bounds, v.line_coordinate()) {
                *lo = (*lo).min(x);
                *hi = (*hi).max(x);
            }
        }
        samples.push(RangeSample {
            t,
            distinct: ledger.distinct(),
            steps,
            max_norm,
            span: bounds.map(|(lo, hi)| (hi - lo) as u64),
        });
    }
    Ok(RangeTrace { samples, truncated: false })
}
