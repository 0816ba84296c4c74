use serde::{Deserialize, Serialize};

use super::Ladder;
use crate::kernels::{Drift, NearestNeighborKernel};
use crate::passage::{phi_at, power::enclosure, BracketSum, PassageSchedule, PhiGrid, Point, SeriesVerdict, Step, Tolerance};
use crate::Result;

/// Budgets for [`excursion_time`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcursionOptions {
    /// Largest `m` in the outer sum.
    pub m_horizon: u64,
    /// Largest index reached inside a single `φ` evaluation.
    pub j_horizon: u64,
    pub tol: Tolerance,
}

impl Default for ExcursionOptions {
    fn default() -> Self {
        Self { m_horizon: 1 << 22, j_horizon: 1 << 40, tol: Tolerance::new(1e-10, 1e-4) }
    }
}

/// Rungs whose `φ(q_m)` is evaluated directly rather than bracketed on the
/// grid.
const DIRECT_RUNGS: u64 = 1024;

/// Relative tolerance of the memoized `φ` grid; see [`PhiGrid`].
pub const GRID_REL_TOL: f64 = 1e-3;

/// Expected actual duration of an excursion from 0 on `ℤ₊` (first step to
/// the right):
///
/// `E τ̃ = 1 + s_1 + Σ_{m≥1} p_m φ(q_m)`.
///
/// The edge `{0, 1}` is crossed at least twice; each further pair of
/// crossings of `{m−1, m}` after the first visit to `m` happens with
/// probability `q_m` per round, which gives `p_m φ(q_m)` for the edge
/// `{m, m+1}` (with `p_1 = 1`).
pub fn excursion_time(drift: &Drift, schedule: &PassageSchedule, opts: ExcursionOptions) -> Result<SeriesVerdict> {
    let grid = PhiGrid::new(schedule, Tolerance::new(0.0, GRID_REL_TOL), opts.j_horizon);
    excursion_time_with(drift, &grid, opts)
}

/// [`excursion_time`] with a caller-owned `φ` grid, so sweeps over drifts
/// can share one grid per schedule.
pub fn excursion_time_with(drift: &Drift, grid: &PhiGrid<'_>, opts: ExcursionOptions) -> Result<SeriesVerdict> {
    let schedule = grid.schedule();
    let direct_tol = Tolerance::new(0.0, (opts.tol.rel * 1e-2).max(1e-9));
    let mut ladder = Ladder::new(drift)?;
    let mut acc = BracketSum::new(opts.tol);
    let head = 1.0 + schedule.s(1);
    loop {
        let m = ladder.m();
        let a = ladder.gap();
        let (lo, hi) = if m <= DIRECT_RUNGS || a > 0.5 {
            enclosure(&phi_at(schedule, Point::from_gap(a), direct_tol, opts.j_horizon))
        } else {
            grid.bracket(a)
        };
        let p = ladder.p();
        if let Step::Done(v) = acc.push(p * lo, p * hi) {
            return Ok(v.shift(head));
        }
        if m >= opts.m_horizon {
            return Ok(acc.finish().shift(head));
        }
        ladder.advance()?;
    }
}

/// Excursion time on `ℤ`: the first step goes right or left with
/// probability 1/2, so `E τ̃ = (E^r τ̃ + E^l τ̃)/2`.
pub fn full_line_excursion_time(
    kernel: &NearestNeighborKernel,
    schedule: &PassageSchedule,
    opts: ExcursionOptions,
) -> Result<SeriesVerdict> {
    let grid = PhiGrid::new(schedule, Tolerance::new(0.0, GRID_REL_TOL), opts.j_horizon);
    let r = excursion_time_with(kernel.right(), &grid, opts)?;
    let l = if kernel.left() == kernel.right() { r } else { excursion_time_with(kernel.left(), &grid, opts)? };
    Ok(match (r.value(), l.value()) {
        (Some(a), Some(b)) => SeriesVerdict::converged(
            0.5 * (a + b),
            0.5 * (r.partial_sum + l.partial_sum),
            r.terms_used.max(l.terms_used),
            0.5 * (r.tail_estimate.unwrap_or(0.0) + l.tail_estimate.unwrap_or(0.0)),
        ),
        _ if r.is_diverged() || l.is_diverged() => {
            SeriesVerdict::diverged(0.5 * (r.partial_sum + l.partial_sum), r.terms_used.max(l.terms_used))
        }
        _ => SeriesVerdict::inconclusive(0.5 * (r.partial_sum + l.partial_sum), r.terms_used.max(l.terms_used), None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::DriftKind;
    use crate::passage::{make_schedule, ScheduleKind};
    use approx::assert_relative_eq;

    fn sched(kind: ScheduleKind) -> PassageSchedule {
        make_schedule(kind).unwrap()
    }

    fn tight() -> ExcursionOptions {
        ExcursionOptions { tol: Tolerance::new(1e-12, 1e-10), ..ExcursionOptions::default() }
    }

    #[test]
    fn classical_return_time_for_inward_drift() {
        // Reflecting walk with up-probability 1/4: stationary mass at 0 is 1/3.
        let d = Drift::new(DriftKind::Constant { b: -0.5 }, 1).unwrap();
        let v = excursion_time(&d, &sched(ScheduleKind::Constant), tight()).unwrap();
        assert_relative_eq!(v.value().unwrap(), 3.0, max_relative = 1e-8);
    }

    #[test]
    fn zero_tail_counts_distinct_edges() {
        // With s_k = 0 for k ≥ 1 the duration is M, so E τ̃ = E M.
        let d = Drift::new(DriftKind::Constant { b: -0.5 }, 1).unwrap();
        let v = excursion_time(&d, &sched(ScheduleKind::ZeroTail), tight()).unwrap();
        let em = super::super::expected_m(&d, 1 << 20, Tolerance::abs(1e-13)).unwrap();
        assert_relative_eq!(v.value().unwrap(), em.value().unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn srw_diverges_for_every_builtin() {
        for kind in [
            ScheduleKind::Power { alpha: 2.0 },
            ScheduleKind::Power { alpha: 5.0 },
            ScheduleKind::Geometric { a: 0.5 },
            ScheduleKind::ZeroTail,
            ScheduleKind::Constant,
            ScheduleKind::Factorial,
            ScheduleKind::Logarithmic,
        ] {
            let v = excursion_time(&Drift::zero(), &sched(kind.clone()), ExcursionOptions::default()).unwrap();
            assert!(v.is_diverged(), "{kind:?}: {v:?}");
        }
    }

    #[test]
    fn lamperti_power_converges() {
        let d = Drift::new(DriftKind::Lamperti { c: -0.3 }, 1).unwrap();
        let v = excursion_time(&d, &sched(ScheduleKind::Power { alpha: 2.0 }), ExcursionOptions::default()).unwrap();
        assert!(v.is_converged(), "{v:?}");
    }
}
