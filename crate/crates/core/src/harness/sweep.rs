use serde::{Deserialize, Serialize};

use super::{derive_seed, ExperimentConfig, Verdict3};
use crate::analytic::{excursion_time_with, lamperti_boundary, lamperti_phase, log_lamperti_phase, ExcursionOptions, Phase};
use crate::kernels::{Domain, Drift, DriftKind, NearestNeighborKernel};
use crate::montecarlo::{excursion_stats, RngContract};
use crate::passage::{classify as classify_schedule, make_schedule, PassageSchedule, PhiGrid, ScheduleKind, SeriesVerdict, Tolerance};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `b(x) = c/x` on `ℤ₊` with `x_min = 1`.
    Lamperti,
    /// `b(x) = D/(x ln x)` on `ℤ₊` with `x_min = 2`.
    LogLamperti,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub replicas: u64,
    pub step_cap: u64,
    pub mean_duration: f64,
    pub stderr_duration: f64,
    pub mean_distinct_edges: f64,
    pub censor_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub family: Family,
    /// `c` or `D`.
    pub param: f64,
    pub alpha: f64,
    /// On a phase boundary line. Compared like any other point, but only
    /// when the series certifies one way or the other.
    pub boundary: bool,
    pub closed_form: Verdict3,
    pub series: Verdict3,
    pub series_detail: SeriesVerdict,
    /// `None` when either verdict is undecided.
    pub agree: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub agreements: usize,
    pub disagreements: usize,
    pub undecided: usize,
}

struct Task {
    family: Family,
    param: f64,
    alpha_index: usize,
}

/// Closed-form, series and Monte Carlo verdicts over the `(c, α)` and
/// `(D, α)` grids with `s_j = j^{-α}`.
pub fn phase_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    let sw = &config.sweep;
    let schedules: Vec<PassageSchedule> =
        sw.alpha.iter().map(|&alpha| make_schedule(ScheduleKind::Power { alpha })).collect::<Result<_>>()?;
    let j_horizon = config.budget.j_horizon;
    let grids: Vec<PhiGrid<'_>> = schedules
        .iter()
        .map(|s| PhiGrid::new(s, Tolerance::new(0.0, crate::analytic::GRID_REL_TOL), j_horizon))
        .collect();
    let mut tasks = Vec::new();
    for (family, params) in [(Family::Lamperti, &sw.c), (Family::LogLamperti, &sw.d)] {
        for &param in params {
            for alpha_index in 0..sw.alpha.len() {
                tasks.push(Task { family, param, alpha_index });
            }
        }
    }
    let opts = ExcursionOptions { m_horizon: config.budget.m_horizon, j_horizon, tol: config.tolerance.series() };
    let eval = |(i, t): (usize, &Task)| -> Result<SweepPoint> {
        let alpha = sw.alpha[t.alpha_index];
        let schedule = &schedules[t.alpha_index];
        let (drift, closed, boundary) = match t.family {
            Family::Lamperti => {
                (Drift::new(DriftKind::Lamperti { c: t.param }, 1)?, lamperti_phase(t.param, alpha)?, lamperti_boundary(t.param, alpha))
            }
            Family::LogLamperti => {
                let class = classify_schedule(schedule, config.budget.schedule_horizon, 1e-6);
                let phase = match class {
                    Ok(c) => log_lamperti_phase(t.param, c),
                    Err(_) => Phase::Inconclusive,
                };
                // α = 1 separates strong from weak impatience.
                let boundary = (t.param + 0.5).abs() < 1e-12 || (alpha - 1.0).abs() < 1e-12;
                (Drift::new(DriftKind::LogLamperti { d: t.param }, 2)?, phase, boundary)
            }
        };
        let detail = excursion_time_with(&drift, &grids[t.alpha_index], opts)?;
        let closed_form = Verdict3::closed_form(closed);
        let series = Verdict3::series(&detail);
        let agree = (closed_form.is_hard() && series.is_hard()).then(|| closed_form.class == series.class);
        let mc = if sw.mc_replicas > 0 {
            let kernel = NearestNeighborKernel::new(Domain::HalfLine, drift.clone());
            let st = excursion_stats(&kernel, schedule, sw.mc_replicas, sw.mc_step_cap, &RngContract::new(derive_seed(config.seed, i as u64)))?;
            Some(McSummary {
                replicas: st.replicas,
                step_cap: st.step_cap,
                mean_duration: st.duration.mean,
                stderr_duration: st.duration.stderr(),
                mean_distinct_edges: st.distinct_edges.mean,
                censor_rate: st.censor_rate(),
            })
        } else {
            None
        };
        Ok(SweepPoint { family: t.family, param: t.param, alpha, boundary, closed_form, series, series_detail: detail, agree, mc })
    };
    #[cfg(feature = "parallel")]
    let points: Vec<SweepPoint> = {
        use rayon::prelude::*;
        tasks.par_iter().enumerate().map(eval).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let points: Vec<SweepPoint> = tasks.iter().enumerate().map(eval).collect::<Result<_>>()?;
    let agreements = points.iter().filter(|p| p.agree == Some(true)).count();
    let disagreements = points.iter().filter(|p| p.agree == Some(false)).count();
    let undecided = points.len() - agreements - disagreements;
    Ok(SweepReport { points, agreements, disagreements, undecided })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Class, Experiment};

    #[test]
    fn small_sweep() {
        let mut c = ExperimentConfig::new(Experiment::PhaseSweep, 1);
        c.sweep.c = vec![-0.4, 0.25];
        c.sweep.alpha = vec![2.0];
        c.sweep.mc_replicas = 200;
        c.sweep.mc_step_cap = 10_000;
        let r = phase_sweep(&c).unwrap();
        assert_eq!(r.points.len(), 2);
        assert_eq!(r.points[0].closed_form.class, Class::PositiveRecurrent);
        assert_eq!(r.points[0].series.class, Class::PositiveRecurrent);
        assert_eq!(r.points[1].series.class, Class::NullRecurrent);
        assert_eq!(r.disagreements, 0);
        assert!(r.points.iter().all(|p| p.mc.is_some()));
    }
}
