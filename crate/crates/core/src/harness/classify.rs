use serde::{Deserialize, Serialize};

use super::{derive_seed, with_kernel, Built, ExperimentConfig, KernelSpec, Verdict3};
use crate::analytic::{excursion_time, full_line_excursion_time, lamperti_phase, log_lamperti_phase, space_criterion, ExcursionOptions, Phase};
use crate::kernels::{Domain, DriftKind, Lattice, NearestNeighborKernel};
use crate::montecarlo::{excursion_stats, RngContract};
use crate::passage::{classify as classify_schedule, ImpatienceClass, PassageSchedule, ScheduleKind, SeriesVerdict};
use crate::{Error, Result};

/// Capped Monte Carlo means across increasing step caps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McTrend {
    pub replicas: u64,
    pub caps: Vec<u64>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub censor_rates: Vec<f64>,
    /// Means strictly increase with the cap, which suggests `E τ̃ = ∞`.
    pub increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub verdict: Verdict3,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impatience: Option<ImpatienceClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesVerdict>,
    /// Upper bound on `E τ̃` when one is available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<McTrend>,
}

impl ClassifyReport {
    fn new(verdict: Verdict3, method: &str) -> Self {
        Self { verdict, method: method.into(), impatience: None, series: None, bound: None, evidence: None }
    }
}

/// Closed form for one side of a line walk, where one exists.
fn side_phase(drift: &DriftKind, schedule: &ScheduleKind, class: Option<ImpatienceClass>) -> Result<Option<Phase>> {
    Ok(match (drift, schedule) {
        (DriftKind::Zero, ScheduleKind::Power { alpha }) => Some(lamperti_phase(0.0, *alpha)?),
        (DriftKind::Lamperti { c }, ScheduleKind::Power { alpha }) => Some(lamperti_phase(*c, *alpha)?),
        (DriftKind::LogLamperti { d }, _) => match class.map(|c| log_lamperti_phase(*d, c)) {
            Some(Phase::Inconclusive) | None => None,
            p => p,
        },
        _ => None,
    })
}

/// The walk on `ℤ` is positive recurrent iff both sides are.
fn combine(a: Phase, b: Phase) -> Phase {
    use Phase::*;
    match (a, b) {
        (TransientUnderlying, _) | (_, TransientUnderlying) => TransientUnderlying,
        (PositiveRecurrent, PositiveRecurrent) => PositiveRecurrent,
        (NullRecurrent, _) | (_, NullRecurrent) => NullRecurrent,
        _ => Inconclusive,
    }
}

/// `E M ≤ 4 + Σ_{k=1}^{k_max} 16k/(2^k − 1)` for the orbit walk.
///
/// Radial moves go inward w.p. 2/3 and outward w.p. 1/3 given that a radial
/// move happens, so from `O_1` the orbit `O_k` is reached before the origin
/// with probability `1/(2^k − 1)`. The edges that can only be crossed after
/// reaching `O_k` are its `8k` cycle edges and its `8k` outward edges.
pub fn orbit_distinct_edge_bound(k_max: u32) -> f64 {
    4.0 + (1..=k_max).map(|k| 16.0 * k as f64 / ((k as f64).exp2() - 1.0)).sum::<f64>()
}

fn mc_trend(config: &ExperimentConfig, built: &Built, schedule: &PassageSchedule) -> Result<Option<McTrend>> {
    let replicas = config.budget.replicas;
    if replicas == 0 {
        return Ok(None);
    }
    let top = config.budget.step_cap;
    let caps: Vec<u64> = [top / 100, top / 10, top].iter().map(|&c| c.max(1)).collect();
    let rng = RngContract::new(derive_seed(config.seed, 0));
    let (mut means, mut stderrs, mut censor_rates) = (Vec::new(), Vec::new(), Vec::new());
    for &cap in &caps {
        let st = with_kernel!(built, k => excursion_stats(k, schedule, replicas, cap, &rng)?);
        means.push(st.duration.mean);
        stderrs.push(st.duration.stderr());
        censor_rates.push(st.censor_rate());
    }
    let increasing = means.windows(2).all(|w| w[1] > w[0]);
    Ok(Some(McTrend { replicas, caps, means, stderrs, censor_rates, increasing }))
}

/// Recurrence class of the configured kernel and schedule: a closed form
/// where one applies, then a certified series, then Monte Carlo evidence
/// which is never reported as a hard verdict.
pub fn classify(config: &ExperimentConfig) -> Result<ClassifyReport> {
    let spec = config.kernel.as_ref().ok_or_else(|| Error::Config("classify needs a [kernel] section".into()))?;
    let built = spec.build()?;
    if let Some(sp) = &config.space {
        let KernelSpec::Lattice { lattice } = spec else {
            return Err(Error::Unsupported("space-dependent passage times need a lattice kernel".into()));
        };
        if *lattice != sp.lattice {
            return Err(Error::Config("[space] lattice differs from the kernel lattice".into()));
        }
        let v = space_criterion(sp.lattice, sp.alpha, sp.shells)?;
        let mut r = ClassifyReport::new(Verdict3::closed_form(v.phase), "space-criterion");
        r.series = Some(v.edge_sum);
        return Ok(r);
    }
    let schedule = config.schedule()?;
    let kind = schedule.kind().clone();
    let class = classify_schedule(&schedule, config.budget.schedule_horizon, 1e-6).ok();
    let opts = ExcursionOptions { m_horizon: config.budget.m_horizon, j_horizon: config.budget.j_horizon, tol: config.tolerance.series() };

    // Lines, including SRW on ℤ described as a lattice.
    let line = match (spec, &built) {
        (KernelSpec::Drift { domain, right, left, .. }, Built::Line(k)) => {
            Some((*domain, right.clone(), left.clone().unwrap_or_else(|| right.clone()), k.clone()))
        }
        (KernelSpec::Lattice { lattice: Lattice::Z1 }, _) => {
            Some((Domain::FullLine, DriftKind::Zero, DriftKind::Zero, NearestNeighborKernel::srw(Domain::FullLine)))
        }
        _ => None,
    };
    if let Some((domain, right, left, kernel)) = line {
        let closed = match domain {
            Domain::HalfLine => side_phase(&right, &kind, class)?,
            Domain::FullLine => match (side_phase(&right, &kind, class)?, side_phase(&left, &kind, class)?) {
                (Some(a), Some(b)) => Some(combine(a, b)),
                _ => None,
            },
        };
        if let Some(p) = closed.filter(|&p| p != Phase::Inconclusive) {
            let mut r = ClassifyReport::new(Verdict3::closed_form(p), "closed-form");
            r.impatience = class;
            return Ok(r);
        }
        let series = match domain {
            Domain::HalfLine => excursion_time(kernel.right(), &schedule, opts)?,
            Domain::FullLine => full_line_excursion_time(&kernel, &schedule, opts)?,
        };
        let v = Verdict3::series(&series);
        let mut r = ClassifyReport::new(v, "excursion-series");
        r.impatience = class;
        r.series = Some(series);
        if !v.is_hard() {
            r.verdict = Verdict3::monte_carlo();
            r.method = "monte-carlo-trend".into();
            r.evidence = mc_trend(config, &built, &schedule)?;
        }
        return Ok(r);
    }
    if let (KernelSpec::Orbit { k_max }, Some(ImpatienceClass::StronglyImpatient { sum, .. })) = (spec, class) {
        let mut r = ClassifyReport::new(
            Verdict3 { class: super::Class::PositiveRecurrent, provenance: super::Provenance::Series },
            "distinct-edge-bound",
        );
        r.impatience = class;
        r.bound = Some(sum * orbit_distinct_edge_bound(*k_max));
        return Ok(r);
    }
    let mut r = ClassifyReport::new(Verdict3::monte_carlo(), "monte-carlo-trend");
    r.impatience = class;
    r.evidence = mc_trend(config, &built, &schedule)?;
    Ok(r)
}
