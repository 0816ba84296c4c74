use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{derive_seed, with_kernel, Built, ExperimentConfig};
use crate::analytic::{excursion_time, expected_m, full_line_excursion_time, space_criterion, ExcursionOptions, SpaceVerdict};
use crate::kernels::{Domain, Lattice, NearestNeighborKernel};
use crate::montecarlo::{
    excursion_stats, over_replicas, range_trace, run_excursions, sample_trajectory, space_dependent_excursion, ExcursionStats,
    Moments, RngContract, SpaceStats,
};
use crate::passage::{ScheduleKind, ScheduleSum, SeriesVerdict};
use crate::{Error, Result};

/// Means of the successive excursion durations `τ̃_n` from one start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessiveRow {
    pub start: i64,
    pub index: usize,
    /// Over walks whose excursions `0..=index` all completed.
    pub duration: Moments,
}

/// One named statistic with its Monte Carlo error and analytic value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub analytic: Option<f64>,
    pub z: Option<f64>,
}

impl StatRow {
    fn new(statistic: impl Into<String>, value: f64) -> Self {
        Self { statistic: statistic.into(), value, stderr: None, analytic: None, z: None }
    }

    fn with_error(mut self, m: &Moments) -> Self {
        self.stderr = Some(m.stderr());
        self
    }

    fn against(mut self, analytic: Option<f64>) -> Self {
        self.analytic = analytic;
        if let (Some(a), Some(se)) = (analytic, self.stderr) {
            let d = self.value - a;
            // A statistic with no spread is compared exactly.
            self.z = Some(if se > 0.0 { d / se } else if d == 0.0 { 0.0 } else { d.signum() * f64::INFINITY });
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionReport {
    pub stats: ExcursionStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_duration: Option<SeriesVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_distinct_edges: Option<SeriesVerdict>,
    pub successive: Vec<SuccessiveRow>,
    pub rows: Vec<StatRow>,
    pub pass: bool,
}

/// Analytic `E τ̃` and `E M` for walks on a line.
fn line_analytics(k: &NearestNeighborKernel, config: &ExperimentConfig) -> Result<(SeriesVerdict, SeriesVerdict)> {
    let schedule = config.schedule()?;
    let b = &config.budget;
    let tol = config.tolerance.series();
    let opts = ExcursionOptions { m_horizon: b.m_horizon, j_horizon: b.j_horizon, tol };
    Ok(match k.domain() {
        Domain::HalfLine => (excursion_time(k.right(), &schedule, opts)?, expected_m(k.right(), b.m_horizon, tol)?),
        Domain::FullLine => {
            let r = expected_m(k.right(), b.m_horizon, tol)?;
            let l = expected_m(k.left(), b.m_horizon, tol)?;
            let m = match (r.value(), l.value()) {
                (Some(a), Some(c)) => SeriesVerdict::converged(0.5 * (a + c), 0.5 * (r.partial_sum + l.partial_sum), r.terms_used.max(l.terms_used), 0.0),
                _ if r.is_diverged() || l.is_diverged() => SeriesVerdict::diverged(0.5 * (r.partial_sum + l.partial_sum), r.terms_used),
                _ => SeriesVerdict::inconclusive(0.5 * (r.partial_sum + l.partial_sum), r.terms_used, None),
            };
            (full_line_excursion_time(k, &schedule, opts)?, m)
        }
    })
}

/// Monte Carlo excursion statistics, checked against the analytic series.
pub fn excursions(config: &ExperimentConfig) -> Result<ExcursionReport> {
    let built = config.kernel()?;
    let schedule = config.schedule()?;
    let b = &config.budget;
    let rng = RngContract::new(config.seed);
    let stats = with_kernel!(&built, k => excursion_stats(k, &schedule, b.replicas, b.step_cap, &rng)?);
    let line = match &built {
        Built::Line(k) => Some(k.clone()),
        Built::Lattice(l) if l.lattice() == Lattice::Z1 => Some(NearestNeighborKernel::srw(Domain::FullLine)),
        _ => None,
    };
    let (analytic_duration, analytic_distinct_edges) = match &line {
        Some(k) => {
            let (d, m) = line_analytics(k, config)?;
            (Some(d), Some(m))
        }
        None => (None, None),
    };
    let mut successive = Vec::new();
    let ex = &config.excursions;
    if ex.successive > 0 {
        let Built::Line(k) = &built else {
            return Err(Error::Unsupported("successive excursions need a line kernel".into()));
        };
        let starts = if ex.starts.is_empty() { vec![0] } else { ex.starts.clone() };
        for (si, &start) in starts.iter().enumerate() {
            let srng = RngContract::new(derive_seed(config.seed, 1 + si as u64));
            let rows = over_replicas(
                b.replicas,
                || vec![Moments::default(); ex.successive],
                |acc, r| {
                    let recs = run_excursions(k, &schedule, start, &mut srng.stream(r), b.step_cap, ex.successive)?;
                    for (m, rec) in acc.iter_mut().zip(recs.iter().take_while(|r| !r.censored)) {
                        m.push(rec.duration);
                    }
                    Ok(())
                },
                |t, p| t.iter_mut().zip(&p).for_each(|(a, b)| a.merge(b)),
            )?;
            successive.extend(rows.into_iter().enumerate().map(|(index, duration)| SuccessiveRow { start, index, duration }));
        }
    }

    let mut rows = vec![
        StatRow::new("mean_duration", stats.duration.mean).with_error(&stats.duration).against(analytic_duration.and_then(|v| v.value())),
        StatRow::new("mean_duration_completed", stats.duration_completed.mean).with_error(&stats.duration_completed),
        StatRow::new("mean_distinct_edges", stats.distinct_edges.mean)
            .with_error(&stats.distinct_edges)
            .against(analytic_distinct_edges.and_then(|v| v.value())),
        StatRow::new("mean_steps", stats.steps.mean).with_error(&stats.steps),
        StatRow::new("censor_rate", stats.censor_rate()),
    ];
    if let Some(sw) = stats.sandwich {
        rows.push(StatRow::new("sandwich_checked", sw.checked as f64));
        rows.push(StatRow::new("sandwich_violations", sw.violations as f64));
    }
    for m in [1u64, 2, 5, 10, 20, 50, 100] {
        rows.push(StatRow::new(format!("tail_m_ge_{m}"), stats.m_histogram.tail(m)));
    }
    for s in &successive {
        rows.push(StatRow::new(format!("successive_start_{}_n_{}", s.start, s.index), s.duration.mean).with_error(&s.duration));
    }
    let sigma = config.tolerance.sigma;
    let z_ok = rows.iter().filter_map(|r| r.z).all(|z| z.abs() <= sigma);
    let pass = z_ok && stats.sandwich.is_none_or(|s| s.violations == 0);
    Ok(ExcursionReport { stats, analytic_duration, analytic_distinct_edges, successive, rows, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeRow {
    pub t: f64,
    pub mean_distinct: f64,
    pub min_distinct: u64,
    pub max_distinct: u64,
    /// `mean R_t / t`.
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_span: Option<f64>,
    /// `⌊t/S⌋` under strong impatience.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    /// Trajectories that reached this checkpoint.
    pub reached: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub trajectories: u64,
    pub t_max: f64,
    pub rows: Vec<RangeRow>,
    /// Per-path bound violations over all checkpoints.
    pub violations: u64,
    pub truncated: u64,
}

#[derive(Clone)]
struct RangeAcc {
    sum: Vec<f64>,
    span: Vec<f64>,
    min: Vec<u64>,
    max: Vec<u64>,
    reached: Vec<u64>,
    violations: u64,
    truncated: u64,
    has_span: bool,
}

/// `R_t` along independent trajectories with the per-path checks
/// `R_t ≤ t + 1`, `R_t ≥ ⌊t/S⌋` for summable schedules, and `R_t = ⌊t⌋` for
/// the infinitely impatient walk on `ℤ₊`.
pub fn range(config: &ExperimentConfig) -> Result<RangeReport> {
    let built = config.kernel()?;
    let schedule = config.schedule()?;
    let rc = &config.range;
    let cps: Vec<f64> = (1..=rc.checkpoints).map(|i| rc.t_max * i as f64 / rc.checkpoints as f64).collect();
    let big_s = match schedule.sum() {
        ScheduleSum::Finite { value, .. } => Some(value),
        ScheduleSum::Infinite => None,
    };
    let exact_floor = *schedule.kind() == ScheduleKind::ZeroTail && matches!(&built, Built::Line(k) if k.domain() == Domain::HalfLine);
    let n = cps.len();
    let rng = RngContract::new(config.seed);
    let init = || RangeAcc {
        sum: vec![0.0; n],
        span: vec![0.0; n],
        min: vec![u64::MAX; n],
        max: vec![0; n],
        reached: vec![0; n],
        violations: 0,
        truncated: 0,
        has_span: false,
    };
    let acc = over_replicas(
        rc.trajectories,
        init,
        |acc, r| {
            let tr = with_kernel!(&built, k => range_trace(k, &schedule, rc.t_max, &cps, &mut rng.stream(r), config.budget.step_cap)?);
            acc.truncated += u64::from(tr.truncated);
            for (i, smp) in tr.samples.iter().enumerate() {
                let d = smp.distinct;
                acc.sum[i] += d as f64;
                acc.min[i] = acc.min[i].min(d);
                acc.max[i] = acc.max[i].max(d);
                acc.reached[i] += 1;
                if let Some(s) = smp.span {
                    acc.span[i] += s as f64;
                    acc.has_span = true;
                }
                let mut ok = d as f64 <= smp.t + 1.0;
                if let Some(s) = big_s {
                    ok &= d as f64 >= (smp.t / s).floor();
                }
                if exact_floor {
                    ok &= d == smp.t.floor() as u64;
                }
                acc.violations += u64::from(!ok);
            }
            Ok(())
        },
        |t, p| {
            for i in 0..n {
                t.sum[i] += p.sum[i];
                t.span[i] += p.span[i];
                t.min[i] = t.min[i].min(p.min[i]);
                t.max[i] = t.max[i].max(p.max[i]);
                t.reached[i] += p.reached[i];
            }
            t.violations += p.violations;
            t.truncated += p.truncated;
            t.has_span |= p.has_span;
        },
    )?;
    let rows = cps
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let k = acc.reached[i].max(1) as f64;
            RangeRow {
                t,
                mean_distinct: acc.sum[i] / k,
                min_distinct: if acc.reached[i] == 0 { 0 } else { acc.min[i] },
                max_distinct: acc.max[i],
                ratio: acc.sum[i] / k / t,
                mean_span: acc.has_span.then(|| acc.span[i] / k),
                lower_bound: big_s.map(|s| (t / s).floor()),
                reached: acc.reached[i],
            }
        })
        .collect();
    Ok(RangeReport { trajectories: rc.trajectories, t_max: rc.t_max, rows, violations: acc.violations, truncated: acc.truncated })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub analytic: SpaceVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<SpaceStats>,
    pub rows: Vec<StatRow>,
    pub pass: bool,
}

/// Space-dependent passage times `s(e) = (1 + ‖e‖)^{-α}`: the closed-form
/// verdict and the certified `Σ s(e) E ξ(e)` against Monte Carlo.
pub fn space(config: &ExperimentConfig) -> Result<SpaceReport> {
    let sp = config.space.as_ref().ok_or_else(|| Error::Config("space needs a [space] section".into()))?;
    let analytic = space_criterion(sp.lattice, sp.alpha, sp.shells)?;
    let b = &config.budget;
    let mut rows = Vec::new();
    let mut pass = true;
    let stats = if b.replicas > 0 {
        let st = space_dependent_excursion(sp.lattice, sp.alpha, b.replicas, b.step_cap, &RngContract::new(config.seed), sp.window)?;
        let row = StatRow::new("mean_duration", st.duration.mean).with_error(&st.duration).against(analytic.edge_sum.value());
        // Returns on ℤ² have P(τ > n) ~ π / ln n, so any feasible cap leaves the
        // capped mean well short of the full expectation; only an excess fails.
        pass &= row.z.is_none_or(|z| match sp.lattice {
            Lattice::Z1 => z.abs() <= config.tolerance.sigma,
            Lattice::Z2 => z <= config.tolerance.sigma,
        });
        rows.push(row);
        rows.push(StatRow::new("censor_rate", st.censor_rate()));
        rows.push(StatRow::new("mean_steps", st.steps.mean).with_error(&st.steps));
        for u in -sp.window..=sp.window {
            let m = st.visits_at(u);
            let row = StatRow::new(format!("visits_{u}"), m.mean).with_error(m);
            // Every vertex is visited once per excursion on average on the
            // recurrent lattices; the capped estimate is checked on ℤ only.
            let row = if sp.lattice == Lattice::Z1 { row.against(Some(1.0)) } else { row };
            pass &= row.z.is_none_or(|z| z.abs() <= config.tolerance.sigma);
            rows.push(row);
        }
        Some(st)
    } else {
        None
    };
    Ok(SpaceReport { analytic, stats, rows, pass })
}

/// Write one excursion of replica 0 as a `step,vertex,actual_time` CSV.
pub fn write_trace(config: &ExperimentConfig, path: &Path) -> Result<()> {
    let built = config.kernel()?;
    let schedule = config.schedule()?;
    let file = std::fs::File::create(path)?;
    let mut rng = RngContract::new(config.seed).stream(0);
    with_kernel!(&built, k => sample_trajectory(k, &schedule, &mut rng, config.budget.step_cap)?.write_trace(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Experiment, KernelSpec, SpaceConfig};
    use crate::kernels::DriftKind;

    fn base(exp: Experiment) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(exp, 17);
        c.kernel = Some(KernelSpec::Drift { domain: Domain::HalfLine, right: DriftKind::Constant { b: -0.5 }, left: None, x_min: 1 });
        c.schedule = Some(ScheduleKind::Power { alpha: 2.0 });
        c.budget.replicas = 4000;
        c.budget.step_cap = 100_000;
        c
    }

    #[test]
    fn excursions_against_series() {
        let mut c = base(Experiment::Excursions);
        c.excursions.successive = 3;
        c.excursions.starts = vec![0, 2];
        let r = excursions(&c).unwrap();
        assert!(r.pass, "{:?}", r.rows);
        assert!(r.analytic_duration.unwrap().is_converged());
        assert_eq!(r.successive.len(), 6);
        assert!(r.rows.iter().any(|row| row.statistic == "sandwich_violations" && row.value == 0.0));
    }

    #[test]
    fn range_checks() {
        let mut c = base(Experiment::Range);
        c.range.t_max = 500.0;
        c.range.checkpoints = 10;
        c.range.trajectories = 20;
        let r = range(&c).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.rows.len(), 10);
        c.schedule = Some(ScheduleKind::ZeroTail);
        c.kernel = Some(KernelSpec::Drift { domain: Domain::HalfLine, right: DriftKind::Zero, left: None, x_min: 1 });
        c.range.t_max = 100.0;
        let r = range(&c).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.rows[9].min_distinct, 100);
    }

    #[test]
    fn space_line() {
        let mut c = base(Experiment::Space);
        c.space = Some(SpaceConfig { lattice: Lattice::Z1, alpha: 2.0, window: 3, shells: 1000 });
        c.budget.replicas = 5000;
        c.budget.step_cap = 1_000_000;
        let r = space(&c).unwrap();
        assert!(r.pass, "{:?}", r.rows);
    }

    #[test]
    fn trace_file() {
        let c = base(Experiment::Excursions);
        let dir = std::env::temp_dir().join(format!("impatient-trace-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("trace.csv");
        write_trace(&c, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("step,vertex,actual_time\n0,0,0\n1,1,1\n"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
