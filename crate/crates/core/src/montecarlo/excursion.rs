use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{over_replicas, Moments, RngContract};
use crate::clock::{crossing_cost, CrossingCounter, Trajectory};
use crate::kernels::{Edge, GraphKernel};
use crate::numeric::KahanSum;
use crate::passage::{PassageSchedule, ScheduleSum};
use crate::{Error, Result};

/// One excursion from `v₀` back to `v₀`, or its prefix if censored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcursionRecord {
    /// `τ`, the number of steps taken.
    pub steps: u64,
    /// `τ̃`, the actual duration; for censored records the time spent up to
    /// the cap.
    pub duration: f64,
    /// `M`, distinct edges crossed.
    pub distinct_edges: u64,
    /// Largest norm visited.
    pub max_displacement: u64,
    pub censored: bool,
}

/// Excursion from the kernel's origin with a fresh crossing ledger.
pub fn run_excursion<K: GraphKernel, R: Rng + ?Sized>(
    kernel: &K,
    schedule: &PassageSchedule,
    rng: &mut R,
    step_cap: u64,
) -> Result<ExcursionRecord> {
    let mut ledger = K::Ledger::default();
    excursion_in(kernel, schedule, kernel.origin(), rng, step_cap, &mut ledger)
}

/// Excursion from `start` with a fresh crossing ledger.
pub fn run_excursion_from<K: GraphKernel, R: Rng + ?Sized>(
    kernel: &K,
    schedule: &PassageSchedule,
    start: K::Vertex,
    rng: &mut R,
    step_cap: u64,
) -> Result<ExcursionRecord> {
    let mut ledger = K::Ledger::default();
    excursion_in(kernel, schedule, start, rng, step_cap, &mut ledger)
}

/// Core loop; `ledger` must be empty on entry.
fn excursion_in<K: GraphKernel, R: Rng + ?Sized>(
    kernel: &K,
    schedule: &PassageSchedule,
    start: K::Vertex,
    rng: &mut R,
    step_cap: u64,
    ledger: &mut K::Ledger,
) -> Result<ExcursionRecord> {
    if step_cap == 0 {
        return Err(Error::param("step_cap must be >= 1"));
    }
    let mut v = start;
    let mut t = KahanSum::new();
    let mut max_norm = kernel.norm(start);
    let mut steps = 0;
    while steps < step_cap {
        let w = kernel.step(v, rng)?;
        t.add(crossing_cost(ledger, Edge::new(v, w), schedule));
        steps += 1;
        v = w;
        max_norm = max_norm.max(kernel.norm(v));
        if v == start {
            break;
        }
    }
    Ok(ExcursionRecord {
        steps,
        duration: t.value(),
        distinct_edges: ledger.distinct(),
        max_displacement: max_norm,
        censored: v != start,
    })
}

/// The excursions `τ̃_0, …, τ̃_{count−1}` of one walk from `start`. The
/// crossing counts carry over from one excursion to the next; `M` and the
/// duration are per excursion. Stops early after a censored excursion; the
/// cap applies to each excursion separately.
pub fn run_excursions<K: GraphKernel, R: Rng + ?Sized>(
    kernel: &K,
    schedule: &PassageSchedule,
    start: K::Vertex,
    rng: &mut R,
    step_cap: u64,
    count: usize,
) -> Result<Vec<ExcursionRecord>> {
    let mut history = K::Ledger::default();
    let mut out = Vec::with_capacity(count);
    let mut v = start;
    for _ in 0..count {
        let mut local = K::Ledger::default();
        let mut t = KahanSum::new();
        let mut max_norm = kernel.norm(start);
        let mut steps = 0;
        while steps < step_cap {
            let w = kernel.step(v, rng)?;
            let e = Edge::new(v, w);
            local.bump(e);
            t.add(crossing_cost(&mut history, e, schedule));
            steps += 1;
            v = w;
            max_norm = max_norm.max(kernel.norm(v));
            if v == start {
                break;
            }
        }
        let censored = v != start;
        out.push(ExcursionRecord { steps, duration: t.value(), distinct_edges: local.distinct(), max_displacement: max_norm, censored });
        if censored {
            break;
        }
    }
    Ok(out)
}

/// A single recorded excursion for trace output.
pub fn sample_trajectory<K: GraphKernel, R: Rng + ?Sized>(
    kernel: &K,
    schedule: &PassageSchedule,
    rng: &mut R,
    step_cap: u64,
) -> Result<Trajectory<K::Vertex>> {
    let start = kernel.origin();
    let mut tr = Trajectory::new(start);
    let mut v = start;
    for _ in 0..step_cap {
        v = kernel.step(v, rng)?;
        tr.push(v, schedule);
        if v == start {
            break;
        }
    }
    Ok(tr)
}

/// Counts of `M` with an overflow bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MHistogram {
    /// `counts[m]` is the number of records with `M = m`.
    pub counts: Vec<u64>,
    /// Records with `M ≥ counts.len()`.
    pub overflow: u64,
}

impl MHistogram {
    fn new(len: usize) -> Self {
        Self { counts: vec![0; len], overflow: 0 }
    }

    fn add(&mut self, m: u64) {
        match self.counts.get_mut(m as usize) {
            Some(c) => *c += 1,
            None => self.overflow += 1,
        }
    }

    fn merge(&mut self, o: &MHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&o.counts) {
            *a += b;
        }
        self.overflow += o.overflow;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }

    /// Number of records with `M ≥ m`.
    pub fn at_least(&self, m: u64) -> u64 {
        let m = m as usize;
        self.counts.get(m..).map_or(0, |c| c.iter().sum()) + self.overflow
    }

    /// Empirical `P(M ≥ m)`.
    pub fn tail(&self, m: u64) -> f64 {
        self.at_least(m) as f64 / self.total() as f64
    }
}

/// Per-path check of `M ≤ τ̃ ≤ S·M` on completed excursions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub s: f64,
    pub checked: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionStats {
    pub replicas: u64,
    pub step_cap: u64,
    pub censored: u64,
    /// `τ̃` over all records, censored ones contributing their time up to
    /// the cap. This is the capped mean; it is nondecreasing in the cap for
    /// a fixed seed.
    pub duration: Moments,
    /// `τ̃` over completed records only.
    pub duration_completed: Moments,
    pub distinct_edges: Moments,
    pub steps: Moments,
    pub m_histogram: MHistogram,
    /// Present when the schedule is summable.
    pub sandwich: Option<Sandwich>,
}

impl ExcursionStats {
    pub fn censor_rate(&self) -> f64 {
        self.censored as f64 / self.replicas as f64
    }

    fn new(step_cap: u64, hist_len: usize, s: Option<f64>) -> Self {
        Self {
            replicas: 0,
            step_cap,
            censored: 0,
            duration: Moments::default(),
            duration_completed: Moments::default(),
            distinct_edges: Moments::default(),
            steps: Moments::default(),
            m_histogram: MHistogram::new(hist_len),
            sandwich: s.map(|s| Sandwich { s, ..Sandwich::default() }),
        }
    }

    fn add(&mut self, r: &ExcursionRecord) {
        self.replicas += 1;
        self.duration.push(r.duration);
        self.distinct_edges.push(r.distinct_edges as f64);
        self.steps.push(r.steps as f64);
        self.m_histogram.add(r.distinct_edges);
        if r.censored {
            self.censored += 1;
            return;
        }
        self.duration_completed.push(r.duration);
        if let Some(sw) = &mut self.sandwich {
            let m = r.distinct_edges as f64;
            sw.checked += 1;
            if !(m <= r.duration && r.duration <= sw.s * m) {
                sw.violations += 1;
            }
        }
    }

    fn merge(&mut self, o: ExcursionStats) {
        self.replicas += o.replicas;
        self.censored += o.censored;
        self.duration.merge(&o.duration);
        self.duration_completed.merge(&o.duration_completed);
        self.distinct_edges.merge(&o.distinct_edges);
        self.steps.merge(&o.steps);
        self.m_histogram.merge(&o.m_histogram);
        if let (Some(a), Some(b)) = (&mut self.sandwich, o.sandwich) {
            a.checked += b.checked;
            a.violations += b.violations;
        }
    }
}

/// Length of the `M` histogram kept by [`excursion_stats`].
pub const HISTOGRAM_LEN: usize = 1024;

/// Statistics over `replicas` independent excursions from the origin;
/// replica `r` uses stream `r` of `rng`.
pub fn excursion_stats<K: GraphKernel>(
    kernel: &K,
    schedule: &PassageSchedule,
    replicas: u64,
    step_cap: u64,
    rng: &RngContract,
) -> Result<ExcursionStats> {
    if replicas < 1 {
        return Err(Error::param("replicas must be >= 1"));
    }
    if step_cap < 1 {
        return Err(Error::param("step_cap must be >= 1"));
    }
    let s = match schedule.sum() {
        ScheduleSum::Finite { value, .. } => Some(value),
        ScheduleSum::Infinite => None,
    };
    let init = || (ExcursionStats::new(step_cap, HISTOGRAM_LEN, s), K::Ledger::default());
    let (stats, _) = over_replicas(
        replicas,
        init,
        |(stats, ledger), r| {
            ledger.clear();
            let mut g = rng.stream(r);
            let rec = excursion_in(kernel, schedule, kernel.origin(), &mut g, step_cap, ledger)?;
            stats.add(&rec);
            Ok(())
        },
        |(total, _), (part, _)| total.merge(part),
    )?;
    Ok(stats)
}
