//! Crossing counts `Z(e, m)`, the actual-time clock `T(m)` and its
//! generalized inverse `U(t)`.
//!
//! The `m`-th step along edge `e` costs `s_{Z(e, m-1)}`: the schedule value
//! indexed by how often `e` was crossed before, in either direction.

use std::hash::Hash;
use std::io::Write;

use rustc_hash::FxHashMap;

use crate::kernels::Edge;
use crate::numeric::KahanSum;
use crate::passage::PassageSchedule;
use crate::{Error, Result};

/// Per-edge crossing counters.
pub trait CrossingCounter<V>: Default + Send {
    /// Increment the count of `e` and return its previous value.
    fn bump(&mut self, e: Edge<V>) -> u64;
    fn count(&self, e: Edge<V>) -> u64;
    /// Number of edges with a positive count.
    fn distinct(&self) -> u64;
    fn clear(&mut self);
}

/// Hash-map ledger for arbitrary vertex types.
#[derive(Debug, Clone)]
pub struct CrossingLedger<V> {
    counts: FxHashMap<Edge<V>, u64>,
    steps: u64,
}

impl<V> Default for CrossingLedger<V> {
    fn default() -> Self {
        Self { counts: FxHashMap::default(), steps: 0 }
    }
}

impl<V: Copy + Eq + Hash + Ord> CrossingLedger<V> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total number of recorded crossings `m`.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge<V>, u64)> + '_ {
        self.counts.iter().map(|(e, c)| (*e, *c))
    }
}

impl<V: Copy + Eq + Hash + Ord + Send> CrossingCounter<V> for CrossingLedger<V> {
    #[inline]
    fn bump(&mut self, e: Edge<V>) -> u64 {
        self.steps += 1;
        let c = self.counts.entry(e).or_insert(0);
        *c += 1;
        *c - 1
    }

    fn count(&self, e: Edge<V>) -> u64 {
        self.counts.get(&e).copied().unwrap_or(0)
    }

    fn distinct(&self) -> u64 {
        self.counts.len() as u64
    }

    fn clear(&mut self) {
        self.counts.clear();
        self.steps = 0;
    }
}

/// Dense ledger for nearest-neighbour walks on `ℤ`: edge `{x, x+1}` is
/// stored at `x` on one of two arrays depending on the sign of `x`.
#[derive(Debug, Clone, Default)]
pub struct LineLedger {
    right: Vec<u64>,
    left: Vec<u64>,
    used_right: usize,
    used_left: usize,
    distinct: u64,
}

impl LineLedger {
    #[inline]
    fn slot(&mut self, lo: i64) -> &mut u64 {
        let (v, used, i) = if lo >= 0 {
            (&mut self.right, &mut self.used_right, lo as usize)
        } else {
            (&mut self.left, &mut self.used_left, (-lo - 1) as usize)
        };
        *used = (*used).max(i + 1);
        if i >= v.len() {
            v.resize((i + 1).next_power_of_two().max(64), 0);
        }
        &mut v[i]
    }
}

impl CrossingCounter<i64> for LineLedger {
    #[inline]
    fn bump(&mut self, e: Edge<i64>) -> u64 {
        debug_assert_eq!(e.hi() - e.lo(), 1, "not a nearest-neighbour edge");
        let c = self.slot(e.lo());
        let prev = *c;
        *c += 1;
        if prev == 0 {
            self.distinct += 1;
        }
        prev
    }

    fn count(&self, e: Edge<i64>) -> u64 {
        let lo = e.lo();
        let (v, i) = if lo >= 0 { (&self.right, lo as usize) } else { (&self.left, (-lo - 1) as usize) };
        v.get(i).copied().unwrap_or(0)
    }

    fn distinct(&self) -> u64 {
        self.distinct
    }

    fn clear(&mut self) {
        self.right[..self.used_right].fill(0);
        self.left[..self.used_left].fill(0);
        self.used_right = 0;
        self.used_left = 0;
        self.distinct = 0;
    }
}

/// Cumulative actual times `T(0) = 0, T(1), …, T(m)`.
#[derive(Debug, Clone)]
pub struct ActualClock {
    times: Vec<f64>,
    acc: KahanSum,
}

impl Default for ActualClock {
    fn default() -> Self {
        Self::new()
    }
}

impl ActualClock {
    pub fn new() -> Self {
        Self { times: vec![0.0], acc: KahanSum::new() }
    }

    /// Append a step of cost `cost`.
    pub fn advance(&mut self, cost: f64) {
        self.acc.add(cost);
        self.times.push(self.acc.value());
    }

    pub fn steps(&self) -> u64 {
        self.times.len() as u64 - 1
    }

    /// `T(m)`.
    pub fn at(&self, m: u64) -> f64 {
        self.times[m as usize]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `T` at the last recorded step.
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

/// Charge one step along `edge`: `T(m) = T(m−1) + s_{Z(edge, m−1)}`, then
/// increment the edge's count. Returns the cost charged.
pub fn record_step<V, L: CrossingCounter<V>>(
    ledger: &mut L,
    clock: &mut ActualClock,
    edge: Edge<V>,
    schedule: &PassageSchedule,
) -> f64 {
    let cost = crossing_cost(ledger, edge, schedule);
    clock.advance(cost);
    cost
}

/// `s_{Z(edge)}` for the next crossing of `edge`, incrementing its count.
/// Samplers that only need the running total use this without a clock.
#[inline]
pub fn crossing_cost<V, L: CrossingCounter<V>>(ledger: &mut L, edge: Edge<V>, schedule: &PassageSchedule) -> f64 {
    schedule.s(ledger.bump(edge))
}

/// `U(t) = sup{s ≤ m : T(s) ≤ t}` for the piecewise-linear interpolation of
/// `T` over the recorded steps.
pub fn inverse_clock(clock: &ActualClock, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::param(format!("inverse clock needs t >= 0, got {t}")));
    }
    let horizon = clock.horizon();
    if t > horizon {
        return Err(Error::HorizonExceeded { t, horizon });
    }
    let times = clock.times();
    let k = times.partition_point(|&x| x <= t) - 1;
    if k + 1 == times.len() || times[k] == t {
        return Ok(k as f64);
    }
    Ok(k as f64 + (t - times[k]) / (times[k + 1] - times[k]))
}

/// `X^imp(t) = X_{⌊U(t)⌋}`.
pub fn position_at<V: Copy>(path: &[V], clock: &ActualClock, t: f64) -> Result<V> {
    if path.len() as u64 != clock.steps() + 1 {
        return Err(Error::param("trajectory and clock lengths differ"));
    }
    let u = inverse_clock(clock, t)?;
    Ok(path[u.floor() as usize])
}

/// A recorded path together with its ledger and clock.
#[derive(Debug, Clone)]
pub struct Trajectory<V> {
    path: Vec<V>,
    ledger: CrossingLedger<V>,
    clock: ActualClock,
}

impl<V: Copy + Eq + Hash + Ord + Send> Trajectory<V> {
    pub fn new(start: V) -> Self {
        Self { path: vec![start], ledger: CrossingLedger::new(), clock: ActualClock::new() }
    }

    /// Record a path given as a list of vertices.
    pub fn from_path(path: &[V], schedule: &PassageSchedule) -> Result<Self> {
        let (&first, rest) = path.split_first().ok_or_else(|| Error::param("empty path"))?;
        let mut tr = Self::new(first);
        for &v in rest {
            tr.push(v, schedule);
        }
        Ok(tr)
    }

    pub fn push(&mut self, v: V, schedule: &PassageSchedule) -> f64 {
        let from = *self.path.last().unwrap();
        let cost = record_step(&mut self.ledger, &mut self.clock, Edge::new(from, v), schedule);
        self.path.push(v);
        cost
    }

    pub fn path(&self) -> &[V] {
        &self.path
    }

    pub fn ledger(&self) -> &CrossingLedger<V> {
        &self.ledger
    }

    pub fn clock(&self) -> &ActualClock {
        &self.clock
    }

    pub fn position_at(&self, t: f64) -> Result<V> {
        position_at(&self.path, &self.clock, t)
    }
}

impl<V: std::fmt::Debug> Trajectory<V> {
    /// CSV rows `step,vertex,actual_time`.
    pub fn write_trace<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "vertex", "actual_time"])?;
        for (m, (v, t)) in self.path.iter().zip(self.clock.times()).enumerate() {
            w.write_record([m.to_string(), format!("{v:?}"), format!("{t}")])?;
        }
        w.flush()?;
        Ok(())
    }
}
