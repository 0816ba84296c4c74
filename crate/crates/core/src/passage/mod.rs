//! Passage-time schedules `s_0 = 1, s_1, s_2, …`, their impatience class,
//! the passage generating function `φ(z) = Σ_{j≥1} s*_j z^j` with
//! `s*_j = s_{2j-2} + s_{2j-1}`, and the passage radius.

pub(crate) mod power;
mod series;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numeric::{hurwitz_tail, log_add_exp, KahanSum};
use crate::{Error, Result};

pub use power::{power_series, Coefficients, PhiGrid, Point};
pub use series::{sum_terms, BracketSum, SeriesVerdict, Step, Tolerance, Verdict};

/// Number of schedule values cached at construction.
const TABLE_LEN: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `s_j = j^{-α}` for `j ≥ 1`.
    Power { alpha: f64 },
    /// `s_j = a^j`.
    Geometric { a: f64 },
    /// `s_j = j!`.
    Factorial,
    /// `s_j = 0` for `j ≥ 1`: the infinitely impatient walk.
    ZeroTail,
    /// `s_j = 1`: the original walk.
    Constant,
    /// `s_j = ln(j + 2)` for `j ≥ 1`: slow ageing.
    Logarithmic,
    /// Explicit monotone values, continued by the last one.
    Custom { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Impatient,
    Ageing,
    Constant,
}

/// `S = Σ s_k`, as a certified interval when finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleSum {
    Finite { value: f64, err: f64 },
    Infinite,
}

impl ScheduleSum {
    pub fn value(&self) -> Option<f64> {
        match *self {
            ScheduleSum::Finite { value, .. } => Some(value),
            ScheduleSum::Infinite => None,
        }
    }

    /// Upper end of the enclosure, `+∞` if divergent.
    pub fn upper(&self) -> f64 {
        match *self {
            ScheduleSum::Finite { value, err } => value + err,
            ScheduleSum::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassageSchedule {
    kind: ScheduleKind,
    tag: Monotonicity,
    table: Arc<[f64]>,
    sum: ScheduleSum,
    zero_from: Option<u64>,
}

pub fn make_schedule(kind: ScheduleKind) -> Result<PassageSchedule> {
    PassageSchedule::new(kind)
}

impl PassageSchedule {
    pub fn new(kind: ScheduleKind) -> Result<Self> {
        let tag = match &kind {
            ScheduleKind::Power { alpha } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::param(format!("power schedule needs alpha > 0, got {alpha}")));
                }
                Monotonicity::Impatient
            }
            ScheduleKind::Geometric { a } => {
                if !(*a > 0.0 && a.is_finite()) {
                    return Err(Error::param(format!("geometric schedule needs a > 0, got {a}")));
                }
                match a.partial_cmp(&1.0) {
                    Some(std::cmp::Ordering::Less) => Monotonicity::Impatient,
                    Some(std::cmp::Ordering::Greater) => Monotonicity::Ageing,
                    _ => Monotonicity::Constant,
                }
            }
            ScheduleKind::Factorial | ScheduleKind::Logarithmic => Monotonicity::Ageing,
            ScheduleKind::ZeroTail => Monotonicity::Impatient,
            ScheduleKind::Constant => Monotonicity::Constant,
            ScheduleKind::Custom { values } => custom_tag(values)?,
        };
        let table: Arc<[f64]> = (0..TABLE_LEN as u64).map(|k| raw_value(&kind, k)).collect();
        let zero_from = match &kind {
            ScheduleKind::ZeroTail => Some(1),
            ScheduleKind::Custom { values } => values.iter().position(|&v| v == 0.0).map(|i| i as u64),
            _ => None,
        };
        let sum = schedule_sum(&kind);
        Ok(Self { kind, tag, table, sum, zero_from })
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.tag
    }

    /// `S = Σ_k s_k`.
    pub fn sum(&self) -> ScheduleSum {
        self.sum
    }

    /// Smallest `i ≥ 1` with `s_k = 0` for every `k ≥ i`, if any.
    pub fn zero_from(&self) -> Option<u64> {
        self.zero_from
    }

    #[inline]
    pub fn s(&self, k: u64) -> f64 {
        match self.table.get(k as usize) {
            Some(&v) => v,
            None => raw_value(&self.kind, k),
        }
    }

    /// `ln s_k`, accurate where `s_k` itself overflows.
    pub fn ln_s(&self, k: u64) -> f64 {
        match &self.kind {
            ScheduleKind::Geometric { a } => k as f64 * a.ln(),
            ScheduleKind::Factorial => ln_factorial(k),
            _ => self.s(k).ln(),
        }
    }

    /// `s*_j = s_{2j-2} + s_{2j-1}`, `j ≥ 1`.
    pub fn s_star(&self, j: u64) -> f64 {
        assert!(j >= 1, "s*_j is defined for j >= 1");
        self.s(2 * j - 2) + self.s(2 * j - 1)
    }

    /// Bounds `(inf, sup)` of `s_{k+step} / s_k` over all `k ≥ i` (`i ≥ 1`).
    pub fn ratio_bounds(&self, i: u64, step: u64) -> (f64, f64) {
        let i = i.max(1);
        let st = step as f64;
        match &self.kind {
            ScheduleKind::Power { alpha } => {
                let x = i as f64;
                ((x / (x + st)).powf(*alpha), 1.0)
            }
            ScheduleKind::Geometric { a } => {
                let r = a.powf(st);
                (r, r)
            }
            ScheduleKind::Factorial => {
                let x = i as f64;
                let inf = (1..=step).map(|d| x + d as f64).product::<f64>();
                (inf, f64::INFINITY)
            }
            ScheduleKind::ZeroTail => (0.0, 0.0),
            ScheduleKind::Constant => (1.0, 1.0),
            ScheduleKind::Logarithmic => {
                let x = i as f64;
                (1.0, (x + st + 2.0).ln() / (x + 2.0).ln())
            }
            ScheduleKind::Custom { values } => {
                if self.zero_from.is_some_and(|z| i >= z) {
                    return (0.0, 0.0);
                }
                let last = values.len() as u64 - 1;
                let (mut inf, mut sup) = (1.0f64, 1.0f64);
                let mut k = i;
                while k < last {
                    let d = self.s(k);
                    let r = if d == 0.0 { 0.0 } else { self.s(k + step) / d };
                    inf = inf.min(r);
                    sup = sup.max(r);
                    k += 1;
                }
                (inf, sup)
            }
        }
    }

    /// Coefficients of `φ`: `c_j = s*_j` for `j ≥ 1`.
    pub fn phi_coefficients(&self) -> Coefficients<'_> {
        Coefficients::new(self, CoefKind::Star)
    }

    /// `Σ_{k≥0} s_{2k} z^k`.
    pub fn even_coefficients(&self) -> Coefficients<'_> {
        Coefficients::new(self, CoefKind::Even)
    }

    /// `Σ_{k≥1} s_{2k-1} z^k`.
    pub fn odd_coefficients(&self) -> Coefficients<'_> {
        Coefficients::new(self, CoefKind::Odd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CoefKind {
    Star,
    Even,
    Odd,
}

fn custom_tag(values: &[f64]) -> Result<Monotonicity> {
    match values.first() {
        None => return Err(Error::param("custom schedule is empty")),
        Some(&s0) if s0 != 1.0 => return Err(Error::BadFirstPassage(s0)),
        _ => {}
    }
    if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::param(format!("custom schedule value {} at {i} is not a nonnegative number", values[i])));
    }
    let down = values.windows(2).all(|w| w[1] <= w[0]);
    let up = values.windows(2).all(|w| w[1] >= w[0]);
    match (down, up) {
        (true, true) => Ok(Monotonicity::Constant),
        (true, false) => Ok(Monotonicity::Impatient),
        (false, true) => Ok(Monotonicity::Ageing),
        (false, false) => {
            let first_up = values.windows(2).position(|w| w[1] > w[0]).unwrap_or(0);
            let first_down = values.windows(2).position(|w| w[1] < w[0]).unwrap_or(0);
            Err(Error::NonMonotoneSchedule(first_up.max(first_down) + 1))
        }
    }
}

fn raw_value(kind: &ScheduleKind, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let x = k as f64;
    match kind {
        ScheduleKind::Power { alpha } => x.powf(-alpha),
        ScheduleKind::Geometric { a } => a.powf(x),
        ScheduleKind::Factorial => {
            if k > 170 {
                f64::INFINITY
            } else {
                (1..=k).map(|i| i as f64).product()
            }
        }
        ScheduleKind::ZeroTail => 0.0,
        ScheduleKind::Constant => 1.0,
        ScheduleKind::Logarithmic => (x + 2.0).ln(),
        ScheduleKind::Custom { values } => values[(k as usize).min(values.len() - 1)],
    }
}

fn ln_factorial(k: u64) -> f64 {
    if k < 32 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    // Stirling series; the first omitted term is below 1e-12 for k ≥ 32.
    let x = k as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
}

fn schedule_sum(kind: &ScheduleKind) -> ScheduleSum {
    match kind {
        ScheduleKind::Power { alpha } if *alpha > 1.0 => {
            let (z, err) = hurwitz_tail(*alpha, 1);
            ScheduleSum::Finite { value: 1.0 + z, err }
        }
        ScheduleKind::Geometric { a } if *a < 1.0 => ScheduleSum::Finite { value: 1.0 / (1.0 - a), err: 4.0 * f64::EPSILON / (1.0 - a) },
        ScheduleKind::ZeroTail => ScheduleSum::Finite { value: 1.0, err: 0.0 },
        ScheduleKind::Custom { values } if *values.last().unwrap() == 0.0 => {
            let mut acc = KahanSum::new();
            values.iter().for_each(|&v| acc.add(v));
            ScheduleSum::Finite { value: acc.value(), err: f64::EPSILON * acc.value() * values.len() as f64 }
        }
        _ => ScheduleSum::Infinite,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum ImpatienceClass {
    StronglyImpatient { sum: f64, err: f64 },
    WeaklyImpatient,
    Ageing,
    InfinitelyImpatient,
}

impl ImpatienceClass {
    pub fn is_strong(&self) -> bool {
        matches!(self, ImpatienceClass::StronglyImpatient { .. } | ImpatienceClass::InfinitelyImpatient)
    }
}

/// Classify a schedule by the finiteness of `S = Σ s_k`.
///
/// For `Power(α)` the first `horizon` terms are summed directly and the
/// remainder is bounded by Euler-Maclaurin; the certificate must be within
/// `tol`. Divergence of `Power(α ≤ 1)` follows from the minorant `1/k`.
pub fn classify(schedule: &PassageSchedule, horizon: u64, tol: f64) -> Result<ImpatienceClass> {
    if horizon < 1 {
        return Err(Error::param("classify needs horizon >= 1"));
    }
    if schedule.zero_from() == Some(1) {
        return Ok(ImpatienceClass::InfinitelyImpatient);
    }
    match schedule.monotonicity() {
        Monotonicity::Ageing => return Ok(ImpatienceClass::Ageing),
        Monotonicity::Constant => return Ok(ImpatienceClass::WeaklyImpatient),
        Monotonicity::Impatient => {}
    }
    let strong = |value: f64, err: f64| {
        if err <= tol {
            Ok(ImpatienceClass::StronglyImpatient { sum: value, err })
        } else {
            Err(Error::Inconclusive { terms: horizon })
        }
    };
    match schedule.kind() {
        ScheduleKind::Power { alpha } if *alpha <= 1.0 => Ok(ImpatienceClass::WeaklyImpatient),
        ScheduleKind::Power { alpha } => {
            let mut acc = KahanSum::new();
            acc.add(1.0);
            for k in 1..horizon {
                acc.add(schedule.s(k));
            }
            let (tail, err) = hurwitz_tail(*alpha, horizon);
            acc.add(tail);
            strong(acc.value(), err + horizon as f64 * f64::EPSILON * acc.value())
        }
        _ => match schedule.sum() {
            ScheduleSum::Finite { value, err } => strong(value, err),
            ScheduleSum::Infinite => Ok(ImpatienceClass::WeaklyImpatient),
        },
    }
}

/// `φ(z)` with a verdict.
///
/// `φ(1) = S` is taken from the schedule sum. Elsewhere the certified
/// power-series engine is used, with `term_cap` bounding the index reached.
pub fn phi(schedule: &PassageSchedule, z: f64, tol: Tolerance, term_cap: u64) -> Result<SeriesVerdict> {
    if !(z >= 0.0) {
        return Err(Error::param(format!("phi needs z >= 0, got {z}")));
    }
    Ok(phi_at(schedule, Point::new(z), tol, term_cap))
}

pub fn phi_at(schedule: &PassageSchedule, p: Point, tol: Tolerance, term_cap: u64) -> SeriesVerdict {
    if p.z == 1.0 {
        return match schedule.sum() {
            ScheduleSum::Finite { value, err } => SeriesVerdict::converged(value, value, 0, err),
            ScheduleSum::Infinite => SeriesVerdict::diverged(f64::INFINITY, 0),
        };
    }
    power_series(&schedule.phi_coefficients(), p, tol, term_cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageRadius {
    /// Exact radius for built-in kinds, the estimate otherwise.
    pub value: f64,
    /// `1 / max (s*_k)^{1/k}` over the window `[horizon/2, horizon]`.
    pub estimate: f64,
    /// Whether the estimate agrees with the one from `[horizon/4, horizon/2]`
    /// to 5%.
    pub stable: bool,
}

/// `R^pass = 1 / limsup_k (s*_k)^{1/k}`.
pub fn passage_radius(schedule: &PassageSchedule, horizon: u64) -> Result<PassageRadius> {
    if horizon < 8 {
        return Err(Error::param("passage_radius needs horizon >= 8"));
    }
    let window_max = |from: u64, to: u64| {
        (from..=to)
            .map(|k| {
                let ln = log_add_exp(schedule.ln_s(2 * k - 2), schedule.ln_s(2 * k - 1));
                (ln / k as f64).exp()
            })
            .fold(0.0f64, f64::max)
    };
    let inv = |m: f64| if m == 0.0 { f64::INFINITY } else { 1.0 / m };
    let late = inv(window_max(horizon / 2, horizon));
    let early = inv(window_max(horizon / 4, horizon / 2));
    let stable = if late.is_infinite() || early.is_infinite() {
        late == early
    } else {
        (late - early).abs() <= 0.05 * late.max(early)
    };
    let exact = match schedule.kind() {
        ScheduleKind::Power { .. } | ScheduleKind::Constant | ScheduleKind::Logarithmic => Some(1.0),
        ScheduleKind::Geometric { a } => Some(1.0 / (a * a)),
        ScheduleKind::Factorial => Some(0.0),
        ScheduleKind::ZeroTail => Some(f64::INFINITY),
        ScheduleKind::Custom { values } => Some(if *values.last().unwrap() == 0.0 { f64::INFINITY } else { 1.0 }),
    };
    Ok(PassageRadius { value: exact.unwrap_or(late), estimate: late, stable })
}
