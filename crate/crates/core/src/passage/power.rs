//! Certified evaluation of power series `Σ_{j ≥ j₀} c_j z^j` with monotone
//! nonnegative coefficients.
//!
//! The first block of terms is summed exactly. After that indices are
//! grouped in blocks of relative length `1/K`; on a block `[a, b]` the
//! coefficient lies between `c_a` and `c_b`, so the block sum is enclosed by
//! `c_{a|b} · Σ_{i=a}^b z^i` with the geometric sum in closed form. The tail
//! from `J` on is bounded by `c_J z^J / (1 − ρz)` where `ρ` bounds
//! `c_{j+1}/c_j` for all `j ≥ J`.

use std::sync::OnceLock;

use super::{CoefKind, Monotonicity, PassageSchedule, SeriesVerdict, Tolerance, Verdict};
use crate::numeric::KahanSum;

/// Evaluation point `z`, carrying `ln z` and `1 − z` separately so points
/// close to 1 keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub z: f64,
    pub ln_z: f64,
    pub gap: f64,
}

impl Point {
    pub fn new(z: f64) -> Self {
        Self { z, ln_z: z.ln(), gap: 1.0 - z }
    }

    /// The point `z = 1 − a`.
    pub fn from_gap(a: f64) -> Self {
        Self { z: 1.0 - a, ln_z: (-a).ln_1p(), gap: a }
    }

    /// `Σ_{i=j}^{j+n-1} z^i`.
    fn geometric_block(&self, j: u64, n: u64) -> f64 {
        if self.gap == 0.0 {
            return n as f64;
        }
        (j as f64 * self.ln_z).exp() * -(n as f64 * self.ln_z).exp_m1() / self.gap
    }

    /// `c · z^j`, formed in log space so that neither factor overflows.
    #[inline]
    fn term(&self, c: f64, j: u64) -> f64 {
        if c == 0.0 || j == 0 {
            return c;
        }
        (c.ln() + j as f64 * self.ln_z).exp()
    }
}

/// Coefficient sequence derived from a schedule.
#[derive(Debug, Clone, Copy)]
pub struct Coefficients<'a> {
    schedule: &'a PassageSchedule,
    kind: CoefKind,
}

impl<'a> Coefficients<'a> {
    pub(crate) fn new(schedule: &'a PassageSchedule, kind: CoefKind) -> Self {
        Self { schedule, kind }
    }

    pub fn start(&self) -> u64 {
        match self.kind {
            CoefKind::Even => 0,
            CoefKind::Star | CoefKind::Odd => 1,
        }
    }

    #[inline]
    pub fn at(&self, j: u64) -> f64 {
        let s = self.schedule;
        match self.kind {
            CoefKind::Star => s.s_star(j),
            CoefKind::Even => s.s(2 * j),
            CoefKind::Odd => s.s(2 * j - 1),
        }
    }

    fn increasing(&self) -> bool {
        self.schedule.monotonicity() == Monotonicity::Ageing
    }

    /// Bounds on `c_{i+1} / c_i` over all `i ≥ j`, for `j ≥ 2`.
    fn ratio(&self, j: u64) -> (f64, f64) {
        let k = match self.kind {
            CoefKind::Star => 2 * j - 2,
            CoefKind::Even => 2 * j,
            CoefKind::Odd => 2 * j - 1,
        };
        self.schedule.ratio_bounds(k.max(1), 2)
    }

    /// Index from which every coefficient vanishes.
    fn zero_from(&self) -> Option<u64> {
        let zf = self.schedule.zero_from()?;
        Some(match self.kind {
            CoefKind::Star => zf.div_ceil(2) + 1,
            CoefKind::Even => zf.div_ceil(2),
            CoefKind::Odd => (zf + 1).div_ceil(2),
        })
    }
}

fn block_factor(tol: Tolerance) -> u64 {
    if tol.rel > 0.0 {
        ((2.0 / tol.rel).ceil() as u64).clamp(64, 1 << 20)
    } else {
        1 << 20
    }
}

/// Evaluate `Σ c_j z^j`; `cap` bounds the largest index covered.
pub fn power_series(c: &Coefficients<'_>, p: Point, tol: Tolerance, cap: u64) -> SeriesVerdict {
    let start = c.start();
    if p.z == 0.0 {
        let v = if start == 0 { c.at(0) } else { 0.0 };
        return SeriesVerdict::exact(v, 1);
    }
    let k_block = block_factor(tol);
    let zero_from = c.zero_from();
    let vanished = |j: u64| zero_from.is_some_and(|z| j >= z);
    let mut lo = KahanSum::new();
    let mut hi = KahanSum::new();
    let mut j = start;
    let direct_end = start.saturating_add(k_block).min(cap.max(start + 1));
    let mut direct = true;
    loop {
        if vanished(j) {
            let (l, h) = (lo.value(), hi.value());
            return SeriesVerdict::converged(0.5 * (l + h), l, j, h - l);
        }
        let cj = c.at(j);
        let tj = p.term(cj, j);
        if direct && j < direct_end && (j - start) % 64 != 63 {
            if !tj.is_finite() {
                return SeriesVerdict::diverged(lo.value(), j);
            }
            lo.add(tj);
            hi.add(tj);
            j += 1;
            continue;
        }
        if !tj.is_finite() {
            return SeriesVerdict::diverged(lo.value(), j);
        }
        let (rinf, rsup) = c.ratio(j);
        if tj > 0.0 && rinf * p.z >= 1.0 {
            // Terms from `j` on never decrease.
            return SeriesVerdict::diverged(lo.value(), j);
        }
        let tail = if tj == 0.0 {
            Some(0.0)
        } else if rsup * p.z < 1.0 {
            let denom = if rsup == 1.0 { p.gap } else { 1.0 - rsup * p.z };
            Some(tj / denom)
        } else {
            None
        };
        let width = hi.value() - lo.value();
        if let Some(t) = tail {
            let half = 0.5 * (width + t);
            let mid = lo.value() + half;
            if tol.admits(half, mid) {
                return SeriesVerdict::converged(mid, lo.value(), j, width + t);
            }
        }
        if j >= cap {
            return SeriesVerdict::inconclusive(lo.value(), j, tail.map(|t| width + t));
        }
        if j < direct_end {
            lo.add(tj);
            hi.add(tj);
            j += 1;
            continue;
        }
        direct = false;
        let n = (j / k_block).max(1).min(cap - j + 1);
        let b = j + n - 1;
        let g = p.geometric_block(j, n);
        let cb = c.at(b);
        if !cb.is_finite() {
            return SeriesVerdict::diverged(lo.value(), b);
        }
        let (l, h) = if c.increasing() { (cj * g, cb * g) } else { (cb * g, cj * g) };
        lo.add(l);
        hi.add(h);
        j = b + 1;
    }
}

/// Enclosure `[lo, hi]` of a verdict, `+∞` for unknown upper ends.
pub(crate) fn enclosure(v: &SeriesVerdict) -> (f64, f64) {
    match v.verdict {
        Verdict::Converged(_) => (v.partial_sum, v.partial_sum + v.tail_estimate.unwrap_or(0.0)),
        Verdict::Diverged => (f64::INFINITY, f64::INFINITY),
        Verdict::Inconclusive => (v.partial_sum, f64::INFINITY),
    }
}

/// Memoized enclosures of `φ(1 − a)` on the grid `a_i = 2^{-i/G}`.
///
/// `φ` is nondecreasing, so for `a_{i+1} ≤ a ≤ a_i` it is enclosed by the
/// lower end at `a_i` and the upper end at `a_{i+1}`. Below the deepest grid
/// point the upper end falls back to `φ(1) = S`.
#[derive(Debug)]
pub struct PhiGrid<'a> {
    schedule: &'a PassageSchedule,
    tol: Tolerance,
    cap: u64,
    per_octave: u32,
    cells: Vec<OnceLock<(f64, f64)>>,
}

impl<'a> PhiGrid<'a> {
    pub const DEFAULT_PER_OCTAVE: u32 = 32;
    pub const DEFAULT_OCTAVES: u32 = 30;

    pub fn new(schedule: &'a PassageSchedule, tol: Tolerance, cap: u64) -> Self {
        Self::with_resolution(schedule, tol, cap, Self::DEFAULT_PER_OCTAVE, Self::DEFAULT_OCTAVES)
    }

    pub fn with_resolution(schedule: &'a PassageSchedule, tol: Tolerance, cap: u64, per_octave: u32, octaves: u32) -> Self {
        let n = (per_octave * octaves + 1) as usize;
        Self { schedule, tol, cap, per_octave, cells: (0..n).map(|_| OnceLock::new()).collect() }
    }

    pub fn schedule(&self) -> &PassageSchedule {
        self.schedule
    }

    fn cell(&self, i: usize) -> (f64, f64) {
        *self.cells[i].get_or_init(|| {
            let a = (-(i as f64) / self.per_octave as f64).exp2();
            let v = super::phi_at(self.schedule, Point::from_gap(a), self.tol, self.cap);
            enclosure(&v)
        })
    }

    /// Enclosure of `φ(1 − a)` for `0 < a ≤ 1`.
    pub fn bracket(&self, a: f64) -> (f64, f64) {
        debug_assert!(a > 0.0 && a <= 1.0);
        let pos = -a.log2() * self.per_octave as f64;
        let i = (pos.floor().max(0.0) as usize).min(self.cells.len() - 1);
        let lo = self.cell(i).0;
        let hi = if i + 1 < self.cells.len() { self.cell(i + 1).1 } else { self.schedule.sum().upper() };
        (lo, hi.max(lo))
    }
}
