//! Truncated evaluation of infinite series of nonnegative terms.
//!
//! Two engines live here. [`BracketSum`] consumes per-term enclosures
//! `lo_k ≤ t_k ≤ hi_k` and extrapolates the tail from dyadic block ratios;
//! its verdicts are estimates backed by explicit witnesses. The power-series
//! engine in the parent module is the certified one, used for `φ`.

use serde::{Deserialize, Serialize};

use crate::numeric::KahanSum;

/// Convergence target: a verdict is `Converged` once the half-width of the
/// enclosure is at most `abs + rel · |value|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    #[serde(default)]
    pub rel: f64,
}

impl Tolerance {
    pub const fn abs(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub fn admits(&self, half_width: f64, value: f64) -> bool {
        half_width <= self.abs + self.rel * value.abs()
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::abs(1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "value", rename_all = "kebab-case")]
pub enum Verdict {
    Converged(f64),
    Diverged,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub partial_sum: f64,
    pub terms_used: u64,
    /// Upper bound (certified or extrapolated) on what the unsummed terms
    /// and the enclosure width can still add.
    pub tail_estimate: Option<f64>,
}

impl SeriesVerdict {
    pub fn converged(value: f64, partial_sum: f64, terms_used: u64, tail: f64) -> Self {
        Self { verdict: Verdict::Converged(value), partial_sum, terms_used, tail_estimate: Some(tail) }
    }

    pub fn diverged(partial_sum: f64, terms_used: u64) -> Self {
        Self { verdict: Verdict::Diverged, partial_sum, terms_used, tail_estimate: None }
    }

    pub fn inconclusive(partial_sum: f64, terms_used: u64, tail: Option<f64>) -> Self {
        Self { verdict: Verdict::Inconclusive, partial_sum, terms_used, tail_estimate: tail }
    }

    pub fn exact(value: f64, terms_used: u64) -> Self {
        Self::converged(value, value, terms_used, 0.0)
    }

    pub fn value(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Converged(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self.verdict, Verdict::Converged(_))
    }

    pub fn is_diverged(&self) -> bool {
        self.verdict == Verdict::Diverged
    }

    /// `self + c`, keeping the verdict.
    pub fn shift(mut self, c: f64) -> Self {
        self.partial_sum += c;
        if let Verdict::Converged(v) = &mut self.verdict {
            *v += c;
        }
        self
    }
}

/// Smallest index from which dyadic-window witnesses are trusted.
const MIN_WITNESS_INDEX: u64 = 1 << 10;
/// Number of consecutive windows a witness must persist over.
const WITNESS_WINDOWS: usize = 3;
/// Largest inflated block ratio accepted as a convergence witness when the
/// horizon runs out before the tolerance is met; terms decaying like
/// `k^{-p}` have ratio `2^{1−p}`, so this admits `p ≳ 1.07`.
pub const HORIZON_RATIO: f64 = 0.95;

/// Streaming sum of nonnegative terms `t_1, t_2, …` given as enclosures.
///
/// Terms are grouped in dyadic windows `[2^i, 2^{i+1})`. After each complete
/// window the accumulator tries to decide:
///
/// * **Converged** when the window ratio `ρ` of upper block sums is stable
///   below 1; the tail is bounded by `B·ρ*/(1−ρ*)` with the inflated ratio
///   `ρ* = max(ρ_i, ρ_{i−1}) + |ρ_i − ρ_{i−1}|`, and the lower tail uses the
///   deflated ratio.
/// * **Converged** at [`finish`](Self::finish) without meeting the
///   tolerance when that inflated ratio is at most [`HORIZON_RATIO`] after
///   at least 1024 terms; the tail estimate then carries the whole
///   remaining uncertainty.
/// * **Diverged** when a term is infinite, when the lower partial sum passes
///   `1/abs`, or when the window minimum of `k·lo_k` is positive and
///   nondecreasing over three consecutive windows (a harmonic minorant on
///   the observed range).
#[derive(Debug, Clone)]
pub struct BracketSum {
    tol: Tolerance,
    lo: KahanSum,
    hi: KahanSum,
    k: u64,
    window_end: u64,
    block_lo: KahanSum,
    block_hi: KahanSum,
    block_min_klo: f64,
    blocks_lo: Vec<f64>,
    blocks_hi: Vec<f64>,
    min_klo: Vec<f64>,
    infinite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Continue,
    Done(SeriesVerdict),
}

impl BracketSum {
    pub fn new(tol: Tolerance) -> Self {
        Self {
            tol,
            lo: KahanSum::new(),
            hi: KahanSum::new(),
            k: 0,
            window_end: 2,
            block_lo: KahanSum::new(),
            block_hi: KahanSum::new(),
            block_min_klo: f64::INFINITY,
            blocks_lo: Vec::new(),
            blocks_hi: Vec::new(),
            min_klo: Vec::new(),
            infinite: false,
        }
    }

    pub fn terms(&self) -> u64 {
        self.k
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo.value(), self.hi.value())
    }

    /// Add the next term's enclosure.
    pub fn push(&mut self, lo: f64, hi: f64) -> Step {
        debug_assert!(lo <= hi || hi.is_nan(), "enclosure {lo} > {hi}");
        self.k += 1;
        if lo == f64::INFINITY {
            self.infinite = true;
            return Step::Done(SeriesVerdict::diverged(self.lo.value(), self.k));
        }
        self.lo.add(lo);
        self.hi.add(hi);
        self.block_lo.add(lo);
        self.block_hi.add(hi);
        self.block_min_klo = self.block_min_klo.min(self.k as f64 * lo);
        if self.lo.value() > 1.0 / self.tol.abs {
            return Step::Done(SeriesVerdict::diverged(self.lo.value(), self.k));
        }
        if self.k + 1 == self.window_end {
            return self.close_window();
        }
        Step::Continue
    }

    fn close_window(&mut self) -> Step {
        self.blocks_lo.push(self.block_lo.value());
        self.blocks_hi.push(self.block_hi.value());
        self.min_klo.push(self.block_min_klo);
        self.block_lo = KahanSum::new();
        self.block_hi = KahanSum::new();
        self.block_min_klo = f64::INFINITY;
        self.window_end *= 2;

        if self.k >= MIN_WITNESS_INDEX && self.min_klo.len() > WITNESS_WINDOWS {
            let w = &self.min_klo[self.min_klo.len() - WITNESS_WINDOWS - 1..];
            if w[0] > 0.0 && w.windows(2).all(|p| p[1] >= p[0]) {
                return Step::Done(SeriesVerdict::diverged(self.lo.value(), self.k));
            }
        }
        match self.tail() {
            Some((tail_lo, tail_hi)) => {
                let lo = self.lo.value() + tail_lo;
                let hi = self.hi.value() + tail_hi;
                let half = 0.5 * (hi - lo);
                let mid = lo + half;
                if self.tol.admits(half, mid) {
                    Step::Done(SeriesVerdict::converged(mid, self.lo.value(), self.k, hi - self.lo.value()))
                } else {
                    Step::Continue
                }
            }
            None => Step::Continue,
        }
    }

    /// Extrapolated `(lower, upper)` tail after the last complete window.
    fn tail(&self) -> Option<(f64, f64)> {
        self.tail_with_ratio().map(|(lo, hi, _)| (lo, hi))
    }

    /// [`tail`](Self::tail) together with the inflated block ratio.
    fn tail_with_ratio(&self) -> Option<(f64, f64, f64)> {
        let n = self.blocks_hi.len();
        if n < 3 {
            return None;
        }
        let b_hi = self.blocks_hi[n - 1];
        let b_lo = self.blocks_lo[n - 1];
        if b_hi == 0.0 {
            // Two empty windows in a row: the remaining terms are treated
            // as identically zero only if the previous window was empty too.
            return (self.blocks_hi[n - 2] == 0.0).then_some((0.0, 0.0, 0.0));
        }
        let r1 = self.blocks_hi[n - 1] / self.blocks_hi[n - 2];
        let r0 = self.blocks_hi[n - 2] / self.blocks_hi[n - 3];
        if !(r1.is_finite() && r0.is_finite()) {
            return None;
        }
        let spread = (r1 - r0).abs();
        let up = r0.max(r1) + spread;
        if up >= 1.0 {
            return None;
        }
        let down = (r0.min(r1) - spread).max(0.0);
        Some((b_lo * down / (1.0 - down), b_hi * up / (1.0 - up), up))
    }

    /// Verdict when the caller stops feeding terms.
    pub fn finish(&self) -> SeriesVerdict {
        if self.infinite {
            return SeriesVerdict::diverged(self.lo.value(), self.k);
        }
        match self.tail_with_ratio() {
            Some((tail_lo, tail_hi, up)) if up <= HORIZON_RATIO && self.k >= MIN_WITNESS_INDEX => {
                let lo = self.lo.value() + tail_lo;
                let hi = self.hi.value() + tail_hi;
                SeriesVerdict::converged(0.5 * (lo + hi), self.lo.value(), self.k, hi - self.lo.value())
            }
            t => SeriesVerdict::inconclusive(self.lo.value(), self.k, t.map(|(_, hi, _)| hi + self.hi.value() - self.lo.value())),
        }
    }

    /// Verdict for a series known to have no terms beyond those pushed.
    pub fn finish_exact(&self) -> SeriesVerdict {
        if self.infinite {
            return SeriesVerdict::diverged(self.lo.value(), self.k);
        }
        let (lo, hi) = self.bounds();
        let half = 0.5 * (hi - lo);
        if hi.is_finite() && self.tol.admits(half, lo + half) {
            SeriesVerdict::converged(lo + half, lo, self.k, hi - lo)
        } else if hi.is_finite() {
            SeriesVerdict::inconclusive(lo, self.k, Some(hi - lo))
        } else {
            SeriesVerdict::inconclusive(lo, self.k, None)
        }
    }
}

/// Run a [`BracketSum`] over `term(1), term(2), …` up to `horizon` terms.
pub fn sum_terms(
    tol: Tolerance,
    horizon: u64,
    mut term: impl FnMut(u64) -> (f64, f64),
) -> SeriesVerdict {
    let mut acc = BracketSum::new(tol);
    for k in 1..=horizon {
        let (lo, hi) = term(k);
        if let Step::Done(v) = acc.push(lo, hi) {
            return v;
        }
    }
    acc.finish()
}
