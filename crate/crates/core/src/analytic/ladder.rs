use serde::{Deserialize, Serialize};

use crate::kernels::{Drift, NearestNeighborKernel};
use crate::numeric::log_add_exp;
use crate::passage::{sum_terms, SeriesVerdict, Tolerance};
use crate::{Error, Result};

/// Streaming resistor ladder for a half-line drift.
///
/// At rung `m ≥ 1` it holds `ln R_m` with `R_m = Π_{k=1}^m (1−b(k))/(1+b(k))`
/// and `ln P_m` with `P_m = R_0 + ⋯ + R_{m−1}` (`R_0 = 1`). Then
/// `p_m = 1/P_m` is the probability to reach `m` before returning to 0 after
/// a first step to 1, and `q_m = P_m/P_{m+1}`.
#[derive(Debug, Clone)]
pub struct Ladder<'a> {
    drift: &'a Drift,
    m: u64,
    log_r: f64,
    log_p: f64,
}

impl<'a> Ladder<'a> {
    pub fn new(drift: &'a Drift) -> Result<Self> {
        let mut l = Self { drift, m: 0, log_r: 0.0, log_p: f64::NEG_INFINITY };
        l.advance()?;
        Ok(l)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn log_r(&self) -> f64 {
        self.log_r
    }

    pub fn log_p(&self) -> f64 {
        self.log_p
    }

    /// `p_m`.
    pub fn p(&self) -> f64 {
        (-self.log_p).exp()
    }

    /// `ln P_{m+1}`.
    pub fn log_p_next(&self) -> f64 {
        log_add_exp(self.log_p, self.log_r)
    }

    /// `1 − q_m = R_m / P_{m+1}`, without cancellation.
    pub fn gap(&self) -> f64 {
        (self.log_r - self.log_p_next()).exp()
    }

    pub fn advance(&mut self) -> Result<()> {
        self.log_p = log_add_exp(self.log_p, self.log_r);
        self.m += 1;
        let b = self.drift.at(self.m);
        if !(b.abs() < 1.0) {
            return Err(Error::DriftOutOfRange { x: self.m as i64, value: b });
        }
        self.log_r += (-b).ln_1p() - b.ln_1p();
        Ok(())
    }
}

/// `ln R_1, …, ln R_{m_max}`.
pub fn log_resistors(drift: &Drift, m_max: u64) -> Result<Vec<f64>> {
    let mut l = Ladder::new(drift)?;
    let mut out = Vec::with_capacity(m_max as usize);
    for _ in 0..m_max {
        out.push(l.log_r());
        l.advance()?;
    }
    Ok(out)
}

/// `R_1, …, R_{m_max}`; entries may saturate to `0` or `+∞`, see
/// [`log_resistors`].
pub fn resistors(drift: &Drift, m_max: u64) -> Result<Vec<f64>> {
    Ok(log_resistors(drift, m_max)?.into_iter().map(f64::exp).collect())
}

/// Hitting probabilities `p_m` and `q_m` for `m = 1..=m_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingProfile {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// `ln P_m`, the logarithm of the resistor prefix sums.
    pub log_prefix: Vec<f64>,
}

impl HittingProfile {
    /// `p_m`, `m ≥ 1`.
    pub fn p(&self, m: u64) -> f64 {
        self.p[m as usize - 1]
    }

    /// `q_m`, `m ≥ 1`.
    pub fn q(&self, m: u64) -> f64 {
        self.q[m as usize - 1]
    }
}

pub fn hitting_profile(drift: &Drift, m_max: u64) -> Result<HittingProfile> {
    if m_max < 2 {
        return Err(Error::param("hitting_profile needs m_max >= 2"));
    }
    let mut l = Ladder::new(drift)?;
    let n = m_max as usize;
    let (mut p, mut q, mut log_prefix) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..m_max {
        p.push(l.p());
        q.push((l.log_p() - l.log_p_next()).exp());
        log_prefix.push(l.log_p());
        l.advance()?;
    }
    Ok(HittingProfile { p, q, log_prefix })
}

/// `B(m) = Σ_{x=1}^m R_x` on both sides and the functionals
/// `I(b) = Σ_{x≥1} 1/(1 + B(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftFunctionals {
    pub horizon: u64,
    pub b_right: f64,
    pub b_left: f64,
    pub i_right: SeriesVerdict,
    pub i_left: SeriesVerdict,
}

/// `B(m)` for one side.
fn b_partial(drift: &Drift, m: u64) -> Result<f64> {
    let mut l = Ladder::new(drift)?;
    for _ in 0..m {
        l.advance()?;
    }
    // After m advances the ladder sits at rung m+1, so log_p = ln P_{m+1}.
    Ok(l.log_p().exp_m1())
}

/// `I = Σ_{x≥1} p_{x+1}` for one side.
fn i_functional(drift: &Drift, horizon: u64, tol: Tolerance) -> Result<SeriesVerdict> {
    let mut l = Ladder::new(drift)?;
    let mut err = None;
    let v = sum_terms(tol, horizon, |_| {
        if let Err(e) = l.advance() {
            err.get_or_insert(e);
        }
        let p = l.p();
        (p, p)
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

pub fn drift_functionals(kernel: &NearestNeighborKernel, horizon: u64, tol: Tolerance) -> Result<DriftFunctionals> {
    Ok(DriftFunctionals {
        horizon,
        b_right: b_partial(kernel.right(), horizon)?,
        b_left: b_partial(kernel.left(), horizon)?,
        i_right: i_functional(kernel.right(), horizon, tol)?,
        i_left: i_functional(kernel.left(), horizon, tol)?,
    })
}

/// `E M = 1 + I(b)` for an excursion whose first step is to the right.
pub fn expected_m(drift: &Drift, horizon: u64, tol: Tolerance) -> Result<SeriesVerdict> {
    Ok(i_functional(drift, horizon, tol)?.shift(1.0))
}
