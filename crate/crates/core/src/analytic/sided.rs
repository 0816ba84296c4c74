use super::excursion::GRID_REL_TOL;
use super::Ladder;
use crate::kernels::{Domain, NearestNeighborKernel};
use crate::numeric::log_add_exp;
use crate::passage::power::enclosure;
use crate::passage::{phi_at, power_series, BracketSum, PassageSchedule, PhiGrid, Point, SeriesVerdict, Step, Tolerance};
use crate::{Error, Result};

const DIRECT_RUNGS: u64 = 1024;

fn require_full_line(kernel: &NearestNeighborKernel) -> Result<()> {
    if kernel.domain() != Domain::FullLine {
        return Err(Error::Unsupported("two-sided quantities need a walk on the full line".into()));
    }
    Ok(())
}

/// `ln r(y, y+1)` for `y = lo..hi` (exclusive), where the edge resistances
/// are `R_y` to the right of the origin and `R^l_k` on `{−k−1, −k}` to the
/// left, both with `R_0 = 1`.
fn log_edge_resistances(kernel: &NearestNeighborKernel, lo: i64, hi: i64) -> Result<Vec<f64>> {
    let right_len = hi.max(0) as u64;
    let left_len = (-lo).max(0) as u64;
    let side = |drift, len: u64| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(len as usize);
        if len > 0 {
            out.push(0.0);
        }
        let mut l = Ladder::new(drift)?;
        while (out.len() as u64) < len {
            out.push(l.log_r());
            l.advance()?;
        }
        Ok(out)
    };
    let right = side(kernel.right(), right_len)?;
    let left = side(kernel.left(), left_len)?;
    Ok((lo..hi).map(|y| if y >= 0 { right[y as usize] } else { left[(-y - 1) as usize] }).collect())
}

/// Two-sided hitting probabilities on `[−n, n]`:
/// `ρ_m^{(x)} = P_x(reach m before ±n)`.
///
/// For `x ≤ m` this is `C(x)/C(m)` with `C(y)` the resistance between `−n`
/// and `y`; for `x ≥ m` it is `D(x)/D(m)` with `D(y)` the resistance between
/// `y` and `n`. Both are accumulated in log space from their own end.
#[derive(Debug, Clone)]
pub struct ExitWindow {
    n: i64,
    log_c: Vec<f64>,
    log_d: Vec<f64>,
}

impl ExitWindow {
    pub fn new(kernel: &NearestNeighborKernel, n: u64) -> Result<Self> {
        require_full_line(kernel)?;
        if n < 2 {
            return Err(Error::param("exit window needs n >= 2"));
        }
        let n = n as i64;
        let r = log_edge_resistances(kernel, -n, n)?;
        let len = (2 * n + 1) as usize;
        let mut log_c = vec![f64::NEG_INFINITY; len];
        for i in 1..len {
            log_c[i] = log_add_exp(log_c[i - 1], r[i - 1]);
        }
        let mut log_d = vec![f64::NEG_INFINITY; len];
        for i in (0..len - 1).rev() {
            log_d[i] = log_add_exp(log_d[i + 1], r[i]);
        }
        Ok(Self { n, log_c, log_d })
    }

    pub fn n(&self) -> u64 {
        self.n as u64
    }

    fn idx(&self, y: i64) -> usize {
        assert!(y.abs() <= self.n, "{y} outside [-{0}, {0}]", self.n);
        (y + self.n) as usize
    }

    pub fn rho(&self, m: i64, x: i64) -> f64 {
        if m == x {
            return 1.0;
        }
        let (i, j) = (self.idx(x), self.idx(m));
        if x < m {
            (self.log_c[i] - self.log_c[j]).exp()
        } else {
            (self.log_d[i] - self.log_d[j]).exp()
        }
    }

    /// `γ_m = ρ_{m+1}^{(m)} ρ_m^{(m+1)}` for the edge `{m, m+1}`.
    pub fn gamma(&self, m: i64) -> f64 {
        self.rho(m + 1, m) * self.rho(m, m + 1)
    }
}

/// `E_0 T̃_n`, the expected actual time to leave `(−n, n)`.
///
/// Each interior edge `{y, y+1}` with near endpoint `a` (closer to 0) and far
/// endpoint `f` contributes `ρ_f^{(0)} Σ_{k≥0} γ^k s_{2k} + ρ_a^{(0)}
/// Σ_{k≥1} γ^k s_{2k−1}`; the exit edge is crossed exactly once and
/// contributes `s_0 = 1`.
pub fn two_sided_exit(kernel: &NearestNeighborKernel, schedule: &PassageSchedule, n: u64, tol: Tolerance) -> Result<SeriesVerdict> {
    let w = ExitWindow::new(kernel, n)?;
    let n = n as i64;
    let inner = Tolerance::new(tol.abs / (4 * n) as f64, tol.rel);
    let cap = 1u64 << 40;
    let mut acc = BracketSum::new(tol);
    for y in -n + 1..=n - 2 {
        let (near, far) = if y >= 0 { (y, y + 1) } else { (y + 1, y) };
        let gamma = w.gamma(y);
        let p = Point::new(gamma);
        let even = enclosure(&power_series(&schedule.even_coefficients(), p, inner, cap));
        let odd = enclosure(&power_series(&schedule.odd_coefficients(), p, inner, cap));
        let (rf, rn) = (w.rho(far, 0), w.rho(near, 0));
        if let Step::Done(v) = acc.push(rf * even.0 + rn * odd.0, rf * even.1 + rn * odd.1) {
            return Ok(v.shift(1.0));
        }
    }
    Ok(acc.finish_exact().shift(1.0))
}

/// One-sided ratios for target `v = h` and start `u = 0`:
/// `(r_{−k}^{(0)}, r_{−k−1}^{(−k)})` with `r_m^{(x)} = P_x(reach m before h)`.
pub fn one_sided_ratios(kernel: &NearestNeighborKernel, h: u64, k: u64) -> Result<(f64, f64)> {
    require_full_line(kernel)?;
    let r = log_edge_resistances(kernel, -(k as i64) - 1, h as i64)?;
    // r[i] is the edge {−k−1+i, −k+i}; S(−j, h) sums edges from −j to h.
    let total = |from: usize| r[from..].iter().fold(f64::NEG_INFINITY, |a, &b| log_add_exp(a, b));
    let s0 = total(k as usize + 1);
    let sk = total(1);
    let sk1 = total(0);
    Ok(((s0 - sk).exp(), (sk - sk1).exp()))
}

/// Positive recurrence to the right with `h = 1`.
pub fn prr_criterion(kernel: &NearestNeighborKernel, schedule: &PassageSchedule, m_horizon: u64, tol: Tolerance) -> Result<SeriesVerdict> {
    prr_criterion_with_h(kernel, schedule, m_horizon, tol, 1)
}

/// `Σ_{m≤0} r_m^{(0)} φ(r_{m−1}^{(m)})` for target `h ≥ 1`.
///
/// With `S_k` the resistance between `−k` and `h`, the `m = −k` term is
/// `(S_0/S_k) φ(S_k/S_{k+1})`, and `1 − S_k/S_{k+1} = R^l_k / S_{k+1}`.
pub fn prr_criterion_with_h(
    kernel: &NearestNeighborKernel,
    schedule: &PassageSchedule,
    m_horizon: u64,
    tol: Tolerance,
    h: u64,
) -> Result<SeriesVerdict> {
    require_full_line(kernel)?;
    if h < 1 {
        return Err(Error::param("prr_criterion needs h >= 1"));
    }
    let cap = 1u64 << 40;
    let log_a = log_edge_resistances(kernel, 0, h as i64)?
        .into_iter()
        .fold(f64::NEG_INFINITY, log_add_exp);
    let grid = PhiGrid::new(schedule, Tolerance::new(0.0, GRID_REL_TOL), cap);
    let direct_tol = Tolerance::new(0.0, (tol.rel * 1e-2).max(1e-9));
    let mut ladder = Ladder::new(kernel.left())?;
    let mut acc = BracketSum::new(tol);
    // k = 0: R^l_0 = 1 and S_0 = A.
    let (mut log_rk, mut log_sk) = (0.0, log_a);
    for k in 0..=m_horizon {
        let log_sk1 = log_add_exp(log_sk, log_rk);
        let weight = (log_a - log_sk).exp();
        let gap = (log_rk - log_sk1).exp();
        let (lo, hi) = if k <= DIRECT_RUNGS || gap > 0.5 {
            enclosure(&phi_at(schedule, Point::from_gap(gap), direct_tol, cap))
        } else {
            grid.bracket(gap)
        };
        if let Step::Done(v) = acc.push(weight * lo, weight * hi) {
            return Ok(v);
        }
        if k >= 1 {
            ladder.advance()?;
        }
        log_rk = ladder.log_r();
        log_sk = log_sk1;
        debug_assert_eq!(ladder.m(), k + 1);
    }
    Ok(acc.finish())
}
