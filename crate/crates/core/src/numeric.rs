//! Small numerical helpers shared by the analytic and Monte Carlo engines.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Riemann zeta `ζ(s)` for real `s > 1` together with a bound on the
/// absolute error.
///
/// Direct summation to `N` followed by Euler-Maclaurin through the `B_4`
/// term. For `x^{-s}` (completely monotone) the remainder is bounded by the
/// first omitted term.
pub fn zeta(s: f64) -> (f64, f64) {
    assert!(s > 1.0, "zeta needs s > 1");
    hurwitz_tail(s, 1)
}

/// `Σ_{k ≥ start} k^{-s}` with an error bound, for `s > 1` and `start ≥ 1`.
pub fn hurwitz_tail(s: f64, start: u64) -> (f64, f64) {
    assert!(s > 1.0 && start >= 1);
    const N: u64 = 64;
    let cut = start.max(N);
    let mut acc = KahanSum::new();
    for k in start..cut {
        acc.add((k as f64).powf(-s));
    }
    let n = cut as f64;
    let f = n.powf(-s);
    // ∫_N^∞ x^{-s} dx + f(N)/2 - f'(N)/12 + f'''(N)/720
    let integral = n.powf(1.0 - s) / (s - 1.0);
    let d1 = -s * n.powf(-s - 1.0);
    let d3 = -s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0);
    acc.add(integral);
    acc.add(f / 2.0);
    acc.add(-d1 / 12.0);
    acc.add(d3 / 720.0);
    let d5 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n.powf(-s - 5.0);
    let err = d5.abs() / 30240.0 + 4.0 * f64::EPSILON * acc.value().abs();
    (acc.value(), err)
}
