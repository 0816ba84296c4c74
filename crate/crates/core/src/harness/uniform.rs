use serde::{Deserialize, Serialize};

use super::{derive_seed, ExperimentConfig};
use crate::montecarlo::{exact_coin_turning, exact_small_n, inf_imp_occupation, ks_uniform, srw_occupation, RngContract, EXACT_MAX_N};
use crate::{Error, Result};

/// Total-variation bound of the exact-equivalence gate.
pub const GATE_TV: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub n: u64,
    pub replicas: u64,
    pub ks: f64,
    /// The control is expected to fail the bound.
    pub fails_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformReport {
    pub gate_max_tv: f64,
    pub n: u64,
    pub replicas: u64,
    pub mean: f64,
    pub ks: f64,
    pub ks_tol: f64,
    /// Asymptotic Kolmogorov p-value of `ks`.
    pub p_value: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlReport>,
}

/// `Q_KS(λ)` with the Stephens small-sample correction of `λ`.
pub fn kolmogorov_p_value(d: f64, samples: usize) -> f64 {
    let sn = (samples as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut q = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        q += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * q).clamp(0.0, 1.0)
}

/// Largest total-variation distance between the range-chain and the
/// coin-turning laws for `n ≤ 14`.
pub fn equivalence_gate() -> Result<f64> {
    let mut worst = 0.0f64;
    for n in 1..=EXACT_MAX_N {
        let a = exact_small_n(n)?;
        let b = exact_coin_turning(n)?;
        let tv = 0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        worst = worst.max(tv);
        if !(tv < GATE_TV) {
            return Err(Error::GateFailed(format!("range chain and coin turning differ at n = {n}: TV = {tv:e}")));
        }
    }
    Ok(worst)
}

/// KS distance between `R_n/n` of the infinitely impatient walk and
/// Uniform[0, 1], behind the exact-equivalence gate, with an optional
/// unit-cost negative control.
pub fn uniform_limit_test(config: &ExperimentConfig) -> Result<UniformReport> {
    let u = &config.uniform;
    let gate_max_tv = equivalence_gate()?;
    let xs = inf_imp_occupation(u.n, u.replicas, &RngContract::new(derive_seed(config.seed, 0)))?;
    let ks = ks_uniform(&xs);
    let tol = config.tolerance.ks;
    let control = if u.control_n > 0 && u.control_replicas > 0 {
        let ys = srw_occupation(u.control_n, u.control_replicas, &RngContract::new(derive_seed(config.seed, 1)))?;
        let ks = ks_uniform(&ys);
        Some(ControlReport { n: u.control_n, replicas: u.control_replicas, ks, fails_bound: ks > tol })
    } else {
        None
    };
    let pass = ks <= tol && control.is_none_or(|c| c.fails_bound);
    Ok(UniformReport {
        gate_max_tv,
        n: u.n,
        replicas: u.replicas,
        mean: xs.iter().sum::<f64>() / xs.len() as f64,
        ks,
        ks_tol: tol,
        p_value: kolmogorov_p_value(ks, xs.len()),
        pass,
        control,
    })
}
