//! Browser bindings: each export returns a JSON string for the page to render.

use impatient::analytic::{excursion_time, lamperti_boundary, lamperti_phase, space_criterion, ExcursionOptions};
use impatient::kernels::{Drift, DriftKind, Lattice};
use impatient::montecarlo::{inf_imp_occupation, ks_uniform, RngContract};
use impatient::passage::{PassageSchedule, ScheduleKind, Tolerance, Verdict};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn fail(e: impatient::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn verdict(v: Verdict) -> Value {
    match v {
        Verdict::Converged(x) => json!({ "kind": "converged", "value": x }),
        Verdict::Diverged => json!({ "kind": "diverged" }),
        Verdict::Inconclusive => json!({ "kind": "inconclusive" }),
    }
}

/// Budgets small enough for an interactive page.
fn demo_options() -> ExcursionOptions {
    ExcursionOptions { m_horizon: 1 << 16, j_horizon: 1 << 32, tol: Tolerance::new(1e-10, 1e-4) }
}

/// Closed-form phase and the numerically summed mean excursion time of the
/// Lamperti walk `b(x) = c/x` on the half-line with `s_j = j^{-alpha}`.
#[wasm_bindgen]
pub fn lamperti_point(c: f64, alpha: f64) -> Result<String, JsError> {
    let phase = lamperti_phase(c, alpha).map_err(fail)?;
    let drift = Drift::new(DriftKind::Lamperti { c }, 1).map_err(fail)?;
    let schedule = PassageSchedule::new(ScheduleKind::Power { alpha }).map_err(fail)?;
    let series = excursion_time(&drift, &schedule, demo_options()).map_err(fail)?;
    Ok(json!({
        "phase": phase,
        "boundary": lamperti_boundary(c, alpha),
        "series": verdict(series.verdict),
        "terms": series.terms_used,
        "partial_sum": series.partial_sum,
    })
    .to_string())
}

/// Occupation fractions `R_n / n` of the infinitely impatient walk, binned
/// into `bins` equal cells of `[0, 1]`, with the KS distance to uniform.
#[wasm_bindgen]
pub fn occupation_histogram(n: u32, replicas: u32, bins: u32, seed: u64) -> Result<String, JsError> {
    let bins = bins.clamp(1, 200) as usize;
    let samples = inf_imp_occupation(n as u64, replicas as u64, &RngContract::new(seed)).map_err(fail)?;
    let mut counts = vec![0u64; bins];
    for &x in &samples {
        counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
    }
    Ok(json!({ "counts": counts, "ks": ks_uniform(&samples), "replicas": samples.len() }).to_string())
}

/// Recurrence verdict for the space-dependent walk on Z (`dim = 1`) or Z²
/// (`dim = 2`) with edge costs `(1 + |e|)^{-alpha}`.
#[wasm_bindgen]
pub fn space_verdict(dim: u32, alpha: f64, shells: u32) -> Result<String, JsError> {
    let lattice = match dim {
        1 => Lattice::Z1,
        2 => Lattice::Z2,
        _ => return Err(JsError::new("dim must be 1 or 2")),
    };
    let v = space_criterion(lattice, alpha, shells as u64).map_err(fail)?;
    Ok(json!({ "phase": v.phase, "edge_sum": verdict(v.edge_sum.verdict) }).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lamperti_point_reports_phase_and_series() {
        let v: Value = serde_json::from_str(&lamperti_point(-0.5, 2.0).unwrap()).unwrap();
        assert_eq!(v["phase"], "positive-recurrent");
        assert_eq!(v["series"]["kind"], "converged");
        let v: Value = serde_json::from_str(&lamperti_point(0.25, 2.0).unwrap()).unwrap();
        assert_eq!(v["phase"], "null-recurrent");
    }

    #[test]
    fn histogram_counts_every_replica() {
        let v: Value = serde_json::from_str(&occupation_histogram(200, 5000, 10, 3).unwrap()).unwrap();
        let total: u64 = v["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
        assert_eq!(total, 5000);
        assert!(v["ks"].as_f64().unwrap() < 0.05);
    }

    #[test]
    fn space_verdict_on_z1() {
        let v: Value = serde_json::from_str(&space_verdict(1, 2.0, 10_000).unwrap()).unwrap();
        assert_eq!(v["phase"], "positive-recurrent");
        let v: Value = serde_json::from_str(&space_verdict(1, 0.5, 10_000).unwrap()).unwrap();
        assert_eq!(v["phase"], "null-recurrent");
    }
}
