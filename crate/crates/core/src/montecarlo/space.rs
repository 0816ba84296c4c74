use serde::{Deserialize, Serialize};

use super::{over_replicas, Moments, RngContract};
use crate::kernels::{Edge, GraphKernel, Lattice, LatticeKernel};
use crate::numeric::KahanSum;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceStats {
    pub lattice: Lattice,
    pub alpha: f64,
    pub replicas: u64,
    pub step_cap: u64,
    pub censored: u64,
    /// Capped `τ̃`: censored excursions contribute their time up to the cap.
    pub duration: Moments,
    pub duration_completed: Moments,
    pub steps: Moments,
    /// Radius of the vertex window in `visits`.
    pub window: i64,
    /// Visits per excursion to `u` for `u = −window..=window` along the
    /// first axis over the times `[0, τ)`: the start counts, the return does
    /// not, so the origin has exactly one visit even in censored records.
    pub visits: Vec<Moments>,
}

impl SpaceStats {
    pub fn censor_rate(&self) -> f64 {
        self.censored as f64 / self.replicas as f64
    }

    /// Visit statistics of the vertex at `u` on the first axis.
    pub fn visits_at(&self, u: i64) -> &Moments {
        &self.visits[(u + self.window) as usize]
    }
}

const COST_TABLE: usize = 1 << 16;

/// Excursions of simple random walk on `ℤ` or `ℤ²` where every crossing of
/// `e` costs `s(e) = (1 + ‖e‖)^{-α}`, whatever the crossing count.
pub fn space_dependent_excursion(
    lattice: Lattice,
    alpha: f64,
    replicas: u64,
    step_cap: u64,
    rng: &RngContract,
    window: i64,
) -> Result<SpaceStats> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::param(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    if replicas < 1 || step_cap < 1 || window < 0 {
        return Err(Error::param("replicas and step_cap must be >= 1 and window >= 0"));
    }
    let kernel = LatticeKernel::new(lattice);
    let table: Vec<f64> = (0..COST_TABLE).map(|k| (1.0 + k as f64).powf(-alpha)).collect();
    let cost = |k: u64| table.get(k as usize).copied().unwrap_or_else(|| (1.0 + k as f64).powf(-alpha));
    let width = (2 * window + 1) as usize;
    let empty = || SpaceStats {
        lattice,
        alpha,
        replicas: 0,
        step_cap,
        censored: 0,
        duration: Moments::default(),
        duration_completed: Moments::default(),
        steps: Moments::default(),
        window,
        visits: vec![Moments::default(); width],
    };
    let init = || (empty(), vec![0u64; width]);
    let (stats, _) = over_replicas(
        replicas,
        init,
        |(st, counts), r| {
            let mut g = rng.stream(r);
            counts.fill(0);
            let origin = kernel.origin();
            let mut v = origin;
            let mut t = KahanSum::new();
            let mut steps = 0;
            while steps < step_cap {
                if v.1 == 0 && v.0.abs() <= window {
                    counts[(v.0 + window) as usize] += 1;
                }
                let w = kernel.step(v, &mut g)?;
                t.add(cost(kernel.edge_norm(Edge::new(v, w))));
                steps += 1;
                v = w;
                if v == origin {
                    break;
                }
            }
            st.replicas += 1;
            st.duration.push(t.value());
            st.steps.push(steps as f64);
            if v == origin {
                st.duration_completed.push(t.value());
            } else {
                st.censored += 1;
            }
            for (m, &c) in st.visits.iter_mut().zip(counts.iter()) {
                m.push(c as f64);
            }
            Ok(())
        },
        |(total, _), (part, _)| {
            total.replicas += part.replicas;
            total.censored += part.censored;
            total.duration.merge(&part.duration);
            total.duration_completed.merge(&part.duration_completed);
            total.steps.merge(&part.steps);
            for (a, b) in total.visits.iter_mut().zip(&part.visits) {
                a.merge(b);
            }
        },
    )?;
    Ok(stats)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_cost_when_alpha_is_zero() {
        let st = space_dependent_excursion(Lattice::Z1, 0.0, 2000, 1000, &RngContract::new(1), 3).unwrap();
        assert_eq!(st.duration.mean, st.steps.mean);
        assert!(st.censored > 0);
    }

    #[test]
    fn origin_is_visited_once() {
        let st = space_dependent_excursion(Lattice::Z2, 3.0, 3000, 1000, &RngContract::new(2), 2).unwrap();
        assert!(st.censored > 0);
        assert_eq!(st.visits_at(0).mean, 1.0);
        assert_eq!(st.visits_at(0).variance(), 0.0);
    }

    #[test]
    fn line_alpha_two_mean() {
        let st = space_dependent_excursion(Lattice::Z1, 2.0, 20_000, 1_000_000, &RngContract::new(3), 5).unwrap();
        let want = std::f64::consts::PI.powi(2) / 3.0;
        assert!((st.duration.mean - want).abs() < 4.0 * st.duration.stderr() + 0.01, "{} vs {want}", st.duration.mean);
    }
}
