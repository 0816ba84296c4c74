use serde::{Deserialize, Serialize};

use super::Phase;
use crate::kernels::{Edge, GraphKernel, Lattice, LatticeKernel};
use crate::numeric::{hurwitz_tail, KahanSum};
use crate::passage::SeriesVerdict;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceVerdict {
    pub phase: Phase,
    /// `Σ_e s(e) E ξ(e)` with `s(e) = (1 + ‖e‖)^{-α}`.
    pub edge_sum: SeriesVerdict,
}

/// `E ξ(e)` for an edge `e = {u, w}` of a transitive lattice, where `ξ(e)`
/// counts crossings of `e` during one excursion from the origin.
///
/// On these graphs the expected number of visits to every vertex during an
/// excursion is 1, so `E ξ(e) = p(u, w) + p(w, u)`.
pub fn expected_edge_crossings(kernel: &LatticeKernel, e: Edge<(i64, i64)>) -> Result<f64> {
    let p = |from, to| -> Result<f64> {
        Ok(kernel.transitions(from)?.into_iter().find(|&(v, _)| v == to).map_or(0.0, |(_, p)| p))
    };
    Ok(p(e.lo(), e.hi())? + p(e.hi(), e.lo())?)
}

/// Number of edges `e` with `‖e‖ = k`, and one representative.
fn shell(lattice: Lattice, k: u64) -> (f64, Edge<(i64, i64)>) {
    let k = k as i64;
    match lattice {
        Lattice::Z1 => (2.0, Edge::new((k, 0), (k + 1, 0))),
        // Edges between the ℓ¹ spheres of radius k and k+1; no edge joins two
        // vertices of the same sphere.
        Lattice::Z2 => ((8 * k + 4) as f64, Edge::new((k, 0), (k + 1, 0))),
    }
}

/// The space-dependent criterion for simple random walk on `ℤ` or `ℤ²`
/// with `s(e) = (1 + ‖e‖)^{-α}`: positive recurrent iff `Σ_e s(e) < ∞`,
/// i.e. `α > 1` on `ℤ` and `α > 2` on `ℤ²`.
///
/// The value of `Σ_e s(e) E ξ(e)` (the expected actual excursion time) is
/// summed shell by shell for `horizon` shells with an Euler-Maclaurin tail.
pub fn space_criterion(lattice: Lattice, alpha: f64, horizon: u64) -> Result<SpaceVerdict> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::param(format!("space criterion needs alpha >= 0, got {alpha}")));
    }
    if horizon < 1 {
        return Err(Error::param("space criterion needs horizon >= 1"));
    }
    let kernel = LatticeKernel::new(lattice);
    let threshold = match lattice {
        Lattice::Z1 => 1.0,
        Lattice::Z2 => 2.0,
    };
    if alpha <= threshold {
        return Ok(SpaceVerdict { phase: Phase::NullRecurrent, edge_sum: SeriesVerdict::diverged(f64::INFINITY, 0) });
    }
    let xi = expected_edge_crossings(&kernel, shell(lattice, 0).1)?;
    for k in [1, 7, 100] {
        let other = expected_edge_crossings(&kernel, shell(lattice, k).1)?;
        if (other - xi).abs() > 1e-15 {
            return Err(Error::Unsupported("edge crossing expectation is not constant".into()));
        }
    }
    let mut acc = KahanSum::new();
    for k in 0..horizon {
        let (count, _) = shell(lattice, k);
        acc.add(count * xi * (1.0 + k as f64).powf(-alpha));
    }
    // Remaining shells k ≥ horizon, written with j = k + 1 ≥ horizon + 1.
    let start = horizon + 1;
    let (tail, err) = match lattice {
        Lattice::Z1 => {
            let (t, e) = hurwitz_tail(alpha, start);
            (2.0 * xi * t, 2.0 * xi * e)
        }
        Lattice::Z2 => {
            // (8k + 4) = 8j − 4
            let (t1, e1) = hurwitz_tail(alpha - 1.0, start);
            let (t0, e0) = hurwitz_tail(alpha, start);
            (xi * (8.0 * t1 - 4.0 * t0), xi * (8.0 * e1 + 4.0 * e0))
        }
    };
    let partial = acc.value();
    let value = partial + tail;
    Ok(SpaceVerdict {
        phase: Phase::PositiveRecurrent,
        edge_sum: SeriesVerdict::converged(value, partial, horizon, tail + err),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn transitive_crossing_expectations() {
        let z1 = LatticeKernel::new(Lattice::Z1);
        assert_eq!(expected_edge_crossings(&z1, Edge::new((3, 0), (4, 0))).unwrap(), 1.0);
        let z2 = LatticeKernel::new(Lattice::Z2);
        assert_eq!(expected_edge_crossings(&z2, Edge::new((3, -2), (3, -1))).unwrap(), 0.5);
    }

    #[test]
    fn line_alpha_two() {
        let v = space_criterion(Lattice::Z1, 2.0, 1000).unwrap();
        assert_eq!(v.phase, Phase::PositiveRecurrent);
        assert_relative_eq!(v.edge_sum.value().unwrap(), PI * PI / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn plane_alpha_three() {
        let v = space_criterion(Lattice::Z2, 3.0, 1000).unwrap();
        let (z2, _) = crate::numeric::zeta(2.0);
        let (z3, _) = crate::numeric::zeta(3.0);
        assert_relative_eq!(v.edge_sum.value().unwrap(), 4.0 * z2 - 2.0 * z3, max_relative = 1e-12);
    }

    #[test]
    fn null_cases() {
        assert_eq!(space_criterion(Lattice::Z2, 1.5, 10).unwrap().phase, Phase::NullRecurrent);
        assert_eq!(space_criterion(Lattice::Z1, 0.5, 10).unwrap().phase, Phase::NullRecurrent);
        assert_eq!(space_criterion(Lattice::Z2, 2.0, 10).unwrap().phase, Phase::NullRecurrent);
    }

    #[test]
    fn shell_counts_by_enumeration() {
        let k = LatticeKernel::new(Lattice::Z2);
        for r in 0..6u64 {
            let mut count = 0;
            for x in -8i64..=8 {
                for y in -8i64..=8 {
                    for (w, _) in k.transitions((x, y)).unwrap() {
                        if (x, y) < w && k.edge_norm(Edge::new((x, y), w)) == r {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(count as f64, shell(Lattice::Z2, r).0);
        }
    }
}
