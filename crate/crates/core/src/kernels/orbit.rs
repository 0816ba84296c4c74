use rand::Rng;

use crate::clock::CrossingLedger;
use super::GraphKernel;
use crate::{Error, Result};

/// The `ℤ²` walk on sup-norm orbits `O_k = {v : max(|x|, |y|) = k}`.
///
/// From a non-corner vertex of `O_k` the walk moves inward with probability
/// `(2/3)·2^{-k}`, outward with `(1/3)·2^{-k}` and clockwise along `O_k`
/// otherwise. At a corner the clockwise move goes to the next vertex of the
/// orbit and the radial moves go diagonally to the neighbouring orbit's
/// corner, so the orbit-to-orbit rates are the same at every vertex. With
/// these diagonal edges the graph distance to the origin is the sup norm.
///
/// The walk is truncated at `O_{k_max}`, where the outward mass is folded
/// into the clockwise move.
///
/// Moves along an orbit only go clockwise, so this kernel is the one place
/// where an edge is not traversable in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitKernel {
    k_max: u32,
}

pub fn make_orbit_kernel(k_max: u32) -> Result<OrbitKernel> {
    if k_max < 2 {
        return Err(Error::param("orbit kernel needs k_max >= 2"));
    }
    if k_max > 60 {
        return Err(Error::param("orbit kernel supports k_max <= 60"));
    }
    Ok(OrbitKernel { k_max })
}

/// The three moves available from a vertex on `O_k`, `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrbitMoves {
    pub inward: (i64, i64),
    pub outward: (i64, i64),
    pub clockwise: (i64, i64),
    pub corner: bool,
}

impl OrbitKernel {
    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn orbit(v: (i64, i64)) -> u64 {
        v.0.unsigned_abs().max(v.1.unsigned_abs())
    }

    pub fn moves(v: (i64, i64)) -> OrbitMoves {
        let (x, y) = v;
        let k = Self::orbit(v) as i64;
        assert!(k >= 1, "origin has no orbit moves");
        let clockwise = if y == k && x < k {
            (x + 1, y)
        } else if x == k && y > -k {
            (x, y - 1)
        } else if y == -k && x > -k {
            (x - 1, y)
        } else {
            (x, y + 1)
        };
        let corner = x.abs() == k && y.abs() == k;
        let (inward, outward) = if corner {
            let (sx, sy) = (x.signum(), y.signum());
            ((sx * (k - 1), sy * (k - 1)), (sx * (k + 1), sy * (k + 1)))
        } else if y.abs() == k {
            let s = y.signum();
            ((x, s * (k - 1)), (x, s * (k + 1)))
        } else {
            let s = x.signum();
            ((s * (k - 1), y), (s * (k + 1), y))
        };
        OrbitMoves { inward, outward, clockwise, corner }
    }

    /// `(inward, outward, clockwise)` probabilities on `O_k`.
    pub fn rates(&self, k: u32) -> (f64, f64, f64) {
        let scale = 0.5f64.powi(k as i32);
        let inward = 2.0 / 3.0 * scale;
        if k >= self.k_max {
            (inward, 0.0, 1.0 - inward)
        } else {
            (inward, scale / 3.0, 1.0 - scale)
        }
    }

    fn check(&self, v: (i64, i64)) -> Result<u32> {
        let k = Self::orbit(v);
        if k > self.k_max as u64 {
            return Err(Error::UnknownVertex(format!("{v:?}")));
        }
        Ok(k as u32)
    }
}

const AXIS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

impl GraphKernel for OrbitKernel {
    type Vertex = (i64, i64);
    type Ledger = CrossingLedger<(i64, i64)>;

    fn origin(&self) -> (i64, i64) {
        (0, 0)
    }

    fn transitions(&self, v: (i64, i64)) -> Result<Vec<((i64, i64), f64)>> {
        let k = self.check(v)?;
        if k == 0 {
            return Ok(AXIS.iter().map(|&w| (w, 0.25)).collect());
        }
        let m = Self::moves(v);
        let (pin, pout, pcw) = self.rates(k);
        let mut row = vec![(m.inward, pin), (m.clockwise, pcw)];
        if pout > 0.0 {
            row.push((m.outward, pout));
        }
        Ok(row)
    }

    fn norm(&self, v: (i64, i64)) -> u64 {
        Self::orbit(v)
    }

    #[inline]
    fn step<R: Rng + ?Sized>(&self, v: (i64, i64), rng: &mut R) -> Result<(i64, i64)> {
        let k = self.check(v)?;
        let u: f64 = rng.random();
        if k == 0 {
            return Ok(AXIS[((u * 4.0) as usize).min(3)]);
        }
        let m = Self::moves(v);
        let (pin, pout, _) = self.rates(k);
        Ok(if u < pin {
            m.inward
        } else if u < pin + pout {
            m.outward
        } else {
            m.clockwise
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::check_row;
    use approx::assert_relative_eq;

    fn orbit_vertices(k: i64) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for x in -k..=k {
            for y in -k..=k {
                if x.abs().max(y.abs()) == k {
                    out.push((x, y));
                }
            }
        }
        out
    }

    #[test]
    fn first_orbit_rates() {
        let k = make_orbit_kernel(5).unwrap();
        let row = k.transitions((1, 0)).unwrap();
        let m = OrbitKernel::moves((1, 0));
        let p = |w| row.iter().find(|r| r.0 == w).unwrap().1;
        assert_relative_eq!(p(m.inward), 1.0 / 3.0);
        assert_relative_eq!(p(m.outward), 1.0 / 6.0);
        assert_relative_eq!(p(m.clockwise), 0.5);
        assert_eq!(m.inward, (0, 0));
        assert_eq!(m.clockwise, (1, -1));
    }

    #[test]
    fn origin_goes_to_first_orbit() {
        let k = make_orbit_kernel(3).unwrap();
        let row = k.transitions((0, 0)).unwrap();
        assert_eq!(row.len(), 4);
        for (w, p) in row {
            assert_eq!(OrbitKernel::orbit(w), 1);
            assert_eq!(p, 0.25);
        }
    }

    #[test]
    fn rows_stochastic_and_rates_exact() {
        let kernel = make_orbit_kernel(6).unwrap();
        check_row((0, 0), &kernel.transitions((0, 0)).unwrap()).unwrap();
        for k in 1..=6i64 {
            let verts = orbit_vertices(k);
            assert_eq!(verts.len() as i64, 8 * k);
            for v in verts {
                let row = kernel.transitions(v).unwrap();
                check_row(v, &row).unwrap();
                let inward: f64 = row
                    .iter()
                    .filter(|(w, _)| OrbitKernel::orbit(*w) as i64 == k - 1)
                    .map(|r| r.1)
                    .sum();
                assert_relative_eq!(inward, 2.0 / 3.0 * 0.5f64.powi(k as i32), epsilon = 1e-15);
                let outward: f64 = row
                    .iter()
                    .filter(|(w, _)| OrbitKernel::orbit(*w) as i64 == k + 1)
                    .map(|r| r.1)
                    .sum();
                let expected = if k < 6 { 0.5f64.powi(k as i32) / 3.0 } else { 0.0 };
                assert_relative_eq!(outward, expected, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn clockwise_cycle_visits_whole_orbit() {
        for k in 1..5i64 {
            let start = (0, k);
            let mut v = start;
            let mut seen = 0;
            loop {
                v = OrbitKernel::moves(v).clockwise;
                seen += 1;
                assert_eq!(OrbitKernel::orbit(v) as i64, k);
                if v == start {
                    break;
                }
            }
            assert_eq!(seen, 8 * k);
        }
    }

    #[test]
    fn rejects_outside_truncation() {
        let k = make_orbit_kernel(3).unwrap();
        assert!(k.transitions((4, 0)).is_err());
        assert!(make_orbit_kernel(1).is_err());
    }
}
