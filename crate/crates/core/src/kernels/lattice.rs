use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clock::CrossingLedger;
use super::GraphKernel;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lattice {
    Z1,
    Z2,
}

impl Lattice {
    pub fn degree(self) -> u32 {
        match self {
            Lattice::Z1 => 2,
            Lattice::Z2 => 4,
        }
    }
}

/// Simple random walk on `ℤ` or `ℤ²`. Vertices are `(x, y)`; on `ℤ` the
/// second coordinate stays 0. The norm is the graph (ℓ¹) distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeKernel {
    lattice: Lattice,
}

impl LatticeKernel {
    pub fn new(lattice: Lattice) -> Self {
        Self { lattice }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    fn neighbours(&self, (x, y): (i64, i64)) -> impl Iterator<Item = (i64, i64)> {
        let d = self.lattice.degree() as usize;
        [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)].into_iter().take(d)
    }
}

impl GraphKernel for LatticeKernel {
    type Vertex = (i64, i64);
    type Ledger = CrossingLedger<(i64, i64)>;

    fn origin(&self) -> (i64, i64) {
        (0, 0)
    }

    fn transitions(&self, v: (i64, i64)) -> Result<Vec<((i64, i64), f64)>> {
        if self.lattice == Lattice::Z1 && v.1 != 0 {
            return Err(crate::Error::UnknownVertex(format!("{v:?}")));
        }
        let p = 1.0 / self.lattice.degree() as f64;
        Ok(self.neighbours(v).map(|w| (w, p)).collect())
    }

    fn norm(&self, v: (i64, i64)) -> u64 {
        v.0.unsigned_abs() + v.1.unsigned_abs()
    }

    #[inline]
    fn step<R: Rng + ?Sized>(&self, (x, y): (i64, i64), rng: &mut R) -> Result<(i64, i64)> {
        let bits = rng.next_u64();
        Ok(match self.lattice {
            Lattice::Z1 => {
                if bits >> 63 == 0 {
                    (x + 1, y)
                } else {
                    (x - 1, y)
                }
            }
            Lattice::Z2 => match bits >> 62 {
                0 => (x + 1, y),
                1 => (x - 1, y),
                2 => (x, y + 1),
                _ => (x, y - 1),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{check_row, Edge};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rows_and_norms() {
        let k = LatticeKernel::new(Lattice::Z2);
        check_row((3, -2), &k.transitions((3, -2)).unwrap()).unwrap();
        assert_eq!(k.norm((3, -2)), 5);
        assert_eq!(k.edge_norm(Edge::new((3, -2), (2, -2))), 4);
        let k1 = LatticeKernel::new(Lattice::Z1);
        assert_eq!(k1.transitions((2, 0)).unwrap().len(), 2);
        assert!(k1.transitions((2, 1)).is_err());
    }

    #[test]
    fn z2_steps_are_uniform() {
        let k = LatticeKernel::new(Lattice::Z2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0u32; 4];
        let n = 400_000;
        for _ in 0..n {
            let w = k.step((0, 0), &mut rng).unwrap();
            let i = match w {
                (1, 0) => 0,
                (-1, 0) => 1,
                (0, 1) => 2,
                _ => 3,
            };
            counts[i] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 4.0).abs() < 4.0 * sigma);
        }
    }
}
