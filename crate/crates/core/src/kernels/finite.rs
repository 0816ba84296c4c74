use std::collections::VecDeque;

use rand::Rng;

use crate::clock::CrossingLedger;
use super::{check_row, sample_row, GraphKernel};
use crate::{Error, Result};

/// Walk on an explicit finite graph with vertices `0..n` and origin `0`.
///
/// Construction checks that every row is stochastic, every edge is
/// traversable in both directions with positive probability and the graph
/// is connected. Distances are precomputed by breadth-first search.
#[derive(Debug, Clone)]
pub struct FiniteGraphKernel {
    rows: Vec<Vec<(usize, f64)>>,
    dist: Vec<u64>,
}

impl FiniteGraphKernel {
    pub fn new(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::param("finite graph needs at least two vertices"));
        }
        for (v, row) in rows.iter().enumerate() {
            check_row(v, row)?;
            for &(w, _) in row {
                if w >= n {
                    return Err(Error::UnknownVertex(w.to_string()));
                }
                if w == v {
                    return Err(Error::param(format!("self-loop at {v}")));
                }
                if !rows[w].iter().any(|&(u, p)| u == v && p > 0.0) {
                    return Err(Error::param(format!("edge {v}-{w} has no reverse transition")));
                }
            }
        }
        let mut dist = vec![u64::MAX; n];
        dist[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &rows[v] {
                if dist[w] == u64::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = dist.iter().position(|&d| d == u64::MAX) {
            return Err(Error::param(format!("vertex {v} unreachable from the origin")));
        }
        Ok(Self { rows, dist })
    }

    /// Simple random walk on an undirected edge list.
    pub fn simple(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::UnknownVertex(format!("{a}-{b}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let rows = adj
            .into_iter()
            .map(|nb| {
                let p = 1.0 / nb.len().max(1) as f64;
                nb.into_iter().map(|w| (w, p)).collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl GraphKernel for FiniteGraphKernel {
    type Vertex = usize;
    type Ledger = CrossingLedger<usize>;

    fn origin(&self) -> usize {
        0
    }

    fn transitions(&self, v: usize) -> Result<Vec<(usize, f64)>> {
        self.rows
            .get(v)
            .cloned()
            .ok_or_else(|| Error::UnknownVertex(v.to_string()))
    }

    fn norm(&self, v: usize) -> u64 {
        self.dist[v]
    }

    fn step<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> Result<usize> {
        let row = self.rows.get(v).ok_or_else(|| Error::UnknownVertex(v.to_string()))?;
        Ok(sample_row(row, rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_distances() {
        let k = FiniteGraphKernel::simple(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
        let d: Vec<u64> = (0..6).map(|v| k.norm(v)).collect();
        assert_eq!(d, vec![0, 1, 2, 3, 2, 1]);
        assert_eq!(k.edge_norm(super::super::Edge::new(2, 3)), 2);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(FiniteGraphKernel::simple(3, &[(0, 1)]).is_err());
        let one_way = vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(1, 1.0)]];
        assert!(FiniteGraphKernel::new(one_way).is_err());
        let leaky = vec![vec![(1, 0.9)], vec![(0, 1.0)]];
        assert!(FiniteGraphKernel::new(leaky).is_err());
    }
}
