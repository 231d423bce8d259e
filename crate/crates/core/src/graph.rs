//! Connected weighted undirected graphs and their normalized adjacency.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Undirected weighted graph stored as a dense symmetric weight matrix.
///
/// Construction validates that the matrix is symmetric with a zero diagonal,
/// that weights are finite and nonnegative, and that the graph is connected.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    weights: DMatrix<f64>,
    labels: Option<Vec<String>>,
    coords: Option<Vec<[f64; 2]>>,
}

impl Graph {
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if weights.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: weights.ncols(),
            });
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
            }
            for j in (i + 1)..n {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "weight of edge ({i}, {j}) is {w}, expected a finite nonnegative value"
                    )));
                }
                if weights[(j, i)] != w {
                    return Err(Error::InvalidGraph(format!(
                        "weight matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let g = Graph {
            weights,
            labels: None,
            coords: None,
        };
        g.check_connected()?;
        Ok(g)
    }

    /// Builds a graph on `n` vertices from an undirected edge list. Each edge
    /// is listed once; both orientations are set.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for (k, &(u, v, weight)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} is a self-loop at vertex {u}"
                )));
            }
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} ({u}, {v}) has invalid weight {weight}"
                )));
            }
            if w[(u, v)] != 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} ({u}, {v}) is listed more than once"
                )));
            }
            w[(u, v)] = weight;
            w[(v, u)] = weight;
        }
        Self::from_weights(w)
    }

    pub fn with_coords(mut self, coords: Vec<[f64; 2]>) -> Result<Self> {
        if coords.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: coords.len(),
            });
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.weights.row_iter().map(|r| r.sum()))
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let row = self.weights.row(i);
        (0..self.n()).filter(move |&j| row[j] > 0.0)
    }

    /// Upper-triangular edge list `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn is_regular(&self) -> bool {
        let d = self.degrees();
        d.iter().all(|&x| x == d[0])
    }

    /// Hop distances from `source`; unreachable vertices get `usize::MAX`.
    pub fn hop_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(i) = queue.pop_front() {
            for j in self.neighbors(i) {
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    queue.push_back(j);
                }
            }
        }
        dist
    }

    fn check_connected(&self) -> Result<()> {
        let dist = self.hop_distances(0);
        match dist.iter().position(|&d| d == usize::MAX) {
            Some(vertex) => Err(Error::Disconnected { vertex }),
            None => Ok(()),
        }
    }

    /// Two-coloring by BFS. `true` marks the color class of vertex 0.
    pub fn bipartite_coloring(&self) -> Result<Vec<bool>> {
        let n = self.n();
        let mut color: Vec<Option<bool>> = vec![None; n];
        let mut queue = VecDeque::new();
        color[0] = Some(true);
        queue.push_back(0);
        while let Some(i) = queue.pop_front() {
            let ci = color[i].expect("queued vertices are colored");
            for j in self.neighbors(i) {
                match color[j] {
                    None => {
                        color[j] = Some(!ci);
                        queue.push_back(j);
                    }
                    Some(cj) if cj == ci => return Err(Error::NotBipartite(i.min(j), i.max(j))),
                    Some(_) => {}
                }
            }
        }
        Ok(color.into_iter().map(|c| c.unwrap_or(true)).collect())
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartite_coloring().is_ok()
    }

    /// Combinatorial Laplacian `D - W`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = -self.weights.clone();
        for (i, d) in self.degrees().iter().enumerate() {
            l[(i, i)] = *d;
        }
        l
    }
}

/// A graph together with its degrees and `D^{-1/2} W D^{-1/2}`.
#[derive(Debug, Clone)]
pub struct NormalizedGraph {
    graph: Graph,
    deg: DVector<f64>,
    a_sym: DMatrix<f64>,
}

impl NormalizedGraph {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn degrees(&self) -> &DVector<f64> {
        &self.deg
    }

    pub fn a_sym(&self) -> &DMatrix<f64> {
        &self.a_sym
    }

    pub fn deg_sqrt(&self) -> DVector<f64> {
        self.deg.map(libm::sqrt)
    }

    pub fn deg_inv_sqrt(&self) -> DVector<f64> {
        self.deg.map(|d| 1.0 / libm::sqrt(d))
    }
}

pub fn normalize(g: &Graph) -> NormalizedGraph {
    let deg = g.degrees();
    let inv_sqrt = deg.map(|d| 1.0 / libm::sqrt(d));
    let n = g.n();
    let mut a_sym = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let w = g.weights()[(i, j)];
            if w != 0.0 {
                a_sym[(i, j)] = w * inv_sqrt[i] * inv_sqrt[j];
            }
        }
    }
    // enforce exact symmetry against rounding in the two products
    for j in 0..n {
        for i in (j + 1)..n {
            a_sym[(j, i)] = a_sym[(i, j)];
        }
    }
    NormalizedGraph {
        graph: g.clone(),
        deg,
        a_sym,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn k2_normalizes_to_swap() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let ng = normalize(&g);
        assert_eq!(
            ng.a_sym(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
        );
    }

    #[test]
    fn p3_normalized_entries() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let ng = normalize(&g);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(ng.degrees().as_slice(), &[1.0, 2.0, 1.0]);
        assert_abs_diff_eq!(ng.a_sym()[(0, 1)], h, epsilon = 1e-15);
        assert_abs_diff_eq!(ng.a_sym()[(1, 2)], h, epsilon = 1e-15);
        assert_eq!(ng.a_sym()[(0, 2)], 0.0);
        assert_eq!(ng.a_sym()[(1, 1)], 0.0);
    }

    #[test]
    fn rejects_self_loop_and_disconnection() {
        assert!(matches!(
            Graph::from_edges(2, &[(0, 0, 1.0)]),
            Err(Error::InvalidGraph(_))
        ));
        assert_eq!(
            Graph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]),
            Err(Error::Disconnected { vertex: 2 })
        );
        assert!(Graph::from_edges(2, &[(0, 1, -1.0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0)]).is_err());
    }

    #[test]
    fn coloring_detects_odd_cycle() {
        let c3 = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert!(matches!(
            c3.bipartite_coloring(),
            Err(Error::NotBipartite(_, _))
        ));
        let c4 =
            Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(
            c4.bipartite_coloring().unwrap(),
            vec![true, false, true, false]
        );
    }

    #[test]
    fn degree_rescaling_reproduces_weights() {
        let g =
            Graph::from_edges(4, &[(0, 1, 0.3), (1, 2, 2.0), (2, 3, 1.5), (0, 2, 0.7)]).unwrap();
        let ng = normalize(&g);
        let s = ng.deg_sqrt();
        let back = DMatrix::from_fn(4, 4, |i, j| s[i] * ng.a_sym()[(i, j)] * s[j]);
        let rel = (&back - g.weights()).amax() / g.weights().amax();
        assert!(rel <= 1e-12);
    }
}
