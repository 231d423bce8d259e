//! Deterministic graph generators.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Attempts made by the random generators before giving up on connectivity.
pub const MAX_CONNECT_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    /// Cycle on `n` vertices, unit weights. Bipartite for even `n`.
    Ring {
        n: usize,
    },
    Path {
        n: usize,
    },
    /// Hub with `head` pendant leaves plus a path tail starting at the hub;
    /// `head + tail = n` where the tail counts the hub.
    Comet {
        n: usize,
        head: usize,
    },
    /// `n` uniform points in the unit square joined by a Gaussian kernel of
    /// their distance, truncated at `radius`.
    RandomSensor {
        n: usize,
        radius: f64,
    },
    /// Two parts of the given sizes with independent unit-weight edges of
    /// probability `p` between them.
    RandomBipartite {
        left: usize,
        right: usize,
        p: f64,
    },
}

/// Radius at twice the random-geometric connectivity threshold.
pub fn sensor_default_radius(n: usize) -> f64 {
    let n = n.max(2) as f64;
    2.0 * libm::sqrt(libm::log(n) / (PI * n))
}

pub fn generate_graph(kind: GraphKind, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with(kind, &mut rng)
}

pub fn generate_with<R: Rng + ?Sized>(kind: GraphKind, rng: &mut R) -> Result<Graph> {
    match kind {
        GraphKind::Ring { n } => ring(n),
        GraphKind::Path { n } => path(n),
        GraphKind::Comet { n, head } => comet(n, head),
        GraphKind::RandomSensor { n, radius } => random_sensor(n, radius, rng),
        GraphKind::RandomBipartite { left, right, p } => random_bipartite(left, right, p, rng),
    }
}

fn ring(n: usize) -> Result<Graph> {
    if n < 3 {
        if n == 2 {
            return path(2);
        }
        return Err(Error::InvalidParameter(format!(
            "ring needs n >= 2, got {n}"
        )));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    let coords = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            [libm::cos(t), libm::sin(t)]
        })
        .collect();
    Graph::from_edges(n, &edges)?.with_coords(coords)
}

fn path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "path needs n >= 2, got {n}"
        )));
    }
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    let coords = (0..n).map(|i| [i as f64 / (n - 1) as f64, 0.0]).collect();
    Graph::from_edges(n, &edges)?.with_coords(coords)
}

fn comet(n: usize, head: usize) -> Result<Graph> {
    if head == 0 || head >= n {
        return Err(Error::InvalidParameter(format!(
            "comet needs 1 <= head < n, got head={head}, n={n}"
        )));
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut coords = Vec::with_capacity(n);
    coords.push([0.0, 0.0]);
    for leaf in 1..=head {
        edges.push((0, leaf, 1.0));
        let t = PI / 2.0 + PI * leaf as f64 / (head + 1) as f64;
        coords.push([libm::cos(t), libm::sin(t)]);
    }
    let mut prev = 0;
    for (step, v) in (head + 1..n).enumerate() {
        edges.push((prev, v, 1.0));
        coords.push([(step + 1) as f64, 0.0]);
        prev = v;
    }
    Graph::from_edges(n, &edges)?.with_coords(coords)
}

fn random_sensor<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Result<Graph> {
    if n < 2 || !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "random sensor graph needs n >= 2 and radius > 0, got n={n}, radius={radius}"
        )));
    }
    let sigma = radius / 2.0;
    for _ in 0..MAX_CONNECT_ATTEMPTS {
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = pts[i][0] - pts[j][0];
                let dy = pts[i][1] - pts[j][1];
                let d2 = dx * dx + dy * dy;
                if d2 <= radius * radius {
                    let v = libm::exp(-d2 / (2.0 * sigma * sigma));
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
        }
        if let Ok(g) = Graph::from_weights(w) {
            return g.with_coords(pts);
        }
    }
    Err(Error::InvalidParameter(format!(
        "no connected sensor graph (n={n}, radius={radius}) after {MAX_CONNECT_ATTEMPTS} attempts"
    )))
}

fn random_bipartite<R: Rng + ?Sized>(
    left: usize,
    right: usize,
    p: f64,
    rng: &mut R,
) -> Result<Graph> {
    if left == 0 || right == 0 || !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "random bipartite graph needs nonempty parts and 0 < p <= 1, got ({left}, {right}, {p})"
        )));
    }
    let n = left + right;
    for _ in 0..MAX_CONNECT_ATTEMPTS {
        let mut w = DMatrix::zeros(n, n);
        for i in 0..left {
            for j in left..n {
                if rng.random::<f64>() < p {
                    w[(i, j)] = 1.0;
                    w[(j, i)] = 1.0;
                }
            }
        }
        if let Ok(g) = Graph::from_weights(w) {
            let coords = (0..n)
                .map(|i| {
                    if i < left {
                        [0.0, i as f64 / left as f64]
                    } else {
                        [1.0, (i - left) as f64 / right as f64]
                    }
                })
                .collect();
            return g.with_coords(coords);
        }
    }
    Err(Error::InvalidParameter(format!(
        "no connected bipartite graph ({left}, {right}, p={p}) after {MAX_CONNECT_ATTEMPTS} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring4_is_c4() {
        let g = generate_graph(GraphKind::Ring { n: 4 }, 0).unwrap();
        assert_eq!(
            g.edges(),
            [(0, 1, 1.0), (0, 3, 1.0), (1, 2, 1.0), (2, 3, 1.0)]
        );
        assert!(g.is_bipartite());
        assert!(g.is_regular());
    }

    #[test]
    fn path3_edges() {
        let g = generate_graph(GraphKind::Path { n: 3 }, 0).unwrap();
        assert_eq!(g.edges(), [(0, 1, 1.0), (1, 2, 1.0)]);
    }

    #[test]
    fn comet_shape() {
        let g = generate_graph(GraphKind::Comet { n: 10, head: 4 }, 0).unwrap();
        assert_eq!(g.n(), 10);
        assert_eq!(g.edges().len(), 9);
        assert_eq!(g.neighbors(0).count(), 5);
        assert!(g.is_bipartite());
    }

    #[test]
    fn sensor_is_deterministic_and_connected() {
        let kind = GraphKind::RandomSensor {
            n: 100,
            radius: sensor_default_radius(100),
        };
        let a = generate_graph(kind, 7).unwrap();
        let b = generate_graph(kind, 7).unwrap();
        assert_eq!(a.weights(), b.weights());
        assert!(a.weights().iter().all(|&w| w >= 0.0));
        assert_ne!(a.weights(), generate_graph(kind, 8).unwrap().weights());
    }

    #[test]
    fn bipartite_generator_is_bipartite() {
        let g = generate_graph(
            GraphKind::RandomBipartite {
                left: 20,
                right: 80,
                p: 0.3,
            },
            3,
        )
        .unwrap();
        let col = g.bipartite_coloring().unwrap();
        assert_eq!(col.iter().filter(|&&c| c).count(), 20);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_graph(GraphKind::Path { n: 1 }, 0).is_err());
        assert!(generate_graph(GraphKind::Comet { n: 5, head: 5 }, 0).is_err());
        assert!(generate_graph(
            GraphKind::RandomSensor {
                n: 50,
                radius: 1e-4
            },
            0
        )
        .is_err());
    }
}
