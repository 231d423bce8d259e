//! Vertex partitions `{A, B}` and the sampling matrix `K`.
//!
//! A partition is admissible for annihilation orders `(r, s)` when
//! `U(A, 0..r)` and `U(B, n-s..n)` both have full column rank.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::NormalizedGraph;
use crate::linalg::{select_rows, sigma_min};
use crate::spectral::SpectralDecomposition;

/// Smallest singular value accepted as full column rank.
pub const RANK_TOL: f64 = 1e-8;
/// Pivot threshold relative to the largest remaining entry of a column.
pub const PIVOT_REL_TOL: f64 = 1e-10;
/// `sigma_min(I + KG)` at or below this is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Unconstrained vertices follow the sign of `u_N`: negative to `B`, else `A`.
    Polarity,
    /// Unconstrained vertices are shuffled and split as evenly as possible.
    Random,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Polarity => "polarity",
            Strategy::Random => "random",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "polarity" => Some(Strategy::Polarity),
            "random" => Some(Strategy::Random),
            _ => None,
        }
    }
}

/// Disjoint nonempty vertex sets; `A` keeps lowpass samples, `B` highpass.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPattern {
    set_a: Vec<usize>,
    set_b: Vec<usize>,
    k_diag: DVector<f64>,
}

impl SamplingPattern {
    pub fn new(n: usize, mut set_a: Vec<usize>, mut set_b: Vec<usize>) -> Result<Self> {
        set_a.sort_unstable();
        set_b.sort_unstable();
        if set_a.is_empty() || set_b.is_empty() {
            return Err(Error::InvalidParameter(
                "sampling pattern must keep at least one lowpass and one highpass sample".into(),
            ));
        }
        let mut k_diag = DVector::from_element(n, 0.0);
        for (set, sign) in [(&set_a, 1.0), (&set_b, -1.0)] {
            for &i in set.iter() {
                if i >= n {
                    return Err(Error::InvalidParameter(format!(
                        "vertex {i} outside 0..{n}"
                    )));
                }
                if k_diag[i] != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "vertex {i} assigned twice"
                    )));
                }
                k_diag[i] = sign;
            }
        }
        if let Some(i) = k_diag.iter().position(|&k| k == 0.0) {
            return Err(Error::InvalidParameter(format!(
                "vertex {i} is not assigned"
            )));
        }
        Ok(SamplingPattern {
            set_a,
            set_b,
            k_diag,
        })
    }

    /// `K = I`: every vertex keeps its lowpass sample. Not critically
    /// sampled in the two-channel sense; used to probe legacy filters.
    pub fn all_lowpass(n: usize) -> Self {
        SamplingPattern {
            set_a: (0..n).collect(),
            set_b: Vec::new(),
            k_diag: DVector::from_element(n, 1.0),
        }
    }

    pub fn n(&self) -> usize {
        self.k_diag.len()
    }

    pub fn set_a(&self) -> &[usize] {
        &self.set_a
    }

    pub fn set_b(&self) -> &[usize] {
        &self.set_b
    }

    pub fn k_diag(&self) -> &DVector<f64> {
        &self.k_diag
    }
}

/// Greedy elimination over the columns of `m` restricted to `candidates`:
/// each column pivots on the first remaining row whose entry exceeds
/// `PIVOT_REL_TOL` times the column's largest remaining magnitude. Returns the
/// pivot rows, or the first column without a usable pivot.
pub fn select_independent_rows(
    m: &DMatrix<f64>,
    candidates: &[usize],
) -> core::result::Result<Vec<usize>, usize> {
    let mut work = select_rows(m, candidates);
    let cols = work.ncols();
    let mut used = alloc::vec![false; candidates.len()];
    let mut picked = Vec::with_capacity(cols);
    for j in 0..cols {
        let largest = (0..candidates.len())
            .filter(|&k| !used[k])
            .map(|k| work[(k, j)].abs())
            .fold(0.0, f64::max);
        if largest <= RANK_TOL {
            return Err(j);
        }
        let p = (0..candidates.len())
            .find(|&k| !used[k] && work[(k, j)].abs() > PIVOT_REL_TOL * largest)
            .expect("largest entry qualifies");
        used[p] = true;
        picked.push(candidates[p]);
        let pivot_row = work.row(p).into_owned();
        for k in 0..candidates.len() {
            if !used[k] {
                let f = work[(k, j)] / pivot_row[j];
                if f != 0.0 {
                    let updated = work.row(k) - &pivot_row * f;
                    work.row_mut(k).copy_from(&updated);
                }
            }
        }
    }
    Ok(picked)
}

fn columns(sd: &SpectralDecomposition, range: core::ops::Range<usize>) -> DMatrix<f64> {
    sd.u.columns(range.start, range.len()).into_owned()
}

/// `(sigma_min(U(A, 0..r)), sigma_min(U(B, n-s..n)))`.
pub fn rank_margins(
    sd: &SpectralDecomposition,
    pattern: &SamplingPattern,
    r: usize,
    s: usize,
) -> (f64, f64) {
    let n = sd.n();
    let ur = columns(sd, 0..r);
    let us = columns(sd, n - s..n);
    (
        full_rank_margin(&select_rows(&ur, pattern.set_a())),
        full_rank_margin(&select_rows(&us, pattern.set_b())),
    )
}

fn full_rank_margin(m: &DMatrix<f64>) -> f64 {
    if m.nrows() < m.ncols() {
        0.0
    } else {
        sigma_min(m)
    }
}

pub fn check_rank_conditions(
    sd: &SpectralDecomposition,
    pattern: &SamplingPattern,
    r: usize,
    s: usize,
) -> Result<()> {
    let (a, b) = rank_margins(sd, pattern, r, s);
    if !(a > RANK_TOL) {
        return Err(Error::RankDeficient {
            stage: "lowpass set",
            detail: format!("sigma_min(U(A, I_r)) = {a:.3e} with r = {r}"),
        });
    }
    if !(b > RANK_TOL) {
        return Err(Error::RankDeficient {
            stage: "highpass set",
            detail: format!("sigma_min(U(B, I_s)) = {b:.3e} with s = {s}"),
        });
    }
    Ok(())
}

/// Sign split of `rest` by the highest-frequency basis vector.
pub fn polarity_assign(u_last: &DVector<f64>, rest: &[usize]) -> (Vec<usize>, Vec<usize>) {
    rest.iter().partition(|&&i| !(u_last[i] < 0.0))
}

/// Shuffled near-even split of `rest`; `A` receives the extra vertex.
pub fn random_assign<R: Rng + ?Sized>(rest: &[usize], rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut shuffled = rest.to_vec();
    shuffled.shuffle(rng);
    let half = shuffled.len().div_ceil(2);
    let b = shuffled.split_off(half);
    (shuffled, b)
}

/// Row-selection partition search.
///
/// 1. pick `r` independent rows of `U(:, 0..r)` into `A`;
/// 2. fail if `U(V \ A, n-s..n)` is rank deficient, else pick `s` of its rows into `B`;
/// 3. assign the remaining vertices by `strategy`.
///
/// Under [`Strategy::Polarity`] the row scans of steps 1 and 2 visit the
/// vertices of matching sign of `u_N` first (`u_N >= 0` for `A`, `u_N < 0` for
/// `B`), in index order within each group.
pub fn partition_search<R: Rng + ?Sized>(
    sd: &SpectralDecomposition,
    r: usize,
    s: usize,
    strategy: Strategy,
    rng: &mut R,
) -> Result<SamplingPattern> {
    let n = sd.n();
    if r < 1 || s < 1 {
        return Err(Error::InvalidParameter(format!(
            "r and s must be >= 1, got r={r}, s={s}"
        )));
    }
    if r + s > n {
        return Err(Error::InvalidParameter(format!(
            "r + s = {} exceeds the {n} vertices; no valid partition exists",
            r + s
        )));
    }
    let all: Vec<usize> = (0..n).collect();
    let u_last = sd.last();
    let scan = |rows: &[usize], to_b: bool| -> Vec<usize> {
        let mut order = rows.to_vec();
        if strategy == Strategy::Polarity {
            order.sort_by_key(|&i| (u_last[i] < 0.0) != to_b);
        }
        order
    };
    let mut set_a =
        select_independent_rows(&columns(sd, 0..r), &scan(&all, false)).map_err(|col| {
            Error::RankDeficient {
                stage: "lowpass row selection",
                detail: format!("U(:, I_r) has no pivot for column {col}"),
            }
        })?;
    set_a.sort_unstable();

    let remaining: Vec<usize> = all
        .iter()
        .copied()
        .filter(|i| set_a.binary_search(i).is_err())
        .collect();
    let us = columns(sd, n - s..n);
    let margin = full_rank_margin(&select_rows(&us, &remaining));
    if !(margin > RANK_TOL) {
        return Err(Error::RankDeficient {
            stage: "highpass feasibility",
            detail: format!(
                "U(V \\ A, I_s) is rank deficient (sigma_min = {margin:.3e}); reduce r or s"
            ),
        });
    }
    let set_b = select_independent_rows(&us, &scan(&remaining, true)).map_err(|col| {
        Error::RankDeficient {
            stage: "highpass row selection",
            detail: format!("U(V \\ A, I_s) has no pivot for column {col}"),
        }
    })?;

    let rest: Vec<usize> = remaining
        .iter()
        .copied()
        .filter(|i| !set_b.contains(i))
        .collect();
    let (to_a, to_b) = match strategy {
        Strategy::Polarity => polarity_assign(&u_last, &rest),
        Strategy::Random => random_assign(&rest, rng),
    };
    set_a.extend(to_a);
    let mut set_b = set_b;
    set_b.extend(to_b);
    let pattern = SamplingPattern::new(n, set_a, set_b)?;
    check_rank_conditions(sd, &pattern, r, s).map_err(|e| match e {
        Error::RankDeficient { stage: _, detail } => Error::RankDeficient {
            stage: "final verification",
            detail,
        },
        other => other,
    })?;
    Ok(pattern)
}

pub fn partition_search_seeded(
    sd: &SpectralDecomposition,
    r: usize,
    s: usize,
    strategy: Strategy,
    seed: u64,
) -> Result<SamplingPattern> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    partition_search(sd, r, s, strategy, &mut rng)
}

/// The two color classes of a bipartite graph (the class of vertex 0 is `A`)
/// and `floor(rank(A^S) / 2)`, the largest admissible `r` and `s`.
pub fn bipartite_natural_partition(ng: &NormalizedGraph) -> Result<(SamplingPattern, usize)> {
    let colors = ng.graph().bipartite_coloring()?;
    let n = ng.n();
    let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| colors[i]);
    let pattern = SamplingPattern::new(n, a, b)?;
    let eig = nalgebra::SymmetricEigen::new(ng.a_sym().clone());
    let rank = eig.eigenvalues.iter().filter(|x| x.abs() > 1e-10).count();
    Ok((pattern, rank / 2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaDiagnostic {
    pub sigma_min: f64,
    /// `2 / sigma_min`, the multiplier in the lowpass-only error bound.
    pub bound_const: f64,
    pub singular: bool,
}

/// Smallest singular value of `I + KG`.
pub fn sigma_min_diagnostic(k_diag: &DVector<f64>, g: &DMatrix<f64>) -> Result<SigmaDiagnostic> {
    let n = g.nrows();
    if g.ncols() != n || k_diag.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if g.ncols() != n {
                g.ncols()
            } else {
                k_diag.len()
            },
        });
    }
    let mut m = g.clone();
    for (mut row, k) in m.row_iter_mut().zip(k_diag.iter()) {
        row *= *k;
    }
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    let sigma = sigma_min(&m);
    Ok(SigmaDiagnostic {
        sigma_min: sigma,
        bound_const: 2.0 / sigma,
        singular: sigma <= SINGULAR_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalize, Graph};
    use crate::spectral::eigendecompose;
    use approx::assert_abs_diff_eq;

    fn setup(n: usize, edges: &[(usize, usize, f64)]) -> (NormalizedGraph, SpectralDecomposition) {
        let ng = normalize(&Graph::from_edges(n, edges).unwrap());
        let sd = eigendecompose(&ng).unwrap();
        (ng, sd)
    }

    #[test]
    fn polarity_scan_keeps_ring_alternation() {
        let edges: Vec<_> = (0..12).map(|i| (i, (i + 1) % 12, 1.0)).collect();
        let sd = eigendecompose(&normalize(&Graph::from_edges(12, &edges).unwrap())).unwrap();
        let p = partition_search_seeded(&sd, 3, 3, Strategy::Polarity, 0).unwrap();
        assert_eq!(p.set_a(), &[0, 2, 4, 6, 8, 10]);
        let q = partition_search_seeded(&sd, 3, 3, Strategy::Random, 0).unwrap();
        assert_eq!(&q.set_a()[..3], &[0, 1, 2]);
    }

    #[test]
    fn p3_polarity_partition() {
        let (_, sd) = setup(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let p = partition_search_seeded(&sd, 1, 1, Strategy::Polarity, 0).unwrap();
        assert_eq!(p.set_a(), &[0, 2]);
        assert_eq!(p.set_b(), &[1]);
        assert_eq!(p.k_diag().as_slice(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn k2_partition_uses_every_vertex() {
        let (_, sd) = setup(2, &[(0, 1, 1.0)]);
        let p = partition_search_seeded(&sd, 1, 1, Strategy::Polarity, 0).unwrap();
        assert_eq!((p.set_a(), p.set_b()), (&[0][..], &[1][..]));
        assert!(partition_search_seeded(&sd, 2, 1, Strategy::Polarity, 0).is_err());
    }

    #[test]
    fn polarity_rule() {
        let u = DVector::from_vec(alloc::vec![0.5, -0.7, 0.5, 0.0]);
        assert_eq!(polarity_assign(&u, &[2]), (alloc::vec![2], alloc::vec![]));
        assert_eq!(
            polarity_assign(&u, &[1, 3]),
            (alloc::vec![3], alloc::vec![1])
        );
        assert_eq!(polarity_assign(&u, &[]), (alloc::vec![], alloc::vec![]));
    }

    #[test]
    fn random_split_is_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rest: Vec<usize> = (0..7).collect();
        let (a, b) = random_assign(&rest, &mut rng);
        assert_eq!((a.len(), b.len()), (4, 3));
    }

    #[test]
    fn natural_partitions() {
        let (ng, _) = setup(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        let (p, max_rs) = bipartite_natural_partition(&ng).unwrap();
        assert_eq!(
            (p.set_a(), p.set_b(), max_rs),
            (&[0, 2][..], &[1, 3][..], 1)
        );
        let (ng2, _) = setup(2, &[(0, 1, 1.0)]);
        assert_eq!(bipartite_natural_partition(&ng2).unwrap().1, 1);
        let (c3, _) = setup(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        assert!(matches!(
            bipartite_natural_partition(&c3),
            Err(Error::NotBipartite(_, _))
        ));
    }

    #[test]
    fn k2_sigma_diagnostic() {
        let g = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let k = DVector::from_vec(alloc::vec![1.0, -1.0]);
        let d = sigma_min_diagnostic(&k, &g).unwrap();
        assert_abs_diff_eq!(d.sigma_min, 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(d.bound_const, 2f64.sqrt(), epsilon = 1e-14);
        assert!(!d.singular);
        let id = sigma_min_diagnostic(&DVector::from_element(2, 1.0), &g).unwrap();
        assert!(id.singular);
    }

    #[test]
    fn pattern_validation() {
        assert!(SamplingPattern::new(3, alloc::vec![0, 1, 2], alloc::vec![]).is_err());
        assert!(SamplingPattern::new(3, alloc::vec![0, 1], alloc::vec![1, 2]).is_err());
        assert!(SamplingPattern::new(3, alloc::vec![0], alloc::vec![2]).is_err());
        assert!(SamplingPattern::new(3, alloc::vec![2, 0], alloc::vec![1]).is_ok());
        let all = SamplingPattern::all_lowpass(3);
        assert_eq!((all.set_a().len(), all.set_b().len()), (3, 0));
    }
}
