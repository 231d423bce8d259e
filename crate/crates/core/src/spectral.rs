//! Graph Fourier basis, eigenvalue deduplication and the Vandermonde systems
//! used by the filter design programs.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::NormalizedGraph;

/// Default absolute tolerance for merging repeated eigenvalues.
pub const DEDUP_TOL: f64 = 1e-8;

const SIGN_TOL: f64 = 1e-10;

/// Eigenbasis of the normalized Laplacian, ordered by ascending frequency.
///
/// Column `i` of `u` is the Fourier basis vector with Laplacian eigenvalue
/// `lambda[i]` and adjacency eigenvalue `xi[i] = 1 - lambda[i]`. Each column is
/// signed so that its first entry of magnitude above `1e-10` is positive.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub u: DMatrix<f64>,
    pub lambda: DVector<f64>,
    pub xi: DVector<f64>,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        self.u.column(i).into_owned()
    }

    /// Highest-frequency basis vector `u_N`.
    pub fn last(&self) -> DVector<f64> {
        self.basis_vector(self.n() - 1)
    }

    pub fn gft(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.n(), x.len())?;
        Ok(self.u.tr_mul(x))
    }

    pub fn igft(&self, spectrum: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.n(), spectrum.len())?;
        Ok(&self.u * spectrum)
    }

    /// `U diag(values) U^T`.
    pub fn synthesize(&self, values: &DVector<f64>) -> DMatrix<f64> {
        let mut scaled = self.u.clone();
        for (mut col, v) in scaled.column_iter_mut().zip(values.iter()) {
            col *= *v;
        }
        scaled * self.u.transpose()
    }

    /// Numerical rank of the normalized adjacency (eigenvalues above `tol` in magnitude).
    pub fn adjacency_rank(&self, tol: f64) -> usize {
        self.xi.iter().filter(|x| x.abs() > tol).count()
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub fn eigendecompose(ng: &NormalizedGraph) -> Result<SpectralDecomposition> {
    let a = ng.a_sym().clone();
    let n = a.nrows();
    let fro = a.norm();
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 100 * n.max(10)).ok_or_else(|| {
        Error::Numeric(format!(
            "symmetric eigensolver did not converge (n={n}, ||A^S||_F={fro:.6e})"
        ))
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut u = DMatrix::zeros(n, n);
    let mut xi = DVector::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        xi[dst] = eig.eigenvalues[src];
        let mut col = eig.eigenvectors.column(src).into_owned();
        if let Some(first) = col.iter().find(|v| v.abs() > SIGN_TOL) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        u.set_column(dst, &col);
    }
    let lambda = xi.map(|x| 1.0 - x);
    Ok(SpectralDecomposition { u, lambda, xi })
}

/// Distinct adjacency eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct DedupedSpectrum {
    pub xi_unique: Vec<f64>,
    /// Maps each original eigen-index to its unique-value index.
    pub group_of: Vec<usize>,
}

impl DedupedSpectrum {
    pub fn m(&self) -> usize {
        self.xi_unique.len()
    }

    pub fn n(&self) -> usize {
        self.group_of.len()
    }

    /// Expands a per-unique-value vector to all `n` eigen-indices.
    pub fn expand(&self, per_unique: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.group_of.iter().map(|&g| per_unique[g]))
    }

    /// Number of original eigen-indices covered by the first `k` unique values.
    pub fn leading_count(&self, k: usize) -> usize {
        self.group_of.iter().filter(|&&g| g < k).count()
    }

    /// Number of original eigen-indices covered by the last `k` unique values.
    pub fn trailing_count(&self, k: usize) -> usize {
        let m = self.m();
        self.group_of.iter().filter(|&&g| g + k >= m).count()
    }
}

/// Merges eigenvalues whose consecutive gaps are within `tol`; each group is
/// represented by its mean.
pub fn dedup_eigenvalues(xi: &[f64], tol: f64) -> Result<DedupedSpectrum> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dedup tolerance must be > 0, got {tol}"
        )));
    }
    let mut order: Vec<usize> = (0..xi.len()).collect();
    order.sort_by(|&i, &j| xi[j].total_cmp(&xi[i]));

    let mut group_of = alloc::vec![0; xi.len()];
    let mut sums: Vec<(f64, usize)> = Vec::new();
    let mut prev = f64::NAN;
    for &i in &order {
        if sums.is_empty() || prev - xi[i] > tol {
            sums.push((0.0, 0));
        }
        let last = sums.len() - 1;
        sums[last].0 += xi[i];
        sums[last].1 += 1;
        group_of[i] = last;
        prev = xi[i];
    }
    let xi_unique = sums.into_iter().map(|(s, c)| s / c as f64).collect();
    Ok(DedupedSpectrum {
        xi_unique,
        group_of,
    })
}

/// Polynomial design matrices on the distinct eigenvalues.
///
/// Row `i` of `c` is `[1, xi_i, ..., xi_i^{J-1}]`; row `i` of `c0` is
/// `[0, 1, xi_i, ..., xi_i^{J-2}]`.
#[derive(Debug, Clone)]
pub struct VandermondeSystem {
    pub c: DMatrix<f64>,
    pub c0: DMatrix<f64>,
    pub r: usize,
    pub s: usize,
    pub spectrum: DedupedSpectrum,
}

impl VandermondeSystem {
    pub fn j(&self) -> usize {
        self.c.ncols()
    }

    pub fn m(&self) -> usize {
        self.c.nrows()
    }

    pub fn top_rows(&self) -> Range<usize> {
        0..self.r
    }

    pub fn bottom_rows(&self) -> Range<usize> {
        self.m() - self.s..self.m()
    }

    pub fn middle_rows(&self) -> Range<usize> {
        self.r..self.m() - self.s
    }

    /// `C0 diag(0, 1, ..., J-1)`: maps weights to derivative values at each eigenvalue.
    pub fn derivative_matrix(&self) -> DMatrix<f64> {
        let mut d = self.c0.clone();
        for (l, mut col) in d.column_iter_mut().enumerate() {
            col *= l as f64;
        }
        d
    }
}

pub fn vandermonde(
    ds: &DedupedSpectrum,
    j: usize,
    r: usize,
    s: usize,
) -> Result<VandermondeSystem> {
    if j < 2 {
        return Err(Error::InvalidParameter(format!("J must be >= 2, got {j}")));
    }
    if r < 1 || s < 1 {
        return Err(Error::InvalidParameter(format!(
            "r and s must be >= 1, got r={r}, s={s}"
        )));
    }
    let m = ds.m();
    if r + s > m {
        return Err(Error::Infeasible(format!(
            "r + s = {} exceeds the {m} distinct eigenvalues",
            r + s
        )));
    }
    let c = DMatrix::from_fn(m, j, |i, l| powi(ds.xi_unique[i], l));
    let c0 = DMatrix::from_fn(m, j, |i, l| {
        if l == 0 {
            0.0
        } else {
            powi(ds.xi_unique[i], l - 1)
        }
    });
    Ok(VandermondeSystem {
        c,
        c0,
        r,
        s,
        spectrum: ds.clone(),
    })
}

pub(crate) fn powi(x: f64, k: usize) -> f64 {
    let mut out = 1.0;
    for _ in 0..k {
        out *= x;
    }
    out
}

/// Evaluates `sum_l coeffs[l] x^l` by Horner's rule.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalize, Graph};
    use approx::assert_abs_diff_eq;

    fn decomp(n: usize, edges: &[(usize, usize, f64)]) -> SpectralDecomposition {
        eigendecompose(&normalize(&Graph::from_edges(n, edges).unwrap())).unwrap()
    }

    #[test]
    fn k2_spectrum() {
        let sd = decomp(2, &[(0, 1, 1.0)]);
        assert_abs_diff_eq!(sd.lambda.as_slice(), [0.0, 2.0].as_slice(), epsilon = 1e-12);
        assert_abs_diff_eq!(sd.xi.as_slice(), [1.0, -1.0].as_slice(), epsilon = 1e-12);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(
            sd.basis_vector(0).as_slice(),
            [h, h].as_slice(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn p3_spectrum_and_signs() {
        let sd = decomp(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_abs_diff_eq!(
            sd.xi.as_slice(),
            [1.0, 0.0, -1.0].as_slice(),
            epsilon = 1e-12
        );
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(
            sd.basis_vector(0).as_slice(),
            [0.5, h, 0.5].as_slice(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            sd.last().as_slice(),
            [0.5, -h, 0.5].as_slice(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn c4_spectrum_dedups_to_three() {
        let sd = decomp(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        // cycle oracle: xi_k = cos(2 pi k / 4)
        let mut oracle: Vec<f64> = (0..4)
            .map(|k| libm::cos(2.0 * core::f64::consts::PI * k as f64 / 4.0))
            .collect();
        oracle.sort_by(|a, b| b.total_cmp(a));
        assert_abs_diff_eq!(sd.xi.as_slice(), oracle.as_slice(), epsilon = 1e-12);
        let ds = dedup_eigenvalues(sd.xi.as_slice(), DEDUP_TOL).unwrap();
        assert_eq!(ds.m(), 3);
        assert_abs_diff_eq!(
            ds.xi_unique.as_slice(),
            [1.0, 0.0, -1.0].as_slice(),
            epsilon = 1e-12
        );
        assert_eq!(ds.group_of, [0, 1, 1, 2]);
        assert_eq!(ds.leading_count(1), 1);
        assert_eq!(ds.trailing_count(2), 3);
    }

    #[test]
    fn dedup_merges_within_tolerance() {
        let ds = dedup_eigenvalues(&[1.0, 1.0 - 1e-12, -1.0], 1e-8).unwrap();
        assert_eq!(ds.m(), 2);
        assert_eq!(ds.group_of, [0, 0, 1]);
        let distinct = dedup_eigenvalues(&[0.9, 0.1, -0.5], 1e-8).unwrap();
        assert_eq!(distinct.xi_unique, [0.9, 0.1, -0.5]);
        assert_eq!(distinct.group_of, [0, 1, 2]);
        assert!(dedup_eigenvalues(&[1.0], 0.0).is_err());
    }

    #[test]
    fn vandermonde_blocks() {
        let ds = dedup_eigenvalues(&[1.0, 0.0, -1.0], DEDUP_TOL).unwrap();
        let vs = vandermonde(&ds, 3, 1, 1).unwrap();
        assert_eq!(
            vs.c,
            DMatrix::from_row_slice(3, 3, &[1., 1., 1., 1., 0., 0., 1., -1., 1.])
        );
        assert_eq!(
            vs.c0,
            DMatrix::from_row_slice(3, 3, &[0., 1., 1., 0., 1., 0., 0., 1., -1.])
        );
        assert_eq!(vs.middle_rows(), 1..2);
        assert_eq!(
            vs.c.row(1).iter().copied().collect::<Vec<_>>(),
            [1.0, 0.0, 0.0]
        );
        assert!(matches!(
            vandermonde(&ds, 3, 2, 2),
            Err(Error::Infeasible(_))
        ));
        assert!(vandermonde(&ds, 1, 1, 1).is_err());
    }

    #[test]
    fn gft_of_basis_vector_is_unit() {
        let sd = decomp(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let e = sd.gft(&sd.basis_vector(2)).unwrap();
        assert_abs_diff_eq!(e.as_slice(), [0.0, 0.0, 1.0].as_slice(), epsilon = 1e-12);
        assert_eq!(sd.gft(&DVector::zeros(3)).unwrap(), DVector::zeros(3));
        assert!(sd.gft(&DVector::zeros(4)).is_err());
    }
}
