//! Dense helpers shared across modules.

use nalgebra::{DMatrix, DVector};

pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.is_empty() {
        return DVector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

/// Smallest singular value; `0` for an empty matrix.
pub fn sigma_min(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).min()
}

pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

pub fn select_entries(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

/// `sum_l coeffs[l] A^l` by Horner's rule. Entries outside the
/// `(len - 1)`-hop pattern of `A` stay exactly zero.
pub fn matrix_polynomial(a: &DMatrix<f64>, coeffs: &[f64]) -> DMatrix<f64> {
    let n = a.nrows();
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for (k, &c) in coeffs.iter().rev().enumerate() {
        if k > 0 {
            acc = a * &acc;
        }
        for i in 0..n {
            acc[(i, i)] += c;
        }
    }
    acc
}

/// LU inverse with partial pivoting and its 1-norm condition number.
pub fn inverse_with_condition(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64)> {
    let inv = m.clone().lu().try_inverse()?;
    if inv.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let cond = norm1(m) * norm1(&inv);
    Some((inv, cond))
}

pub fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
