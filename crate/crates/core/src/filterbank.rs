//! Two-channel analysis, downsampling and synthesis.

use alloc::format;

use nalgebra::{DMatrix, DVector};

use crate::design::{pair_from_g, FilterPair};
use crate::error::{Error, Result};
use crate::graph::{normalize, Graph};
use crate::linalg::{
    inverse_with_condition, matrix_polynomial, select_entries, sigma_min, singular_values,
};
use crate::sampling::{bipartite_natural_partition, sigma_min_diagnostic, SamplingPattern};

/// Downsampled channel outputs: `y_low` on `A`, `y_high` on `B`, both in
/// increasing vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutputs {
    pub y_low: DVector<f64>,
    pub y_high: DVector<f64>,
}

impl ChannelOutputs {
    pub fn len(&self) -> usize {
        self.y_low.len() + self.y_high.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct Filterbank {
    pair: FilterPair,
    pattern: SamplingPattern,
    analysis_low: DMatrix<f64>,
    analysis_high: DMatrix<f64>,
    h_inv: DMatrix<f64>,
    zero_dc: bool,
    deg_sqrt: DVector<f64>,
    deg_inv_sqrt: DVector<f64>,
    sigma_min: f64,
    condition: f64,
    bound_scale: f64,
}

/// `D^{-1/2} M D^{1/2}`.
fn conjugate(
    m: &DMatrix<f64>,
    deg_sqrt: &DVector<f64>,
    deg_inv_sqrt: &DVector<f64>,
) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        deg_inv_sqrt[i] * m[(i, j)] * deg_sqrt[j]
    })
}

impl Filterbank {
    /// Builds `H_INV = 2 (I + KG)^{-1}`. With `zero_dc` the analysis filters
    /// become `D^{-1/2} H D^{1/2}` and the synthesis `D^{-1/2} H_INV D^{1/2}`.
    pub fn assemble(
        pair: FilterPair,
        pattern: SamplingPattern,
        zero_dc: bool,
        deg: &DVector<f64>,
    ) -> Result<Self> {
        let n = pair.g.nrows();
        if pattern.n() != n || deg.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if pattern.n() != n {
                    pattern.n()
                } else {
                    deg.len()
                },
            });
        }
        if deg.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidParameter(
                "degrees must be positive and finite".into(),
            ));
        }
        let diag = sigma_min_diagnostic(pattern.k_diag(), &pair.g)?;
        if diag.singular {
            return Err(Error::Singular {
                sigma_min: diag.sigma_min,
            });
        }
        let mut i_kg = pair.g.clone();
        for (mut row, k) in i_kg.row_iter_mut().zip(pattern.k_diag().iter()) {
            row *= *k;
        }
        for i in 0..n {
            i_kg[(i, i)] += 1.0;
        }
        let (inv, condition) = inverse_with_condition(&i_kg).ok_or(Error::Singular {
            sigma_min: diag.sigma_min,
        })?;
        let h_inv = inv * 2.0;

        let deg_sqrt = deg.map(libm::sqrt);
        let deg_inv_sqrt = deg_sqrt.map(|d| 1.0 / d);
        let mut bound_scale = spectral_norm(&pair.h_high).max(1.0);
        let (analysis_low, analysis_high, h_inv) = if zero_dc {
            let (lo, hi) = deg.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| {
                (lo.min(d), hi.max(d))
            });
            bound_scale *= libm::sqrt(hi / lo);
            (
                conjugate(&pair.h_low, &deg_sqrt, &deg_inv_sqrt),
                conjugate(&pair.h_high, &deg_sqrt, &deg_inv_sqrt),
                conjugate(&h_inv, &deg_sqrt, &deg_inv_sqrt),
            )
        } else {
            (pair.h_low.clone(), pair.h_high.clone(), h_inv)
        };
        Ok(Filterbank {
            pair,
            pattern,
            analysis_low,
            analysis_high,
            h_inv,
            zero_dc,
            deg_sqrt,
            deg_inv_sqrt,
            sigma_min: diag.sigma_min,
            condition,
            bound_scale,
        })
    }

    pub fn n(&self) -> usize {
        self.h_inv.nrows()
    }

    pub fn pair(&self) -> &FilterPair {
        &self.pair
    }

    pub fn pattern(&self) -> &SamplingPattern {
        &self.pattern
    }

    pub fn is_zero_dc(&self) -> bool {
        self.zero_dc
    }

    /// Effective lowpass analysis filter (conjugated for zero-DC banks).
    pub fn analysis_low(&self) -> &DMatrix<f64> {
        &self.analysis_low
    }

    pub fn analysis_high(&self) -> &DMatrix<f64> {
        &self.analysis_high
    }

    pub fn synthesis(&self) -> &DMatrix<f64> {
        &self.h_inv
    }

    pub fn deg_sqrt(&self) -> &DVector<f64> {
        &self.deg_sqrt
    }

    pub fn deg_inv_sqrt(&self) -> &DVector<f64> {
        &self.deg_inv_sqrt
    }

    /// `sigma_min(I + KG)` of the plain bank.
    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// 1-norm condition number of `I + KG`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `2 / sigma_min(I + KG)`.
    pub fn bound_const(&self) -> f64 {
        2.0 / self.sigma_min
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn analyze(&self, x: &DVector<f64>) -> Result<ChannelOutputs> {
        self.check_len(x.len())?;
        let low = &self.analysis_low * x;
        let high = &self.analysis_high * x;
        Ok(ChannelOutputs {
            y_low: select_entries(&low, self.pattern.set_a()),
            y_high: select_entries(&high, self.pattern.set_b()),
        })
    }

    /// Zero-fills both channels to length `n` and applies the synthesis filter.
    pub fn reconstruct(&self, ch: &ChannelOutputs) -> Result<DVector<f64>> {
        let (a, b) = (self.pattern.set_a(), self.pattern.set_b());
        if ch.y_low.len() != a.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: ch.y_low.len(),
            });
        }
        if ch.y_high.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: b.len(),
                got: ch.y_high.len(),
            });
        }
        let mut y = DVector::zeros(self.n());
        for (&i, &v) in a.iter().zip(ch.y_low.iter()) {
            y[i] = v;
        }
        for (&i, &v) in b.iter().zip(ch.y_high.iter()) {
            y[i] = v;
        }
        Ok(&self.h_inv * y)
    }

    /// Synthesis from the lowpass channel alone.
    pub fn lp_only_reconstruct(&self, y_low: &DVector<f64>) -> Result<DVector<f64>> {
        let ch = ChannelOutputs {
            y_low: y_low.clone(),
            y_high: DVector::zeros(self.pattern.set_b().len()),
        };
        self.reconstruct(&ch)
    }

    /// `||x - x_lp||_2` and its upper bound `(2 / sigma_min) ||x||_2`, the
    /// latter widened by `max(1, ||H_H||_2)` and, for zero-DC banks, by
    /// `sqrt(d_max / d_min)`.
    pub fn error_bound(&self, x: &DVector<f64>) -> Result<(f64, f64)> {
        let ch = self.analyze(x)?;
        let full = self.reconstruct(&ch)?;
        let lp = self.lp_only_reconstruct(&ch.y_low)?;
        let er = (full - lp).norm();
        Ok((er, self.bound_const() * self.bound_scale * x.norm()))
    }

    /// `||reconstruct(analyze(x)) - x||_inf / ||x||_inf`, or the absolute
    /// residual when `x = 0`.
    pub fn pr_residual(&self, x: &DVector<f64>) -> Result<f64> {
        let y = self.reconstruct(&self.analyze(x)?)?;
        let res = (y - x).amax();
        let scale = x.amax();
        Ok(if scale > 0.0 { res / scale } else { res })
    }

    /// `||H_INV (I + KG) / 2 - I||_max` on the plain bank, or its conjugate.
    pub fn pr_identity_residual(&self) -> f64 {
        let n = self.n();
        let mut residual = DMatrix::identity(n, n);
        let k = self.pattern.k_diag();
        let mut y = DMatrix::zeros(n, n);
        for i in 0..n {
            let src = if k[i] > 0.0 {
                &self.analysis_low
            } else {
                &self.analysis_high
            };
            y.row_mut(i).copy_from(&src.row(i));
        }
        residual -= &self.h_inv * y;
        residual.amax()
    }
}

fn spectral_norm(h: &DMatrix<f64>) -> f64 {
    singular_values(h).max()
}

/// Outcome of checking the spline filters `G = A^S` on a bipartite graph.
#[derive(Debug, Clone)]
pub struct LegacyReport {
    /// `sigma_min(I + G)`, i.e. `K = I`.
    pub sigma_identity: f64,
    /// `sigma_min(I + KG)` under the bipartition.
    pub sigma_natural: f64,
    pub natural: SamplingPattern,
}

impl LegacyReport {
    pub fn identity_singular(&self) -> bool {
        self.sigma_identity <= 1e-10
    }
}

/// Legacy one-tap filters with `K = I` against the two-color sampling.
pub fn check_legacy_counterexample(g: &Graph) -> Result<LegacyReport> {
    let ng = normalize(g);
    let (natural, _) = bipartite_natural_partition(&ng)?;
    let pair = pair_from_g(matrix_polynomial(ng.a_sym(), &[0.0, 1.0]));
    let n = ng.n();
    let identity = DVector::from_element(n, 1.0);
    let mut i_g = pair.g.clone();
    for i in 0..n {
        i_g[(i, i)] += 1.0;
    }
    let sigma_identity = sigma_min(&i_g);
    debug_assert!(
        (sigma_identity - sigma_min_diagnostic(&identity, &pair.g)?.sigma_min).abs() < 1e-12
    );
    let sigma_natural = sigma_min_diagnostic(natural.k_diag(), &pair.g)?.sigma_min;
    Ok(LegacyReport {
        sigma_identity,
        sigma_natural,
        natural,
    })
}

/// Relative `l2` distance `||y - x_ref|| / ||x_ref||`.
pub fn relative_error(y: &DVector<f64>, x_ref: &DVector<f64>) -> Result<f64> {
    if y.len() != x_ref.len() {
        return Err(Error::DimensionMismatch {
            expected: x_ref.len(),
            got: y.len(),
        });
    }
    let norm = x_ref.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter(format!("reference norm is {norm}")));
    }
    Ok((y - x_ref).norm() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn k2_bank(zero_dc: bool) -> Filterbank {
        let g = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = SamplingPattern::new(2, vec![0], vec![1]).unwrap();
        Filterbank::assemble(pair_from_g(g), p, zero_dc, &DVector::from_element(2, 1.0)).unwrap()
    }

    #[test]
    fn k2_synthesis() {
        let fb = k2_bank(false);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(fb.synthesis(), &expected, epsilon = 1e-14);
        assert!(fb.pr_identity_residual() < 1e-14);
    }

    #[test]
    fn k2_analysis_and_reconstruction() {
        let fb = k2_bank(false);
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let ch = fb.analyze(&x).unwrap();
        assert_abs_diff_eq!(ch.y_low[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ch.y_high[0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fb.reconstruct(&ch).unwrap(), x, epsilon = 1e-12);
        let (er, bound) = fb.error_bound(&x).unwrap();
        assert!(er <= bound);
        assert!(bound <= 2f64.sqrt() + 1e-12);
        assert_eq!(
            fb.reconstruct(&fb.analyze(&DVector::zeros(2)).unwrap())
                .unwrap(),
            DVector::zeros(2)
        );
    }

    #[test]
    fn regular_graph_zero_dc_equals_plain() {
        let plain = k2_bank(false);
        let zdc = k2_bank(true);
        assert_eq!(plain.analysis_high(), zdc.analysis_high());
        assert_eq!(plain.synthesis(), zdc.synthesis());
    }

    #[test]
    fn size_checks() {
        let fb = k2_bank(false);
        assert!(fb.analyze(&DVector::zeros(3)).is_err());
        let bad = ChannelOutputs {
            y_low: DVector::zeros(2),
            y_high: DVector::zeros(0),
        };
        assert!(fb.reconstruct(&bad).is_err());
    }

    #[test]
    fn identity_sampling_is_rejected_for_spline_filters() {
        let g = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = SamplingPattern::new(2, vec![0, 1], vec![]);
        assert!(p.is_err());
        let p = SamplingPattern::new(2, vec![0], vec![1]).unwrap();
        let flipped = pair_from_g(-g);
        assert!(Filterbank::assemble(flipped, p, false, &DVector::from_element(2, 1.0)).is_ok());
    }

    #[test]
    fn legacy_counterexample() {
        let k2 = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let rep = check_legacy_counterexample(&k2).unwrap();
        assert!(rep.identity_singular());
        assert!(rep.sigma_natural >= 0.1);
        let c3 = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert!(check_legacy_counterexample(&c3).is_err());
    }

    #[test]
    fn relative_error_cases() {
        let x = DVector::from_vec(vec![3.0, 4.0]);
        assert_eq!(relative_error(&x, &x).unwrap(), 0.0);
        assert_abs_diff_eq!(
            relative_error(&(&x * 2.0), &x).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(relative_error(&x, &DVector::zeros(2)).is_err());
    }
}
