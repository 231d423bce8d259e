//! Polynomial filter design.
//!
//! A design is a weight vector `w` whose response on the adjacency spectrum is
//! `gamma(xi) = sum_l w_l xi^(l-1)`, giving `h_L = (1 + gamma) / 2` and
//! `h_H = (1 - gamma) / 2`. All programs run on the deduplicated spectrum and
//! the response is expanded back to every eigen-index afterwards.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::NormalizedGraph;
use crate::linalg::matrix_polynomial;
use crate::solver::{MinimaxProgram, SolveError};
use crate::spectral::{self, horner, DedupedSpectrum, SpectralDecomposition, VandermondeSystem};

/// Lower bound replacing strict positivity of the legacy weights.
pub const LEGACY_MIN_WEIGHT: f64 = 1e-9;
/// Tolerance on the `gamma = +-1` equalities.
pub const EQ_TOL: f64 = 1e-6;
const BOUNDARY_TOL: f64 = 1e-10;
const RANGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignModel {
    ClosedForm,
    OriOpt,
    RegOpt,
    LiterOpt,
}

impl DesignModel {
    pub fn name(self) -> &'static str {
        match self {
            DesignModel::ClosedForm => "closed_form",
            DesignModel::OriOpt => "ori_opt",
            DesignModel::RegOpt => "reg_opt",
            DesignModel::LiterOpt => "liter_opt",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "closed_form" => Some(DesignModel::ClosedForm),
            "ori_opt" => Some(DesignModel::OriOpt),
            "reg_opt" => Some(DesignModel::RegOpt),
            "liter_opt" => Some(DesignModel::LiterOpt),
            _ => None,
        }
    }
}

/// Hyperparameters of a design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignConfig {
    /// Number of lowest frequencies annihilated by the highpass filter.
    pub r: usize,
    /// Number of highest frequencies annihilated by the lowpass filter.
    pub s: usize,
    /// Number of polynomial terms (degree `j - 1`); the legacy model uses powers `1..=j`.
    pub j: usize,
    pub alpha: f64,
    /// Ideal-lowpass threshold on `xi`; `None` uses the median distinct eigenvalue.
    pub xi0: Option<f64>,
    /// Margin turning `|gamma| < 1` into `|gamma| <= 1 - epsilon`.
    pub epsilon: f64,
    pub model: DesignModel,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            r: 1,
            s: 1,
            j: 3,
            alpha: 0.5,
            xi0: None,
            epsilon: 1e-6,
            model: DesignModel::RegOpt,
        }
    }
}

impl DesignConfig {
    pub fn new(r: usize, s: usize, j: usize, alpha: f64) -> Self {
        DesignConfig {
            r,
            s,
            j,
            alpha,
            ..Self::default()
        }
    }

    pub fn with_model(mut self, model: DesignModel) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let min_j = if self.model == DesignModel::LiterOpt {
            1
        } else {
            2
        };
        if self.j < min_j {
            return Err(Error::InvalidParameter(format!(
                "J must be >= {min_j} for {}, got {}",
                self.model.name(),
                self.j
            )));
        }
        if self.model != DesignModel::LiterOpt && (self.r < 1 || self.s < 1) {
            return Err(Error::InvalidParameter(format!(
                "r and s must be >= 1, got r={}, s={}",
                self.r, self.s
            )));
        }
        if self.model == DesignModel::ClosedForm && (self.r != 1 || self.s != 1) {
            return Err(Error::InvalidParameter(
                "the closed-form design requires r = s = 1".into(),
            ));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Result of a design solve.
#[derive(Debug, Clone)]
pub struct FilterDesign {
    pub model: DesignModel,
    /// Weights as the model defines them (legacy weights multiply `xi^1..xi^J`).
    pub w: DVector<f64>,
    /// Coefficients of `gamma` in powers of `xi`, constant term first.
    pub coeffs: Vec<f64>,
    /// Response at each distinct eigenvalue, descending `xi`.
    pub gamma_unique: Vec<f64>,
    /// Response expanded to every eigen-index.
    pub gamma: DVector<f64>,
    pub h_low: DVector<f64>,
    pub h_high: DVector<f64>,
    pub objective: f64,
    /// Annihilation orders `(r, s)` counted in eigen-indices (repeated
    /// eigenvalues widen the constrained groups). `None` for the legacy model.
    pub annihilation: Option<(usize, usize)>,
}

impl FilterDesign {
    fn from_coeffs(
        model: DesignModel,
        w: DVector<f64>,
        coeffs: Vec<f64>,
        ds: &DedupedSpectrum,
        objective: f64,
        annihilation: Option<(usize, usize)>,
    ) -> Self {
        let gamma_unique: Vec<f64> = ds.xi_unique.iter().map(|&x| horner(&coeffs, x)).collect();
        let gamma = ds.expand(&gamma_unique);
        let h_low = gamma.map(|g| 0.5 * (1.0 + g));
        let h_high = gamma.map(|g| 0.5 * (1.0 - g));
        FilterDesign {
            model,
            w,
            coeffs,
            gamma_unique,
            gamma,
            h_low,
            h_high,
            objective,
            annihilation,
        }
    }

    /// Builds a design directly from `w` on the given Vandermonde system.
    pub fn from_weights(
        model: DesignModel,
        w: DVector<f64>,
        vs: &VandermondeSystem,
        objective: f64,
    ) -> Self {
        let ann = (
            vs.spectrum.leading_count(vs.r),
            vs.spectrum.trailing_count(vs.s),
        );
        let coeffs = w.iter().copied().collect();
        Self::from_coeffs(model, w, coeffs, &vs.spectrum, objective, Some(ann))
    }

    /// Legacy filters `gamma = sum_{l=1..J} w_l xi^l`.
    pub fn legacy(w: DVector<f64>, ds: &DedupedSpectrum, objective: f64) -> Self {
        let mut coeffs = vec![0.0];
        coeffs.extend(w.iter().copied());
        Self::from_coeffs(DesignModel::LiterOpt, w, coeffs, ds, objective, None)
    }

    /// Largest violation of the `gamma = +1` rows, the `gamma = -1` rows, and
    /// the excess of `|gamma|` over `1 - epsilon` in the middle rows.
    pub fn constraint_residuals(&self, r: usize, s: usize, epsilon: f64) -> (f64, f64, f64) {
        let g = &self.gamma_unique;
        let m = g.len();
        let r = r.min(m);
        let s = s.min(m - r);
        let top = g[..r].iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        let bottom = g[m - s..]
            .iter()
            .map(|v| (v + 1.0).abs())
            .fold(0.0, f64::max);
        let middle = g[r..m - s]
            .iter()
            .map(|v| (v.abs() - (1.0 - epsilon)).max(0.0))
            .fold(0.0, f64::max);
        (top, bottom, middle)
    }
}

/// Ideal lowpass response `1` where `xi >= xi0`, else `0`.
pub fn ideal_lowpass_values(xi: &[f64], xi0: f64) -> Result<DVector<f64>> {
    let hi = xi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = xi.iter().copied().fold(f64::INFINITY, f64::min);
    if !(xi0 >= lo - RANGE_TOL && xi0 <= hi + RANGE_TOL) {
        return Err(Error::InvalidParameter(format!(
            "threshold xi0 = {xi0} outside the spectrum range [{lo}, {hi}]"
        )));
    }
    Ok(DVector::from_iterator(
        xi.len(),
        xi.iter().map(|&x| if x >= xi0 { 1.0 } else { 0.0 }),
    ))
}

pub fn ideal_lowpass(sd: &SpectralDecomposition, xi0: f64) -> Result<DVector<f64>> {
    ideal_lowpass_values(sd.xi.as_slice(), xi0)
}

/// Median of the distinct eigenvalues, the default ideal-lowpass threshold.
pub fn median_threshold(ds: &DedupedSpectrum) -> f64 {
    let v = &ds.xi_unique;
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// The affine feasible point of the `r = s = 1` program:
/// `gamma(1) = 1`, `gamma(xi_min) = -1`.
pub fn closed_form_weights(xi_min: f64, j: usize) -> Result<DVector<f64>> {
    if j < 2 {
        return Err(Error::InvalidParameter(format!("J must be >= 2, got {j}")));
    }
    if !(xi_min < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "degenerate spectrum: smallest eigenvalue {xi_min} is not below 1"
        )));
    }
    let mut w = DVector::zeros(j);
    w[0] = -(xi_min + 1.0) / (1.0 - xi_min);
    w[1] = 2.0 / (1.0 - xi_min);
    Ok(w)
}

fn minimax_program(
    vs: &VandermondeSystem,
    h_ideal: &DVector<f64>,
    cfg: &DesignConfig,
) -> MinimaxProgram {
    let c = &vs.c;
    let j = vs.j();
    let (top, bottom, middle) = (vs.top_rows(), vs.bottom_rows(), vs.middle_rows());

    let mut eq = DMatrix::zeros(vs.r + vs.s, j);
    let mut eq_rhs = DVector::zeros(vs.r + vs.s);
    for (k, i) in top.clone().chain(bottom.clone()).enumerate() {
        eq.row_mut(k).copy_from(&c.row(i));
        eq_rhs[k] = if top.contains(&i) { 1.0 } else { -1.0 };
    }

    let nm = middle.len();
    let mut ineq = DMatrix::zeros(2 * nm, j);
    let ineq_rhs = DVector::from_element(2 * nm, 1.0 - cfg.epsilon);
    for (k, i) in middle.enumerate() {
        ineq.row_mut(2 * k).copy_from(&c.row(i));
        ineq.row_mut(2 * k + 1).copy_from(&(-c.row(i)));
    }

    // residual h - (1 + C w) / 2
    let fit_rows = c * -0.5;
    let fit_offset = h_ideal.map(|h| h - 0.5);
    let reg = (cfg.alpha > 0.0).then(|| (vs.derivative_matrix(), cfg.alpha));

    MinimaxProgram {
        fit_rows,
        fit_offset,
        eq,
        eq_rhs,
        ineq,
        ineq_rhs,
        reg,
    }
}

fn describe(err: SolveError, eq_set: &str, ineq_set: &str) -> Error {
    match err {
        SolveError::InconsistentEquality { residual } => Error::Infeasible(format!(
            "{eq_set} cannot be satisfied (least-squares residual {residual:.3e})"
        )),
        SolveError::EmptyInterior { best_margin } => Error::Infeasible(format!(
            "{ineq_set} has no strictly feasible point (best margin {best_margin:.3e})"
        )),
    }
}

fn check_h(vs_m: usize, h_ideal: &DVector<f64>) -> Result<()> {
    if h_ideal.len() != vs_m {
        return Err(Error::DimensionMismatch {
            expected: vs_m,
            got: h_ideal.len(),
        });
    }
    Ok(())
}

fn solve_minimax(
    vs: &VandermondeSystem,
    h_ideal: &DVector<f64>,
    cfg: &DesignConfig,
    model: DesignModel,
) -> Result<FilterDesign> {
    cfg.validate()?;
    check_h(vs.m(), h_ideal)?;
    let program = minimax_program(vs, h_ideal, cfg);
    let sol = program.solve().map_err(|e| {
        describe(
            e,
            "equality constraints C_r w = 1, C_s w = -1",
            "middle-band constraints |C_m w| <= 1 - epsilon",
        )
    })?;
    Ok(FilterDesign::from_weights(model, sol.w, vs, sol.objective))
}

/// Minimax fit to the ideal lowpass under the annihilation constraints.
pub fn solve_ori_opt(
    vs: &VandermondeSystem,
    h_ideal: &DVector<f64>,
    cfg: &DesignConfig,
) -> Result<FilterDesign> {
    let cfg = DesignConfig { alpha: 0.0, ..*cfg };
    solve_minimax(vs, h_ideal, &cfg, DesignModel::OriOpt)
}

/// Minimax fit plus `alpha * ||C0 diag(0..J-1) w||_2` under the same constraints.
pub fn solve_reg_opt(
    vs: &VandermondeSystem,
    h_ideal: &DVector<f64>,
    cfg: &DesignConfig,
) -> Result<FilterDesign> {
    solve_minimax(vs, h_ideal, cfg, DesignModel::RegOpt)
}

/// Evaluates the closed-form point as a design, scored with the regularized objective.
pub fn closed_form_design(
    vs: &VandermondeSystem,
    h_ideal: &DVector<f64>,
    cfg: &DesignConfig,
) -> Result<FilterDesign> {
    check_h(vs.m(), h_ideal)?;
    let xi_min = *vs.spectrum.xi_unique.last().expect("nonempty spectrum");
    let w = closed_form_weights(xi_min, vs.j())?;
    let program = minimax_program(vs, h_ideal, cfg);
    let (fit, reg) = program.evaluate(&w);
    Ok(FilterDesign::from_weights(
        DesignModel::ClosedForm,
        w,
        vs,
        fit + cfg.alpha * reg,
    ))
}

/// Legacy baseline: minimax fit of `(1 + sum_{l=1..J} w_l xi^l) / 2` with
/// `sum w = 1` and `w >= LEGACY_MIN_WEIGHT`.
pub fn solve_liter_opt(
    ds: &DedupedSpectrum,
    h_ideal: &DVector<f64>,
    j: usize,
) -> Result<FilterDesign> {
    if j < 1 {
        return Err(Error::InvalidParameter("J must be >= 1".into()));
    }
    check_h(ds.m(), h_ideal)?;
    let m = ds.m();
    let powers = DMatrix::from_fn(m, j, |i, l| spectral::powi(ds.xi_unique[i], l + 1));
    let program = MinimaxProgram {
        fit_rows: powers * -0.5,
        fit_offset: h_ideal.map(|h| h - 0.5),
        eq: DMatrix::from_element(1, j, 1.0),
        eq_rhs: DVector::from_element(1, 1.0),
        ineq: -DMatrix::identity(j, j),
        ineq_rhs: DVector::from_element(j, -LEGACY_MIN_WEIGHT),
        reg: None,
    };
    let sol = program
        .solve()
        .map_err(|e| describe(e, "sum(w) = 1", "positivity w >= 1e-9"))?;
    Ok(FilterDesign::legacy(sol.w, ds, sol.objective))
}

/// Runs the configured model end to end on a decomposition.
pub fn design(sd: &SpectralDecomposition, cfg: &DesignConfig) -> Result<FilterDesign> {
    cfg.validate()?;
    let ds = spectral::dedup_eigenvalues(sd.xi.as_slice(), spectral::DEDUP_TOL)?;
    let xi0 = cfg.xi0.unwrap_or_else(|| median_threshold(&ds));
    let h = ideal_lowpass_values(&ds.xi_unique, xi0)?;
    if cfg.model == DesignModel::LiterOpt {
        return solve_liter_opt(&ds, &h, cfg.j);
    }
    let vs = spectral::vandermonde(&ds, cfg.j, cfg.r, cfg.s)?;
    match cfg.model {
        DesignModel::ClosedForm => closed_form_design(&vs, &h, cfg),
        DesignModel::OriOpt => solve_ori_opt(&vs, &h, cfg),
        DesignModel::RegOpt => solve_reg_opt(&vs, &h, cfg),
        DesignModel::LiterOpt => unreachable!(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `|gamma_i| < 1` on every middle index.
    Inside,
    /// `|gamma_i| > 1` on every middle index.
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `gamma_i != 1` for `i < r`.
    Top,
    /// `gamma_i != -1` for `i >= n - s`.
    Bottom,
    /// Middle index breaking the uniform `|gamma| < 1` / `|gamma| > 1` condition.
    Middle,
    /// `r + s` exceeds `n`.
    Orders,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub index: usize,
    pub gamma: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertibilityReport {
    pub branch: Option<Branch>,
    pub violations: Vec<Violation>,
}

impl InvertibilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.branch.is_some()
    }
}

/// Checks the spectral conditions guaranteeing annihilation and invertibility.
pub fn validate_response(gamma: &DVector<f64>, r: usize, s: usize) -> InvertibilityReport {
    let n = gamma.len();
    let mut violations = Vec::new();
    if r + s > n || r == 0 || s == 0 {
        violations.push(Violation {
            index: n,
            gamma: f64::NAN,
            kind: ViolationKind::Orders,
        });
        return InvertibilityReport {
            branch: None,
            violations,
        };
    }
    for i in 0..r {
        if (gamma[i] - 1.0).abs() > EQ_TOL {
            violations.push(Violation {
                index: i,
                gamma: gamma[i],
                kind: ViolationKind::Top,
            });
        }
    }
    for i in n - s..n {
        if (gamma[i] + 1.0).abs() > EQ_TOL {
            violations.push(Violation {
                index: i,
                gamma: gamma[i],
                kind: ViolationKind::Bottom,
            });
        }
    }
    let middle = r..n - s;
    let inside: Vec<usize> = middle
        .clone()
        .filter(|&i| gamma[i].abs() < 1.0 - BOUNDARY_TOL)
        .collect();
    let outside: Vec<usize> = middle
        .clone()
        .filter(|&i| gamma[i].abs() > 1.0 + BOUNDARY_TOL)
        .collect();
    let branch = if inside.len() == middle.len() {
        Some(Branch::Inside)
    } else if outside.len() == middle.len() {
        Some(Branch::Outside)
    } else {
        let keep_inside = inside.len() >= outside.len();
        for i in middle {
            let ok = if keep_inside {
                inside.contains(&i)
            } else {
                outside.contains(&i)
            };
            if !ok {
                violations.push(Violation {
                    index: i,
                    gamma: gamma[i],
                    kind: ViolationKind::Middle,
                });
            }
        }
        None
    };
    InvertibilityReport { branch, violations }
}

/// Vertex-domain analysis filters of a design.
#[derive(Debug, Clone)]
pub struct FilterPair {
    pub g: DMatrix<f64>,
    pub h_low: DMatrix<f64>,
    pub h_high: DMatrix<f64>,
}

impl FilterPair {
    /// `||H_H u_i||` for `i < r` and `||H_L u_i||` for `i >= n - s`.
    pub fn annihilation_residuals(
        &self,
        sd: &SpectralDecomposition,
        r: usize,
        s: usize,
    ) -> (f64, f64) {
        let n = sd.n();
        let high = (0..r.min(n))
            .map(|i| (&self.h_high * sd.u.column(i)).norm())
            .fold(0.0, f64::max);
        let low = (n.saturating_sub(s)..n)
            .map(|i| (&self.h_low * sd.u.column(i)).norm())
            .fold(0.0, f64::max);
        (high, low)
    }
}

/// `G = sum_l coeffs_l (A^S)^l` evaluated by Horner's rule, so `G` keeps the
/// exact `(J-1)`-hop sparsity of the graph; `H_L = (I + G)/2`, `H_H = (I - G)/2`.
pub fn build_filters(
    ng: &NormalizedGraph,
    sd: &SpectralDecomposition,
    fd: &FilterDesign,
) -> Result<FilterPair> {
    let n = ng.n();
    if sd.n() != n || fd.gamma.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if sd.n() != n { sd.n() } else { fd.gamma.len() },
        });
    }
    let g = matrix_polynomial(ng.a_sym(), &fd.coeffs);
    Ok(pair_from_g(g))
}

pub(crate) fn pair_from_g(g: DMatrix<f64>) -> FilterPair {
    let n = g.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let h_low = (&id + &g) * 0.5;
    let h_high = (&id - &g) * 0.5;
    FilterPair { g, h_low, h_high }
}
