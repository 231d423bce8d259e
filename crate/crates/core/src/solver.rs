//! Small dense convex solver for minimax fitting problems.
//!
//! Solves
//!
//! ```text
//! minimize    max_i |a_i . w + b_i|  +  alpha * ||M w||_2
//! subject to  E w = f,   G w <= h
//! ```
//!
//! by eliminating the equalities through a null-space parametrization
//! `w = w_p + N z`, lifting the max to an epigraph variable `t` and the norm to
//! a second-order cone variable `u`, and following the log-barrier central
//! path with damped Newton steps. A phase-I barrier run supplies a strictly
//! feasible start for the inequality block.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

const RANK_TOL: f64 = 1e-10;
const GAP_TOL: f64 = 1e-10;
const NEWTON_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 200;
const MU: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct MinimaxProgram {
    pub fit_rows: DMatrix<f64>,
    pub fit_offset: DVector<f64>,
    pub eq: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub ineq: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
    /// Regularizer `(M, alpha)`; `None` or `alpha == 0` drops the cone.
    pub reg: Option<(DMatrix<f64>, f64)>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub w: DVector<f64>,
    pub objective: f64,
    pub fit: f64,
    pub reg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// `E w = f` has no solution; carries the least-squares residual.
    InconsistentEquality { residual: f64 },
    /// `G w < h` has no strictly feasible point on the equality manifold;
    /// carries the best achieved margin `min(h - G w)`.
    EmptyInterior { best_margin: f64 },
}

impl MinimaxProgram {
    pub fn dim(&self) -> usize {
        self.fit_rows.ncols()
    }

    pub fn evaluate(&self, w: &DVector<f64>) -> (f64, f64) {
        let fit = (&self.fit_rows * w + &self.fit_offset).amax();
        let reg = match &self.reg {
            Some((m, alpha)) if *alpha > 0.0 => (m * w).norm(),
            _ => 0.0,
        };
        (fit, reg)
    }

    fn alpha(&self) -> f64 {
        match &self.reg {
            Some((_, a)) => *a,
            None => 0.0,
        }
    }

    pub fn solve(&self) -> Result<Solution, SolveError> {
        let dim = self.dim();
        let (w_p, null) = null_space_param(&self.eq, &self.eq_rhs, dim)?;
        let d = null.ncols();

        let g_red = &self.ineq * &null;
        let h_red = &self.ineq_rhs - &self.ineq * &w_p;

        let z = if d == 0 {
            let margin = h_red.iter().copied().fold(f64::INFINITY, f64::min);
            if margin < -1e-9 {
                return Err(SolveError::EmptyInterior {
                    best_margin: margin,
                });
            }
            DVector::zeros(0)
        } else {
            let z0 = strictly_feasible_point(&g_red, &h_red)?;
            self.phase_two(&w_p, &null, &g_red, &h_red, z0)
        };

        let w = &w_p + &null * &z;
        let (fit, reg) = self.evaluate(&w);
        Ok(Solution {
            objective: fit + self.alpha() * reg,
            w,
            fit,
            reg,
        })
    }

    fn phase_two(
        &self,
        w_p: &DVector<f64>,
        null: &DMatrix<f64>,
        g_red: &DMatrix<f64>,
        h_red: &DVector<f64>,
        z0: DVector<f64>,
    ) -> DVector<f64> {
        let d = null.ncols();
        let alpha = self.alpha();
        let with_cone = alpha > 0.0;
        let nx = d + 1 + usize::from(with_cone);
        let t_idx = d;

        let f_red = &self.fit_rows * null;
        let f_off = &self.fit_rows * w_p + &self.fit_offset;
        let p = f_red.nrows();
        let q = g_red.nrows();

        let mut a = DMatrix::zeros(2 * p + q, nx);
        let mut b = DVector::zeros(2 * p + q);
        for i in 0..p {
            for k in 0..d {
                a[(2 * i, k)] = f_red[(i, k)];
                a[(2 * i + 1, k)] = -f_red[(i, k)];
            }
            a[(2 * i, t_idx)] = -1.0;
            a[(2 * i + 1, t_idx)] = -1.0;
            b[2 * i] = -f_off[i];
            b[2 * i + 1] = f_off[i];
        }
        for k in 0..q {
            for c in 0..d {
                a[(2 * p + k, c)] = g_red[(k, c)];
            }
            b[2 * p + k] = h_red[k];
        }

        let mut cost = DVector::zeros(nx);
        cost[t_idx] = 1.0;

        let mut x0 = DVector::zeros(nx);
        x0.rows_mut(0, d).copy_from(&z0);
        x0[t_idx] = (&f_red * &z0 + &f_off).amax() + 1.0;

        let cone = if with_cone {
            let (m, _) = self.reg.as_ref().expect("cone implies a regularizer");
            let m_red = m * null;
            let mut pm = DMatrix::zeros(m_red.nrows(), nx);
            pm.columns_mut(0, d).copy_from(&m_red);
            let u_idx = d + 1;
            cost[u_idx] = alpha;
            let offset = m * w_p;
            x0[u_idx] = (&pm * &x0 + &offset).norm() + 1.0;
            Some(Cone {
                p: pm,
                offset,
                u_idx,
            })
        } else {
            None
        };

        let barrier = Barrier { a, b, cone, cost };
        let x = barrier.follow_path(x0, |_, _| false);
        x.rows(0, d).into_owned()
    }
}

/// Particular solution and orthonormal null-space basis of `E w = f`.
fn null_space_param(
    e: &DMatrix<f64>,
    f: &DVector<f64>,
    dim: usize,
) -> Result<(DVector<f64>, DMatrix<f64>), SolveError> {
    let k = e.nrows();
    if k == 0 {
        return Ok((DVector::zeros(dim), DMatrix::identity(dim, dim)));
    }
    // zero-padding to a square matrix makes the SVD return a full V
    let rows = k.max(dim);
    let mut padded = DMatrix::zeros(rows, dim);
    padded.rows_mut(0, k).copy_from(e);
    let mut rhs = DVector::zeros(rows);
    rhs.rows_mut(0, k).copy_from(f);

    let svd = padded.svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let s_max = svd.singular_values.max();
    let cutoff = RANK_TOL * s_max.max(f64::MIN_POSITIVE);

    let mut w_p = DVector::zeros(dim);
    let mut null_cols = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            let coef = u.column(i).dot(&rhs) / s;
            w_p += v_t.row(i).transpose() * coef;
        } else {
            null_cols.push(v_t.row(i).transpose());
        }
    }
    let residual = (e * &w_p - f).amax();
    if residual > 1e-9 * f.amax().max(1.0) {
        return Err(SolveError::InconsistentEquality { residual });
    }
    let null = if null_cols.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&null_cols)
    };
    Ok((w_p, null))
}

/// Phase I: finds `z` with `G z < h` strictly, or reports the best margin.
fn strictly_feasible_point(g: &DMatrix<f64>, h: &DVector<f64>) -> Result<DVector<f64>, SolveError> {
    let d = g.ncols();
    let q = g.nrows();
    let z0 = DVector::zeros(d);
    if q == 0 || h.min() > 1e-9 {
        return Ok(z0);
    }
    // variables (z, s): G z - s <= h, -s <= 1; minimize s
    let mut a = DMatrix::zeros(q + 1, d + 1);
    a.view_mut((0, 0), (q, d)).copy_from(g);
    for k in 0..q {
        a[(k, d)] = -1.0;
    }
    a[(q, d)] = -1.0;
    let mut b = DVector::zeros(q + 1);
    b.rows_mut(0, q).copy_from(h);
    b[q] = 1.0;
    let mut cost = DVector::zeros(d + 1);
    cost[d] = 1.0;

    let mut x0 = DVector::zeros(d + 1);
    x0[d] = (-h.min()).max(0.0) + 1.0;

    let barrier = Barrier {
        a,
        b,
        cone: None,
        cost,
    };
    let x = barrier.follow_path(x0, |x, gap| {
        let s = x[d];
        s <= -1e-6 || (s < 0.0 && gap < 1e-3 * -s) || s - gap > 0.0
    });
    let z = x.rows(0, d).into_owned();
    let margin = (h - g * &z).min();
    if margin > 0.0 {
        Ok(z)
    } else {
        Err(SolveError::EmptyInterior {
            best_margin: margin,
        })
    }
}

struct Cone {
    p: DMatrix<f64>,
    offset: DVector<f64>,
    u_idx: usize,
}

/// `tau * cost . x - sum log(b - A x) - log(u^2 - ||P x + offset||^2)`.
struct Barrier {
    a: DMatrix<f64>,
    b: DVector<f64>,
    cone: Option<Cone>,
    cost: DVector<f64>,
}

impl Barrier {
    fn degree(&self) -> f64 {
        self.a.nrows() as f64 + if self.cone.is_some() { 2.0 } else { 0.0 }
    }

    fn value(&self, x: &DVector<f64>, tau: f64) -> Option<f64> {
        let slack = &self.b - &self.a * x;
        if slack.iter().any(|&s| !(s > 0.0)) {
            return None;
        }
        let mut v = tau * self.cost.dot(x) - slack.iter().map(|&s| libm::log(s)).sum::<f64>();
        if let Some(c) = &self.cone {
            let u = x[c.u_idx];
            let r = &c.p * x + &c.offset;
            let f = u * u - r.norm_squared();
            if !(u > 0.0 && f > 0.0) {
                return None;
            }
            v -= libm::log(f);
        }
        Some(v)
    }

    fn grad_hess(&self, x: &DVector<f64>, tau: f64) -> (DVector<f64>, DMatrix<f64>) {
        let slack = &self.b - &self.a * x;
        let inv = slack.map(|s| 1.0 / s);
        let mut grad = &self.cost * tau + self.a.tr_mul(&inv);
        let mut scaled = self.a.clone();
        for (mut row, s) in scaled.row_iter_mut().zip(inv.iter()) {
            row *= *s;
        }
        let mut hess = scaled.tr_mul(&scaled);

        if let Some(c) = &self.cone {
            let u = x[c.u_idx];
            let r = &c.p * x + &c.offset;
            let f = u * u - r.norm_squared();
            let mut df = c.p.tr_mul(&r) * -2.0;
            df[c.u_idx] += 2.0 * u;
            let mut d2f = c.p.tr_mul(&c.p) * -2.0;
            d2f[(c.u_idx, c.u_idx)] += 2.0;
            grad -= &df / f;
            hess += &df * df.transpose() / (f * f) - d2f / f;
        }
        (grad, hess)
    }

    fn newton_direction(grad: &DVector<f64>, hess: &DMatrix<f64>) -> Option<DVector<f64>> {
        let n = hess.nrows();
        let scale = hess.diagonal().amax().max(1.0);
        let mut damping = 0.0;
        for _ in 0..12 {
            let mut h = hess.clone();
            for i in 0..n {
                h[(i, i)] += damping + 1e-14 * scale;
            }
            if let Some(ch) = h.cholesky() {
                return Some(-ch.solve(grad));
            }
            damping = if damping == 0.0 {
                1e-12 * scale
            } else {
                damping * 100.0
            };
        }
        None
    }

    fn center(&self, mut x: DVector<f64>, tau: f64) -> DVector<f64> {
        let mut fx = self
            .value(&x, tau)
            .expect("centering starts strictly feasible");
        for _ in 0..MAX_NEWTON {
            let (g, h) = self.grad_hess(&x, tau);
            let Some(dx) = Self::newton_direction(&g, &h) else {
                break;
            };
            let decrement = -g.dot(&dx);
            if !(decrement > 2.0 * NEWTON_TOL) {
                break;
            }
            let mut step = 1.0;
            let mut accepted = None;
            while step > 1e-14 {
                let cand = &x + &dx * step;
                if let Some(fc) = self.value(&cand, tau) {
                    if fc <= fx - 0.25 * step * decrement {
                        accepted = Some((cand, fc));
                        break;
                    }
                }
                step *= 0.5;
            }
            match accepted {
                Some((cand, fc)) => {
                    x = cand;
                    fx = fc;
                }
                None => break,
            }
        }
        x
    }

    fn follow_path(
        &self,
        x0: DVector<f64>,
        stop: impl Fn(&DVector<f64>, f64) -> bool,
    ) -> DVector<f64> {
        let theta = self.degree();
        let mut tau = 1.0;
        let mut x = x0;
        loop {
            x = self.center(x, tau);
            let gap = theta / tau;
            if gap < GAP_TOL || stop(&x, gap) {
                return x;
            }
            tau *= MU;
        }
    }
}
