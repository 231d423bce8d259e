//! Multi-resolution pyramids built by iterating the filterbank on the
//! lowpass channel over Kron-reduced graphs.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::design::{build_filters, design, DesignConfig, FilterDesign};
use crate::error::{Error, Result};
use crate::filterbank::{relative_error, ChannelOutputs, Filterbank};
use crate::graph::{normalize, Graph, NormalizedGraph};
use crate::linalg::select_entries;
use crate::sampling::{partition_search, Strategy};
use crate::spectral::{eigendecompose, SpectralDecomposition};

/// Reduced weights below this are dropped.
pub const KRON_CLAMP: f64 = 1e-12;

/// Schur complement of the Laplacian onto `keep`:
/// `L_red = L(A,A) - L(A,B) L(B,B)^{-1} L(B,A)`, read back as a weight matrix.
/// Coordinates and labels of the kept vertices carry over.
pub fn kron_reduce(g: &Graph, keep: &[usize]) -> Result<Graph> {
    let n = g.n();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::InvalidParameter(
            "kron reduction needs at least one kept vertex".into(),
        ));
    }
    if let Some(&bad) = keep.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidParameter(format!(
            "kept vertex {bad} outside 0..{n}"
        )));
    }
    if keep.len() == n {
        return Ok(g.clone());
    }
    let drop: Vec<usize> = (0..n).filter(|i| keep.binary_search(i).is_err()).collect();
    let l = g.laplacian();
    let sub = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| l[(rows[i], cols[j])])
    };
    let l_aa = sub(&keep, &keep);
    let l_ab = sub(&keep, &drop);
    let l_bb = sub(&drop, &drop);
    let l_bb_inv_ba = l_bb.lu().solve(&l_ab.transpose()).ok_or_else(|| {
        Error::Numeric("L(B,B) is singular; the dropped vertices are not grounded".into())
    })?;
    let l_red = l_aa - &l_ab * l_bb_inv_ba;

    let m = keep.len();
    let mut w = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let v = -0.5 * (l_red[(i, j)] + l_red[(j, i)]);
            let v = if v < KRON_CLAMP { 0.0 } else { v };
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    let mut reduced = Graph::from_weights(w)?;
    if let Some(c) = g.coords() {
        reduced = reduced.with_coords(keep.iter().map(|&i| c[i]).collect())?;
    }
    if let Some(lb) = g.labels() {
        reduced = reduced.with_labels(keep.iter().map(|&i| lb[i].clone()).collect())?;
    }
    Ok(reduced)
}

/// One analysis stage of a pyramid.
#[derive(Debug, Clone)]
pub struct Level {
    pub graph: Graph,
    /// Original vertex index of each vertex of `graph`.
    pub orig_index: Vec<usize>,
    pub design: FilterDesign,
    pub bank: Filterbank,
    pub outputs: ChannelOutputs,
}

impl Level {
    /// Original indices of the lowpass samples.
    pub fn retained(&self) -> Vec<usize> {
        self.bank
            .pattern()
            .set_a()
            .iter()
            .map(|&i| self.orig_index[i])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionMode {
    Full,
    LpOnly,
}

#[derive(Debug, Clone)]
pub struct Pyramid {
    levels: Vec<Level>,
    requested_depth: usize,
}

impl Pyramid {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn requested_depth(&self) -> usize {
        self.requested_depth
    }

    /// Fewer levels were built than requested because the graph got too small.
    pub fn truncated(&self) -> bool {
        self.levels.len() < self.requested_depth
    }

    pub fn input_len(&self) -> usize {
        self.levels[0].graph.n()
    }

    /// Sets every highpass coefficient with `|c| <= threshold` to zero.
    pub fn hard_threshold(&mut self, threshold: f64) {
        for level in &mut self.levels {
            level.outputs.y_high.apply(|c| {
                if c.abs() <= threshold {
                    *c = 0.0;
                }
            });
        }
    }

    /// Relative error of each level's lowpass output against `x` restricted
    /// to the retained original vertices.
    pub fn level_errors(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        if x.len() != self.input_len() {
            return Err(Error::DimensionMismatch {
                expected: self.input_len(),
                got: x.len(),
            });
        }
        self.levels
            .iter()
            .map(|lv| relative_error(&lv.outputs.y_low, &select_entries(x, &lv.retained())))
            .collect()
    }
}

/// Smallest graph on which a further level is built.
pub fn level_floor(cfg: &DesignConfig) -> usize {
    (cfg.r + cfg.s + 2).max(4)
}

/// Builds up to `depth` levels: design, row-selection sampling with the
/// polarity rule, zero-DC bank, analysis, then Kron reduction onto `A`.
/// The first level is always attempted; later levels stop at [`level_floor`].
pub fn decompose(g: &Graph, x: &DVector<f64>, depth: usize, cfg: &DesignConfig) -> Result<Pyramid> {
    if depth < 1 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    if x.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: x.len(),
        });
    }
    cfg.validate()?;
    let floor = level_floor(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut levels: Vec<Level> = Vec::with_capacity(depth);
    let mut graph = g.clone();
    let mut signal = x.clone();
    let mut orig_index: Vec<usize> = (0..g.n()).collect();
    for level in 1..=depth {
        if level > 1 {
            let prev = levels.last().expect("previous level");
            let keep = prev.bank.pattern().set_a().to_vec();
            if keep.len() < floor {
                break;
            }
            graph = kron_reduce(&prev.graph, &keep).map_err(|e| e.at_level(level))?;
            orig_index = keep.iter().map(|&i| prev.orig_index[i]).collect();
            signal = prev.outputs.y_low.clone();
        }
        let built = analyze_level(&graph, &signal, cfg, &mut rng).map_err(|e| e.at_level(level))?;
        levels.push(Level {
            graph: graph.clone(),
            orig_index: orig_index.clone(),
            design: built.0,
            bank: built.1,
            outputs: built.2,
        });
    }
    Ok(Pyramid {
        levels,
        requested_depth: depth,
    })
}

fn analyze_level(
    g: &Graph,
    x: &DVector<f64>,
    cfg: &DesignConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(FilterDesign, Filterbank, ChannelOutputs)> {
    let ng = normalize(g);
    let sd = eigendecompose(&ng)?;
    let fd = design(&sd, cfg)?;
    let (r, s) = fd.annihilation.unwrap_or((cfg.r, cfg.s));
    let pattern = partition_search(&sd, r, s, Strategy::Polarity, rng)?;
    let pair = build_filters(&ng, &sd, &fd)?;
    let bank = Filterbank::assemble(pair, pattern, true, ng.degrees())?;
    let outputs = bank.analyze(x)?;
    Ok((fd, bank, outputs))
}

/// Inverts the pyramid from the coarsest level up. `LpOnly` replaces every
/// stored highpass channel with zeros.
pub fn reconstruct_pyramid(p: &Pyramid, mode: ReconstructionMode) -> Result<DVector<f64>> {
    let mut low: Option<DVector<f64>> = None;
    for lv in p.levels.iter().rev() {
        let y_low = low.take().unwrap_or_else(|| lv.outputs.y_low.clone());
        let y_high = match mode {
            ReconstructionMode::Full => lv.outputs.y_high.clone(),
            ReconstructionMode::LpOnly => DVector::zeros(lv.outputs.y_high.len()),
        };
        low = Some(lv.bank.reconstruct(&ChannelOutputs { y_low, y_high })?);
    }
    Ok(low.expect("pyramid has at least one level"))
}

/// Hard-threshold denoising with `T = 3 sigma` on every highpass channel.
pub fn denoise(
    g: &Graph,
    x_noisy: &DVector<f64>,
    sigma: f64,
    depth: usize,
    cfg: &DesignConfig,
) -> Result<DVector<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise level must be finite and >= 0, got {sigma}"
        )));
    }
    let mut p = decompose(g, x_noisy, depth, cfg)?;
    p.hard_threshold(3.0 * sigma);
    reconstruct_pyramid(&p, ReconstructionMode::Full)
}

/// Ones on the first `ceil(n/2)` vertices, zeros elsewhere.
pub fn piecewise_constant(n: usize) -> DVector<f64> {
    let half = n.div_ceil(2);
    DVector::from_fn(n, |i, _| if i < half { 1.0 } else { 0.0 })
}

/// First coordinate rescaled to `[0, 1]`.
pub fn linear_in_x(g: &Graph) -> Result<DVector<f64>> {
    let c = g
        .coords()
        .ok_or_else(|| Error::InvalidParameter("graph has no coordinates".into()))?;
    let (lo, hi) = c
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[0]), hi.max(p[0]))
        });
    let span = hi - lo;
    Ok(DVector::from_iterator(
        c.len(),
        c.iter()
            .map(|p| if span > 0.0 { (p[0] - lo) / span } else { 0.0 }),
    ))
}

/// `D^{-1/2} (u_1 + u_2 / 2 + u_3 / 4)` over the available low-frequency
/// basis vectors, scaled to unit peak magnitude. The `u_1` term is constant.
pub fn low_frequency(ng: &NormalizedGraph, sd: &SpectralDecomposition) -> DVector<f64> {
    let k = sd.n().min(3);
    let mut x = DVector::zeros(sd.n());
    for i in 0..k {
        x.axpy(libm::pow(0.5, i as f64), &sd.u.column(i), 1.0);
    }
    x.component_mul_assign(&ng.deg_inv_sqrt());
    let peak = x.amax();
    if peak > 0.0 {
        x /= peak;
    }
    x
}
