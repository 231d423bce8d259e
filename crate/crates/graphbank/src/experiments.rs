//! Drivers shared by the command-line front end and the acceptance suite.

use graphbank_core::design::{build_filters, design, validate_response, InvertibilityReport};
use graphbank_core::filterbank::relative_error;
use graphbank_core::generate::{generate_with, sensor_default_radius};
use graphbank_core::mra::{denoise, linear_in_x, low_frequency, piecewise_constant};
use graphbank_core::sampling::{
    bipartite_natural_partition, check_rank_conditions, partition_search, sigma_min_diagnostic,
};
use graphbank_core::{
    eigendecompose, normalize, DesignConfig, Error, FilterDesign, Filterbank, Graph, GraphKind,
    NormalizedGraph, Result, SamplingPattern, SpectralDecomposition, Strategy,
};
use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;

use crate::streams::{gaussian_noise, rng, Stream};

/// How the vertex partition is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Row-selection search, remaining vertices by the given strategy.
    Alg1(Strategy),
    /// Two-color classes of a bipartite graph.
    Natural,
    /// `K = I`.
    AllLowpass,
}

impl Sampling {
    pub fn parse(name: &str, strategy: Strategy) -> Option<Self> {
        match name {
            "alg1" => Some(Sampling::Alg1(strategy)),
            "natural" => Some(Sampling::Natural),
            "all-lowpass" => Some(Sampling::AllLowpass),
            _ => None,
        }
    }
}

pub struct Designed {
    pub ng: NormalizedGraph,
    pub sd: SpectralDecomposition,
    pub design: FilterDesign,
    /// Annihilation orders the design actually enforces.
    pub orders: (usize, usize),
    /// `None` for the legacy model, which has no annihilation constraints.
    pub response_check: Option<InvertibilityReport>,
}

pub fn design_graph(g: &Graph, cfg: &DesignConfig) -> Result<Designed> {
    let ng = normalize(g);
    let sd = eigendecompose(&ng)?;
    let fd = design(&sd, cfg)?;
    let orders = fd.annihilation.unwrap_or((cfg.r, cfg.s));
    let response_check = fd
        .annihilation
        .map(|(r, s)| validate_response(&fd.gamma, r, s));
    Ok(Designed {
        ng,
        sd,
        design: fd,
        orders,
        response_check,
    })
}

pub fn choose_pattern(
    d: &Designed,
    sampling: Sampling,
    rng: &mut ChaCha8Rng,
) -> Result<SamplingPattern> {
    let (r, s) = d.orders;
    match sampling {
        Sampling::Alg1(strategy) => partition_search(&d.sd, r, s, strategy, rng),
        Sampling::Natural => {
            let (p, max_rs) = bipartite_natural_partition(&d.ng)?;
            if r > max_rs || s > max_rs {
                return Err(Error::InvalidParameter(format!(
                    "natural bipartition supports r, s <= {max_rs}, got r={r}, s={s}"
                )));
            }
            check_rank_conditions(&d.sd, &p, r, s)?;
            Ok(p)
        }
        Sampling::AllLowpass => Ok(SamplingPattern::all_lowpass(d.sd.n())),
    }
}

pub struct Built {
    pub designed: Designed,
    pub bank: Filterbank,
}

pub fn build_bank(
    g: &Graph,
    cfg: &DesignConfig,
    sampling: Sampling,
    zero_dc: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Built> {
    let designed = design_graph(g, cfg)?;
    let pattern = choose_pattern(&designed, sampling, rng)?;
    let pair = build_filters(&designed.ng, &designed.sd, &designed.design)?;
    let bank = Filterbank::assemble(pair, pattern, zero_dc, designed.ng.degrees())?;
    Ok(Built { designed, bank })
}

/// Graph families used by `generate` and `bench`.
pub fn graph_kind(family: &str, n: usize, left: usize, right: usize, p: f64) -> Option<GraphKind> {
    Some(match family {
        "ring" => GraphKind::Ring { n },
        "path" => GraphKind::Path { n },
        "comet" => GraphKind::Comet {
            n,
            head: (n / 4).max(1),
        },
        "sensor" => GraphKind::RandomSensor {
            n,
            radius: sensor_default_radius(n),
        },
        "bipartite" => GraphKind::RandomBipartite { left, right, p },
        _ => return None,
    })
}

/// Member `index` of a seeded ensemble.
pub fn ensemble_graph(kind: GraphKind, seed: u64, index: u64) -> Result<Graph> {
    generate_with(kind, &mut rng(seed, Stream::Graph, index))
}

/// `sigma_min(I + KG)` of one design under each strategy.
pub fn strategy_sigmas(
    g: &Graph,
    cfg: &DesignConfig,
    strategies: &[Strategy],
    seed: u64,
    index: u64,
) -> Result<Vec<f64>> {
    let d = design_graph(g, cfg)?;
    let pair = build_filters(&d.ng, &d.sd, &d.design)?;
    let mut r = rng(seed, Stream::Strategy, index);
    strategies
        .iter()
        .map(|&st| {
            let p = choose_pattern(&d, Sampling::Alg1(st), &mut r)?;
            Ok(sigma_min_diagnostic(p.k_diag(), &pair.g)?.sigma_min)
        })
        .collect()
}

/// Piecewise constant on cycles, linear in `x` with coordinates, otherwise
/// a smooth low-frequency combination.
pub fn default_signal(g: &Graph, sd: &SpectralDecomposition) -> DVector<f64> {
    let n = g.n();
    let is_cycle = n >= 3 && (0..n).all(|i| g.neighbors(i).count() == 2);
    if is_cycle {
        piecewise_constant(n)
    } else if let Ok(x) = linear_in_x(g) {
        x
    } else {
        low_frequency(&normalize(g), sd)
    }
}

/// Smooth test signal for denoising: the low-frequency combination on any graph.
pub fn smooth_signal(g: &Graph) -> Result<DVector<f64>> {
    let ng = normalize(g);
    let sd = eigendecompose(&ng)?;
    Ok(low_frequency(&ng, &sd))
}

/// Relative errors of the noisy input and of the denoised output.
pub fn denoise_trial(
    g: &Graph,
    clean: &DVector<f64>,
    sigma: f64,
    depth: usize,
    cfg: &DesignConfig,
    seed: u64,
    index: u64,
) -> Result<(f64, f64)> {
    let noisy = clean + gaussian_noise(clean.len(), sigma, &mut rng(seed, Stream::Noise, index));
    let out = denoise(g, &noisy, sigma, depth, cfg)?;
    Ok((relative_error(&noisy, clean)?, relative_error(&out, clean)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_bank_variants() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let cfg = DesignConfig::new(1, 1, 2, 0.0);
        let mut r = rng(0, Stream::Strategy, 0);
        let b = build_bank(&g, &cfg, Sampling::Natural, false, &mut r).unwrap();
        assert_eq!(b.bank.pattern().set_a(), &[0]);
        let legacy = DesignConfig {
            j: 1,
            ..cfg.with_model(graphbank_core::DesignModel::LiterOpt)
        };
        let err = build_bank(&g, &legacy, Sampling::AllLowpass, false, &mut r)
            .err()
            .unwrap();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn signal_defaults() {
        let ring = graphbank_core::generate_graph(GraphKind::Ring { n: 6 }, 0).unwrap();
        let sd = eigendecompose(&normalize(&ring)).unwrap();
        assert_eq!(default_signal(&ring, &sd), piecewise_constant(6));
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let sd = eigendecompose(&normalize(&g)).unwrap();
        assert_eq!(default_signal(&g, &sd).len(), 3);
    }
}
