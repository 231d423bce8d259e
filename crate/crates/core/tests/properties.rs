use graphbank_core::design::{build_filters, design, validate_response, DesignModel};
use graphbank_core::filterbank::check_legacy_counterexample;
use graphbank_core::generate::sensor_default_radius;
use graphbank_core::mra::kron_reduce;
use graphbank_core::sampling::{
    bipartite_natural_partition, check_rank_conditions, partition_search_seeded,
    sigma_min_diagnostic, Strategy,
};
use graphbank_core::{
    eigendecompose, generate_graph, normalize, DesignConfig, Filterbank, Graph, GraphKind,
    NormalizedGraph, SpectralDecomposition,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sensor(n: usize, seed: u64) -> Graph {
    generate_graph(
        GraphKind::RandomSensor {
            n,
            radius: sensor_default_radius(n).max(0.35),
        },
        seed,
    )
    .unwrap()
}

fn setup(g: &Graph) -> (NormalizedGraph, SpectralDecomposition) {
    let ng = normalize(g);
    let sd = eigendecompose(&ng).unwrap();
    (ng, sd)
}

fn random_signal(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

fn bank(
    g: &Graph,
    cfg: &DesignConfig,
    strategy: Strategy,
    zero_dc: bool,
    seed: u64,
) -> (SpectralDecomposition, Filterbank) {
    let (ng, sd) = setup(g);
    let fd = design(&sd, cfg).unwrap();
    let (r, s) = fd.annihilation.unwrap();
    let pattern = partition_search_seeded(&sd, r, s, strategy, seed).unwrap();
    let pair = build_filters(&ng, &sd, &fd).unwrap();
    let fb = Filterbank::assemble(pair, pattern, zero_dc, ng.degrees()).unwrap();
    (sd, fb)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gft_round_trip_and_parseval(n in 6usize..40, seed in 0u64..1000) {
        let (_, sd) = setup(&sensor(n, seed));
        let x = random_signal(n, seed);
        let xh = sd.gft(&x).unwrap();
        prop_assert!((xh.norm() - x.norm()).abs() <= 1e-10 * x.norm());
        prop_assert!((sd.igft(&xh).unwrap() - &x).amax() <= 1e-10);
        let ut_u = sd.u.transpose() * &sd.u;
        prop_assert!((ut_u - DMatrix::identity(n, n)).amax() <= 1e-10);
    }

    #[test]
    fn perfect_reconstruction(n in 8usize..50, seed in 0u64..1000, zero_dc in any::<bool>(), random in any::<bool>()) {
        let g = sensor(n, seed);
        let strategy = if random { Strategy::Random } else { Strategy::Polarity };
        let (_, fb) = bank(&g, &DesignConfig::new(1, 1, 3, 0.5), strategy, zero_dc, seed);
        let x = random_signal(n, seed ^ 0xabc);
        let ch = fb.analyze(&x).unwrap();
        prop_assert_eq!(ch.y_low.len() + ch.y_high.len(), n);
        prop_assert!(fb.pr_residual(&x).unwrap() <= 1e-8);
        prop_assert!(fb.pr_identity_residual() <= 1e-8);
    }

    #[test]
    fn horner_filters_match_spectral_synthesis(n in 6usize..40, seed in 0u64..1000, j in 2usize..7) {
        let g = sensor(n, seed);
        let (ng, sd) = setup(&g);
        let cfg = DesignConfig::new(1, 1, j, 0.3);
        let fd = design(&sd, &cfg).unwrap();
        let pair = build_filters(&ng, &sd, &fd).unwrap();
        let spectral = sd.synthesize(&fd.gamma);
        let scale = fd.gamma.amax().max(1.0);
        prop_assert!((&pair.g - spectral).amax() <= 1e-8 * scale);
    }

    #[test]
    fn filters_are_local(n in 6usize..40, seed in 0u64..1000, j in 2usize..6) {
        let g = sensor(n, seed);
        let (ng, sd) = setup(&g);
        let fd = design(&sd, &DesignConfig::new(1, 1, j, 0.5)).unwrap();
        let pair = build_filters(&ng, &sd, &fd).unwrap();
        for src in 0..n {
            let hops = g.hop_distances(src);
            for (dst, &h) in hops.iter().enumerate() {
                if h > j - 1 {
                    prop_assert_eq!(pair.h_low[(src, dst)], 0.0);
                    prop_assert_eq!(pair.h_high[(src, dst)], 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_dc_kills_constants(n in 6usize..40, seed in 0u64..1000) {
        let g = sensor(n, seed);
        let (_, fb) = bank(&g, &DesignConfig::new(1, 1, 3, 0.5), Strategy::Polarity, true, seed);
        let ones = DVector::from_element(n, 1.0);
        prop_assert!((fb.analysis_high() * &ones).norm() <= 1e-8);
    }

    #[test]
    fn conjugation_preserves_invertibility(n in 6usize..30, seed in 0u64..1000, random in any::<bool>()) {
        let g = sensor(n, seed);
        let (ng, sd) = setup(&g);
        let fd = design(&sd, &DesignConfig::new(1, 1, 3, 0.5)).unwrap();
        let pair = build_filters(&ng, &sd, &fd).unwrap();
        let strategy = if random { Strategy::Random } else { Strategy::Polarity };
        let (r, s) = fd.annihilation.unwrap();
        let p = partition_search_seeded(&sd, r, s, strategy, seed).unwrap();
        let d = ng.degrees();
        let conj = DMatrix::from_fn(n, n, |i, j| pair.g[(i, j)] * (d[j] / d[i]).sqrt());
        let a = sigma_min_diagnostic(p.k_diag(), &pair.g).unwrap().sigma_min;
        let b = sigma_min_diagnostic(p.k_diag(), &conj).unwrap().sigma_min;
        prop_assert_eq!(a > 1e-8, b > 1e-8);
    }

    #[test]
    fn partitions_satisfy_rank_conditions(n in 6usize..40, seed in 0u64..1000, r in 1usize..3, s in 1usize..4) {
        let (_, sd) = setup(&sensor(n, seed));
        for strategy in [Strategy::Polarity, Strategy::Random] {
            let p = partition_search_seeded(&sd, r, s, strategy, seed).unwrap();
            prop_assert_eq!(p.set_a().len() + p.set_b().len(), n);
            prop_assert!(check_rank_conditions(&sd, &p, r, s).is_ok());
        }
    }

    #[test]
    fn validated_designs_give_invertible_banks(n in 8usize..40, seed in 0u64..1000) {
        let g = sensor(n, seed);
        let (ng, sd) = setup(&g);
        for model in [DesignModel::ClosedForm, DesignModel::OriOpt, DesignModel::RegOpt] {
            let fd = design(&sd, &DesignConfig::new(1, 1, 3, 0.5).with_model(model)).unwrap();
            let (r, s) = fd.annihilation.unwrap();
            if !validate_response(&fd.gamma, r, s).passed() {
                continue;
            }
            let pair = build_filters(&ng, &sd, &fd).unwrap();
            let p = partition_search_seeded(&sd, r, s, Strategy::Polarity, seed).unwrap();
            prop_assert!(sigma_min_diagnostic(p.k_diag(), &pair.g).unwrap().sigma_min > 0.0);
        }
    }

    #[test]
    fn kron_reduction_keeps_a_valid_graph(n in 5usize..30, seed in 0u64..1000, frac in 0.2f64..0.9) {
        let g = sensor(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keep: Vec<usize> = (0..n).filter(|_| rng.random_bool(frac)).collect();
        if keep.is_empty() {
            keep.push(0);
        }
        let red = kron_reduce(&g, &keep).unwrap();
        let w = red.weights();
        prop_assert_eq!(red.n(), keep.len());
        prop_assert!(w.iter().all(|&v| v >= 0.0));
        prop_assert_eq!(w, &w.transpose());
    }
}

#[test]
fn natural_partition_is_admissible_up_to_max_order() {
    let mut checked = 0;
    for seed in 0..20u64 {
        let left = 2 + (seed as usize % 4);
        let right = 3 + (seed as usize % 5);
        let Ok(g) = generate_graph(
            GraphKind::RandomBipartite {
                left,
                right,
                p: 0.6,
            },
            seed,
        ) else {
            continue;
        };
        assert!(g.n() <= 12);
        let (ng, sd) = setup(&g);
        let (p, max_rs) = bipartite_natural_partition(&ng).unwrap();
        for r in 1..=max_rs {
            for s in 1..=max_rs {
                assert!(
                    check_rank_conditions(&sd, &p, r, s).is_ok(),
                    "seed {seed} r {r} s {s}"
                );
            }
        }
        checked += 1;
    }
    assert!(checked >= 15, "only {checked} graphs generated");
    for g in [
        generate_graph(GraphKind::Ring { n: 10 }, 0).unwrap(),
        generate_graph(GraphKind::Path { n: 7 }, 0).unwrap(),
    ] {
        let (ng, sd) = setup(&g);
        let (p, max_rs) = bipartite_natural_partition(&ng).unwrap();
        assert!(max_rs >= 1);
        for r in 1..=max_rs {
            for s in 1..=max_rs {
                assert!(check_rank_conditions(&sd, &p, r, s).is_ok());
            }
        }
    }
}

#[test]
fn legacy_counterexample_on_bipartite_graphs() {
    for g in [
        Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap(),
        Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap(),
        generate_graph(GraphKind::Ring { n: 12 }, 0).unwrap(),
    ] {
        let rep = check_legacy_counterexample(&g).unwrap();
        assert!(rep.sigma_identity <= 1e-10);
        assert!(rep.sigma_natural >= 0.1);
    }
}

fn total_variation(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

#[test]
fn regularization_smooths_the_response() {
    let g = generate_graph(
        GraphKind::RandomSensor {
            n: 64,
            radius: sensor_default_radius(64),
        },
        7,
    )
    .unwrap();
    let (_, sd) = setup(&g);
    let ori = design(
        &sd,
        &DesignConfig::new(2, 3, 8, 0.5).with_model(DesignModel::OriOpt),
    )
    .unwrap();
    let reg = design(&sd, &DesignConfig::new(2, 3, 8, 0.5)).unwrap();
    let (r, s) = reg.annihilation.unwrap();
    let middle = &reg.gamma_unique[r..reg.gamma_unique.len() - s];
    assert!(middle.iter().all(|g| g.abs() <= 1.0 - 1e-6 + 1e-9));
    assert!(total_variation(reg.h_low.as_slice()) < total_variation(ori.h_low.as_slice()));
}

#[test]
fn larger_alpha_never_raises_the_regularizer() {
    let g = sensor(40, 3);
    let (_, sd) = setup(&g);
    let reg_term = |alpha: f64| {
        let fd = design(&sd, &DesignConfig::new(1, 1, 3, alpha)).unwrap();
        let ds = graphbank_core::spectral::dedup_eigenvalues(sd.xi.as_slice(), 1e-8).unwrap();
        let vs = graphbank_core::spectral::vandermonde(&ds, 3, 1, 1).unwrap();
        (vs.derivative_matrix() * &fd.w).norm()
    };
    let terms: Vec<f64> = [0.0, 0.5, 5.0].iter().map(|&a| reg_term(a)).collect();
    assert!(
        terms[1] <= terms[0] + 1e-6 && terms[2] <= terms[1] + 1e-6,
        "{terms:?}"
    );
}
