//! End-to-end estimator checks on exact and perturbed minors.

mod common;

use common::*;
use dpp_moments::cyclebasis::Cycle;
use dpp_moments::estimator::{
    compute_h, estimate, estimate_chordal, estimate_general, recover_graph, success_metrics,
    EstimateOptions, EstimateWarning, EstimatorPath, ExactMinors, MinorSource, SignSystemStatus,
};
use dpp_moments::experiments::derive_seed;
use dpp_moments::graph::{random_chordal, UGraph};
use dpp_moments::kernel::{rho, Kernel};
use dpp_moments::sampler::sample_bruteforce;
use proptest::prelude::*;
use rand::Rng;

/// `Ĥ` of the whole cycle computed from exact minors of a cycle fixture.
fn exact_cycle_h(k: &Kernel, alpha: f64) -> f64 {
    let src = ExactMinors(k);
    let mut table = src.low_order().unwrap();
    let rec = recover_graph(&table, alpha).unwrap();
    let ell = k.dim();
    let all: Vec<usize> = (0..ell).collect();
    table.insert(&all, src.minors(std::slice::from_ref(&all)).unwrap()[0]);
    let cycle = Cycle::from_vertices(&rec.graph, all).unwrap();
    compute_h(&table, &rec, &cycle).unwrap()
}

fn arb_connected_graph(max_n: usize) -> impl Strategy<Value = UGraph> {
    (3..=max_n, any::<u64>()).prop_map(|(n, seed)| {
        let mut r = rng(seed);
        // random spanning tree plus random extra edges
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (r.gen_range(0..v), v)).collect();
        for i in 0..n {
            for j in i + 1..n {
                if !edges.contains(&(i, j)) && r.gen_bool(0.3) {
                    edges.push((i, j));
                }
            }
        }
        UGraph::new(n, edges).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// With exact minors `Ĥ = 2 (-1)^(ℓ+1) Π K_e`, so `Ĥ > 0` exactly when
    /// the cycle has an odd number of positive edges.
    #[test]
    fn hhat_sign_encodes_positive_edge_parity(
        ell in 3usize..=8,
        pattern in any::<u8>(),
        w in 0.05f64..0.2,
    ) {
        let signs: Vec<f64> = (0..ell).map(|e| if pattern >> e & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let k = cycle_fixture(ell, 0.5, w, &signs);
        let h = exact_cycle_h(&k, w);
        let product: f64 = signs.iter().map(|s| s * w).product();
        let parity = if ell % 2 == 1 { 2.0 } else { -2.0 };
        prop_assert!((h - parity * product).abs() < 1e-12);
        let positives = signs.iter().filter(|&&s| s > 0.0).count();
        prop_assert_eq!(h > 0.0, positives % 2 == 1);
    }

    #[test]
    fn exact_moments_recover_kernel_up_to_sign_flips(g in arb_connected_graph(9), seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_graph_kernel(&g, &mut r);
        let alpha = k.alpha().unwrap();
        let res = estimate(&ExactMinors(&k), &EstimateOptions::new(alpha)).unwrap();
        prop_assert_eq!(res.sign_system_status, SignSystemStatus::Solved);
        let m = success_metrics(&k, &res).unwrap();
        prop_assert!(m.graph_recovered && m.signs_recovered);
        prop_assert!(m.rho < 1e-12, "rho = {}", m.rho);
        prop_assert!(!res.warnings.iter().any(|w| matches!(w, EstimateWarning::ChordedBasis)));
    }

    #[test]
    fn chordal_and_general_paths_agree(seed in any::<u64>(), n in 3usize..11) {
        let mut r = rng(seed);
        let g = random_chordal(n, 4, 0.1, &mut r);
        let k = random_graph_kernel(&g, &mut r);
        let alpha = k.alpha().unwrap();
        let src = ExactMinors(&k);
        let chordal = estimate_chordal(&src, alpha).unwrap();
        let general = estimate_general(&src, alpha).unwrap();
        prop_assert_eq!(chordal.path, EstimatorPath::Chordal);
        prop_assert_eq!(general.path, EstimatorPath::General);
        prop_assert!(rho(&chordal.khat, &general.khat).unwrap() < 1e-12);
        prop_assert!(rho(&chordal.khat, &k).unwrap() < 1e-12);
    }

    #[test]
    fn small_minor_noise_keeps_the_graph(seed in any::<u64>(), n in 3usize..8) {
        let mut r = rng(seed);
        let g = random_chordal(n, 3, 0.2, &mut r);
        let k = random_graph_kernel(&g, &mut r);
        let alpha = k.alpha().unwrap();
        // |B̂ - B| <= 3 eps + eps^2, below α²/2 for eps = α²/8
        let eps = alpha * alpha / 8.0;
        let src = PerturbedMinors { kernel: &k, shift: |s: &[usize]| eps * hashed_sign(seed, s) };
        let res = estimate(&src, &EstimateOptions::new(alpha)).unwrap();
        prop_assert_eq!(res.ghat.edges(), g.edges());
    }
}

#[test]
fn flipped_cycle_minor_flips_recovered_sign() {
    for ell in 3..=7 {
        let w = 0.2;
        let k = cycle_fixture(ell, 0.5, w, &vec![1.0; ell]);
        let full: Vec<usize> = (0..ell).collect();
        let h = exact_cycle_h(&k, w);
        // Shift Δ_S by -2Ĥ so that Ĥ changes sign and nothing else moves.
        let src = PerturbedMinors {
            kernel: &k,
            shift: move |s: &[usize]| if s == full.as_slice() { -2.0 * h } else { 0.0 },
        };
        let res = estimate_general(&src, w).unwrap();
        assert!((res.hhat[0] + h).abs() < 1e-12);
        let m = success_metrics(&k, &res).unwrap();
        assert!(m.graph_recovered);
        assert!(!m.signs_recovered, "flip on C_{ell} went unnoticed");
        assert!((m.rho - 2.0 * w).abs() < 1e-12);
    }
}

#[test]
fn triangle_example_signs() {
    // K_12 > 0, K_13 < 0, K_23 < 0: the product is positive.
    let g = UGraph::complete(3);
    let k = {
        let mut m = dpp_moments::linalg::SymMatrix::from_diagonal(&[0.5; 3]).unwrap();
        m.set(0, 1, 0.2);
        m.set(0, 2, -0.2);
        m.set(1, 2, -0.2);
        Kernel::new(m).unwrap()
    };
    let res = estimate_general(&ExactMinors(&k), 0.2).unwrap();
    assert_eq!(res.ghat.edges(), g.edges());
    assert_eq!(res.signs.signs(), &[1, -1, -1]);
    assert!(rho(&res.khat, &k).unwrap() < 1e-12);
}

#[test]
fn forest_kernel_gets_positive_signs() {
    let g = UGraph::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
    let k = random_graph_kernel(&g, &mut rng(3));
    let res = estimate(&ExactMinors(&k), &EstimateOptions::new(k.alpha().unwrap())).unwrap();
    assert!(res.signs.signs().iter().all(|&s| s == 1));
    assert_eq!(res.sparsity_estimate, 2);
    assert!(rho(&res.khat, &k).unwrap() < 1e-12);
}

#[test]
fn sampled_moments_recover_a_small_kernel() {
    let g = UGraph::cycle(4).unwrap();
    let k = random_graph_kernel(&g, &mut rng(9));
    let alpha = k.alpha().unwrap();
    let samples = sample_bruteforce(&k, 400_000, derive_seed(9, 4, 400_000, 0, 2)).unwrap();
    let res = estimate(&samples, &EstimateOptions::new(alpha)).unwrap();
    assert_eq!(res.sample_count, Some(400_000));
    let m = success_metrics(&k, &res).unwrap();
    assert!(m.graph_recovered && m.signs_recovered, "{m:?}");
    assert!(m.rho < 0.01, "rho = {}", m.rho);
    // same seed, same estimate
    let again = sample_bruteforce(&k, 400_000, derive_seed(9, 4, 400_000, 0, 2)).unwrap();
    let res2 = estimate(&again, &EstimateOptions::new(alpha)).unwrap();
    assert_eq!(res.khat, res2.khat);
}

#[test]
fn invalid_alpha_is_rejected() {
    let k = cycle_fixture(3, 0.5, 0.2, &[1.0; 3]);
    for a in [0.0, 1.0, -0.1, f64::NAN] {
        assert!(estimate(&ExactMinors(&k), &EstimateOptions::new(a)).is_err());
    }
}
