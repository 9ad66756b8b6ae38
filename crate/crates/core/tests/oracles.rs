mod common;

use common::{brute_pair_counts, dense_stationary, dense_transition, random_graph};
use hbdiff::diffusion::l1_distance;
use hbdiff::{pair_counts, stationary_by_power_iteration, BiasFunction, BiasedSystem, Ranking};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FAMILIES: [(BiasFunction, BiasFunction); 5] = [
    (BiasFunction::Identity, BiasFunction::Identity),
    (BiasFunction::Power(2.0), BiasFunction::Power(2.0)),
    (BiasFunction::Power(0.2), BiasFunction::Power(0.2)),
    (BiasFunction::Exponential(2.0), BiasFunction::Exponential(2.0)),
    (BiasFunction::Exponential(-2.0), BiasFunction::Exponential(-2.0)),
];

#[test]
fn sparse_transition_matches_dense_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let g = random_graph(&mut rng, 20);
        for (bv, be) in FAMILIES {
            let dense = dense_transition(&g, bv, be);
            let t = BiasedSystem::new(&g, bv, be).unwrap().transition_matrix();
            for i in 0..g.n() {
                for k in 0..g.n() {
                    assert!((t.get(i, k) - dense[(i, k)]).abs() < 1e-12, "{bv}/{be} T[{i},{k}]");
                }
            }
        }
    }
}

#[test]
fn power_iteration_matches_dense_eigenvector() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let g = random_graph(&mut rng, 30);
        for (bv, be) in FAMILIES {
            let sys = BiasedSystem::new(&g, bv, be).unwrap();
            let pi = stationary_by_power_iteration(&sys, 1e-14, 1_000_000).unwrap();
            let oracle = dense_stationary(&dense_transition(&g, bv, be));
            assert!(l1_distance(&pi.vertex, &oracle) < 1e-8);
        }
    }
}

#[test]
fn identity_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let g = random_graph(&mut rng, 30);
        let sys = BiasedSystem::new(&g, BiasFunction::Identity, BiasFunction::Identity).unwrap();
        let pi = stationary_by_power_iteration(&sys, 1e-14, 1_000_000).unwrap();
        let d = g.weighted_degrees();
        let total: f64 = d.iter().sum();
        for (x, di) in pi.vertex.iter().zip(&d) {
            assert!((x - di / total).abs() < 1e-10);
        }
        for (x, e) in pi.hbedge.iter().zip(g.edges()) {
            assert!((x - e.weight() * e.m_cardinality() / total).abs() < 1e-10);
        }
    }
}

#[test]
fn pair_counts_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..2000 {
        let n = rng.random_range(2..=8);
        let levels = rng.random_range(1..=n as i64);
        let a: Vec<i64> = (0..n).map(|_| rng.random_range(0..levels)).collect();
        let b: Vec<i64> = (0..n).map(|_| rng.random_range(0..levels)).collect();
        let to_ranking = |x: &[i64]| Ranking::from_scores(&x.iter().map(|&v| v as f64).collect::<Vec<_>>(), 1e-10).unwrap();
        let got = pair_counts(&to_ranking(&a), &to_ranking(&b)).unwrap();
        let (c, d, tb, to, n0) = brute_pair_counts(&a, &b);
        assert_eq!(
            (got.concordant, got.discordant, got.tied_both, got.tied_one, got.total_pairs),
            (c as u64, d as u64, tb as u64, to as u64, n0 as u64),
            "{a:?} {b:?}"
        );
    }
}
