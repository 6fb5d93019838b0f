mod common;

use dqsync::rng::{stream_rng, Stream};
use dqsync::topology::{DegreeDistribution, DomainGraph, Network, WeightDistribution};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{floyd_warshall, random_connected_edges};

#[test]
fn min_cost_matrix_matches_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rand::Rng::gen_range(&mut rng, 1..=12);
        let extra = rand::Rng::gen_range(&mut rng, 0..=20);
        let edges = random_connected_edges(&mut rng, n, extra);
        let g = DomainGraph::from_edges(0, n, &edges).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let m = g.min_cost_matrix(&all).unwrap();
        let fw = floyd_warshall(n, &edges);
        for u in 0..n {
            for v in 0..n {
                assert_eq!(m.get(u, v), Some(fw[u][v]));
            }
        }
    }
}

#[test]
fn network_generation_is_deterministic() {
    let deg = DegreeDistribution::bundled();
    let w = WeightDistribution::evaluation_default();
    let a = Network::generate(&[10, 30, 55], &[5, 20], &deg, &w, 9).unwrap();
    let b = Network::generate(&[10, 30, 55], &[5, 20], &deg, &w, 9).unwrap();
    let c = Network::generate(&[10, 30, 55], &[5, 20], &deg, &w, 10).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_ne!(a.fingerprint(), c.fingerprint());
}

#[test]
fn snapshot_round_trip_through_json() {
    let net = Network::generate(
        &[8, 12, 9],
        &[3, 4],
        &DegreeDistribution::bundled(),
        &WeightDistribution::evaluation_default(),
        2,
    )
    .unwrap();
    let json = serde_json::to_string(&net.snapshot()).unwrap();
    let back = Network::from_snapshot(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(back, net);
}

#[test]
fn rewiring_one_domain_leaves_others_untouched() {
    let w = WeightDistribution::evaluation_default();
    let mut net =
        Network::generate(&[20, 20], &[4], &DegreeDistribution::bundled(), &w, 5).unwrap();
    let before = net.domains()[1].clone();
    net.domain_mut(0)
        .unwrap()
        .rewire(6, &w, &mut stream_rng(5, Stream::Rewire(0)));
    assert_eq!(net.domains()[1], before);
    assert!(net.domains()[0].is_connected());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_domains_are_connected_and_simple(n in 2usize..60, seed in any::<u64>()) {
        let w = WeightDistribution::evaluation_default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DomainGraph::generate(0, n, &DegreeDistribution::bundled(), &w, &mut rng).unwrap();
        prop_assert_eq!(g.node_count(), n);
        prop_assert!(g.is_connected());
        let mut seen = std::collections::BTreeSet::new();
        for (u, v, wt) in g.edges() {
            prop_assert!(u < v);
            prop_assert!(seen.insert((u, v)));
            prop_assert!(w.contains(wt));
        }
        prop_assert_eq!(seen.len(), g.edge_count());
    }

    #[test]
    fn rewiring_preserves_invariants(n in 2usize..40, e in 0usize..15, slots in 1usize..20, seed in any::<u64>()) {
        let w = WeightDistribution::evaluation_default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = DomainGraph::generate(0, n, &DegreeDistribution::bundled(), &w, &mut rng).unwrap();
        for _ in 0..slots {
            let before = g.edge_count();
            let report = g.rewire(e, &w, &mut rng);
            prop_assert!(g.is_connected());
            prop_assert_eq!(g.node_count(), n);
            prop_assert_eq!(g.edge_count(), before + report.added + report.repaired - report.removed);
            prop_assert!(report.added <= e && report.removed <= e);
            prop_assert!(g.edges().all(|(_, _, wt)| w.contains(wt)));
        }
    }

    #[test]
    fn cost_matrix_is_symmetric_with_zero_diagonal(n in 1usize..15, extra in 0usize..25, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = random_connected_edges(&mut rng, n, extra);
        let g = DomainGraph::from_edges(0, n, &edges).unwrap();
        let t: Vec<usize> = (0..n).step_by(2).collect();
        let m = g.min_cost_matrix(&t).unwrap();
        for &u in &t {
            prop_assert_eq!(m.get(u, u), Some(0.0));
            for &v in &t {
                prop_assert_eq!(m.get(u, v), m.get(v, u));
                // triangle inequality through any third terminal
                for &x in &t {
                    prop_assert!(m.get(u, v).unwrap() <= m.get(u, x).unwrap() + m.get(x, v).unwrap());
                }
            }
        }
    }
}
