mod support;

use std::cmp::Ordering;

use ggredux_core::canonical::{
    enumerate_dfs_code, graph_from_reduced, is_isomorphic, min_dfs_code, reduce, NeighborOrder,
    ReconstructionPolicy,
};
use ggredux_core::synth::{self, SynthConfig};
use ggredux_core::{Edge, LabeledGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(labels: &[&str], edge_labels: &[&str], min: usize, max: usize, p: f64) -> SynthConfig {
    SynthConfig {
        min_nodes: min,
        max_nodes: max,
        node_labels: labels.iter().map(|s| s.to_string()).collect(),
        edge_labels: edge_labels.iter().map(|s| s.to_string()).collect(),
        extra_edge_prob: p,
    }
}

#[test]
fn min_code_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let configs = [
        cfg(&["A", "B", "C"], &["a", "b"], 2, 7, 0.3),
        cfg(&["A"], &["a"], 2, 6, 0.5),
        cfg(&["A", "B"], &["a"], 3, 6, 0.7),
    ];
    for (ci, c) in configs.iter().enumerate() {
        for i in 0..120 {
            let n = rng.random_range(c.min_nodes..=c.max_nodes);
            let g = synth::random_connected_graph(&mut rng, format!("{ci}-{i}"), n, c);
            let expected = support::oracle_min_code(&g);
            let got = min_dfs_code(&g).unwrap();
            assert_eq!(got, expected, "graph {}: {:?}", g.id(), g);
        }
    }
}

#[test]
fn example_visit_is_among_enumerated_codes() {
    let g = LabeledGraph::from_parts(
        "0",
        &["X", "X", "Y", "Z"],
        &[(0, 1, "a"), (1, 2, "a"), (2, 0, "b"), (2, 3, "a"), (3, 1, "b")],
    )
    .unwrap();
    let all = support::all_dfs_codes(&g);
    for start in 0..4 {
        for order in [NeighborOrder::Ascending, NeighborOrder::Descending] {
            let c = enumerate_dfs_code(&g, start, &order).unwrap();
            assert!(all.contains(&c.0));
        }
    }
}

#[test]
fn isomorphism_agrees_with_permutation_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = cfg(&["A", "B"], &["a", "b"], 2, 6, 0.4);
    let mut agree_true = 0;
    for i in 0..300 {
        let n = rng.random_range(2..=6);
        let g = synth::random_connected_graph(&mut rng, i.to_string(), n, &c);
        let h = match i % 3 {
            0 => synth::shuffle_nodes(&mut rng, &g),
            1 => {
                // flip one edge label of a shuffled copy
                let s = synth::shuffle_nodes(&mut rng, &g);
                let k = rng.random_range(0..s.edge_count());
                let edges: Vec<String> = s
                    .edges()
                    .iter()
                    .enumerate()
                    .map(|(j, e)| {
                        if j == k {
                            if e.label == "a" { "b".into() } else { "a".into() }
                        } else {
                            e.label.clone()
                        }
                    })
                    .collect();
                s.relabeled(s.node_labels().to_vec(), edges).unwrap()
            }
            _ => synth::random_connected_graph(&mut rng, "h", n, &c),
        };
        let expected = support::brute_force_isomorphic(&g, &h);
        agree_true += expected as usize;
        assert_eq!(is_isomorphic(&g, &h).unwrap(), expected, "{g:?} vs {h:?}");
    }
    assert!(agree_true >= 100);
}

#[test]
fn relabeled_edge_breaks_isomorphism() {
    let a = LabeledGraph::from_parts("a", &["X", "Y"], &[(0, 1, "a")]).unwrap();
    let b = LabeledGraph::from_parts("b", &["X", "Y"], &[(0, 1, "b")]).unwrap();
    assert!(!is_isomorphic(&a, &b).unwrap());
    assert!(!support::brute_force_isomorphic(&a, &b));
}

fn graph_strategy() -> impl Strategy<Value = LabeledGraph> {
    (any::<u64>(), 2usize..=9).prop_map(|(seed, n)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        synth::random_connected_graph(&mut rng, "p", n, &SynthConfig::default())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn min_code_is_permutation_invariant(g in graph_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = min_dfs_code(&g).unwrap();
        for _ in 0..5 {
            let p = synth::shuffle_nodes(&mut rng, &g);
            prop_assert_eq!(&min_dfs_code(&p).unwrap(), &base);
        }
    }

    #[test]
    fn reduced_round_trip_is_isomorphic(g in graph_strategy()) {
        let code = min_dfs_code(&g).unwrap();
        let (h, report) = graph_from_reduced(&reduce(&code), ReconstructionPolicy::default());
        prop_assert!(report.is_clean());
        prop_assert!(is_isomorphic(&g, &h).unwrap());
    }

    #[test]
    fn min_code_is_no_greater_than_any_visit(g in graph_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let min = min_dfs_code(&g).unwrap();
        let priority: Vec<usize> = (0..g.node_count()).map(|_| rng.random_range(0..100)).collect();
        let start = rng.random_range(0..g.node_count());
        let visit = enumerate_dfs_code(&g, start, &NeighborOrder::Priority(priority)).unwrap();
        prop_assert_ne!(support::cmp_codes(&min.0, &visit.0), Ordering::Greater);
        prop_assert_eq!(visit.len(), g.edge_count());
    }

    #[test]
    fn reduce_preserves_code_order(
        g in graph_strategy(),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut visit = || {
            let priority: Vec<usize> = (0..g.node_count()).map(|_| rng.random_range(0..100)).collect();
            let start = rng.random_range(0..g.node_count());
            enumerate_dfs_code(&g, start, &NeighborOrder::Priority(priority)).unwrap()
        };
        let (a, b) = (visit(), visit());
        let ord = support::cmp_codes(&a.0, &b.0);
        prop_assert_eq!(a.cmp(&b), ord);
        prop_assert_eq!(reduce(&a).cmp(&reduce(&b)), ord);
    }
}

#[test]
fn disconnected_graphs_are_rejected_everywhere() {
    let g = LabeledGraph::new(
        "d",
        vec!["A".into(); 3],
        vec![Edge::new(0, 1, "a")],
    )
    .unwrap();
    assert!(min_dfs_code(&g).is_err());
    assert!(is_isomorphic(&g, &g).is_err());
}
