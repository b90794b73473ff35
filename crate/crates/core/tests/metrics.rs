use std::collections::BTreeSet;

use proptest::prelude::*;
use restore_core::graph::{gen_synthetic, graph_diff, khop_ego_subgraph, SyntheticKind};
use restore_core::reconstruct::{
    mean_average_precision, precision_at_k, predict_edges, ScoreMatrix, DEFAULT_FRACTIONS,
};
use restore_core::semantic::{euclidean_distance, similarity_mean_distance, EmbeddingSet, LabelMapper, LabeledEmbedding, SimilarityPair};
use restore_core::{DiGraph, EmbeddingMatrix, NodeEmbedding};

/// Every ordered pair scored, filtered and ranked by plain insertion sort.
fn brute_ranking(scores: &[Vec<f64>], thr: f64) -> Vec<(usize, usize)> {
    let n = scores.len();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || scores[i][j] < thr {
                continue;
            }
            let before = |a: &(usize, usize)| {
                let (sa, sb) = (scores[a.0][a.1], scores[i][j]);
                sa > sb || (sa == sb && *a < (i, j))
            };
            let pos = out.iter().take_while(|a| before(a)).count();
            out.insert(pos, (i, j));
        }
    }
    out
}

fn brute_prec(ranked: &[(usize, usize)], g: &DiGraph, f: f64) -> f64 {
    let n = g.node_count();
    let mut k = 0;
    while (k as f64) < f * n as f64 - 1e-9 {
        k += 1;
    }
    let mut hits = 0;
    for e in ranked.iter().take(k) {
        if g.has_edge(e.0, e.1) {
            hits += 1;
        }
    }
    if k == 0 {
        0.0
    } else {
        hits as f64 / k as f64
    }
}

fn brute_map(ranked: &[(usize, usize)], g: &DiGraph) -> f64 {
    let mut total = 0.0;
    let mut count = 0;
    for i in 0..g.node_count() {
        let rel = g.edges().filter(|e| e.0 == i).count();
        if rel == 0 {
            continue;
        }
        count += 1;
        let mut seen = 0;
        let mut hits = 0;
        let mut ap = 0.0;
        for e in ranked.iter().filter(|e| e.0 == i) {
            seen += 1;
            if g.has_edge(e.0, e.1) {
                hits += 1;
                ap += hits as f64 / seen as f64;
            }
        }
        total += ap / rel as f64;
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metrics_equal_brute_force(
        n in 1usize..=20,
        seed in any::<u64>(),
        levels in prop::collection::vec(0u8..6, 400),
        thr_level in 0u8..6,
    ) {
        let g = gen_synthetic(SyntheticKind::Erdos { p: 0.2 }, n, seed).unwrap();
        // few distinct levels force plenty of ties
        let scores: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| levels[i * 20 + j] as f64 / 5.0).collect())
            .collect();
        let thr = thr_level as f64 / 5.0;
        let m = ScoreMatrix::from_fn(n, |i, j| scores[i][j]);
        let preds = predict_edges(&m, thr);
        let ranked = brute_ranking(&scores, thr);
        let got: Vec<(usize, usize)> = preds.edges.iter().map(|e| (e.src, e.dst)).collect();
        prop_assert_eq!(&got, &ranked);
        for p in precision_at_k(&preds, &g, &DEFAULT_FRACTIONS).unwrap() {
            prop_assert_eq!(p.precision, brute_prec(&ranked, &g, p.fraction));
        }
        prop_assert_eq!(mean_average_precision(&preds, &g), brute_map(&ranked, &g));
    }

    #[test]
    fn ego_subgraphs_grow_with_hops_and_are_induced(seed in 0u64..500, c in 0usize..60) {
        let g = gen_synthetic(SyntheticKind::ScaleFree { m: 2 }, 60, seed).unwrap();
        let center = format!("n{c}");
        let mut prev: BTreeSet<String> = BTreeSet::new();
        for h in 1..5 {
            let s = khop_ego_subgraph(&g, &center, h).unwrap();
            prop_assert!(s.check_invariants());
            let labels: BTreeSet<String> = s.labels().iter().cloned().collect();
            prop_assert!(prev.is_subset(&labels));
            for (a, b) in g.labelled_edges() {
                let inside = labels.contains(a) && labels.contains(b);
                let present = s.index_of(a).zip(s.index_of(b)).is_some_and(|(i, j)| s.has_edge(i, j));
                prop_assert_eq!(inside, present);
            }
            prev = labels;
        }
    }

    #[test]
    fn diff_is_antisymmetric(s1 in 0u64..1000, s2 in 0u64..1000, n in 1usize..15) {
        let a = gen_synthetic(SyntheticKind::Erdos { p: 0.3 }, n, s1).unwrap();
        let b = gen_synthetic(SyntheticKind::Erdos { p: 0.3 }, n + 2, s2).unwrap();
        let ab = graph_diff(&a, &b);
        let ba = graph_diff(&b, &a);
        prop_assert_eq!(&ab.added_edge_list, &ba.missing_edge_list);
        prop_assert_eq!(&ab.added_node_list, &ba.missing_node_list);
        prop_assert_eq!(ab.added_edges, ba.missing_edges);
        prop_assert!(graph_diff(&a, &a).is_empty());
    }

    #[test]
    fn euclidean_axioms(
        x in prop::collection::vec(-10.0f64..10.0, 6),
        y in prop::collection::vec(-10.0f64..10.0, 6),
        z in prop::collection::vec(-10.0f64..10.0, 6),
    ) {
        let d = |a: &[f64], b: &[f64]| euclidean_distance(a, b).unwrap();
        prop_assert!(d(&x, &y) >= 0.0);
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
    }

    #[test]
    fn similarity_mean_is_homogeneous(vals in prop::collection::vec(-1.0f64..1.0, 12), c in 0.1f64..10.0) {
        let labels: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
        let e = EmbeddingMatrix::from_vec(4, 3, vals, "t").unwrap();
        let set = EmbeddingSet::single(LabeledEmbedding::new("a", labels, NodeEmbedding::from(e)).unwrap());
        let pairs: Vec<SimilarityPair> = [("a", "b"), ("c", "d"), ("a", "d")]
            .iter()
            .map(|(x, y)| SimilarityPair { word_a: x.to_string(), word_b: y.to_string(), human_score: 1.0 })
            .collect();
        let id = LabelMapper::identity();
        let base = similarity_mean_distance("t", &pairs, &set, &id).unwrap().mean_distance;
        let scaled = similarity_mean_distance("t", &pairs, &set.scaled(c), &id).unwrap().mean_distance;
        prop_assert!((scaled - c * base).abs() <= 1e-12 * (1.0 + c * base));
    }
}
