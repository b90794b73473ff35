//! Graph reconstruction from embeddings and its scoring.
//!
//! Pairwise scores are computed for every ordered pair of distinct nodes,
//! min-max normalised into [0, 1], thresholded, and ranked. The ranking is
//! evaluated with precision at k (k a fraction of the node count) and mean
//! average precision over each node's outgoing predictions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::embedding::NodeEmbedding;
use crate::error::{Error, Result};
use crate::graph::{graph_diff, DiGraph, GraphBuilder, GraphDiff};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_FRACTIONS: [f64; 6] = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scorer {
    /// y_i · y_j
    Dot,
    /// source_i · target_j
    AsymDot,
    /// -‖y_i - y_j‖₂
    NegDistance,
}

impl Scorer {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(Scorer::Dot),
            "asym_dot" => Ok(Scorer::AsymDot),
            "neg_distance" => Ok(Scorer::NegDistance),
            other => Err(Error::InvalidArgument(format!("unknown scorer {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scorer::Dot => "dot",
            Scorer::AsymDot => "asym_dot",
            Scorer::NegDistance => "neg_distance",
        }
    }
}

/// Dense n×n scores; the diagonal is never read.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    node_count: usize,
    scores: Vec<f64>,
}

impl ScoreMatrix {
    pub fn from_fn(node_count: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut scores = vec![0.0; node_count * node_count];
        for i in 0..node_count {
            for j in 0..node_count {
                if i != j {
                    scores[i * node_count + j] = f(i, j);
                }
            }
        }
        ScoreMatrix { node_count, scores }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.node_count + j]
    }

    /// Off-diagonal entries in (i, j) row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.node_count;
        (0..n)
            .flat_map(move |i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(move |(i, j)| (i, j, self.scores[i * n + j]))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScoreMatrix::from_fn(self.node_count, |i, j| f(self.get(i, j)))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Raw (unnormalised) pairwise scores.
pub fn pairwise_scores(emb: &NodeEmbedding, scorer: Scorer) -> Result<ScoreMatrix> {
    let n = emb.node_count();
    if n == 0 {
        return Err(Error::InvalidArgument("empty embedding".into()));
    }
    Ok(match (scorer, emb) {
        (Scorer::AsymDot, NodeEmbedding::Symmetric(_)) => {
            return Err(Error::InvalidArgument(
                "asym_dot needs a source/target embedding".into(),
            ))
        }
        (Scorer::AsymDot, NodeEmbedding::Asymmetric(a)) => {
            ScoreMatrix::from_fn(n, |i, j| dot(a.source.row(i), a.target.row(j)))
        }
        (Scorer::Dot, NodeEmbedding::Symmetric(e)) => {
            ScoreMatrix::from_fn(n, |i, j| dot(e.row(i), e.row(j)))
        }
        (Scorer::NegDistance, NodeEmbedding::Symmetric(e)) => ScoreMatrix::from_fn(n, |i, j| {
            -e.row(i)
                .iter()
                .zip(e.row(j))
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt()
        }),
        (_, NodeEmbedding::Asymmetric(_)) => {
            let rows: Vec<Vec<f64>> = (0..n).map(|i| emb.vector(i)).collect();
            match scorer {
                Scorer::Dot => ScoreMatrix::from_fn(n, |i, j| dot(&rows[i], &rows[j])),
                _ => ScoreMatrix::from_fn(n, |i, j| {
                    -rows[i]
                        .iter()
                        .zip(&rows[j])
                        .map(|(x, y)| (x - y).powi(2))
                        .sum::<f64>()
                        .sqrt()
                }),
            }
        }
    })
}

/// Global min-max normalisation of the off-diagonal entries; constant
/// scores map to 0.5.
pub fn normalize_scores(raw: &ScoreMatrix) -> ScoreMatrix {
    let (lo, hi) = raw
        .off_diagonal()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, _, s)| {
            (lo.min(s), hi.max(s))
        });
    if !(hi > lo) {
        return raw.map(|_| 0.5);
    }
    let span = hi - lo;
    raw.map(|s| ((s - lo) / span).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedEdge {
    pub src: usize,
    pub dst: usize,
    pub score: f64,
}

/// Predictions sorted by score descending, ties by (src, dst) ascending.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedPredictions {
    pub edges: Vec<PredictedEdge>,
}

impl RankedPredictions {
    pub fn from_unsorted(mut edges: Vec<PredictedEdge>) -> Self {
        edges.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then(a.src.cmp(&b.src))
                .then(a.dst.cmp(&b.dst))
        });
        RankedPredictions { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Every pair with normalised score ≥ `threshold`, ranked.
pub fn predict_edges(scores: &ScoreMatrix, threshold: f64) -> RankedPredictions {
    let edges = scores
        .off_diagonal()
        .filter(|&(_, _, s)| s >= threshold)
        .map(|(src, dst, score)| PredictedEdge { src, dst, score })
        .collect();
    RankedPredictions::from_unsorted(edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionAt {
    pub fraction: f64,
    pub k: usize,
    pub precision: f64,
}

/// k = ⌈f·|V|⌉ with a small tolerance so that e.g. 0.6·5 gives 3, not 4.
pub fn k_for_fraction(fraction: f64, node_count: usize) -> usize {
    ((fraction * node_count as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Prec@k for each fraction. The denominator stays k even when fewer than
/// k predictions exist.
pub fn precision_at_k(
    preds: &RankedPredictions,
    observed: &DiGraph,
    fractions: &[f64],
) -> Result<Vec<PrecisionAt>> {
    let n = observed.node_count();
    fractions
        .iter()
        .map(|&f| {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArgument(format!("fraction {f} outside (0, 1]")));
            }
            let k = k_for_fraction(f, n);
            let hits = preds
                .edges
                .iter()
                .take(k)
                .filter(|e| observed.has_edge(e.src, e.dst))
                .count();
            let precision = if k == 0 { 0.0 } else { hits as f64 / k as f64 };
            Ok(PrecisionAt {
                fraction: f,
                k,
                precision,
            })
        })
        .collect()
}

/// Mean over nodes with at least one observed out-edge of the average
/// precision of that node's ranked outgoing predictions. Observed edges that
/// were never predicted contribute zero precision.
pub fn mean_average_precision(preds: &RankedPredictions, observed: &DiGraph) -> f64 {
    let n = observed.node_count();
    let mut per_node: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &preds.edges {
        if e.src < n {
            per_node[e.src].push(e.dst);
        }
    }
    let mut sum = 0.0;
    let mut included = 0usize;
    for (i, ranked) in per_node.iter().enumerate() {
        let relevant = observed.out_degree(i);
        if relevant == 0 {
            continue;
        }
        included += 1;
        let mut hits = 0usize;
        let mut precision_sum = 0.0;
        for (rank, &j) in ranked.iter().enumerate() {
            if observed.has_edge(i, j) {
                hits += 1;
                precision_sum += hits as f64 / (rank + 1) as f64;
            }
        }
        sum += precision_sum / relevant as f64;
    }
    if included == 0 {
        0.0
    } else {
        sum / included as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub predicted_edge_count: usize,
    pub scorer: Scorer,
    pub threshold: f64,
    pub prec_at: Vec<PrecisionAt>,
    pub map_score: f64,
    pub diff: GraphDiff,
}

/// Graph over the predicted edges only; nodes without a predicted incident
/// edge are absent.
pub fn predicted_graph(preds: &RankedPredictions, labels: &[String]) -> DiGraph {
    let mut b = GraphBuilder::new();
    let mut edges: Vec<(usize, usize)> = preds.edges.iter().map(|e| (e.src, e.dst)).collect();
    edges.sort_unstable();
    let mut touched: Vec<usize> = edges.iter().flat_map(|&(s, d)| [s, d]).collect();
    touched.sort_unstable();
    touched.dedup();
    for &i in &touched {
        b.add_node(&labels[i]).expect("graph labels are non-empty");
    }
    for (s, d) in edges {
        b.add_edge(&labels[s], &labels[d]).expect("graph labels are non-empty");
    }
    b.build()
}

/// Scores, normalises, thresholds and evaluates a reconstruction of `g`.
pub fn reconstruction_report(
    emb: &NodeEmbedding,
    g: &DiGraph,
    scorer: Scorer,
    threshold: f64,
    fractions: &[f64],
) -> Result<(ReconReport, RankedPredictions)> {
    if emb.node_count() != g.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "embedding has {} nodes, graph has {}",
            emb.node_count(),
            g.node_count()
        )));
    }
    let norm = normalize_scores(&pairwise_scores(emb, scorer)?);
    let preds = predict_edges(&norm, threshold);
    let prec_at = precision_at_k(&preds, g, fractions)?;
    let map_score = mean_average_precision(&preds, g);
    let diff = graph_diff(g, &predicted_graph(&preds, g.labels()));
    Ok((
        ReconReport {
            node_count: g.node_count(),
            edge_count: g.edge_count(),
            predicted_edge_count: preds.len(),
            scorer,
            threshold,
            prec_at,
            map_score,
            diff,
        },
        preds,
    ))
}

/// Set of predicted (src, dst) pairs, handy for membership checks.
pub fn prediction_set(preds: &RankedPredictions) -> HashSet<(usize, usize)> {
    preds.edges.iter().map(|e| (e.src, e.dst)).collect()
}
