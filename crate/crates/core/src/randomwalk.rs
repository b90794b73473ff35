//! Node2Vec: second-order biased random walks over out-edges, fed to a
//! skip-gram model trained with negative sampling.

use rand::Rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::embedding::{clamp_dim, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::graph::DiGraph;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<usize>>,
    pub walk_length: usize,
    pub walks_per_node: usize,
}

impl WalkCorpus {
    pub fn token_count(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgnsParams {
    pub context_size: usize,
    pub negatives_per_positive: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SgnsParams {
    fn default() -> Self {
        SgnsParams {
            context_size: 10,
            negatives_per_positive: 5,
            learning_rate: 0.025,
            epochs: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node2VecConfig {
    pub walk_length: usize,
    pub walks_per_node: usize,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub sgns: SgnsParams,
}

impl Default for Node2VecConfig {
    fn default() -> Self {
        Node2VecConfig {
            walk_length: 80,
            walks_per_node: 10,
            p: 1.0,
            q: 1.0,
            sgns: SgnsParams::default(),
        }
    }
}

/// Walks of up to `walk_length` nodes from every node, `walks_per_node`
/// rounds. The step from `cur` (having come from `prev`) to an out-neighbour
/// `x` has weight 1/p when x = prev, 1 when x is adjacent to prev and 1/q
/// otherwise. Walks stop early at nodes without out-edges.
///
/// Each walk draws from its own generator seeded by (seed, round, start), so
/// the corpus does not depend on how starts are partitioned across workers.
pub fn generate_walks(
    g: &DiGraph,
    walk_length: usize,
    walks_per_node: usize,
    p: f64,
    q: f64,
    seed: u64,
) -> Result<WalkCorpus> {
    if walk_length == 0 {
        return Err(Error::InvalidArgument("walk_length must be >= 1".into()));
    }
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::InvalidArgument(format!("p and q must be > 0 (p={p}, q={q})")));
    }
    let n = g.node_count();
    let uniform = p == 1.0 && q == 1.0;
    let mut walks = Vec::with_capacity(n * walks_per_node);
    let mut weights = Vec::new();
    for round in 0..walks_per_node {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seed::rng(seed::derive_seed_u64(seed, &[round as u64])));
        for &start in &order {
            let mut rng = seed::rng(seed::derive_seed_u64(seed, &[round as u64, start as u64, 1]));
            let mut walk = Vec::with_capacity(walk_length);
            walk.push(start);
            while walk.len() < walk_length {
                let cur = *walk.last().expect("walk is non-empty");
                let succ = g.out_neighbors(cur);
                if succ.is_empty() {
                    break;
                }
                let next = if uniform || walk.len() == 1 {
                    succ[rng.random_range(0..succ.len())]
                } else {
                    let prev = walk[walk.len() - 2];
                    weights.clear();
                    weights.extend(succ.iter().map(|&x| {
                        if x == prev {
                            1.0 / p
                        } else if g.has_edge(prev, x) || g.has_edge(x, prev) {
                            1.0
                        } else {
                            1.0 / q
                        }
                    }));
                    let total: f64 = weights.iter().sum();
                    let mut r = rng.random::<f64>() * total;
                    let mut pick = succ[succ.len() - 1];
                    for (&x, &w) in succ.iter().zip(&weights) {
                        if r < w {
                            pick = x;
                            break;
                        }
                        r -= w;
                    }
                    pick
                };
                walk.push(next);
            }
            walks.push(walk);
        }
    }
    Ok(WalkCorpus {
        walks,
        walk_length,
        walks_per_node,
    })
}

/// All (center, context) pairs within `window` positions of each other.
pub fn context_pairs(corpus: &WalkCorpus, window: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for walk in &corpus.walks {
        for (i, &c) in walk.iter().enumerate() {
            let lo = i.saturating_sub(window);
            let hi = (i + window + 1).min(walk.len());
            for (j, &o) in walk.iter().enumerate().take(hi).skip(lo) {
                if j != i {
                    pairs.push((c, o));
                }
            }
        }
    }
    pairs
}

/// Unigram^¾ sampler over corpus token counts.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn from_corpus(corpus: &WalkCorpus, node_count: usize) -> Self {
        let mut counts = vec![0usize; node_count];
        for walk in &corpus.walks {
            for &t in walk {
                counts[t] += 1;
            }
        }
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NegativeSampler { cumulative }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap_or(&0.0);
        let r = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-sample loss -log σ(u_ctx·v) - Σ log σ(-u_neg·v) and its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sgns_sample_gradient(v: &[f64], u_ctx: &[f64], u_negs: &[&[f64]]) -> SgnsGradient {
    let s_pos = sigmoid(dot(u_ctx, v));
    let mut loss = -(s_pos.ln());
    // d/dv of -log σ(x) with x = u·v is (σ(x) - 1) u
    let g_pos = s_pos - 1.0;
    let mut center: Vec<f64> = u_ctx.iter().map(|u| g_pos * u).collect();
    let context = v.iter().map(|x| g_pos * x).collect();
    let mut negatives = Vec::with_capacity(u_negs.len());
    for u in u_negs {
        let s = sigmoid(dot(u, v));
        loss -= (1.0 - s).ln();
        center.iter_mut().zip(u.iter()).for_each(|(c, x)| *c += s * x);
        negatives.push(v.iter().map(|x| s * x).collect());
    }
    SgnsGradient {
        loss,
        center,
        context,
        negatives,
    }
}

/// Input and output vectors of a skip-gram model.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsModel {
    pub input: EmbeddingMatrix,
    pub output: EmbeddingMatrix,
}

impl SgnsModel {
    /// Inputs uniform in (-0.5/d, 0.5/d), outputs zero.
    pub fn new(node_count: usize, dim: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut input = EmbeddingMatrix::zeros(node_count, dim, "node2vec");
        for i in 0..node_count {
            for x in input.row_mut(i) {
                *x = (rng.random::<f64>() - 0.5) / dim as f64;
            }
        }
        SgnsModel {
            input,
            output: EmbeddingMatrix::zeros(node_count, dim, "node2vec"),
        }
    }

    /// One SGD step on a single (center, context, negatives) sample;
    /// returns the sample loss before the update. Negatives equal to the
    /// context node are skipped.
    pub fn step(&mut self, center: usize, context: usize, negatives: &[usize], lr: f64) -> f64 {
        // all scores and gradients use the pre-update vectors
        let mut coef = Vec::with_capacity(negatives.len() + 1);
        let v = self.input.row(center).to_vec();
        let s_pos = sigmoid(dot(self.output.row(context), &v));
        let mut loss = -(s_pos.ln());
        coef.push((context, s_pos - 1.0));
        for &k in negatives.iter().filter(|&&k| k != context) {
            let s = sigmoid(dot(self.output.row(k), &v));
            loss -= (1.0 - s).ln();
            coef.push((k, s));
        }
        let mut g_center = vec![0.0; v.len()];
        for &(k, c) in &coef {
            for (g, u) in g_center.iter_mut().zip(self.output.row(k)) {
                *g += c * u;
            }
        }
        for &(k, c) in &coef {
            for (u, x) in self.output.row_mut(k).iter_mut().zip(&v) {
                *u -= lr * c * x;
            }
        }
        for (x, g) in self.input.row_mut(center).iter_mut().zip(&g_center) {
            *x -= lr * g;
        }
        loss
    }

    /// One pass over `pairs` with fixed negatives; returns the summed loss.
    pub fn train_epoch(
        &mut self,
        pairs: &[(usize, usize)],
        negatives: &[Vec<usize>],
        lr: f64,
    ) -> f64 {
        pairs
            .iter()
            .zip(negatives)
            .map(|(&(c, o), negs)| self.step(c, o, negs, lr))
            .sum()
    }

    /// Summed loss over `pairs` with the given negatives, without updating.
    pub fn objective(&self, pairs: &[(usize, usize)], negatives: &[Vec<usize>]) -> f64 {
        pairs
            .iter()
            .zip(negatives)
            .map(|(&(c, o), negs)| {
                let u_negs: Vec<&[f64]> = negs
                    .iter()
                    .filter(|&&k| k != o)
                    .map(|&k| self.output.row(k))
                    .collect();
                sgns_sample_gradient(self.input.row(c), self.output.row(o), &u_negs).loss
            })
            .sum()
    }
}

/// Trains skip-gram with negative sampling and returns the input vectors.
/// The learning rate decays linearly per epoch down to 1e-4 of its start.
pub fn train_sgns(
    corpus: &WalkCorpus,
    d: usize,
    params: &SgnsParams,
    node_count: usize,
) -> Result<EmbeddingMatrix> {
    if corpus.walks.is_empty() || corpus.token_count() == 0 {
        return Err(Error::InvalidArgument("empty walk corpus".into()));
    }
    if d == 0 || node_count == 0 {
        return Err(Error::InvalidArgument("dimension and node count must be >= 1".into()));
    }
    if corpus.walks.iter().flatten().any(|&t| t >= node_count) {
        return Err(Error::InvalidArgument("walk references a node outside the graph".into()));
    }
    let mut model = SgnsModel::new(node_count, d, seed::derive_seed_u64(params.seed, &[0]));
    let mut pairs = context_pairs(corpus, params.context_size);
    if pairs.is_empty() {
        return Ok(model.input);
    }
    let sampler = NegativeSampler::from_corpus(corpus, node_count);
    let mut rng = seed::rng(seed::derive_seed_u64(params.seed, &[1]));
    let mut negs = vec![0usize; params.negatives_per_positive];
    for epoch in 0..params.epochs {
        let progress = epoch as f64 / params.epochs as f64;
        let lr = params.learning_rate * (1.0 - progress).max(1e-4);
        pairs.shuffle(&mut rng);
        for &(c, o) in &pairs {
            for k in negs.iter_mut() {
                *k = sampler.sample(&mut rng);
            }
            model.step(c, o, &negs, lr);
        }
    }
    Ok(model.input)
}

/// Walks followed by skip-gram training; `d` is clamped to the graph size.
pub fn node2vec_embed(g: &DiGraph, d: usize, config: &Node2VecConfig) -> Result<EmbeddingMatrix> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let dim = clamp_dim(d, g.node_count());
    let corpus = generate_walks(
        g,
        config.walk_length,
        config.walks_per_node.max(1),
        config.p,
        config.q,
        seed::derive_seed_u64(config.sgns.seed, &[0xa11c]),
    )?;
    train_sgns(&corpus, dim, &config.sgns, g.node_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, gen_synthetic, SyntheticKind};

    #[test]
    fn dead_end_truncates() {
        let g = build_graph([("a", "b")]).unwrap();
        let c = generate_walks(&g, 5, 1, 1.0, 1.0, 3).unwrap();
        assert!(c.walks.contains(&vec![0, 1]));
        assert!(c.walks.contains(&vec![1]));
    }

    #[test]
    fn two_cycle_alternates() {
        let g = build_graph([("a", "b"), ("b", "a")]).unwrap();
        let c = generate_walks(&g, 4, 1, 1.0, 1.0, 9).unwrap();
        assert!(c.walks.contains(&vec![0, 1, 0, 1]));
    }

    #[test]
    fn star_leaves_are_uniform() {
        let g = build_graph([("c", "x"), ("c", "y"), ("c", "z")]).unwrap();
        let c = generate_walks(&g, 2, 10_000, 1.0, 1.0, 5).unwrap();
        let mut counts = [0usize; 4];
        let mut total = 0;
        for w in c.walks.iter().filter(|w| w[0] == 0) {
            counts[w[1]] += 1;
            total += 1;
        }
        assert_eq!(total, 10_000);
        for leaf in 1..4 {
            let f = counts[leaf] as f64 / total as f64;
            assert!((f - 1.0 / 3.0).abs() < 0.05, "leaf {leaf}: {f}");
        }
    }

    #[test]
    fn return_parameter_biases_backtracking() {
        // from b having come from a, the choices are a (1/p) and c (1/q)
        let g = build_graph([("a", "b"), ("b", "a"), ("b", "c")]).unwrap();
        let c = generate_walks(&g, 3, 4000, 0.25, 4.0, 2).unwrap();
        let back = c.walks.iter().filter(|w| w.len() == 3 && w[0] == 0 && w[2] == 0).count();
        let from_a = c.walks.iter().filter(|w| w[0] == 0).count();
        // weights 4 vs 0.25 give 16/17 ≈ 0.94 for returning
        let f = back as f64 / from_a as f64;
        assert!((f - 16.0 / 17.0).abs() < 0.03, "{f}");
    }

    #[test]
    fn walks_respect_edges_and_seed() {
        let g = gen_synthetic(SyntheticKind::Erdos { p: 0.2 }, 20, 4).unwrap();
        let a = generate_walks(&g, 15, 3, 0.5, 2.0, 11).unwrap();
        let b = generate_walks(&g, 15, 3, 0.5, 2.0, 11).unwrap();
        let c = generate_walks(&g, 15, 3, 0.5, 2.0, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for w in &a.walks {
            assert!(w.windows(2).all(|p| g.has_edge(p[0], p[1])));
        }
    }

    #[test]
    fn bad_walk_params() {
        let g = build_graph([("a", "b")]).unwrap();
        assert!(generate_walks(&g, 0, 1, 1.0, 1.0, 0).is_err());
        assert!(generate_walks(&g, 3, 1, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn single_node_corpus_trains_vacuously() {
        let corpus = WalkCorpus {
            walks: vec![vec![0]],
            walk_length: 5,
            walks_per_node: 1,
        };
        let e = train_sgns(&corpus, 3, &SgnsParams::default(), 1).unwrap();
        assert_eq!((e.node_count(), e.dim()), (1, 3));
        assert!(e.data().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn empty_corpus_errors() {
        let corpus = WalkCorpus {
            walks: vec![],
            walk_length: 5,
            walks_per_node: 1,
        };
        assert!(train_sgns(&corpus, 3, &SgnsParams::default(), 1).is_err());
    }

    #[test]
    fn cooccurrence_drives_similarity() {
        let mut walks = Vec::new();
        for _ in 0..50 {
            walks.push(vec![0, 1, 0, 1, 0, 1]);
            walks.push(vec![2, 3, 2, 3, 2, 3]);
        }
        let corpus = WalkCorpus {
            walks,
            walk_length: 6,
            walks_per_node: 1,
        };
        let params = SgnsParams {
            context_size: 2,
            epochs: 20,
            seed: 4,
            ..SgnsParams::default()
        };
        let e = train_sgns(&corpus, 8, &params, 4).unwrap();
        let cos = |i: usize, j: usize| {
            let (a, b) = (e.row(i), e.row(j));
            dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt())
        };
        assert!(cos(0, 1) > cos(0, 2), "{} vs {}", cos(0, 1), cos(0, 2));
    }

    #[test]
    fn default_config_matches_published_settings() {
        let c = Node2VecConfig::default();
        assert_eq!(
            (c.walk_length, c.sgns.context_size, c.p, c.q, c.sgns.epochs),
            (80, 10, 1.0, 1.0, 50)
        );
    }

    #[test]
    fn node2vec_clamps_dimension() {
        let g = build_graph([("a", "b"), ("b", "c")]).unwrap();
        let cfg = Node2VecConfig {
            walks_per_node: 2,
            sgns: SgnsParams {
                epochs: 2,
                ..SgnsParams::default()
            },
            ..Node2VecConfig::default()
        };
        assert_eq!(node2vec_embed(&g, 64, &cfg).unwrap().dim(), 2);
    }
}
