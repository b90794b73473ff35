//! SDNE: a mirrored sigmoid autoencoder over adjacency rows whose bottleneck
//! is the node embedding. The loss couples
//!
//! * second-order proximity, Σᵢ ‖(x̂ᵢ − xᵢ) ⊙ bᵢ‖² with bᵢⱼ = β for observed
//!   edges and 1 elsewhere,
//! * first-order proximity, α Σ_{(i,j)∈E} ‖yᵢ − yⱼ‖²,
//! * weight regularisation, l2 Σ‖W‖² + l1 Σ|W| (biases are not penalised).
//!
//! Forward and backward passes are written out by hand; [`gradient_check`]
//! compares them against central differences.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{clamp_dim, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::graph::DiGraph;
use crate::linalg::DenseMatrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdneParams {
    pub alpha: f64,
    pub beta_penalty: f64,
    pub l1_reg: f64,
    pub l2_reg: f64,
    /// Momentum coefficient.
    pub rho: f64,
    /// Learning rate.
    pub xeta: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for SdneParams {
    fn default() -> Self {
        SdneParams {
            alpha: 1e-5,
            beta_penalty: 5.0,
            l1_reg: 1e-6,
            l2_reg: 1e-6,
            rho: 0.3,
            xeta: 0.01,
            batch_size: 100,
            epochs: 50,
        }
    }
}

impl SdneParams {
    fn validate(&self) -> Result<()> {
        let reals = [
            self.alpha,
            self.beta_penalty,
            self.l1_reg,
            self.l2_reg,
            self.rho,
            self.xeta,
        ];
        if reals.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || self.batch_size == 0 {
            return Err(Error::InvalidArgument(format!("invalid SDNE parameters {self:?}")));
        }
        Ok(())
    }
}

/// Hidden widths for a requested bottleneck `d`: (50, d) up to d = 15,
/// (2d, d) beyond.
pub fn hidden_schedule(d: usize) -> Vec<usize> {
    let d = d.max(1);
    if d <= 15 {
        vec![50, d]
    } else {
        vec![2 * d, d]
    }
}

/// Encoder/decoder stack. `weights[l]` maps layer l to l + 1 and is stored
/// (out × in).
#[derive(Debug, Clone, PartialEq)]
pub struct MlpStack {
    layer_dims: Vec<usize>,
    pub weights: Vec<DenseMatrix>,
    pub biases: Vec<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl MlpStack {
    fn check_dims(layer_dims: &[usize]) -> Result<()> {
        let mirrored = layer_dims.iter().eq(layer_dims.iter().rev());
        let odd = layer_dims.len() >= 3 && layer_dims.len() % 2 == 1;
        // the outer width may be zero for the empty graph
        if !odd || !mirrored || layer_dims[1..layer_dims.len() - 1].contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "layer dims {layer_dims:?} must be an odd-length palindrome of positive hidden widths"
            )));
        }
        Ok(())
    }

    pub fn zeros(layer_dims: &[usize]) -> Result<Self> {
        Self::check_dims(layer_dims)?;
        let weights = layer_dims
            .windows(2)
            .map(|w| DenseMatrix::zeros(w[1], w[0]))
            .collect();
        let biases = layer_dims[1..].iter().map(|&w| vec![0.0; w]).collect();
        Ok(MlpStack {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
        })
    }

    /// Weights uniform in ±1/√fan_in, biases zero.
    pub fn random(layer_dims: &[usize], seed: u64) -> Result<Self> {
        let mut stack = Self::zeros(layer_dims)?;
        let mut rng = seed::rng(seed);
        for w in &mut stack.weights {
            let bound = 1.0 / (w.cols() as f64).sqrt();
            for r in 0..w.rows() {
                for x in w.row_mut(r) {
                    *x = rng.random_range(-bound..bound);
                }
            }
        }
        Ok(stack)
    }

    /// Layer widths [n, hidden.., d, ..hidden, n] for an n-node graph.
    pub fn dims_for(node_count: usize, d: usize) -> Vec<usize> {
        let hidden = hidden_schedule(d);
        let mut dims = vec![node_count];
        dims.extend(&hidden);
        dims.extend(hidden.iter().rev().skip(1));
        dims.push(node_count);
        dims
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    /// Index of the bottleneck in the activation list returned by `forward`.
    pub fn bottleneck(&self) -> usize {
        self.layer_dims.len() / 2
    }

    pub fn embedding_dim(&self) -> usize {
        self.layer_dims[self.bottleneck()]
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.rows() * w.cols()).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Activations of every layer, starting with the inputs themselves.
    pub fn forward(&self, inputs: &DenseMatrix) -> Vec<DenseMatrix> {
        let mut acts = vec![inputs.clone()];
        let mut nz = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            let prev = acts.last().expect("inputs present");
            let mut next = DenseMatrix::zeros(prev.rows(), w.rows());
            for r in 0..prev.rows() {
                let x = prev.row(r);
                let sparse = sparse_support(x, &mut nz);
                for (o, out) in next.row_mut(r).iter_mut().enumerate() {
                    let wr = w.row(o);
                    let z = if sparse {
                        nz.iter().map(|&k| wr[k] * x[k]).sum::<f64>()
                    } else {
                        dot(wr, x)
                    };
                    *out = sigmoid(z + b[o]);
                }
            }
            acts.push(next);
        }
        acts
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(DenseMatrix::is_finite)
            && self.biases.iter().flatten().all(|x| x.is_finite())
    }
}

/// Collects the nonzero positions of `x` into `nz`; true when few enough
/// that indexing them beats a dense pass (adjacency rows usually are).
fn sparse_support(x: &[f64], nz: &mut Vec<usize>) -> bool {
    nz.clear();
    nz.extend(x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, _)| k));
    nz.len() * 4 < x.len()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// b_ij = beta_penalty where W_ij ≠ 0, else 1.
pub fn penalty_matrix(adjacency: &DenseMatrix, beta_penalty: f64) -> DenseMatrix {
    let mut b = DenseMatrix::zeros(adjacency.rows(), adjacency.cols());
    for r in 0..adjacency.rows() {
        for (bv, &w) in b.row_mut(r).iter_mut().zip(adjacency.row(r)) {
            *bv = if w != 0.0 { beta_penalty } else { 1.0 };
        }
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub total: f64,
    pub second_order: f64,
    pub first_order: f64,
    pub reg: f64,
}

/// Gradients with the same shapes as the stack's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<DenseMatrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(stack: &MlpStack) -> Self {
        Gradients {
            weights: stack
                .weights
                .iter()
                .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: stack.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .flat_map(|w| w.data().iter().copied())
            .chain(self.biases.iter().flatten().copied())
    }
}

fn regularisation(stack: &MlpStack, params: &SdneParams) -> f64 {
    let (mut sq, mut abs) = (0.0, 0.0);
    for x in stack.weights.iter().flat_map(|w| w.data()) {
        sq += x * x;
        abs += x.abs();
    }
    params.l2_reg * sq + params.l1_reg * abs
}

fn check_stack(g: &DiGraph, stack: &MlpStack) -> Result<()> {
    if stack.input_dim() != g.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "stack input width {} but graph has {} nodes",
            stack.input_dim(),
            g.node_count()
        )));
    }
    Ok(())
}

/// Loss and gradients over a subset of rows.
///
/// `nodes` are forwarded; rows flagged in `recon` contribute the
/// second-order term; `edges` index into `nodes` and carry the first-order
/// term. Regularisation is added when `with_reg` is set.
struct Batch<'a> {
    adjacency: &'a DenseMatrix,
    nodes: Vec<usize>,
    recon: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

impl Batch<'_> {
    fn inputs(&self) -> DenseMatrix {
        let n = self.adjacency.cols();
        let mut x = DenseMatrix::zeros(self.nodes.len(), n);
        for (r, &node) in self.nodes.iter().enumerate() {
            x.row_mut(r).copy_from_slice(self.adjacency.row(node));
        }
        x
    }

    fn loss_and_grad(
        &self,
        stack: &MlpStack,
        params: &SdneParams,
        with_reg: bool,
        want_grad: bool,
    ) -> (LossParts, Option<Gradients>) {
        let x = self.inputs();
        let acts = stack.forward(&x);
        let out = acts.last().expect("output layer");
        let bn = stack.bottleneck();
        let y = &acts[bn];
        let beta = params.beta_penalty;

        let mut second_order = 0.0;
        let mut delta = DenseMatrix::zeros(out.rows(), out.cols());
        for r in 0..out.rows() {
            if !self.recon[r] {
                continue;
            }
            let (xr, xh) = (x.row(r), out.row(r));
            for (c, d) in delta.row_mut(r).iter_mut().enumerate() {
                let b = if xr[c] != 0.0 { beta } else { 1.0 };
                let diff = xh[c] - xr[c];
                second_order += (diff * b).powi(2);
                // through the output sigmoid
                *d = 2.0 * diff * b * b * xh[c] * (1.0 - xh[c]);
            }
        }

        let mut first_order = 0.0;
        let mut y_grad = DenseMatrix::zeros(y.rows(), y.cols());
        for &(i, j) in &self.edges {
            for c in 0..y.cols() {
                let diff = y[(i, c)] - y[(j, c)];
                first_order += diff * diff;
                y_grad[(i, c)] += 2.0 * params.alpha * diff;
                y_grad[(j, c)] -= 2.0 * params.alpha * diff;
            }
        }
        first_order *= params.alpha;

        let reg = if with_reg { regularisation(stack, params) } else { 0.0 };
        let parts = LossParts {
            total: second_order + first_order + reg,
            second_order,
            first_order,
            reg,
        };
        if !want_grad {
            return (parts, None);
        }

        let mut grads = Gradients::zeros_like(stack);
        // delta holds dL/dz for layer `layer + 1`
        for layer in (0..stack.weights.len()).rev() {
            let a_prev = &acts[layer];
            let w = &stack.weights[layer];
            let gw = &mut grads.weights[layer];
            let gb = &mut grads.biases[layer];
            let mut nz = Vec::new();
            for r in 0..delta.rows() {
                let dr = delta.row(r);
                let ar = a_prev.row(r);
                let sparse = sparse_support(ar, &mut nz);
                for (o, &d) in dr.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    let gr = gw.row_mut(o);
                    if sparse {
                        for &k in &nz {
                            gr[k] += d * ar[k];
                        }
                    } else {
                        for (g, &a) in gr.iter_mut().zip(ar) {
                            *g += d * a;
                        }
                    }
                }
            }
            if layer == 0 {
                break;
            }
            let mut prev_delta = DenseMatrix::zeros(a_prev.rows(), a_prev.cols());
            for r in 0..delta.rows() {
                let pd = prev_delta.row_mut(r);
                for (o, &d) in delta.row(r).iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (p, &wv) in pd.iter_mut().zip(w.row(o)) {
                        *p += d * wv;
                    }
                }
                if layer == bn {
                    for (p, &g) in pd.iter_mut().zip(y_grad.row(r)) {
                        *p += g;
                    }
                }
                for (p, &a) in pd.iter_mut().zip(a_prev.row(r)) {
                    *p *= a * (1.0 - a);
                }
            }
            delta = prev_delta;
        }
        if with_reg {
            for (gw, w) in grads.weights.iter_mut().zip(&stack.weights) {
                for r in 0..w.rows() {
                    for (g, &x) in gw.row_mut(r).iter_mut().zip(w.row(r)) {
                        let sign = if x > 0.0 {
                            1.0
                        } else if x < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                        *g += 2.0 * params.l2_reg * x + params.l1_reg * sign;
                    }
                }
            }
        }
        (parts, Some(grads))
    }
}

fn full_batch<'a>(g: &DiGraph, adjacency: &'a DenseMatrix) -> Batch<'a> {
    Batch {
        adjacency,
        nodes: (0..g.node_count()).collect(),
        recon: vec![true; g.node_count()],
        edges: g.edges().collect(),
    }
}

/// Full-graph loss decomposition for a given stack.
pub fn sdne_loss(g: &DiGraph, stack: &MlpStack, params: &SdneParams) -> Result<LossParts> {
    check_stack(g, stack)?;
    let adj = DenseMatrix::adjacency(g);
    Ok(full_batch(g, &adj).loss_and_grad(stack, params, true, false).0)
}

/// Full-graph loss and its backpropagated gradient.
pub fn sdne_gradients(
    g: &DiGraph,
    stack: &MlpStack,
    params: &SdneParams,
) -> Result<(LossParts, Gradients)> {
    check_stack(g, stack)?;
    let adj = DenseMatrix::adjacency(g);
    let (parts, grads) = full_batch(g, &adj).loss_and_grad(stack, params, true, true);
    Ok((parts, grads.expect("gradients requested")))
}

/// Central-difference gradient of the full-graph loss.
pub fn numeric_gradients(
    g: &DiGraph,
    stack: &MlpStack,
    params: &SdneParams,
    h: f64,
) -> Result<Gradients> {
    check_stack(g, stack)?;
    let adj = DenseMatrix::adjacency(g);
    let batch = full_batch(g, &adj);
    let loss = |s: &MlpStack| batch.loss_and_grad(s, params, true, false).0.total;
    let mut probe = stack.clone();
    let mut grads = Gradients::zeros_like(stack);
    for l in 0..stack.weights.len() {
        for idx in 0..stack.weights[l].data().len() {
            let (r, c) = (idx / stack.weights[l].cols(), idx % stack.weights[l].cols());
            let orig = stack.weights[l][(r, c)];
            probe.weights[l][(r, c)] = orig + h;
            let up = loss(&probe);
            probe.weights[l][(r, c)] = orig - h;
            let down = loss(&probe);
            probe.weights[l][(r, c)] = orig;
            grads.weights[l][(r, c)] = (up - down) / (2.0 * h);
        }
        for o in 0..stack.biases[l].len() {
            let orig = stack.biases[l][o];
            probe.biases[l][o] = orig + h;
            let up = loss(&probe);
            probe.biases[l][o] = orig - h;
            let down = loss(&probe);
            probe.biases[l][o] = orig;
            grads.biases[l][o] = (up - down) / (2.0 * h);
        }
    }
    Ok(grads)
}

/// Floor on the denominator so gradients that are both essentially zero
/// compare by absolute difference.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

/// max |a - b| / max(|a|, |b|, 1e-6) over all parameters.
pub fn max_relative_error(analytic: &Gradients, numeric: &Gradients) -> f64 {
    analytic
        .flat()
        .zip(numeric.flat())
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(RELATIVE_ERROR_FLOOR))
        .fold(0.0, f64::max)
}

/// Backprop vs central differences (h = 1e-5) for every parameter.
pub fn gradient_check(stack: &MlpStack, g: &DiGraph, params: &SdneParams) -> Result<f64> {
    let (_, analytic) = sdne_gradients(g, stack, params)?;
    let numeric = numeric_gradients(g, stack, params, 1e-5)?;
    Ok(max_relative_error(&analytic, &numeric))
}

struct Momentum {
    weights: Vec<DenseMatrix>,
    biases: Vec<Vec<f64>>,
}

impl Momentum {
    fn apply(&mut self, stack: &mut MlpStack, grads: &Gradients, params: &SdneParams) {
        for ((w, v), gw) in stack.weights.iter_mut().zip(&mut self.weights).zip(&grads.weights) {
            for r in 0..w.rows() {
                let (wr, vr, gr) = (w.row_mut(r), v.row_mut(r), gw.row(r));
                for ((x, vel), g) in wr.iter_mut().zip(vr.iter_mut()).zip(gr) {
                    *vel = params.rho * *vel - params.xeta * g;
                    *x += *vel;
                }
            }
        }
        for ((b, v), gb) in stack.biases.iter_mut().zip(&mut self.biases).zip(&grads.biases) {
            for ((x, vel), g) in b.iter_mut().zip(v.iter_mut()).zip(gb) {
                *vel = params.rho * *vel - params.xeta * g;
                *x += *vel;
            }
        }
    }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct SdneTrained {
    pub embedding: EmbeddingMatrix,
    pub stack: MlpStack,
    /// Full-graph loss before training followed by the loss after each epoch.
    pub loss_history: Vec<LossParts>,
}

/// Mini-batch training from a seeded initial stack; see [`sdne_train`].
pub fn sdne_train_detailed(
    g: &DiGraph,
    d: usize,
    params: &SdneParams,
    seed: u64,
) -> Result<SdneTrained> {
    train(g, d, params, seed, true)
}

fn train(g: &DiGraph, d: usize, params: &SdneParams, seed: u64, record: bool) -> Result<SdneTrained> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    params.validate()?;
    let n = g.node_count();
    let dim = clamp_dim(d, n);
    let dims = MlpStack::dims_for(n, dim);
    let mut stack = MlpStack::random(&dims, seed::derive_seed_u64(seed, &[0]))?;
    let adj = DenseMatrix::adjacency(g);
    let full = full_batch(g, &adj);
    let mut history = Vec::new();
    if record {
        history.push(full.loss_and_grad(&stack, params, true, false).0);
    }
    let mut momentum = Momentum {
        weights: Gradients::zeros_like(&stack).weights,
        biases: Gradients::zeros_like(&stack).biases,
    };
    let mut rng = seed::rng(seed::derive_seed_u64(seed, &[1]));
    let mut order: Vec<usize> = (0..n).collect();
    let mut pos = vec![usize::MAX; n];
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(params.batch_size) {
            let mut nodes: Vec<usize> = chunk.to_vec();
            for p in pos.iter_mut() {
                *p = usize::MAX;
            }
            for (k, &i) in nodes.iter().enumerate() {
                pos[i] = k;
            }
            let mut edges = Vec::new();
            for &i in chunk {
                for &j in g.out_neighbors(i) {
                    if pos[j] == usize::MAX {
                        pos[j] = nodes.len();
                        nodes.push(j);
                    }
                    edges.push((pos[i], pos[j]));
                }
            }
            let mut recon = vec![false; nodes.len()];
            recon[..chunk.len()].iter_mut().for_each(|r| *r = true);
            let batch = Batch {
                adjacency: &adj,
                nodes,
                recon,
                edges,
            };
            let (_, grads) = batch.loss_and_grad(&stack, params, true, true);
            momentum.apply(&mut stack, &grads.expect("gradients requested"), params);
        }
        if record {
            history.push(full.loss_and_grad(&stack, params, true, false).0);
        }
    }
    let acts = stack.forward(&full.inputs());
    let bottleneck = &acts[stack.bottleneck()];
    let embedding =
        EmbeddingMatrix::from_vec(n, dim, bottleneck.data().to_vec(), "sdne")?;
    Ok(SdneTrained {
        embedding,
        stack,
        loss_history: history,
    })
}

/// Trains SDNE and returns the bottleneck activations of every node.
pub fn sdne_train(g: &DiGraph, d: usize, params: &SdneParams, seed: u64) -> Result<EmbeddingMatrix> {
    Ok(train(g, d, params, seed, false)?.embedding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, gen_synthetic, GraphBuilder, SyntheticKind};

    #[test]
    fn penalty_row() {
        let adj = DenseMatrix::from_rows(&[vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(penalty_matrix(&adj, 5.0).row(0), [1.0, 5.0, 1.0]);
    }

    #[test]
    fn zero_stack_on_empty_graph_has_zero_loss() {
        let stack = MlpStack::zeros(&[0, 2, 1, 2, 0]).unwrap();
        let l = sdne_loss(&DiGraph::empty(), &stack, &SdneParams::default()).unwrap();
        assert_eq!(l.total, 0.0);
    }

    #[test]
    fn loss_parts_sum_to_total() {
        let g = build_graph([("a", "b"), ("b", "c")]).unwrap();
        let stack = MlpStack::random(&[3, 4, 2, 4, 3], 1).unwrap();
        let l = sdne_loss(&g, &stack, &SdneParams::default()).unwrap();
        assert_eq!(l.total, l.second_order + l.first_order + l.reg);
        assert!(l.first_order > 0.0 && l.reg > 0.0);
    }

    #[test]
    fn dims_follow_schedule() {
        assert_eq!(MlpStack::dims_for(30, 2), vec![30, 50, 2, 50, 30]);
        assert_eq!(MlpStack::dims_for(300, 64), vec![300, 128, 64, 128, 300]);
        assert!(MlpStack::zeros(&[3, 2, 3, 4]).is_err());
        assert!(MlpStack::zeros(&[3, 2, 4]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = build_graph([("a", "b")]).unwrap();
        let stack = MlpStack::zeros(&[3, 2, 3]).unwrap();
        assert!(matches!(
            sdne_loss(&g, &stack, &SdneParams::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let g = build_graph([("a", "b"), ("b", "c"), ("c", "a"), ("a", "d")]).unwrap();
        let stack = MlpStack::random(&[4, 5, 2, 5, 4], 3).unwrap();
        // heavier first-order and regularisation weights so every term is
        // visible in the comparison
        let p = SdneParams {
            alpha: 0.3,
            l1_reg: 1e-3,
            l2_reg: 1e-3,
            ..SdneParams::default()
        };
        let err = gradient_check(&stack, &g, &p).unwrap();
        assert!(err <= 1e-4, "{err}");
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let g = build_graph([("a", "b"), ("b", "c"), ("c", "a")]).unwrap();
        let stack = MlpStack::random(&[3, 4, 2, 4, 3], 8).unwrap();
        let p = SdneParams::default();
        let (_, mut analytic) = sdne_gradients(&g, &stack, &p).unwrap();
        let numeric = numeric_gradients(&g, &stack, &p, 1e-5).unwrap();
        let last = analytic.weights.len() - 1;
        analytic.weights[last] = analytic.weights[last].scale(-1.0);
        assert!(max_relative_error(&analytic, &numeric) > 1e-1);
    }

    #[test]
    fn zero_weights_on_edgeless_graph_check_exactly() {
        let mut b = GraphBuilder::new();
        for l in ["x", "y", "z"] {
            b.add_node(l).unwrap();
        }
        let g = b.build();
        let stack = MlpStack::zeros(&[3, 2, 1, 2, 3]).unwrap();
        let p = SdneParams {
            l1_reg: 0.0,
            ..SdneParams::default()
        };
        let e = gradient_check(&stack, &g, &p).unwrap();
        // only central-difference rounding remains
        assert!(e <= 1e-9, "{e}");
    }

    #[test]
    fn training_reduces_loss() {
        let g = gen_synthetic(SyntheticKind::Erdos { p: 0.15 }, 20, 5).unwrap();
        let t = sdne_train_detailed(&g, 4, &SdneParams::default(), 1).unwrap();
        let first = t.loss_history.first().unwrap().total;
        let last = t.loss_history.last().unwrap().total;
        assert!(last < first, "{first} -> {last}");
        assert_eq!(t.embedding.dim(), 4);
        assert!(t.embedding.data().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn training_is_deterministic() {
        let g = gen_synthetic(SyntheticKind::Cycle, 8, 0).unwrap();
        let p = SdneParams {
            epochs: 5,
            ..SdneParams::default()
        };
        assert_eq!(sdne_train(&g, 2, &p, 9).unwrap(), sdne_train(&g, 2, &p, 9).unwrap());
    }
}
