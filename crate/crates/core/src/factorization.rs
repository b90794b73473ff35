//! Factorization family: locally linear embedding, Laplacian eigenmaps and
//! HOPE.
//!
//! LLE and LAP work on the symmetrised adjacency and ignore edge direction.
//! Isolated nodes are solved out of the system and receive zero vectors.
//! HOPE factorises the Katz matrix and keeps source and target roles apart.

use crate::embedding::{clamp_dim, AsymEmbedding, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::graph::DiGraph;
use crate::linalg::{katz_similarity, sym_eig_smallest, truncated_svd, DenseMatrix};

pub const DEFAULT_KATZ_BETA: f64 = 0.01;

/// Non-isolated nodes and the undirected adjacency restricted to them.
fn active_undirected(g: &DiGraph) -> (Vec<usize>, DenseMatrix) {
    let active: Vec<usize> = (0..g.node_count())
        .filter(|&i| g.out_degree(i) + g.in_degree(i) > 0)
        .collect();
    let mut local = vec![usize::MAX; g.node_count()];
    for (l, &o) in active.iter().enumerate() {
        local[o] = l;
    }
    let m = active.len();
    let mut w = DenseMatrix::zeros(m, m);
    for (s, d) in g.edges() {
        let (ls, ld) = (local[s], local[d]);
        w[(ls, ld)] = 1.0;
        w[(ld, ls)] = 1.0;
    }
    (active, w)
}

fn check_request(g: &DiGraph, d: usize) -> Result<usize> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    Ok(clamp_dim(d, g.node_count()))
}

/// Writes eigenvectors 2..=dim+1 (ascending) into the rows of `active`
/// nodes, applying `row_scale` per local row. Missing columns stay zero.
fn scatter_nontrivial(
    out: &mut EmbeddingMatrix,
    active: &[usize],
    system: &DenseMatrix,
    row_scale: &[f64],
) -> Result<()> {
    let m = active.len();
    let dim = out.dim();
    let wanted = (dim + 1).min(m);
    if wanted < 2 {
        return Ok(());
    }
    let eig = sym_eig_smallest(system, wanted)?;
    for (l, &node) in active.iter().enumerate() {
        let row = out.row_mut(node);
        for c in 1..wanted {
            row[c - 1] = eig.vectors[(l, c)] * row_scale[l];
        }
    }
    Ok(())
}

/// LLE with W the row-normalised undirected adjacency: the embedding is the
/// eigenvectors of M = (I - W)ᵀ(I - W) after the trivial constant one.
pub fn lle_embed(g: &DiGraph, d: usize) -> Result<EmbeddingMatrix> {
    let dim = check_request(g, d)?;
    let mut out = EmbeddingMatrix::zeros(g.node_count(), dim, "lle");
    let (active, mut w) = active_undirected(g);
    let m = active.len();
    for r in 0..m {
        let sum: f64 = w.row(r).iter().sum();
        if sum > 0.0 {
            w.row_mut(r).iter_mut().for_each(|x| *x /= sum);
        }
    }
    let i_minus_w = DenseMatrix::identity(m).sub(&w)?;
    let system = i_minus_w.transpose().matmul(&i_minus_w)?;
    scatter_nontrivial(&mut out, &active, &system, &vec![1.0; m])?;
    Ok(out)
}

/// Laplacian eigenmaps through the normalised Laplacian
/// D^(-1/2) (D - W) D^(-1/2); eigenvectors are mapped back by D^(-1/2).
pub fn lap_embed(g: &DiGraph, d: usize) -> Result<EmbeddingMatrix> {
    let dim = check_request(g, d)?;
    let mut out = EmbeddingMatrix::zeros(g.node_count(), dim, "lap");
    let (active, w) = active_undirected(g);
    let m = active.len();
    let inv_sqrt: Vec<f64> = (0..m)
        .map(|r| 1.0 / w.row(r).iter().sum::<f64>().sqrt())
        .collect();
    let mut system = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let lij = if i == j { 1.0 } else { 0.0 } - w[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
            system[(i, j)] = lij;
        }
    }
    scatter_nontrivial(&mut out, &active, &system, &inv_sqrt)?;
    Ok(out)
}

/// HOPE on the Katz index: S ≈ Y_s Y_tᵀ with Y_s = U Σ^½, Y_t = V Σ^½.
pub fn hope_embed(g: &DiGraph, d: usize, beta: f64) -> Result<AsymEmbedding> {
    let dim = check_request(g, d)?;
    let n = g.node_count();
    let s = katz_similarity(g, beta)?;
    let mut source = EmbeddingMatrix::zeros(n, dim, "hope");
    let mut target = EmbeddingMatrix::zeros(n, dim, "hope");
    if g.edge_count() > 0 {
        let svd = truncated_svd(&s, dim)?;
        for (c, &sigma) in svd.sigma.iter().enumerate() {
            let root = sigma.sqrt();
            for i in 0..n {
                source.row_mut(i)[c] = svd.u[(i, c)] * root;
                target.row_mut(i)[c] = svd.v[(i, c)] * root;
            }
        }
    }
    AsymEmbedding::new(source, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphBuilder};

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn pair() -> DiGraph {
        build_graph([("a", "b"), ("b", "a")]).unwrap()
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn lle_on_two_nodes() {
        // M = [[2,-2],[-2,2]]: eigenvalue 0 on (1,1), 4 on (1,-1)
        let e = lle_embed(&pair(), 1).unwrap();
        assert!((e.row(0)[0] - H).abs() < 1e-12);
        assert!((e.row(1)[0] + H).abs() < 1e-12);
    }

    #[test]
    fn lle_isolated_nodes_are_zero() {
        let mut b = GraphBuilder::new();
        for l in ["x", "y", "z"] {
            b.add_node(l).unwrap();
        }
        let e = lle_embed(&b.build(), 2).unwrap();
        assert!(e.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn lap_on_two_nodes() {
        let e = lap_embed(&pair(), 1).unwrap();
        assert!((e.row(0)[0] - H).abs() < 1e-12);
        assert!((e.row(0)[0] + e.row(1)[0]).abs() < 1e-12);
    }

    #[test]
    fn lap_separates_components() {
        let g = build_graph([("a", "b"), ("b", "a"), ("c", "d"), ("d", "c")]).unwrap();
        let e = lap_embed(&g, 1).unwrap();
        let intra = dist(e.row(0), e.row(1)).max(dist(e.row(2), e.row(3)));
        let inter = dist(e.row(0), e.row(2));
        assert!(intra < inter, "intra {intra} inter {inter}");
    }

    #[test]
    fn lap_single_node() {
        let g = build_graph([("a", "a")]).unwrap();
        let e = lap_embed(&g, 4).unwrap();
        assert_eq!(e.dim(), 1);
        assert_eq!(e.row(0), [0.0]);
    }

    #[test]
    fn hope_single_edge() {
        let g = build_graph([("a", "b")]).unwrap();
        let h = hope_embed(&g, 1, 0.01).unwrap();
        assert!((h.source.row(0)[0] - 0.1).abs() < 1e-15);
        assert!((h.target.row(1)[0] - 0.1).abs() < 1e-15);
        assert_eq!(h.source.row(1)[0], 0.0);
        assert_eq!(h.target.row(0)[0], 0.0);
        let ab = h.source.row(0)[0] * h.target.row(1)[0];
        let ba = h.source.row(1)[0] * h.target.row(0)[0];
        assert!((ab - 0.01).abs() < 1e-16);
        assert!(ab > ba);
    }

    #[test]
    fn hope_edgeless_is_zero() {
        let mut b = GraphBuilder::new();
        b.add_node("x").unwrap();
        b.add_node("y").unwrap();
        let h = hope_embed(&b.build(), 1, 0.01).unwrap();
        assert!(h.source.data().iter().chain(h.target.data()).all(|&x| x == 0.0));
    }

    #[test]
    fn hope_propagates_divergence() {
        let g = pair();
        assert!(matches!(hope_embed(&g, 1, 2.0), Err(Error::KatzDivergence { .. })));
    }
}
