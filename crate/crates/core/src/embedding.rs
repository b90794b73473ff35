//! Embedding containers shared by every algorithm family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Effective dimension for a graph with `node_count` nodes: requests at or
/// above the node count are clamped to `max(1, node_count - 1)`.
pub fn clamp_dim(requested: usize, node_count: usize) -> usize {
    if requested >= node_count {
        node_count.saturating_sub(1).max(1)
    } else {
        requested.max(1)
    }
}

/// One d-dimensional vector per node, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    node_count: usize,
    dim: usize,
    data: Vec<f64>,
    pub algorithm_tag: String,
}

impl EmbeddingMatrix {
    pub fn zeros(node_count: usize, dim: usize, tag: &str) -> Self {
        EmbeddingMatrix {
            node_count,
            dim,
            data: vec![0.0; node_count * dim],
            algorithm_tag: tag.to_owned(),
        }
    }

    pub fn from_vec(node_count: usize, dim: usize, data: Vec<f64>, tag: &str) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be >= 1".into()));
        }
        if data.len() != node_count * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {node_count} nodes x {dim} dims",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("embedding has non-finite entries".into()));
        }
        Ok(EmbeddingMatrix {
            node_count,
            dim,
            data,
            algorithm_tag: tag.to_owned(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], tag: &str) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("ragged embedding rows".into()));
        }
        Self::from_vec(rows.len(), dim, rows.concat(), tag)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn scaled(&self, c: f64) -> Self {
        EmbeddingMatrix {
            data: self.data.iter().map(|x| x * c).collect(),
            ..self.clone()
        }
    }
}

/// Paired source/target embeddings whose inner products approximate a
/// directed similarity matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymEmbedding {
    pub source: EmbeddingMatrix,
    pub target: EmbeddingMatrix,
}

impl AsymEmbedding {
    pub fn new(source: EmbeddingMatrix, target: EmbeddingMatrix) -> Result<Self> {
        if source.dim != target.dim || source.node_count != target.node_count {
            return Err(Error::DimensionMismatch(
                "source and target embeddings differ in shape".into(),
            ));
        }
        Ok(AsymEmbedding { source, target })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeEmbedding {
    Symmetric(EmbeddingMatrix),
    Asymmetric(AsymEmbedding),
}

impl NodeEmbedding {
    pub fn node_count(&self) -> usize {
        match self {
            NodeEmbedding::Symmetric(e) => e.node_count,
            NodeEmbedding::Asymmetric(a) => a.source.node_count,
        }
    }

    /// Per-matrix dimension (source and target each have this many columns).
    pub fn dim(&self) -> usize {
        match self {
            NodeEmbedding::Symmetric(e) => e.dim,
            NodeEmbedding::Asymmetric(a) => a.source.dim,
        }
    }

    pub fn algorithm_tag(&self) -> &str {
        match self {
            NodeEmbedding::Symmetric(e) => &e.algorithm_tag,
            NodeEmbedding::Asymmetric(a) => &a.source.algorithm_tag,
        }
    }

    /// The vector used for distance-based evaluation. Asymmetric embeddings
    /// concatenate the source and target rows.
    pub fn vector(&self, i: usize) -> Vec<f64> {
        match self {
            NodeEmbedding::Symmetric(e) => e.row(i).to_vec(),
            NodeEmbedding::Asymmetric(a) => {
                let mut v = a.source.row(i).to_vec();
                v.extend_from_slice(a.target.row(i));
                v
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            NodeEmbedding::Symmetric(e) => NodeEmbedding::Symmetric(e.scaled(c)),
            NodeEmbedding::Asymmetric(a) => NodeEmbedding::Asymmetric(AsymEmbedding {
                source: a.source.scaled(c),
                target: a.target.scaled(c),
            }),
        }
    }
}

impl From<EmbeddingMatrix> for NodeEmbedding {
    fn from(e: EmbeddingMatrix) -> Self {
        NodeEmbedding::Symmetric(e)
    }
}

impl From<AsymEmbedding> for NodeEmbedding {
    fn from(a: AsymEmbedding) -> Self {
        NodeEmbedding::Asymmetric(a)
    }
}
