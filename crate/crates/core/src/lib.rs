//! Node embeddings on k-hop ego subgraphs, graph reconstruction from the
//! embeddings, and intrinsic evaluation of what structure and semantics
//! each embedding retains.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] directed graphs, ego-subgraph extraction, statistics and diffs
//! * [`linalg`] dense kernels (Jacobi eigensolver, truncated SVD, Katz index)
//! * [`factorization`] LLE, Laplacian eigenmaps and HOPE
//! * [`randomwalk`] Node2Vec walks and skip-gram with negative sampling
//! * [`deep`] the SDNE autoencoder with hand-written backpropagation
//! * [`reconstruct`] adjacency reconstruction, Prec@k and mAP
//! * [`semantic`] word similarity and analogy distance benchmarks
//! * [`algorithms`] one entry point over the five families
//! * [`ingest`] edge-list and manifest parsers

pub mod algorithms;
pub mod deep;
pub mod embedding;
pub mod error;
pub mod factorization;
pub mod graph;
pub mod ingest;
pub mod linalg;
pub mod randomwalk;
pub mod reconstruct;
pub mod seed;
pub mod semantic;

pub use algorithms::{embed, Algorithm, AlgorithmParams};
pub use embedding::{clamp_dim, AsymEmbedding, EmbeddingMatrix, NodeEmbedding};
pub use error::{Error, Result};
pub use graph::{DiGraph, GraphBuilder, GraphDiff, GraphStats, NodeId};
pub use linalg::DenseMatrix;
