//! The five embedding families behind one dispatch function.

use serde::{Deserialize, Serialize};

use crate::deep::{sdne_train, SdneParams};
use crate::embedding::{clamp_dim, NodeEmbedding};
use crate::error::{Error, Result};
use crate::factorization::{hope_embed, lap_embed, lle_embed, DEFAULT_KATZ_BETA};
use crate::graph::DiGraph;
use crate::randomwalk::{node2vec_embed, Node2VecConfig};
use crate::reconstruct::Scorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Node2vec,
    Hope,
    Sdne,
    Lap,
    Lle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Node2vec,
        Algorithm::Hope,
        Algorithm::Sdne,
        Algorithm::Lap,
        Algorithm::Lle,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "node2vec" => Ok(Algorithm::Node2vec),
            "hope" => Ok(Algorithm::Hope),
            "sdne" => Ok(Algorithm::Sdne),
            "lap" => Ok(Algorithm::Lap),
            "lle" => Ok(Algorithm::Lle),
            other => Err(Error::InvalidArgument(format!("unknown algorithm {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Node2vec => "node2vec",
            Algorithm::Hope => "hope",
            Algorithm::Sdne => "sdne",
            Algorithm::Lap => "lap",
            Algorithm::Lle => "lle",
        }
    }

    /// Display name used in report tables.
    pub fn display(self) -> &'static str {
        match self {
            Algorithm::Node2vec => "Node2Vec",
            Algorithm::Hope => "HOPE",
            Algorithm::Sdne => "SDNE",
            Algorithm::Lap => "LAP",
            Algorithm::Lle => "LLE",
        }
    }

    pub fn default_scorer(self) -> Scorer {
        match self {
            Algorithm::Node2vec | Algorithm::Sdne => Scorer::Dot,
            Algorithm::Hope => Scorer::AsymDot,
            Algorithm::Lap | Algorithm::Lle => Scorer::NegDistance,
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Algorithm::Node2vec | Algorithm::Sdne)
    }
}

/// Per-family hyperparameters. Seeds inside are overwritten by [`embed`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmParams {
    pub katz_beta: f64,
    pub node2vec: Node2VecConfig,
    pub sdne: SdneParams,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        AlgorithmParams {
            katz_beta: DEFAULT_KATZ_BETA,
            node2vec: Node2VecConfig::default(),
            sdne: SdneParams::default(),
        }
    }
}

/// Embeds `g` with the requested dimension clamped to `max(1, n - 1)`.
pub fn embed(g: &DiGraph, algorithm: Algorithm, d: usize, params: &AlgorithmParams, seed: u64) -> Result<NodeEmbedding> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let d = clamp_dim(d, g.node_count());
    Ok(match algorithm {
        Algorithm::Node2vec => {
            let mut cfg = params.node2vec;
            cfg.sgns.seed = seed;
            node2vec_embed(g, d, &cfg)?.into()
        }
        Algorithm::Hope => hope_embed(g, d, params.katz_beta)?.into(),
        Algorithm::Sdne => sdne_train(g, d, &params.sdne, seed)?.into(),
        Algorithm::Lap => lap_embed(g, d)?.into(),
        Algorithm::Lle => lle_embed(g, d)?.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::parse(a.name()).unwrap(), a);
        }
        assert!(Algorithm::parse("grarep").is_err());
    }

    #[test]
    fn every_family_embeds_a_small_graph() {
        let g = build_graph([("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")]).unwrap();
        let mut params = AlgorithmParams::default();
        params.node2vec.walks_per_node = 2;
        params.node2vec.walk_length = 10;
        params.node2vec.sgns.epochs = 2;
        params.sdne.epochs = 2;
        for a in Algorithm::ALL {
            let e = embed(&g, a, 8, &params, 1).unwrap();
            assert_eq!(e.node_count(), 4, "{a:?}");
            assert_eq!(e.dim(), 3, "{a:?}");
        }
    }
}
