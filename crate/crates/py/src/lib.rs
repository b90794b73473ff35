//! Python bindings: graphs, ego subgraphs, the five embedding families,
//! reconstruction metrics and embedding distances.

use std::path::PathBuf;

use pyo3::exceptions::{PyIndexError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use restore_core::graph::{self, SyntheticKind};
use restore_core::ingest::{graph_from_records, parse_edge_list, EdgeFormat};
use restore_core::reconstruct::{reconstruction_report, Scorer, DEFAULT_FRACTIONS, DEFAULT_THRESHOLD};
use restore_core::semantic::{self, EmbeddingSet, LabelMapper, LabeledEmbedding, SimilarityPair};
use restore_core::{Algorithm, AlgorithmParams, DiGraph, EmbeddingMatrix, NodeEmbedding};

fn err(e: restore_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Immutable directed graph with string node labels.
#[pyclass(name = "Graph", module = "restore", frozen)]
struct PyGraph {
    inner: DiGraph,
}

#[pymethods]
impl PyGraph {
    /// Graph(edges, nodes=None). Self-loops are dropped; `nodes` adds
    /// labels (possibly isolated) ahead of the edge endpoints.
    #[new]
    #[pyo3(signature = (edges, nodes = None))]
    fn new(edges: Vec<(String, String)>, nodes: Option<Vec<String>>) -> PyResult<Self> {
        let mut b = restore_core::GraphBuilder::new();
        for n in nodes.iter().flatten() {
            b.add_node(n).map_err(err)?;
        }
        for (s, d) in &edges {
            b.add_edge(s, d).map_err(err)?;
        }
        Ok(PyGraph { inner: b.build() })
    }

    /// Reads a tsv3 or tsv_kgtk edge list.
    #[staticmethod]
    #[pyo3(signature = (path, format = "tsv3"))]
    fn from_file(path: PathBuf, format: &str) -> PyResult<Self> {
        let f = EdgeFormat::parse(format).map_err(err)?;
        let parsed = parse_edge_list(&path, f).map_err(err)?;
        Ok(PyGraph {
            inner: graph_from_records(&parsed.records).map_err(err)?,
        })
    }

    /// Deterministic fixtures: "path", "cycle", "star", "erdos", "scale_free".
    #[staticmethod]
    #[pyo3(signature = (kind, n, seed = 0))]
    fn synthetic(kind: &str, n: usize, seed: u64) -> PyResult<Self> {
        let k = SyntheticKind::parse(kind, n).map_err(err)?;
        Ok(PyGraph {
            inner: graph::gen_synthetic(k, n, seed).map_err(err)?,
        })
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn edges(&self) -> Vec<(String, String)> {
        self.inner.labelled_edges().map(|(a, b)| (a.to_owned(), b.to_owned())).collect()
    }

    fn index_of(&self, label: &str) -> Option<usize> {
        self.inner.index_of(label)
    }

    fn has_edge(&self, src: &str, dst: &str) -> bool {
        match (self.inner.index_of(src), self.inner.index_of(dst)) {
            (Some(a), Some(b)) => self.inner.has_edge(a, b),
            _ => false,
        }
    }

    /// Induced subgraph on nodes within `hops` undirected steps of `center`.
    #[pyo3(signature = (center, hops = 1))]
    fn khop(&self, center: &str, hops: usize) -> PyResult<Self> {
        if self.inner.index_of(center).is_none() {
            return Err(PyKeyError::new_err(center.to_owned()));
        }
        Ok(PyGraph {
            inner: graph::khop_ego_subgraph(&self.inner, center, hops).map_err(err)?,
        })
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = graph::graph_stats(&self.inner);
        let d = PyDict::new(py);
        d.set_item("node_count", s.node_count)?;
        d.set_item("edge_count", s.edge_count)?;
        d.set_item("min_out_degree", s.min_out_degree)?;
        d.set_item("avg_out_degree", s.avg_out_degree)?;
        d.set_item("max_out_degree", s.max_out_degree)?;
        d.set_item("min_in_degree", s.min_in_degree)?;
        d.set_item("avg_in_degree", s.avg_in_degree)?;
        d.set_item("max_in_degree", s.max_in_degree)?;
        Ok(d)
    }

    fn __len__(&self) -> usize {
        self.inner.node_count()
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.inner.node_count(), self.inner.edge_count())
    }
}

/// Node embedding of one graph. HOPE embeddings are asymmetric: `source`
/// and `target` differ and `vector(i)` is their concatenation.
#[pyclass(name = "Embedding", module = "restore", frozen)]
struct PyEmbedding {
    inner: NodeEmbedding,
    labels: Vec<String>,
    algorithm: Algorithm,
}

fn rows(m: &EmbeddingMatrix) -> Vec<Vec<f64>> {
    (0..m.node_count()).map(|i| m.row(i).to_vec()).collect()
}

#[pymethods]
impl PyEmbedding {
    #[getter]
    fn algorithm(&self) -> &'static str {
        self.algorithm.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn is_asymmetric(&self) -> bool {
        matches!(self.inner, NodeEmbedding::Asymmetric(_))
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.labels.clone()
    }

    fn vector(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.node_count() {
            return Err(PyIndexError::new_err(i));
        }
        Ok(self.inner.vector(i))
    }

    fn vector_of(&self, label: &str) -> PyResult<Vec<f64>> {
        let i = self.labels.iter().position(|l| l == label).ok_or_else(|| PyKeyError::new_err(label.to_owned()))?;
        Ok(self.inner.vector(i))
    }

    /// Rows of the evaluation vectors.
    fn vectors(&self) -> Vec<Vec<f64>> {
        (0..self.inner.node_count()).map(|i| self.inner.vector(i)).collect()
    }

    #[getter]
    fn source(&self) -> Vec<Vec<f64>> {
        match &self.inner {
            NodeEmbedding::Symmetric(m) => rows(m),
            NodeEmbedding::Asymmetric(a) => rows(&a.source),
        }
    }

    #[getter]
    fn target(&self) -> Vec<Vec<f64>> {
        match &self.inner {
            NodeEmbedding::Symmetric(m) => rows(m),
            NodeEmbedding::Asymmetric(a) => rows(&a.target),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Embedding(algorithm={:?}, nodes={}, dim={})",
            self.algorithm.name(),
            self.inner.node_count(),
            self.inner.dim()
        )
    }
}

/// Embeds `graph` with one of node2vec, hope, sdne, lap, lle. The
/// dimension is clamped to max(1, n - 1); `epochs` overrides both trained
/// families.
#[pyfunction]
#[pyo3(signature = (graph, algorithm, dim, seed = 0, epochs = None))]
fn embed(py: Python<'_>, graph: &PyGraph, algorithm: &str, dim: usize, seed: u64, epochs: Option<usize>) -> PyResult<PyEmbedding> {
    let algo = Algorithm::parse(algorithm).map_err(err)?;
    let mut params = AlgorithmParams::default();
    if let Some(e) = epochs {
        params.node2vec.sgns.epochs = e;
        params.sdne.epochs = e;
    }
    let g = &graph.inner;
    let inner = py.detach(|| restore_core::embed(g, algo, dim, &params, seed)).map_err(err)?;
    Ok(PyEmbedding {
        inner,
        labels: g.labels().to_vec(),
        algorithm: algo,
    })
}

/// Reconstruction metrics of `embedding` against `graph`: mAP, Prec@k per
/// fraction and the added/missing node and edge counts.
#[pyfunction]
#[pyo3(signature = (embedding, graph, scorer = None, threshold = DEFAULT_THRESHOLD, fractions = None))]
fn reconstruct<'py>(
    py: Python<'py>,
    embedding: &PyEmbedding,
    graph: &PyGraph,
    scorer: Option<&str>,
    threshold: f64,
    fractions: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let scorer = match scorer {
        Some(s) => Scorer::parse(s).map_err(err)?,
        None => embedding.algorithm.default_scorer(),
    };
    let fractions = fractions.unwrap_or_else(|| DEFAULT_FRACTIONS.to_vec());
    let (r, _) = reconstruction_report(&embedding.inner, &graph.inner, scorer, threshold, &fractions).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("map", r.map_score)?;
    let prec = PyDict::new(py);
    for p in &r.prec_at {
        prec.set_item(p.fraction, p.precision)?;
    }
    d.set_item("precision", prec)?;
    d.set_item("scorer", r.scorer.name())?;
    d.set_item("predicted_edges", r.predicted_edge_count)?;
    d.set_item("added_nodes", r.diff.added_nodes)?;
    d.set_item("missing_nodes", r.diff.missing_nodes)?;
    d.set_item("added_edges", r.diff.added_edges)?;
    d.set_item("missing_edges", r.diff.missing_edges)?;
    d.set_item("added_edge_list", r.diff.added_edge_list)?;
    d.set_item("missing_edge_list", r.diff.missing_edge_list)?;
    Ok(d)
}

#[pyfunction]
fn euclidean_distance(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    semantic::euclidean_distance(&a, &b).map_err(err)
}

/// Mean distance over word pairs found in the embedding, plus counts.
/// Words map to labels as prefix + lowercased word.
#[pyfunction]
#[pyo3(signature = (embedding, pairs, prefix = "/c/en/"))]
fn similarity_distance(embedding: &PyEmbedding, pairs: Vec<(String, String)>, prefix: &str) -> PyResult<(f64, usize, usize)> {
    let center = embedding.labels.first().cloned().unwrap_or_default();
    let set = EmbeddingSet::single(
        LabeledEmbedding::new(&center, embedding.labels.clone(), embedding.inner.clone()).map_err(err)?,
    );
    let pairs: Vec<SimilarityPair> = pairs
        .into_iter()
        .map(|(word_a, word_b)| SimilarityPair {
            word_a,
            word_b,
            human_score: 0.0,
        })
        .collect();
    let mapper = LabelMapper {
        prefix: prefix.to_owned(),
        ..LabelMapper::default()
    };
    let r = semantic::similarity_mean_distance("pairs", &pairs, &set, &mapper).map_err(err)?;
    Ok((r.mean_distance, r.pairs_evaluated, r.pairs_skipped))
}

#[pyfunction]
fn algorithms() -> Vec<&'static str> {
    Algorithm::ALL.iter().map(|a| a.name()).collect()
}

#[pymodule]
fn restore(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyEmbedding>()?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(euclidean_distance, m)?)?;
    m.add_function(wrap_pyfunction!(similarity_distance, m)?)?;
    m.add_function(wrap_pyfunction!(algorithms, m)?)?;
    Ok(())
}
