//! Word similarity and analogy benchmarks scored by Euclidean distance
//! between node embeddings (lower is better).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::NodeEmbedding;
use crate::error::{Error, Result};
use crate::graph::DiGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityPair {
    pub word_a: String,
    pub word_b: String,
    pub human_score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyQuad {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
}

/// Field delimiter of a similarity file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityFormat {
    Tab,
    Comma,
    Whitespace,
}

impl SimilarityFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tsv" | "tab" => Ok(SimilarityFormat::Tab),
            "csv" | "comma" => Ok(SimilarityFormat::Comma),
            "ws" | "whitespace" => Ok(SimilarityFormat::Whitespace),
            other => Err(Error::InvalidArgument(format!("unknown similarity format {other:?}"))),
        }
    }

    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            SimilarityFormat::Tab => line.split('\t').map(str::trim).collect(),
            SimilarityFormat::Comma => line.split(',').map(str::trim).collect(),
            SimilarityFormat::Whitespace => line.split_whitespace().collect(),
        }
    }
}

/// A line that could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub diagnostics: Vec<Diagnostic>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn parse_similarity(text: &str, format: SimilarityFormat) -> Loaded<SimilarityPair> {
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = format.split(line);
        let parsed = match fields.as_slice() {
            [a, b, score, ..] if !a.is_empty() && !b.is_empty() => score
                .parse::<f64>()
                .ok()
                .filter(|s| s.is_finite())
                .map(|human_score| SimilarityPair {
                    word_a: (*a).to_owned(),
                    word_b: (*b).to_owned(),
                    human_score,
                }),
            _ => None,
        };
        match parsed {
            Some(p) => records.push(p),
            None => diagnostics.push(Diagnostic {
                line: i + 1,
                message: format!("expected word, word, numeric score: {line:?}"),
            }),
        }
    }
    Loaded {
        records,
        diagnostics,
    }
}

/// Loads "word_a<sep>word_b<sep>score" records; '#' lines are skipped.
pub fn load_similarity_dataset(
    path: &Path,
    format: SimilarityFormat,
) -> Result<Loaded<SimilarityPair>> {
    let loaded = parse_similarity(&read(path)?, format);
    if loaded.records.is_empty() {
        return Err(Error::Parse {
            path: path.to_owned(),
            message: "no valid similarity records".into(),
        });
    }
    Ok(loaded)
}

pub fn parse_analogy(text: &str) -> Loaded<AnalogyQuad> {
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(':') || line.starts_with('#') {
            continue;
        }
        match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            [a, b, c, d] => records.push(AnalogyQuad {
                a: (*a).to_owned(),
                b: (*b).to_owned(),
                c: (*c).to_owned(),
                d: (*d).to_owned(),
            }),
            _ => diagnostics.push(Diagnostic {
                line: i + 1,
                message: format!("expected four words: {line:?}"),
            }),
        }
    }
    Loaded {
        records,
        diagnostics,
    }
}

/// Loads whitespace-separated "a b c d" lines; ": section" headers are
/// skipped.
pub fn load_analogy_dataset(path: &Path) -> Result<Loaded<AnalogyQuad>> {
    let loaded = parse_analogy(&read(path)?);
    if loaded.records.is_empty() {
        return Err(Error::Parse {
            path: path.to_owned(),
            message: "no valid analogy records".into(),
        });
    }
    Ok(loaded)
}

/// Unique lowercased words of a similarity dataset.
pub fn similarity_vocabulary(pairs: &[SimilarityPair]) -> BTreeSet<String> {
    pairs
        .iter()
        .flat_map(|p| [&p.word_a, &p.word_b])
        .map(|w| w.to_lowercase())
        .collect()
}

pub fn analogy_vocabulary(quads: &[AnalogyQuad]) -> BTreeSet<String> {
    quads
        .iter()
        .flat_map(|q| [&q.a, &q.b, &q.c, &q.d])
        .map(|w| w.to_lowercase())
        .collect()
}

/// Maps dataset words into the graph's label space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMapper {
    pub prefix: String,
    pub lowercase: bool,
}

impl Default for LabelMapper {
    /// ConceptNet-style "/c/en/<word>" with spaces turned into underscores.
    fn default() -> Self {
        LabelMapper {
            prefix: "/c/en/".into(),
            lowercase: true,
        }
    }
}

impl LabelMapper {
    pub fn identity() -> Self {
        LabelMapper {
            prefix: String::new(),
            lowercase: false,
        }
    }

    pub fn map(&self, word: &str) -> String {
        let w = word.trim().replace(' ', "_");
        let w = if self.lowercase { w.to_lowercase() } else { w };
        format!("{}{}", self.prefix, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VocabOverlap {
    pub overlap_count: usize,
    pub vocabulary_size: usize,
    /// In percent, 0..=100.
    pub percentage: f64,
}

pub fn vocab_overlap(
    vocabulary: &BTreeSet<String>,
    graph: &DiGraph,
    mapper: &LabelMapper,
) -> VocabOverlap {
    let overlap_count = vocabulary
        .iter()
        .filter(|w| graph.index_of(&mapper.map(w)).is_some())
        .count();
    let percentage = if vocabulary.is_empty() {
        0.0
    } else {
        100.0 * overlap_count as f64 / vocabulary.len() as f64
    };
    VocabOverlap {
        overlap_count,
        vocabulary_size: vocabulary.len(),
        percentage,
    }
}

pub fn euclidean_distance(y1: &[f64], y2: &[f64]) -> Result<f64> {
    if y1.len() != y2.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            y1.len(),
            y2.len()
        )));
    }
    Ok(y1
        .iter()
        .zip(y2)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt())
}

/// An embedding together with the labels of the nodes it covers and the
/// ego-graph center it was trained for.
#[derive(Debug, Clone)]
pub struct LabeledEmbedding {
    pub center: String,
    pub labels: Vec<String>,
    pub embedding: NodeEmbedding,
    index: HashMap<String, usize>,
}

impl LabeledEmbedding {
    pub fn new(center: &str, labels: Vec<String>, embedding: NodeEmbedding) -> Result<Self> {
        if labels.len() != embedding.node_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} embedded nodes",
                labels.len(),
                embedding.node_count()
            )));
        }
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Ok(LabeledEmbedding {
            center: center.to_owned(),
            labels,
            embedding,
            index,
        })
    }

    pub fn vector_of(&self, label: &str) -> Option<Vec<f64>> {
        self.index.get(label).map(|&i| self.embedding.vector(i))
    }

    fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }
}

/// Embeddings of one (algorithm, hop) cell across all centers. Words are
/// compared only within a single embedding space: the one centered on the
/// first word, else the one centered on another word of the record, else
/// the first (in insertion order) that contains every word.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingSet {
    members: Vec<LabeledEmbedding>,
    by_center: HashMap<String, usize>,
}

impl EmbeddingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, e: LabeledEmbedding) {
        self.by_center.entry(e.center.clone()).or_insert(self.members.len());
        self.members.push(e);
    }

    pub fn single(e: LabeledEmbedding) -> Self {
        let mut s = Self::new();
        s.push(e);
        s
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut s = Self::new();
        for m in &self.members {
            s.push(
                LabeledEmbedding::new(&m.center, m.labels.clone(), m.embedding.scaled(c))
                    .expect("shape preserved"),
            );
        }
        s
    }

    /// Vectors for all `labels` from one shared embedding.
    pub fn resolve(&self, labels: &[&str]) -> Option<Vec<Vec<f64>>> {
        let covers = |m: &LabeledEmbedding| labels.iter().all(|l| m.contains(l));
        let chosen = labels
            .iter()
            .filter_map(|l| self.by_center.get(*l))
            .map(|&i| &self.members[i])
            .find(|m| covers(m))
            .or_else(|| self.members.iter().find(|m| covers(m)))?;
        labels.iter().map(|l| chosen.vector_of(l)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalogyMode {
    /// Mean of d(a, b) and d(c, d).
    Pairwise,
    /// ‖(y_b − y_a + y_c) − y_d‖₂.
    Offset,
}

impl AnalogyMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pairwise" => Ok(AnalogyMode::Pairwise),
            "offset" => Ok(AnalogyMode::Offset),
            other => Err(Error::InvalidArgument(format!("unknown analogy mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticReport {
    pub dataset_name: String,
    /// "similarity", "analogy_pairwise" or "analogy_offset".
    pub mode: String,
    pub pairs_evaluated: usize,
    pub pairs_skipped: usize,
    pub mean_distance: f64,
    pub per_hop: BTreeMap<u8, f64>,
}

impl SemanticReport {
    pub fn with_hop(mut self, hop: u8) -> Self {
        self.per_hop.insert(hop, self.mean_distance);
        self
    }
}

fn finish(
    dataset: &str,
    mode: &str,
    total: usize,
    evaluated: usize,
    distances: &[f64],
) -> Result<SemanticReport> {
    if evaluated == 0 {
        return Err(Error::NoCoverage {
            dataset: dataset.to_owned(),
            total,
        });
    }
    Ok(SemanticReport {
        dataset_name: dataset.to_owned(),
        mode: mode.to_owned(),
        pairs_evaluated: evaluated,
        pairs_skipped: total - evaluated,
        mean_distance: distances.iter().sum::<f64>() / distances.len() as f64,
        per_hop: BTreeMap::new(),
    })
}

/// Mean distance over pairs whose two words resolve to a shared embedding;
/// the rest are counted as skipped.
pub fn similarity_mean_distance(
    dataset: &str,
    pairs: &[SimilarityPair],
    embeddings: &EmbeddingSet,
    mapper: &LabelMapper,
) -> Result<SemanticReport> {
    let mut distances = Vec::new();
    for p in pairs {
        let (a, b) = (mapper.map(&p.word_a), mapper.map(&p.word_b));
        if let Some(v) = embeddings.resolve(&[&a, &b]) {
            distances.push(euclidean_distance(&v[0], &v[1])?);
        }
    }
    let evaluated = distances.len();
    finish(dataset, "similarity", pairs.len(), evaluated, &distances)
}

/// Analogy distances. A quad is evaluated only when all of its words are
/// resolvable within one embedding.
pub fn analogy_distance(
    dataset: &str,
    quads: &[AnalogyQuad],
    embeddings: &EmbeddingSet,
    mode: AnalogyMode,
    mapper: &LabelMapper,
) -> Result<SemanticReport> {
    let mut distances = Vec::new();
    let mut evaluated = 0;
    for q in quads {
        let labels = [q.a.as_str(), &q.b, &q.c, &q.d].map(|w| mapper.map(w));
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let Some(v) = embeddings.resolve(&refs) else {
            continue;
        };
        evaluated += 1;
        match mode {
            AnalogyMode::Pairwise => {
                distances.push(euclidean_distance(&v[0], &v[1])?);
                distances.push(euclidean_distance(&v[2], &v[3])?);
            }
            AnalogyMode::Offset => {
                let guess: Vec<f64> = v[1]
                    .iter()
                    .zip(&v[0])
                    .zip(&v[2])
                    .map(|((b, a), c)| b - a + c)
                    .collect();
                distances.push(euclidean_distance(&guess, &v[3])?);
            }
        }
    }
    let mode_name = match mode {
        AnalogyMode::Pairwise => "analogy_pairwise",
        AnalogyMode::Offset => "analogy_offset",
    };
    finish(dataset, mode_name, quads.len(), evaluated, &distances)
}
