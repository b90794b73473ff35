//! The five stages. Each reads the previous stage's `index.json`, runs its
//! cells on a bounded worker pool and writes its outputs plus an index, a
//! `timings.json` and the error entries of any failed cells. Cell seeds are
//! derived from (seed, center, hop, algorithm), so results do not depend on
//! scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use restore_core::graph::{graph_stats, khop_ego_subgraph, GraphStats};
use restore_core::ingest::{
    graph_from_records, parse_edge_list, partition_centers, read_graph_file, write_graph_file, DatasetKind,
};
use restore_core::reconstruct::{predicted_graph, reconstruction_report, ReconReport};
use restore_core::semantic::{
    analogy_distance, analogy_vocabulary, load_analogy_dataset, load_similarity_dataset, similarity_mean_distance,
    similarity_vocabulary, vocab_overlap, AnalogyQuad, EmbeddingSet, LabeledEmbedding, SemanticReport, SimilarityPair,
    VocabOverlap,
};
use restore_core::{embed, seed, Algorithm, DiGraph};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::embio::{read_embedding, write_embedding, write_text_export, EmbeddingFile};
use crate::{dot, report, CliError};

pub const SUBGRAPH_DIR: &str = "subgraphs";
pub const EMBEDDING_DIR: &str = "embeddings";
pub const RECON_DIR: &str = "reconstruction";
pub const SEMANTIC_DIR: &str = "semantic";
pub const REPORT_DIR: &str = "report";

/// An explicit record of a cell (or input) that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hop: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    pub message: String,
}

impl CellError {
    fn new(stage: &str, message: impl ToString) -> Self {
        CellError {
            stage: stage.to_owned(),
            center: None,
            hop: None,
            algorithm: None,
            dataset: None,
            message: message.to_string(),
        }
    }

    fn cell(stage: &str, center: &str, hop: u8, algorithm: Option<Algorithm>, message: impl ToString) -> Self {
        CellError {
            center: Some(center.to_owned()),
            hop: Some(hop),
            algorithm,
            ..Self::new(stage, message)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageOutcome {
    pub succeeded: usize,
    pub failed: usize,
}

impl StageOutcome {
    fn check(self, stage: &str) -> Result<Self, CliError> {
        if self.succeeded == 0 && self.failed > 0 {
            return Err(CliError::TotalFailure(stage.to_owned()));
        }
        Ok(self)
    }

    pub fn merge(self, o: StageOutcome) -> StageOutcome {
        StageOutcome {
            succeeded: self.succeeded + o.succeeded,
            failed: self.failed + o.failed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphEntry {
    pub center: String,
    pub center_id: usize,
    pub hop: u8,
    pub file: String,
    pub node_count: usize,
    pub edge_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub min: usize,
    pub avg: f64,
    pub max: usize,
}

impl SizeSummary {
    fn of(xs: &[usize]) -> Option<Self> {
        Some(SizeSummary {
            min: *xs.iter().min()?,
            avg: xs.iter().sum::<usize>() as f64 / xs.len() as f64,
            max: *xs.iter().max()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopStats {
    pub hop: u8,
    pub subgraphs: usize,
    pub nodes: SizeSummary,
    pub edges: SizeSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetCoverage {
    pub dataset: String,
    pub kind: String,
    pub coverage: VocabOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractStats {
    pub graph: GraphStats,
    pub malformed_lines: usize,
    pub datasets: Vec<DatasetCoverage>,
    /// Distinct words across all datasets that exist in the graph.
    pub total_overlap: usize,
    pub centers_requested: usize,
    pub centers_resolved: usize,
    pub per_hop: Vec<HopStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphIndex {
    pub centers: Vec<String>,
    pub entries: Vec<SubgraphEntry>,
    pub errors: Vec<CellError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedEntry {
    pub center: String,
    pub center_id: usize,
    pub hop: u8,
    pub algorithm: Algorithm,
    pub file: String,
    pub node_count: usize,
    pub requested_dim: usize,
    pub effective_dim: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedIndex {
    pub entries: Vec<EmbedEntry>,
    pub errors: Vec<CellError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconCellFile {
    pub center: String,
    pub hop: u8,
    pub algorithm: Algorithm,
    pub report: ReconReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconEntry {
    pub center: String,
    pub center_id: usize,
    pub hop: u8,
    pub algorithm: Algorithm,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dot_file: Option<String>,
    pub map_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconIndex {
    pub entries: Vec<ReconEntry>,
    pub errors: Vec<CellError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticCell {
    pub dataset: String,
    pub hop: u8,
    pub algorithm: Algorithm,
    pub report: SemanticReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticIndex {
    pub cells: Vec<SemanticCell>,
    /// Mean over datasets for each (algorithm, hop).
    pub averages: Vec<SemanticAverage>,
    pub errors: Vec<CellError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticAverage {
    pub algorithm: Algorithm,
    pub hop: u8,
    pub datasets: usize,
    pub mean_distance: f64,
}

pub fn semantic_averages(cells: &[SemanticCell]) -> Vec<SemanticAverage> {
    let mut acc: BTreeMap<(Algorithm, u8), (usize, f64)> = BTreeMap::new();
    for c in cells {
        let e = acc.entry((c.algorithm, c.hop)).or_default();
        e.0 += 1;
        e.1 += c.report.mean_distance;
    }
    acc.into_iter()
        .map(|((algorithm, hop), (n, sum))| SemanticAverage {
            algorithm,
            hop,
            datasets: n,
            mean_distance: sum / n as f64,
        })
        .collect()
}

type Timings = BTreeMap<String, f64>;

pub fn cell_key(center_id: usize, hop: u8, algorithm: Option<Algorithm>) -> String {
    match algorithm {
        Some(a) => format!("c{center_id:04}/h{hop}/{}", a.name()),
        None => format!("c{center_id:04}/h{hop}"),
    }
}

pub fn cell_seed(base: u64, center: &str, hop: u8, algorithm: Algorithm) -> u64 {
    seed::derive_seed(base, &[center.as_bytes(), &[hop], algorithm.name().as_bytes()])
}

/// Readable file stem for a center label: "/c/en/smart_phone" -> "smart_phone".
fn slug(label: &str) -> String {
    let last = label.trim_end_matches('/').rsplit('/').next().unwrap_or("");
    let s: String = last
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .take(32)
        .collect();
    if s.is_empty() {
        "node".into()
    } else {
        s
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Json {
        path: path.to_owned(),
        source: e,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Json {
        path: path.to_owned(),
        source: e,
    })
}

pub(crate) fn require(paths: &[PathBuf]) -> Result<(), CliError> {
    let missing: Vec<String> = paths.iter().filter(|p| !p.exists()).map(|p| p.display().to_string()).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::MissingInputs(missing))
    }
}

fn stage_dir(cfg: &PipelineConfig, name: &str) -> Result<PathBuf, CliError> {
    let d = cfg.output_dir.join(name);
    fs::create_dir_all(&d).map_err(|e| CliError::io(&d, e))?;
    Ok(d)
}

fn with_pool<T: Send>(cfg: &PipelineConfig, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count())
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn ms(t: Instant) -> f64 {
    (t.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

pub enum Dataset {
    Similarity(Vec<SimilarityPair>),
    Analogy(Vec<AnalogyQuad>),
}

/// Loads every manifest dataset concurrently, in manifest order.
pub fn load_datasets(cfg: &PipelineConfig) -> Vec<(String, Result<Dataset, CliError>)> {
    cfg.manifest
        .datasets
        .par_iter()
        .map(|d| {
            let loaded = match &d.kind {
                DatasetKind::Similarity { format } => {
                    load_similarity_dataset(&d.path, *format).map(|l| Dataset::Similarity(l.records))
                }
                DatasetKind::Analogy => load_analogy_dataset(&d.path).map(|l| Dataset::Analogy(l.records)),
            };
            (d.name.clone(), loaded.map_err(CliError::from))
        })
        .collect()
}

fn vocabulary(d: &Dataset) -> BTreeSet<String> {
    match d {
        Dataset::Similarity(p) => similarity_vocabulary(p),
        Dataset::Analogy(q) => analogy_vocabulary(q),
    }
}

pub fn load_graph(cfg: &PipelineConfig) -> Result<(DiGraph, usize), CliError> {
    let parsed = parse_edge_list(&cfg.manifest.graph_path, cfg.manifest.graph_format)?;
    for d in parsed.diagnostics.iter().take(5) {
        warn!("{}:{}: {}", cfg.manifest.graph_path.display(), d.line, d.message);
    }
    let g = graph_from_records(&parsed.records)?;
    info!(
        "graph: {} nodes, {} edges ({} malformed lines skipped)",
        g.node_count(),
        g.edge_count(),
        parsed.diagnostics.len()
    );
    Ok((g, parsed.diagnostics.len()))
}

pub fn cmd_extract(cfg: &PipelineConfig) -> Result<StageOutcome, CliError> {
    let (graph, malformed) = load_graph(cfg)?;
    extract_from_graph(cfg, &graph, malformed)
}

pub fn extract_from_graph(cfg: &PipelineConfig, graph: &DiGraph, malformed: usize) -> Result<StageOutcome, CliError> {
    let dir = stage_dir(cfg, SUBGRAPH_DIR)?;
    let mut errors = Vec::new();
    let datasets = with_pool(cfg, || load_datasets(cfg))?;
    let mut vocabs = Vec::new();
    let mut coverage = Vec::new();
    let mut all_words = BTreeSet::new();
    for ((name, d), entry) in datasets.iter().zip(&cfg.manifest.datasets) {
        match d {
            Ok(d) => {
                let v = vocabulary(d);
                let kind = match entry.kind {
                    DatasetKind::Similarity { .. } => "similarity",
                    DatasetKind::Analogy => "analogy",
                };
                coverage.push(DatasetCoverage {
                    dataset: name.clone(),
                    kind: kind.into(),
                    coverage: vocab_overlap(&v, graph, &cfg.label_mapper),
                });
                all_words.extend(v.iter().cloned());
                vocabs.push(v);
            }
            Err(e) => errors.push(CellError {
                dataset: Some(name.clone()),
                ..CellError::new("extract", e)
            }),
        }
    }
    let total_overlap = all_words
        .iter()
        .filter(|w| graph.index_of(&cfg.label_mapper.map(w)).is_some())
        .count();

    let (centers, missing) = partition_centers(&cfg.manifest.centers, &vocabs, graph, &cfg.label_mapper);
    for m in &missing {
        errors.push(CellError {
            center: Some(m.clone()),
            ..CellError::new("extract", format!("center {m:?} is not a node of the graph"))
        });
    }
    if centers.is_empty() {
        write_json(
            &dir.join("index.json"),
            &SubgraphIndex {
                centers: Vec::new(),
                entries: Vec::new(),
                errors: errors.clone(),
            },
        )?;
        return Err(CliError::Core(restore_core::Error::InvalidArgument(
            "no center nodes resolved".into(),
        )));
    }
    info!("extract: {} centers, hops {:?}", centers.len(), cfg.manifest.hops);

    let hops: Vec<u8> = cfg.manifest.hops.iter().copied().collect();
    let cells: Vec<(usize, &str, u8)> = centers
        .iter()
        .enumerate()
        .flat_map(|(i, c)| hops.iter().map(move |&h| (i, c.label.as_str(), h)))
        .collect();
    let results: Vec<(Result<SubgraphEntry, CellError>, f64)> = with_pool(cfg, || {
        cells
            .par_iter()
            .map(|&(id, center, hop)| {
                let t = Instant::now();
                let r = (|| {
                    let sub = khop_ego_subgraph(graph, center, hop as usize)?;
                    let file = format!("c{id:04}_{}_h{hop}.tsv", slug(center));
                    write_graph_file(&sub, &dir.join(&file))?;
                    Ok::<_, restore_core::Error>(SubgraphEntry {
                        center: center.to_owned(),
                        center_id: id,
                        hop,
                        file,
                        node_count: sub.node_count(),
                        edge_count: sub.edge_count(),
                    })
                })()
                .map_err(|e| CellError::cell("extract", center, hop, None, e));
                (r, ms(t))
            })
            .collect()
    })?;

    let mut entries = Vec::new();
    let mut timings = Timings::new();
    let mut outcome = StageOutcome {
        succeeded: 0,
        failed: missing.len(),
    };
    for ((id, _, hop), (r, t)) in cells.iter().zip(results) {
        timings.insert(cell_key(*id, *hop, None), t);
        match r {
            Ok(e) => {
                outcome.succeeded += 1;
                entries.push(e);
            }
            Err(e) => {
                outcome.failed += 1;
                errors.push(e);
            }
        }
    }
    let per_hop = hops
        .iter()
        .filter_map(|&h| {
            let v: Vec<usize> = entries.iter().filter(|e| e.hop == h).map(|e| e.node_count).collect();
            let e: Vec<usize> = entries.iter().filter(|e| e.hop == h).map(|e| e.edge_count).collect();
            Some(HopStats {
                hop: h,
                subgraphs: v.len(),
                nodes: SizeSummary::of(&v)?,
                edges: SizeSummary::of(&e)?,
            })
        })
        .collect();
    let stats = ExtractStats {
        graph: graph_stats(graph),
        malformed_lines: malformed,
        datasets: coverage,
        total_overlap,
        centers_requested: centers.len() + missing.len(),
        centers_resolved: centers.len(),
        per_hop,
    };
    write_json(&dir.join("stats.json"), &stats)?;
    write_json(&dir.join("timings.json"), &timings)?;
    write_json(
        &dir.join("index.json"),
        &SubgraphIndex {
            centers: centers.iter().map(|c| c.label.clone()).collect(),
            entries,
            errors,
        },
    )?;
    outcome.check("extract")
}

pub fn cmd_embed(cfg: &PipelineConfig) -> Result<StageOutcome, CliError> {
    let sub_dir = cfg.output_dir.join(SUBGRAPH_DIR);
    require(&[sub_dir.join("index.json")])?;
    let index: SubgraphIndex = read_json(&sub_dir.join("index.json"))?;
    let dir = stage_dir(cfg, EMBEDDING_DIR)?;
    let cells: Vec<(&SubgraphEntry, Algorithm)> = index
        .entries
        .iter()
        .flat_map(|e| cfg.manifest.algorithms.iter().map(move |&a| (e, a)))
        .collect();
    info!("embed: {} cells", cells.len());

    let results: Vec<(Result<EmbedEntry, CellError>, f64)> = with_pool(cfg, || {
        cells
            .par_iter()
            .map(|&(sub, algo)| {
                let t = Instant::now();
                let r = embed_cell(cfg, &sub_dir, &dir, sub, algo)
                    .map_err(|e| CellError::cell("embed", &sub.center, sub.hop, Some(algo), e));
                (r, ms(t))
            })
            .collect()
    })?;
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    let mut timings = Timings::new();
    let mut outcome = StageOutcome::default();
    for ((sub, algo), (r, t)) in cells.iter().zip(results) {
        timings.insert(cell_key(sub.center_id, sub.hop, Some(*algo)), t);
        match r {
            Ok(e) => {
                outcome.succeeded += 1;
                entries.push(e);
            }
            Err(e) => {
                outcome.failed += 1;
                errors.push(e);
            }
        }
    }
    write_json(&dir.join("timings.json"), &timings)?;
    write_json(&dir.join("index.json"), &EmbedIndex { entries, errors })?;
    outcome.check("embed")
}

fn embed_cell(
    cfg: &PipelineConfig,
    sub_dir: &Path,
    dir: &Path,
    sub: &SubgraphEntry,
    algo: Algorithm,
) -> Result<EmbedEntry, CliError> {
    let file = format!("c{:04}_h{}_{}.emb", sub.center_id, sub.hop, algo.name());
    let path = dir.join(&file);
    let requested = cfg.dim_for(sub.hop);
    let seed = cell_seed(cfg.seed, &sub.center, sub.hop, algo);
    let entry = |effective: usize| EmbedEntry {
        center: sub.center.clone(),
        center_id: sub.center_id,
        hop: sub.hop,
        algorithm: algo,
        file: file.clone(),
        node_count: sub.node_count,
        requested_dim: requested,
        effective_dim: effective,
        seed,
    };
    if cfg.resume && path.exists() {
        if let Ok(f) = read_embedding(&path) {
            if f.requested_dim == requested && f.labels.len() == sub.node_count {
                return Ok(entry(f.embedding.dim()));
            }
        }
    }
    let g = read_graph_file(&sub_dir.join(&sub.file))?;
    if g.node_count() > cfg.max_nodes {
        return Err(CliError::Config(format!(
            "subgraph has {} nodes, above max_nodes = {}",
            g.node_count(),
            cfg.max_nodes
        )));
    }
    let emb = embed(&g, algo, requested, &cfg.params, seed)?;
    if emb.dim() != requested {
        info!(
            "{} {} hop {}: requested {requested}, effective {}",
            sub.center,
            algo.name(),
            sub.hop,
            emb.dim()
        );
    }
    let out = EmbeddingFile {
        algorithm: algo.name().into(),
        center: sub.center.clone(),
        hop: sub.hop,
        requested_dim: requested,
        labels: g.labels().to_vec(),
        embedding: emb,
    };
    write_embedding(&path, &out)?;
    if cfg.text_embeddings {
        write_text_export(&dir.join(format!("{file}.txt")), &out)?;
    }
    Ok(entry(out.embedding.dim()))
}

pub fn cmd_reconstruct(cfg: &PipelineConfig) -> Result<StageOutcome, CliError> {
    let sub_dir = cfg.output_dir.join(SUBGRAPH_DIR);
    let emb_dir = cfg.output_dir.join(EMBEDDING_DIR);
    require(&[sub_dir.join("index.json"), emb_dir.join("index.json")])?;
    let subs: SubgraphIndex = read_json(&sub_dir.join("index.json"))?;
    let embs: EmbedIndex = read_json(&emb_dir.join("index.json"))?;
    let sub_files: BTreeMap<(usize, u8), &SubgraphEntry> =
        subs.entries.iter().map(|e| ((e.center_id, e.hop), e)).collect();
    let dir = stage_dir(cfg, RECON_DIR)?;
    info!("reconstruct: {} cells", embs.entries.len());

    let results: Vec<(Result<ReconEntry, CellError>, f64)> = with_pool(cfg, || {
        embs.entries
            .par_iter()
            .map(|e| {
                let t = Instant::now();
                let r = (|| {
                    let sub = sub_files
                        .get(&(e.center_id, e.hop))
                        .ok_or_else(|| CliError::Format(format!("no subgraph for {}", e.file)))?;
                    let g = read_graph_file(&sub_dir.join(&sub.file))?;
                    let emb = read_embedding(&emb_dir.join(&e.file))?;
                    let (report, preds) = reconstruction_report(
                        &emb.embedding,
                        &g,
                        cfg.scorer_for(e.algorithm),
                        cfg.threshold,
                        &cfg.prec_fractions,
                    )?;
                    let stem = format!("c{:04}_h{}_{}", e.center_id, e.hop, e.algorithm.name());
                    let file = format!("{stem}.json");
                    let map_score = report.map_score;
                    write_json(
                        &dir.join(&file),
                        &ReconCellFile {
                            center: e.center.clone(),
                            hop: e.hop,
                            algorithm: e.algorithm,
                            report,
                        },
                    )?;
                    let mut dot_file = None;
                    if cfg.dot {
                        let recon = predicted_graph(&preds, g.labels());
                        let title = format!("{} {}-hop {}", e.center, e.hop, e.algorithm.display());
                        if let Some(text) = dot::render(&title, &g, &recon) {
                            let name = format!("{stem}.dot");
                            let p = dir.join(&name);
                            fs::write(&p, text).map_err(|err| CliError::io(&p, err))?;
                            dot_file = Some(name);
                        }
                    }
                    Ok::<_, CliError>(ReconEntry {
                        center: e.center.clone(),
                        center_id: e.center_id,
                        hop: e.hop,
                        algorithm: e.algorithm,
                        file,
                        dot_file,
                        map_score,
                    })
                })()
                .map_err(|err| CellError::cell("reconstruct", &e.center, e.hop, Some(e.algorithm), err));
                (r, ms(t))
            })
            .collect()
    })?;
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    let mut timings = Timings::new();
    let mut outcome = StageOutcome::default();
    for (e, (r, t)) in embs.entries.iter().zip(results) {
        timings.insert(cell_key(e.center_id, e.hop, Some(e.algorithm)), t);
        match r {
            Ok(x) => {
                outcome.succeeded += 1;
                entries.push(x);
            }
            Err(x) => {
                outcome.failed += 1;
                errors.push(x);
            }
        }
    }
    write_json(&dir.join("timings.json"), &timings)?;
    write_json(&dir.join("index.json"), &ReconIndex { entries, errors })?;
    outcome.check("reconstruct")
}

pub fn cmd_semantic(cfg: &PipelineConfig) -> Result<StageOutcome, CliError> {
    let emb_dir = cfg.output_dir.join(EMBEDDING_DIR);
    require(&[emb_dir.join("index.json")])?;
    let embs: EmbedIndex = read_json(&emb_dir.join("index.json"))?;
    let dir = stage_dir(cfg, SEMANTIC_DIR)?;
    let datasets = with_pool(cfg, || load_datasets(cfg))?;
    let mut errors = Vec::new();
    let mut outcome = StageOutcome::default();
    let mut loaded = Vec::new();
    for (name, d) in datasets {
        match d {
            Ok(d) => loaded.push((name, d)),
            Err(e) => {
                outcome.failed += 1;
                errors.push(CellError {
                    dataset: Some(name),
                    ..CellError::new("semantic", e)
                });
            }
        }
    }

    let mut groups: BTreeMap<(u8, Algorithm), Vec<&EmbedEntry>> = BTreeMap::new();
    for e in &embs.entries {
        groups.entry((e.hop, e.algorithm)).or_default().push(e);
    }
    let groups: Vec<((u8, Algorithm), Vec<&EmbedEntry>)> = groups.into_iter().collect();
    info!("semantic: {} datasets x {} (hop, algorithm) cells", loaded.len(), groups.len());

    let results: Vec<(Vec<Result<SemanticCell, CellError>>, f64)> = with_pool(cfg, || {
        groups
            .par_iter()
            .map(|((hop, algo), entries)| {
                let t = Instant::now();
                let mut set = EmbeddingSet::new();
                let mut out = Vec::new();
                for e in entries {
                    match read_embedding(&emb_dir.join(&e.file))
                        .and_then(|f| Ok(LabeledEmbedding::new(&e.center, f.labels, f.embedding)?))
                    {
                        Ok(le) => set.push(le),
                        Err(err) => out.push(Err(CellError::cell("semantic", &e.center, *hop, Some(*algo), err))),
                    }
                }
                for (name, d) in &loaded {
                    let r = match d {
                        Dataset::Similarity(p) => similarity_mean_distance(name, p, &set, &cfg.label_mapper),
                        Dataset::Analogy(q) => analogy_distance(name, q, &set, cfg.analogy_mode, &cfg.label_mapper),
                    };
                    out.push(
                        r.map(|report| SemanticCell {
                            dataset: name.clone(),
                            hop: *hop,
                            algorithm: *algo,
                            report: report.with_hop(*hop),
                        })
                        .map_err(|err| CellError {
                            hop: Some(*hop),
                            algorithm: Some(*algo),
                            dataset: Some(name.clone()),
                            ..CellError::new("semantic", err)
                        }),
                    );
                }
                (out, ms(t))
            })
            .collect()
    })?;
    let mut cells = Vec::new();
    let mut timings = Timings::new();
    for (((hop, algo), _), (rs, t)) in groups.iter().zip(results) {
        timings.insert(format!("h{hop}/{}", algo.name()), t);
        for r in rs {
            match r {
                Ok(c) => {
                    outcome.succeeded += 1;
                    cells.push(c);
                }
                Err(e) => {
                    outcome.failed += 1;
                    errors.push(e);
                }
            }
        }
    }
    write_json(&dir.join("timings.json"), &timings)?;
    let averages = semantic_averages(&cells);
    write_json(&dir.join("reports.json"), &SemanticIndex { cells, averages, errors })?;
    if loaded.is_empty() && outcome.failed == 0 {
        // nothing to evaluate is not a failure
        return Ok(outcome);
    }
    outcome.check("semantic")
}

pub fn cmd_report(cfg: &PipelineConfig) -> Result<StageOutcome, CliError> {
    let result = report::assemble(cfg)?;
    report::write(cfg, &result)?;
    Ok(StageOutcome {
        succeeded: 1,
        failed: result.errors.len(),
    })
}

/// All stages in order. Stage-level failures stop the run; cell failures
/// are collected and reported.
pub fn run_all(cfg: &PipelineConfig) -> Result<StageOutcome, CliError> {
    let mut total = StageOutcome::default();
    total = total.merge(cmd_extract(cfg)?);
    total = total.merge(cmd_embed(cfg)?);
    total = total.merge(cmd_reconstruct(cfg)?);
    total = total.merge(cmd_semantic(cfg)?);
    let r = cmd_report(cfg)?;
    Ok(StageOutcome {
        succeeded: total.succeeded + r.succeeded,
        failed: r.failed,
    })
}
