//! Consolidated results: one JSON document covering every requested cell,
//! plus CSV tables for reading.
//!
//! `run_result.json` carries timings; `run_result.canonical.json` drops
//! timings and the output directory and serializes with sorted keys, so two
//! runs of the same config and seed produce identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use restore_core::graph::GraphDiff;
use restore_core::reconstruct::ReconReport;
use restore_core::semantic::SemanticReport;
use restore_core::Algorithm;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::PipelineConfig;
use crate::pipeline::{
    cell_key, read_json, require, write_json, CellError, EmbedIndex, ExtractStats, ReconCellFile, ReconIndex,
    SemanticAverage, SemanticIndex, SubgraphIndex, EMBEDDING_DIR, RECON_DIR, REPORT_DIR, SEMANTIC_DIR, SUBGRAPH_DIR,
};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconCell {
    pub center: String,
    pub center_id: usize,
    pub hop: u8,
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReconReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticResult {
    pub dataset: String,
    pub hop: u8,
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SemanticReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconRow {
    pub algorithm: Algorithm,
    pub hop: u8,
    pub cells: usize,
    pub map_score: f64,
    /// (fraction, mean precision)
    pub precision: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffRow {
    pub algorithm: Algorithm,
    pub hop: u8,
    pub cells: usize,
    pub nodes: f64,
    pub added_nodes: f64,
    pub missing_nodes: f64,
    pub edges: f64,
    pub added_edges: f64,
    pub missing_edges: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticRow {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub hop: u8,
    pub mean_distance: f64,
    pub pairs_evaluated: usize,
    pub pairs_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    pub reconstruction: Vec<ReconRow>,
    pub diffs: Vec<DiffRow>,
    pub semantic: Vec<SemanticRow>,
    pub semantic_average: Vec<SemanticAverage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: u32,
    pub seed: u64,
    pub config: PipelineConfig,
    pub extract: ExtractStats,
    pub reconstruction: Vec<ReconCell>,
    pub semantic: Vec<SemanticResult>,
    pub tables: Tables,
    pub errors: Vec<CellError>,
    /// stage -> cell key -> milliseconds
    pub timing: BTreeMap<String, BTreeMap<String, f64>>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

fn first_error<'a>(errors: &'a [CellError], pred: impl Fn(&CellError) -> bool) -> Option<&'a CellError> {
    errors.iter().find(|e| pred(e))
}

pub fn assemble(cfg: &PipelineConfig) -> Result<RunResult, CliError> {
    let out = &cfg.output_dir;
    let sub_dir = out.join(SUBGRAPH_DIR);
    let emb_dir = out.join(EMBEDDING_DIR);
    let rec_dir = out.join(RECON_DIR);
    let sem_dir = out.join(SEMANTIC_DIR);
    let inputs = [
        sub_dir.join("index.json"),
        sub_dir.join("stats.json"),
        emb_dir.join("index.json"),
        rec_dir.join("index.json"),
        sem_dir.join("reports.json"),
    ];
    require(&inputs)?;
    let subs: SubgraphIndex = read_json(&inputs[0])?;
    let extract: ExtractStats = read_json(&inputs[1])?;
    let embs: EmbedIndex = read_json(&inputs[2])?;
    let recs: ReconIndex = read_json(&inputs[3])?;
    let sem: SemanticIndex = read_json(&inputs[4])?;

    let mut timing = BTreeMap::new();
    for (stage, dir) in [
        ("extract", &sub_dir),
        ("embed", &emb_dir),
        ("reconstruct", &rec_dir),
        ("semantic", &sem_dir),
    ] {
        let p = dir.join("timings.json");
        if p.exists() {
            timing.insert(stage.to_owned(), read_json(&p)?);
        }
    }

    let mut errors = Vec::new();
    errors.extend(subs.errors.iter().cloned());
    errors.extend(embs.errors.iter().cloned());
    errors.extend(recs.errors.iter().cloned());
    errors.extend(sem.errors.iter().cloned());

    // every (center, hop, algorithm) that was asked for
    let by_cell: BTreeMap<(&str, u8, Algorithm), &crate::pipeline::ReconEntry> =
        recs.entries.iter().map(|e| ((e.center.as_str(), e.hop, e.algorithm), e)).collect();
    let mut reconstruction = Vec::new();
    for (center_id, center) in subs.centers.iter().enumerate() {
        for &hop in &cfg.manifest.hops {
            for &algorithm in &cfg.manifest.algorithms {
                let (report, error) = match by_cell.get(&(center.as_str(), hop, algorithm)) {
                    Some(e) => {
                        let f: ReconCellFile = read_json(&rec_dir.join(&e.file))?;
                        (Some(f.report), None)
                    }
                    None => {
                        let msg = first_error(&errors, |x| {
                            x.center.as_deref() == Some(center.as_str())
                                && x.hop == Some(hop)
                                && x.algorithm.is_none_or(|a| a == algorithm)
                        })
                        .map_or_else(|| "no output produced".to_owned(), |x| format!("{}: {}", x.stage, x.message));
                        (None, Some(msg))
                    }
                };
                reconstruction.push(ReconCell {
                    center: center.clone(),
                    center_id,
                    hop,
                    algorithm,
                    report,
                    error,
                });
            }
        }
    }

    let hops_run: BTreeSet<(u8, Algorithm)> = embs.entries.iter().map(|e| (e.hop, e.algorithm)).collect();
    let sem_cells: BTreeMap<(&str, u8, Algorithm), &SemanticReport> = sem
        .cells
        .iter()
        .map(|c| ((c.dataset.as_str(), c.hop, c.algorithm), &c.report))
        .collect();
    let mut semantic = Vec::new();
    for d in &cfg.manifest.datasets {
        for &hop in &cfg.manifest.hops {
            for &algorithm in &cfg.manifest.algorithms {
                let report = sem_cells.get(&(d.name.as_str(), hop, algorithm)).map(|r| (*r).clone());
                let error = match report {
                    Some(_) => None,
                    None => Some(
                        first_error(&errors, |x| {
                            x.dataset.as_deref() == Some(d.name.as_str())
                                && x.hop.is_none_or(|h| h == hop)
                                && x.algorithm.is_none_or(|a| a == algorithm)
                        })
                        .map_or_else(
                            || {
                                if hops_run.contains(&(hop, algorithm)) {
                                    "no output produced".to_owned()
                                } else {
                                    "no embeddings for this hop and algorithm".to_owned()
                                }
                            },
                            |x| format!("{}: {}", x.stage, x.message),
                        ),
                    ),
                };
                semantic.push(SemanticResult {
                    dataset: d.name.clone(),
                    hop,
                    algorithm,
                    report,
                    error,
                });
            }
        }
    }

    let tables = build_tables(cfg, &reconstruction, &semantic, sem.averages.clone());
    Ok(RunResult {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        config: cfg.clone(),
        extract,
        reconstruction,
        semantic,
        tables,
        errors,
        timing,
    })
}

fn build_tables(
    cfg: &PipelineConfig,
    recon: &[ReconCell],
    semantic: &[SemanticResult],
    semantic_average: Vec<SemanticAverage>,
) -> Tables {
    let mut reconstruction = Vec::new();
    let mut diffs = Vec::new();
    for &algorithm in &cfg.manifest.algorithms {
        for &hop in &cfg.manifest.hops {
            let reports: Vec<&ReconReport> = recon
                .iter()
                .filter(|c| c.algorithm == algorithm && c.hop == hop)
                .filter_map(|c| c.report.as_ref())
                .collect();
            if reports.is_empty() {
                continue;
            }
            let precision = cfg
                .prec_fractions
                .iter()
                .enumerate()
                .map(|(i, &f)| (f, mean(reports.iter().map(|r| r.prec_at[i].precision))))
                .collect();
            reconstruction.push(ReconRow {
                algorithm,
                hop,
                cells: reports.len(),
                map_score: mean(reports.iter().map(|r| r.map_score)),
                precision,
            });
            let d = |f: fn(&GraphDiff) -> usize| mean(reports.iter().map(|r| f(&r.diff) as f64));
            diffs.push(DiffRow {
                algorithm,
                hop,
                cells: reports.len(),
                nodes: mean(reports.iter().map(|r| r.node_count as f64)),
                added_nodes: d(|x| x.added_nodes),
                missing_nodes: d(|x| x.missing_nodes),
                edges: mean(reports.iter().map(|r| r.edge_count as f64)),
                added_edges: d(|x| x.added_edges),
                missing_edges: d(|x| x.missing_edges),
            });
        }
    }
    let semantic = semantic
        .iter()
        .filter_map(|s| {
            let r = s.report.as_ref()?;
            Some(SemanticRow {
                dataset: s.dataset.clone(),
                algorithm: s.algorithm,
                hop: s.hop,
                mean_distance: r.mean_distance,
                pairs_evaluated: r.pairs_evaluated,
                pairs_skipped: r.pairs_skipped,
            })
        })
        .collect();
    Tables {
        reconstruction,
        diffs,
        semantic,
        semantic_average,
    }
}

/// The result without run-dependent fields, as a sorted-key JSON value.
pub fn canonical_value(r: &RunResult) -> Value {
    let mut v = serde_json::to_value(r).expect("run result serializes");
    if let Value::Object(m) = &mut v {
        m.remove("timing");
        if let Some(Value::Object(c)) = m.get_mut("config") {
            c.remove("output_dir");
        }
    }
    v
}

pub fn canonical_json(r: &RunResult) -> String {
    let mut s = serde_json::to_string(&canonical_value(r)).expect("run result serializes");
    s.push('\n');
    s
}

/// Parses and checks a serialized result: schema version, one of report or
/// error per cell, metric ranges, table consistency and timing coverage.
pub fn validate_run_result(text: &str) -> Result<RunResult, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Invalid(vec![e.to_string()]))?;
    match v.get("schema_version").and_then(Value::as_u64) {
        Some(x) if x == SCHEMA_VERSION as u64 => {}
        other => return Err(CliError::Invalid(vec![format!("unsupported schema_version {other:?}")])),
    }
    let r: RunResult = serde_json::from_value(v).map_err(|e| CliError::Invalid(vec![e.to_string()]))?;
    let mut problems = Vec::new();
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    for c in &r.reconstruction {
        let at = format!("reconstruction {} h{} {}", c.center, c.hop, c.algorithm.name());
        match (&c.report, &c.error) {
            (Some(rep), None) => {
                if !unit(rep.map_score) || rep.prec_at.iter().any(|p| !unit(p.precision)) {
                    problems.push(format!("{at}: metric outside [0, 1]"));
                }
                if rep.prec_at.len() != r.config.prec_fractions.len() {
                    problems.push(format!("{at}: precision list length"));
                }
            }
            (None, Some(_)) => {}
            _ => problems.push(format!("{at}: needs exactly one of report or error")),
        }
    }
    for s in &r.semantic {
        match (&s.report, &s.error) {
            (Some(rep), None) if !(rep.mean_distance >= 0.0) => {
                problems.push(format!("semantic {} h{}: negative distance", s.dataset, s.hop))
            }
            (Some(_), None) | (None, Some(_)) => {}
            _ => problems.push(format!("semantic {} h{}: needs exactly one of report or error", s.dataset, s.hop)),
        }
    }
    let requested = r.extract.centers_resolved * r.config.manifest.hops.len() * r.config.manifest.algorithms.len();
    if r.reconstruction.len() != requested {
        problems.push(format!(
            "expected {requested} reconstruction cells, found {}",
            r.reconstruction.len()
        ));
    }
    for row in &r.tables.reconstruction {
        let n = r
            .reconstruction
            .iter()
            .filter(|c| c.algorithm == row.algorithm && c.hop == row.hop && c.report.is_some())
            .count();
        if n != row.cells {
            problems.push(format!("table row {} h{} counts {} cells, found {n}", row.algorithm.name(), row.hop, row.cells));
        }
    }
    // cells that produced output were timed in every stage they went through
    for c in r.reconstruction.iter().filter(|c| c.report.is_some()) {
        let key = cell_key(c.center_id, c.hop, Some(c.algorithm));
        let timed = |stage: &str| r.timing.get(stage).is_some_and(|t| t.contains_key(&key));
        if !timed("embed") || !timed("reconstruct") {
            problems.push(format!("no timing for {key}"));
        }
    }
    if problems.is_empty() {
        Ok(r)
    } else {
        Err(CliError::Invalid(problems))
    }
}

fn hop_label(h: u8) -> String {
    format!("{h}-hop")
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Format(format!("{}: {e}", path.display()))
}

/// `GE Algorithm,Hop,mAP,Prec@0.1,...`, one row per (algorithm, hop).
pub fn write_recon_csv(path: &Path, r: &RunResult) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut head = vec!["GE Algorithm".to_owned(), "Hop".into(), "mAP".into()];
    head.extend(r.config.prec_fractions.iter().map(|f| format!("Prec@{f:.1}")));
    w.write_record(&head).map_err(csv_err(path))?;
    for row in &r.tables.reconstruction {
        let mut rec = vec![row.algorithm.display().to_owned(), hop_label(row.hop), f4(row.map_score)];
        rec.extend(row.precision.iter().map(|&(_, p)| f4(p)));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_diff_csv(path: &Path, r: &RunResult) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record([
        "GE Algorithm",
        "Hop",
        "Avg. V",
        "Avg. added V",
        "Avg. missing V",
        "Avg. E",
        "Avg. added E",
        "Avg. missing E",
    ])
    .map_err(csv_err(path))?;
    for d in &r.tables.diffs {
        w.write_record([
            d.algorithm.display().to_owned(),
            hop_label(d.hop),
            f4(d.nodes),
            f4(d.added_nodes),
            f4(d.missing_nodes),
            f4(d.edges),
            f4(d.added_edges),
            f4(d.missing_edges),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Datasets as rows, one column per (algorithm, hop), closing Average row.
pub fn write_semantic_csv(path: &Path, r: &RunResult) -> Result<(), CliError> {
    let cols: Vec<(Algorithm, u8)> = r
        .config
        .manifest
        .algorithms
        .iter()
        .flat_map(|&a| r.config.manifest.hops.iter().map(move |&h| (a, h)))
        .collect();
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut head = vec!["Dataset".to_owned()];
    head.extend(cols.iter().map(|(a, h)| format!("{} {}", a.display(), hop_label(*h))));
    w.write_record(&head).map_err(csv_err(path))?;
    let cell = |ds: &str, a: Algorithm, h: u8| {
        r.tables
            .semantic
            .iter()
            .find(|s| s.dataset == ds && s.algorithm == a && s.hop == h)
            .map_or_else(String::new, |s| f4(s.mean_distance))
    };
    for d in &r.config.manifest.datasets {
        let mut rec = vec![d.name.clone()];
        rec.extend(cols.iter().map(|&(a, h)| cell(&d.name, a, h)));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    let mut avg = vec!["Average".to_owned()];
    avg.extend(cols.iter().map(|&(a, h)| {
        r.tables
            .semantic_average
            .iter()
            .find(|s| s.algorithm == a && s.hop == h)
            .map_or_else(String::new, |s| f4(s.mean_distance))
    }));
    w.write_record(&avg).map_err(csv_err(path))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write(cfg: &PipelineConfig, r: &RunResult) -> Result<(), CliError> {
    let dir = cfg.output_dir.join(REPORT_DIR);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    write_json(&dir.join("run_result.json"), r)?;
    let canon = dir.join("run_result.canonical.json");
    fs::write(&canon, canonical_json(r)).map_err(|e| CliError::io(&canon, e))?;
    write_recon_csv(&dir.join("reconstruction.csv"), r)?;
    write_diff_csv(&dir.join("diffs.csv"), r)?;
    write_semantic_csv(&dir.join("semantic.csv"), r)?;
    Ok(())
}

pub fn canonical_path(cfg: &PipelineConfig) -> std::path::PathBuf {
    cfg.output_dir.join(REPORT_DIR).join("run_result.canonical.json")
}
