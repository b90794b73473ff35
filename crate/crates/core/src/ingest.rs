//! Edge-list and manifest parsing.
//!
//! Two edge-list layouts are read: `tsv3`, three tab-separated columns
//! (src, relation, dst), and `tsv_kgtk`, a headered table whose `node1`,
//! `relation` and `node2` columns are selected by name. Relations are parsed
//! and then dropped. Up to 1% malformed data lines are tolerated and
//! reported as diagnostics.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::Algorithm;
use crate::error::{Error, Result};
use crate::graph::{DiGraph, GraphBuilder, NodeId};
use crate::semantic::{Diagnostic, LabelMapper, SimilarityFormat};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: String,
    pub relation: String,
    pub dst: String,
    pub source_line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeFormat {
    Tsv3,
    TsvKgtk,
}

impl EdgeFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tsv3" => Ok(EdgeFormat::Tsv3),
            "tsv_kgtk" | "kgtk" => Ok(EdgeFormat::TsvKgtk),
            other => Err(Error::InvalidArgument(format!("unknown edge format {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeFormat::Tsv3 => "tsv3",
            EdgeFormat::TsvKgtk => "tsv_kgtk",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedEdges {
    pub records: Vec<EdgeRecord>,
    pub diagnostics: Vec<Diagnostic>,
    pub data_lines: usize,
}

/// Largest tolerated share of malformed data lines.
pub const MALFORMED_TOLERANCE: f64 = 0.01;

struct Columns {
    src: usize,
    rel: usize,
    dst: usize,
}

pub fn parse_edge_reader<R: BufRead>(reader: R, format: EdgeFormat, path: &Path) -> Result<ParsedEdges> {
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut data_lines = 0usize;
    let mut columns = match format {
        EdgeFormat::Tsv3 => Some(Columns { src: 0, rel: 1, dst: 2 }),
        EdgeFormat::TsvKgtk => None,
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let Some(cols) = &columns else {
            let find = |name: &str| fields.iter().position(|f| f.trim() == name);
            match (find("node1"), find("relation"), find("node2")) {
                (Some(src), Some(rel), Some(dst)) => columns = Some(Columns { src, rel, dst }),
                _ => {
                    return Err(Error::Parse {
                        path: path.to_owned(),
                        message: format!(
                            "line {}: KGTK header must name node1, relation and node2 columns",
                            i + 1
                        ),
                    })
                }
            }
            continue;
        };
        data_lines += 1;
        let get = |k: usize| fields.get(k).map(|s| s.trim()).filter(|s| !s.is_empty());
        match (get(cols.src), fields.get(cols.rel), get(cols.dst)) {
            (Some(src), Some(rel), Some(dst)) => records.push(EdgeRecord {
                src: src.to_owned(),
                relation: rel.trim().to_owned(),
                dst: dst.to_owned(),
                source_line: i + 1,
            }),
            _ => diagnostics.push(Diagnostic {
                line: i + 1,
                message: format!("expected src, relation, dst columns: {line:?}"),
            }),
        }
    }
    if data_lines > 0 {
        let share = diagnostics.len() as f64 / data_lines as f64;
        if share > MALFORMED_TOLERANCE {
            let sample = diagnostics
                .iter()
                .take(3)
                .map(|d| format!("line {}: {}", d.line, d.message))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::TooManyMalformed {
                path: path.to_owned(),
                bad: diagnostics.len(),
                total: data_lines,
                percent: 100.0 * share,
                sample,
            });
        }
    }
    Ok(ParsedEdges {
        records,
        diagnostics,
        data_lines,
    })
}

pub fn parse_edge_list(path: &Path, format: EdgeFormat) -> Result<ParsedEdges> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_reader(BufReader::new(f), format, path)
}

pub fn graph_from_records(records: &[EdgeRecord]) -> Result<DiGraph> {
    if records.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut b = GraphBuilder::new();
    for r in records {
        b.add_edge(&r.src, &r.dst)?;
    }
    Ok(b.build())
}

/// Writes a graph as tsv3 preceded by one `#node<TAB>label` line per node,
/// so isolated nodes and the index order survive a round trip through
/// [`read_graph_file`]. Plain tsv3 readers see only the edges.
pub fn write_graph<W: Write>(g: &DiGraph, mut w: W) -> std::io::Result<()> {
    for l in g.labels() {
        writeln!(w, "#node\t{l}")?;
    }
    for (s, d) in g.labelled_edges() {
        writeln!(w, "{s}\t-\t{d}")?;
    }
    Ok(())
}

pub fn write_graph_file(g: &DiGraph, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    write_graph(g, &mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_graph_file(path: &Path) -> Result<DiGraph> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut b = GraphBuilder::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(label) = line.strip_prefix("#node\t") {
            b.add_node(label)?;
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                path: path.to_owned(),
                message: format!("line {}: expected src, relation, dst", i + 1),
            });
        }
        b.add_edge(fields[0], fields[2])?;
    }
    Ok(b.build())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DatasetKind {
    Similarity { format: SimilarityFormat },
    Analogy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub kind: DatasetKind,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterSpec {
    FromDatasets,
    Explicit(Vec<String>),
}

/// Batch description read from a line-oriented `key = value` file.
///
/// ```text
/// graph = cskg.tsv
/// format = tsv_kgtk
/// similarity.rg65 = rg65.tsv
/// similarity_format.men = whitespace
/// analogy.google = questions-words.txt
/// centers = from-datasets      # or: center = /c/en/smartphone (repeatable)
/// hop = 1                      # repeatable, or hops = 1,2,3
/// algorithm = hope             # repeatable, or algorithms = hope,sdne
/// seed = 42
/// ```
///
/// Any other keys are kept in `settings` for the pipeline configuration.
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub graph_path: PathBuf,
    pub graph_format: EdgeFormat,
    pub datasets: Vec<DatasetEntry>,
    pub centers: CenterSpec,
    pub hops: BTreeSet<u8>,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    pub settings: Vec<(String, String)>,
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl Manifest {
    pub fn parse(text: &str, base_dir: &Path, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_owned(),
            message: if line == 0 { message } else { format!("line {line}: {message}") },
        };
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        let mut graph_path = None;
        let mut graph_format = EdgeFormat::Tsv3;
        let mut datasets: Vec<DatasetEntry> = Vec::new();
        let mut sim_formats: Vec<(String, SimilarityFormat)> = Vec::new();
        let mut explicit = Vec::new();
        let mut from_datasets = false;
        let mut hops = BTreeSet::new();
        let mut algorithms = Vec::new();
        let mut seed = 0u64;
        let mut settings = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = match raw.find(" #") {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(n, format!("expected key = value, got {line:?}")))?;
            match key {
                "graph" => graph_path = Some(resolve(value)),
                "format" => graph_format = EdgeFormat::parse(value).map_err(|e| err(n, e.to_string()))?,
                "centers" if value == "from-datasets" => from_datasets = true,
                "centers" => explicit.extend(split_list(value).map(String::from)),
                "center" => explicit.push(value.to_owned()),
                "hop" | "hops" => {
                    for h in split_list(value) {
                        let h: u8 = h.parse().map_err(|_| err(n, format!("bad hop {h:?}")))?;
                        if !(1..=3).contains(&h) {
                            return Err(err(n, format!("hop {h} outside 1..=3")));
                        }
                        hops.insert(h);
                    }
                }
                "algorithm" | "algorithms" => {
                    for a in split_list(value) {
                        let a = Algorithm::parse(a).map_err(|e| err(n, e.to_string()))?;
                        if !algorithms.contains(&a) {
                            algorithms.push(a);
                        }
                    }
                }
                "seed" => seed = value.parse().map_err(|_| err(n, format!("bad seed {value:?}")))?,
                _ => {
                    if let Some(name) = key.strip_prefix("similarity.") {
                        datasets.push(DatasetEntry {
                            name: name.to_owned(),
                            kind: DatasetKind::Similarity {
                                format: SimilarityFormat::Tab,
                            },
                            path: resolve(value),
                        });
                    } else if let Some(name) = key.strip_prefix("analogy.") {
                        datasets.push(DatasetEntry {
                            name: name.to_owned(),
                            kind: DatasetKind::Analogy,
                            path: resolve(value),
                        });
                    } else if let Some(name) = key.strip_prefix("similarity_format.") {
                        let f = SimilarityFormat::parse(value).map_err(|e| err(n, e.to_string()))?;
                        sim_formats.push((name.to_owned(), f));
                    } else {
                        settings.push((key.to_owned(), value.to_owned()));
                    }
                }
            }
        }
        for (name, f) in sim_formats {
            let entry = datasets
                .iter_mut()
                .find(|d| d.name == name && matches!(d.kind, DatasetKind::Similarity { .. }))
                .ok_or_else(|| err(0, format!("similarity_format for unknown dataset {name:?}")))?;
            entry.kind = DatasetKind::Similarity { format: f };
        }
        let names: HashSet<&str> = datasets.iter().map(|d| d.name.as_str()).collect();
        if names.len() != datasets.len() {
            return Err(err(0, "duplicate dataset names".into()));
        }
        let graph_path = graph_path.ok_or_else(|| err(0, "missing `graph` key".into()))?;
        let centers = match (from_datasets, explicit.is_empty()) {
            (true, true) => CenterSpec::FromDatasets,
            (false, false) => CenterSpec::Explicit(explicit),
            (true, false) => return Err(err(0, "centers: both from-datasets and explicit labels".into())),
            (false, true) => return Err(err(0, "no centers given".into())),
        };
        if hops.is_empty() {
            hops.extend([1, 2, 3]);
        }
        if algorithms.is_empty() {
            algorithms = Algorithm::ALL.to_vec();
        }
        Ok(Manifest {
            graph_path,
            graph_format,
            datasets,
            centers,
            hops,
            algorithms,
            seed,
            settings,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, path)
    }
}

/// Centers found in the graph, plus explicit labels that are not.
pub fn partition_centers(
    spec: &CenterSpec,
    vocabularies: &[BTreeSet<String>],
    graph: &DiGraph,
    mapper: &LabelMapper,
) -> (Vec<NodeId>, Vec<String>) {
    match spec {
        CenterSpec::FromDatasets => {
            let mut idx: Vec<usize> = vocabularies
                .iter()
                .flatten()
                .filter_map(|w| graph.index_of(&mapper.map(w)))
                .collect();
            idx.sort_unstable();
            idx.dedup();
            (idx.into_iter().map(|i| graph.node(i)).collect(), Vec::new())
        }
        CenterSpec::Explicit(labels) => {
            let mut seen = HashSet::new();
            let mut found = Vec::new();
            let mut missing = Vec::new();
            for l in labels {
                if !seen.insert(l.as_str()) {
                    continue;
                }
                match graph.index_of(l) {
                    Some(i) => found.push(graph.node(i)),
                    None => missing.push(l.clone()),
                }
            }
            (found, missing)
        }
    }
}

/// Strict center resolution: any explicit label absent from the graph, or an
/// empty result, is an error.
pub fn resolve_centers(
    spec: &CenterSpec,
    vocabularies: &[BTreeSet<String>],
    graph: &DiGraph,
    mapper: &LabelMapper,
) -> Result<Vec<NodeId>> {
    let (found, missing) = partition_centers(spec, vocabularies, graph, mapper);
    if let Some(m) = missing.first() {
        return Err(Error::UnknownNode(m.clone()));
    }
    if found.is_empty() {
        return Err(Error::InvalidArgument("no center nodes resolved".into()));
    }
    Ok(found)
}
