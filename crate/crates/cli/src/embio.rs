//! Embedding files: a text header followed by raw little-endian f64 rows.
//!
//! ```text
//! RESTORE-EMB 1
//! algorithm hope
//! kind asymmetric
//! center /c/en/smartphone
//! hop 1
//! rows 3
//! dim 2
//! requested_dim 2
//! label /c/en/smartphone
//! label /c/en/phone
//! label /c/en/device
//! end
//! <rows * dim * 8 bytes, source rows first for asymmetric, then target>
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use restore_core::embedding::{AsymEmbedding, EmbeddingMatrix, NodeEmbedding};

use crate::CliError;

const MAGIC: &str = "RESTORE-EMB 1";

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub algorithm: String,
    pub center: String,
    pub hop: u8,
    pub requested_dim: usize,
    pub labels: Vec<String>,
    pub embedding: NodeEmbedding,
}

fn matrices(e: &NodeEmbedding) -> Vec<&EmbeddingMatrix> {
    match e {
        NodeEmbedding::Symmetric(m) => vec![m],
        NodeEmbedding::Asymmetric(a) => vec![&a.source, &a.target],
    }
}

pub fn write_embedding(path: &Path, f: &EmbeddingFile) -> Result<(), CliError> {
    let io = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let kind = match f.embedding {
        NodeEmbedding::Symmetric(_) => "symmetric",
        NodeEmbedding::Asymmetric(_) => "asymmetric",
    };
    let mut header = format!(
        "{MAGIC}\nalgorithm {}\nkind {kind}\ncenter {}\nhop {}\nrows {}\ndim {}\nrequested_dim {}\n",
        f.algorithm,
        f.center,
        f.hop,
        f.embedding.node_count(),
        f.embedding.dim(),
        f.requested_dim
    );
    for l in &f.labels {
        header.push_str("label ");
        header.push_str(l);
        header.push('\n');
    }
    header.push_str("end\n");
    w.write_all(header.as_bytes()).map_err(io)?;
    for m in matrices(&f.embedding) {
        for x in m.data() {
            w.write_all(&x.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn read_embedding(path: &Path) -> Result<EmbeddingFile, CliError> {
    let io = |e| CliError::io(path, e);
    let corrupt = |m: &str| CliError::Format(format!("{}: {m}", path.display()));
    let mut r = BufReader::new(File::open(path).map_err(io)?);
    let mut line = String::new();
    let mut next_line = |r: &mut BufReader<File>| -> Result<String, CliError> {
        line.clear();
        if r.read_line(&mut line).map_err(io)? == 0 {
            return Err(corrupt("truncated header"));
        }
        Ok(line.trim_end_matches('\n').to_owned())
    };
    if next_line(&mut r)? != MAGIC {
        return Err(corrupt("not an embedding file"));
    }
    let (mut algorithm, mut kind, mut center) = (String::new(), String::new(), String::new());
    let (mut hop, mut rows, mut dim, mut requested) = (0u8, 0usize, 0usize, 0usize);
    let mut labels = Vec::new();
    loop {
        let l = next_line(&mut r)?;
        if l == "end" {
            break;
        }
        let (k, v) = l.split_once(' ').unwrap_or((&l, ""));
        let parse_num = |v: &str| v.parse::<usize>().map_err(|_| corrupt(&format!("bad {k} {v:?}")));
        match k {
            "algorithm" => algorithm = v.to_owned(),
            "kind" => kind = v.to_owned(),
            "center" => center = v.to_owned(),
            "hop" => hop = parse_num(v)? as u8,
            "rows" => rows = parse_num(v)?,
            "dim" => dim = parse_num(v)?,
            "requested_dim" => requested = parse_num(v)?,
            "label" => labels.push(v.to_owned()),
            _ => return Err(corrupt(&format!("unknown header key {k:?}"))),
        }
    }
    if labels.len() != rows {
        return Err(corrupt("label count differs from rows"));
    }
    let read_matrix = |r: &mut BufReader<File>| -> Result<EmbeddingMatrix, CliError> {
        let mut buf = vec![0u8; rows * dim * 8];
        r.read_exact(&mut buf).map_err(|_| corrupt("truncated data"))?;
        let data = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(EmbeddingMatrix::from_vec(rows, dim, data, &algorithm)?)
    };
    let embedding = match kind.as_str() {
        "symmetric" => NodeEmbedding::Symmetric(read_matrix(&mut r)?),
        "asymmetric" => {
            let s = read_matrix(&mut r)?;
            let t = read_matrix(&mut r)?;
            NodeEmbedding::Asymmetric(AsymEmbedding::new(s, t)?)
        }
        _ => return Err(corrupt(&format!("unknown kind {kind:?}"))),
    };
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(io)? != 0 {
        return Err(corrupt("trailing bytes"));
    }
    Ok(EmbeddingFile {
        algorithm,
        center,
        hop,
        requested_dim: requested,
        labels,
        embedding,
    })
}

/// One line per node: the label then the evaluation vector, tab separated.
/// Rust's float formatting is shortest round-trip, so nothing is lost.
pub fn write_text_export(path: &Path, f: &EmbeddingFile) -> Result<(), CliError> {
    let io = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for (i, l) in f.labels.iter().enumerate() {
        let v = f.embedding.vector(i);
        let cols: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{l}\t{}", cols.join("\t")).map_err(io)?;
    }
    w.flush().map_err(io)
}
