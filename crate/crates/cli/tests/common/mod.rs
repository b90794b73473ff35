#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use restore_cli::{Overrides, PipelineConfig};

/// A directory holding a graph, optional datasets and a manifest.
pub struct Fixture {
    pub dir: tempfile::TempDir,
}

impl Fixture {
    pub fn new(edges: &[(&str, &str)]) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::new();
        for (a, b) in edges {
            text.push_str(&format!("/c/en/{a}\t/r/RelatedTo\t/c/en/{b}\n"));
        }
        fs::write(dir.path().join("graph.tsv"), text).unwrap();
        Fixture { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn file(&self, name: &str, text: &str) -> &Self {
        fs::write(self.path(name), text).unwrap();
        self
    }

    /// Writes `manifest.conf` with the graph line prepended.
    pub fn manifest(&self, body: &str) -> PathBuf {
        let p = self.path("manifest.conf");
        fs::write(&p, format!("graph = graph.tsv\n{body}")).unwrap();
        p
    }

    pub fn config(&self, body: &str, out: &str) -> PipelineConfig {
        let m = self.manifest(body);
        let o = Overrides {
            output: Some(self.path(out)),
            workers: Some(2),
            ..Default::default()
        };
        PipelineConfig::load(&m, &o).unwrap()
    }
}

pub fn files_with_ext(dir: &Path, ext: &str) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(ext))
        .collect();
    v.sort();
    v
}

pub const SMALL_TRAINING: &str = "epochs = 3\nnode2vec.walks_per_node = 2\nnode2vec.walk_length = 10\n";
