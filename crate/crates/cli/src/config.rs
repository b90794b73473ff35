use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use restore_core::ingest::{EdgeFormat, Manifest};
use restore_core::reconstruct::{Scorer, DEFAULT_FRACTIONS, DEFAULT_THRESHOLD};
use restore_core::semantic::{AnalogyMode, LabelMapper};
use restore_core::{Algorithm, AlgorithmParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Largest subgraph handed to the dense kernels; bigger cells are recorded
/// as errors instead of exhausting memory.
pub const DEFAULT_MAX_NODES: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub manifest: Manifest,
    pub dim_schedule: BTreeMap<u8, usize>,
    pub epochs: usize,
    pub threshold: f64,
    pub prec_fractions: Vec<f64>,
    pub scorers: BTreeMap<Algorithm, Scorer>,
    pub params: AlgorithmParams,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub label_mapper: LabelMapper,
    pub analogy_mode: AnalogyMode,
    pub max_nodes: usize,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub dot: bool,
    #[serde(skip)]
    pub resume: bool,
    #[serde(skip)]
    pub text_embeddings: bool,
}

/// Command-line values that take precedence over the manifest.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub threshold: Option<f64>,
    pub format: Option<EdgeFormat>,
    pub dot: bool,
    pub resume: bool,
    pub text_embeddings: bool,
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Config(format!("invalid value {value:?} for `{key}`"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| bad(key, value))
}

impl PipelineConfig {
    pub fn from_manifest(manifest: Manifest, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg = PipelineConfig {
            dim_schedule: BTreeMap::from([(1, 2), (2, 64), (3, 128)]),
            epochs: 50,
            threshold: DEFAULT_THRESHOLD,
            prec_fractions: DEFAULT_FRACTIONS.to_vec(),
            scorers: Algorithm::ALL.iter().map(|&a| (a, a.default_scorer())).collect(),
            params: AlgorithmParams::default(),
            output_dir: base_dir.join("restore-out"),
            seed: manifest.seed,
            label_mapper: LabelMapper::default(),
            analogy_mode: AnalogyMode::Pairwise,
            max_nodes: DEFAULT_MAX_NODES,
            workers: 0,
            dot: false,
            resume: false,
            text_embeddings: false,
            manifest,
        };
        let mut epochs_override = None;
        let settings = cfg.manifest.settings.clone();
        for (key, value) in &settings {
            let (k, v) = (key.as_str(), value.as_str());
            let p = &mut cfg.params;
            match k {
                "epochs" => epochs_override = Some(num(k, v)?),
                "threshold" => cfg.threshold = num(k, v)?,
                "fractions" => {
                    cfg.prec_fractions = v
                        .split(',')
                        .map(|f| num::<f64>(k, f.trim()))
                        .collect::<Result<_, _>>()?
                }
                "output" => {
                    let out = PathBuf::from(v);
                    cfg.output_dir = if out.is_absolute() { out } else { base_dir.join(out) };
                }
                "workers" => cfg.workers = num(k, v)?,
                "max_nodes" => cfg.max_nodes = num(k, v)?,
                "label_prefix" => cfg.label_mapper.prefix = v.to_owned(),
                "lowercase" => cfg.label_mapper.lowercase = num(k, v)?,
                "analogy_mode" => cfg.analogy_mode = AnalogyMode::parse(v).map_err(|_| bad(k, v))?,
                "katz_beta" => p.katz_beta = num(k, v)?,
                "node2vec.walk_length" => p.node2vec.walk_length = num(k, v)?,
                "node2vec.walks_per_node" => p.node2vec.walks_per_node = num(k, v)?,
                "node2vec.p" => p.node2vec.p = num(k, v)?,
                "node2vec.q" => p.node2vec.q = num(k, v)?,
                "node2vec.context_size" => p.node2vec.sgns.context_size = num(k, v)?,
                "node2vec.negatives" => p.node2vec.sgns.negatives_per_positive = num(k, v)?,
                "node2vec.learning_rate" => p.node2vec.sgns.learning_rate = num(k, v)?,
                "node2vec.epochs" => p.node2vec.sgns.epochs = num(k, v)?,
                "sdne.alpha" => p.sdne.alpha = num(k, v)?,
                "sdne.beta" => p.sdne.beta_penalty = num(k, v)?,
                "sdne.l1" => p.sdne.l1_reg = num(k, v)?,
                "sdne.l2" => p.sdne.l2_reg = num(k, v)?,
                "sdne.rho" => p.sdne.rho = num(k, v)?,
                "sdne.xeta" => p.sdne.xeta = num(k, v)?,
                "sdne.batch_size" => p.sdne.batch_size = num(k, v)?,
                "sdne.epochs" => p.sdne.epochs = num(k, v)?,
                _ => {
                    if let Some(h) = k.strip_prefix("dim.") {
                        let h: u8 = num(k, h)?;
                        if !(1..=3).contains(&h) {
                            return Err(bad(k, v));
                        }
                        cfg.dim_schedule.insert(h, num(k, v)?);
                    } else if let Some(a) = k.strip_prefix("scorer.") {
                        let a = Algorithm::parse(a).map_err(|_| bad(k, v))?;
                        cfg.scorers.insert(a, Scorer::parse(v).map_err(|_| bad(k, v))?);
                    } else {
                        return Err(CliError::Config(format!("unknown setting `{k}`")));
                    }
                }
            }
        }
        // a global epoch count sets both trained families unless either was
        // given explicitly
        if let Some(e) = epochs_override {
            cfg.epochs = e;
            let explicit = |name: &str| settings.iter().any(|(k, _)| k == name);
            if !explicit("node2vec.epochs") {
                cfg.params.node2vec.sgns.epochs = e;
            }
            if !explicit("sdne.epochs") {
                cfg.params.sdne.epochs = e;
            }
        }
        if !(cfg.threshold.is_finite() && (0.0..=1.0).contains(&cfg.threshold)) {
            return Err(bad("threshold", &cfg.threshold.to_string()));
        }
        if cfg.prec_fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(CliError::Config("fractions must lie in (0, 1]".into()));
        }
        if cfg.dim_schedule.values().any(|&d| d == 0) {
            return Err(CliError::Config("dimensions must be >= 1".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let manifest = Manifest::load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::from_manifest(manifest, base)?;
        cfg.apply(overrides)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(out) = &o.output {
            self.output_dir = out.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
            self.manifest.seed = s;
        }
        if let Some(t) = o.threshold {
            if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
                return Err(bad("--threshold", &t.to_string()));
            }
            self.threshold = t;
        }
        if let Some(f) = o.format {
            self.manifest.graph_format = f;
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
        if let Some(w) = std::env::var("RESTORE_WORKERS").ok().and_then(|v| v.trim().parse().ok()) {
            self.workers = w;
        }
        self.dot |= o.dot;
        self.resume |= o.resume;
        self.text_embeddings |= o.text_embeddings;
        Ok(())
    }

    pub fn dim_for(&self, hop: u8) -> usize {
        self.dim_schedule.get(&hop).copied().unwrap_or(2)
    }

    pub fn scorer_for(&self, a: Algorithm) -> Scorer {
        self.scorers.get(&a).copied().unwrap_or(a.default_scorer())
    }

    pub fn worker_count(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(extra: &str) -> Manifest {
        let text = format!("graph = g.tsv\ncenter = a\n{extra}");
        Manifest::parse(&text, Path::new("/w"), Path::new("m")).unwrap()
    }

    #[test]
    fn defaults_are_the_published_setup() {
        let cfg = PipelineConfig::from_manifest(manifest(""), Path::new("/w")).unwrap();
        let v = serde_json::to_value(&cfg).unwrap();
        assert_eq!(v["dim_schedule"], serde_json::json!({"1": 2, "2": 64, "3": 128}));
        assert_eq!(v["epochs"], 50);
        assert_eq!(v["threshold"], 0.5);
        assert_eq!(v["prec_fractions"], serde_json::json!([0.1, 0.2, 0.4, 0.6, 0.8, 1.0]));
        assert_eq!(v["params"]["node2vec"]["sgns"]["epochs"], 50);
        assert_eq!(v["params"]["sdne"]["epochs"], 50);
        assert_eq!(v["params"]["sdne"]["beta_penalty"], 5.0);
        assert_eq!(v["params"]["sdne"]["rho"], 0.3);
        assert_eq!(v["params"]["sdne"]["xeta"], 0.01);
        assert_eq!(v["params"]["sdne"]["alpha"], 1e-5);
        assert_eq!(v["params"]["sdne"]["l1_reg"], 1e-6);
        assert_eq!(v["params"]["sdne"]["l2_reg"], 1e-6);
        assert_eq!(v["params"]["sdne"]["batch_size"], 100);
        assert_eq!(v["params"]["node2vec"]["walk_length"], 80);
        assert_eq!(v["params"]["node2vec"]["walks_per_node"], 10);
        assert_eq!(v["params"]["node2vec"]["p"], 1.0);
        assert_eq!(v["params"]["node2vec"]["q"], 1.0);
        assert_eq!(v["params"]["node2vec"]["sgns"]["context_size"], 10);
        assert_eq!(v["params"]["node2vec"]["sgns"]["negatives_per_positive"], 5);
        assert_eq!(v["params"]["katz_beta"], 0.01);
        assert_eq!(v["scorers"]["hope"], "asym_dot");
        assert_eq!(v["scorers"]["node2vec"], "dot");
        assert_eq!(v["scorers"]["lap"], "neg_distance");
    }

    #[test]
    fn settings_override_defaults() {
        let m = manifest("dim.2 = 8\nepochs = 5\nsdne.epochs = 7\nscorer.lap = dot\nthreshold = 0.7\n");
        let cfg = PipelineConfig::from_manifest(m, Path::new("/w")).unwrap();
        assert_eq!(cfg.dim_for(2), 8);
        assert_eq!(cfg.params.node2vec.sgns.epochs, 5);
        assert_eq!(cfg.params.sdne.epochs, 7);
        assert_eq!(cfg.scorer_for(Algorithm::Lap), Scorer::Dot);
        assert_eq!(cfg.threshold, 0.7);
    }

    #[test]
    fn rejects_unknown_or_bad_settings() {
        for extra in ["frobnicate = 1\n", "threshold = 2\n", "dim.4 = 3\n", "dim.1 = 0\n", "scorer.hope = cosine\n"] {
            assert!(PipelineConfig::from_manifest(manifest(extra), Path::new("/w")).is_err(), "{extra}");
        }
    }
}
