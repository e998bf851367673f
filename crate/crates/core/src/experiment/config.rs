//! Experiment configuration files (TOML, `schema_version = 1`).
//!
//! ```toml
//! schema_version = 1
//! methods = ["graph-ssl", "hypergraph-ssl", "gcn", "hgnn", "hgnn-proposed"]
//! noise_levels = [0.0, 0.15, 0.30, 0.45]   # default
//! seeds = [1, 2, 3]
//! pca_dims = 50              # 0 disables PCA; omitted means 50 (300 for fashion, none for synthetic)
//! k = 5                      # default
//! include_centroid = true    # default
//! normalization = "sym"      # "sym" or "rw", used by the hgnn method
//! alpha = 0.99               # default
//! cg_tol = 1e-6              # default
//! cg_max_iter = 1000         # default
//! graph_sigma = 0.5          # Gaussian bandwidth; omit for the mean k-th neighbor distance
//! workers = 4                # omit for one per CPU
//! cache_dir = "cache"        # optional operator cache
//!
//! [dataset]
//! kind = "usps"              # mnist | fashion | usps | synthetic
//! path = "usps"              # directory, relative to the data directory
//! subsample = { train = 8571, test = 1429, seed = 20201223 }   # optional; omitted uses every image
//! # synthetic only: n, classes, dim, spread, seed
//!
//! [train]                    # every field optional, see TrainConfig
//! hidden = 64
//! learning_rate = 0.01
//! epochs = 200
//! weight_decay = 5e-4
//! ```
//!
//! MNIST and Fashion-MNIST directories hold the four standard IDX files
//! (`train-images-idx3-ubyte`, `train-labels-idx1-ubyte`,
//! `t10k-images-idx3-ubyte`, `t10k-labels-idx1-ubyte`); USPS directories hold
//! `zip.train` and `zip.test`. Relative paths resolve against the data
//! directory, which is the config file's directory unless overridden.

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::hypergraph::Normalization;
use crate::nn::TrainConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    GraphSsl,
    HypergraphSsl,
    Gcn,
    Hgnn,
    HgnnProposed,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::GraphSsl,
        Method::HypergraphSsl,
        Method::Gcn,
        Method::Hgnn,
        Method::HgnnProposed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::GraphSsl => "graph-ssl",
            Method::HypergraphSsl => "hypergraph-ssl",
            Method::Gcn => "gcn",
            Method::Hgnn => "hgnn",
            Method::HgnnProposed => "hgnn-proposed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DatasetKind {
    Mnist,
    Fashion,
    Usps,
    Synthetic,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::Fashion => "fashion",
            DatasetKind::Usps => "usps",
            DatasetKind::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mnist" => Ok(DatasetKind::Mnist),
            "fashion" | "fashion-mnist" => Ok(DatasetKind::Fashion),
            "usps" => Ok(DatasetKind::Usps),
            "synthetic" => Ok(DatasetKind::Synthetic),
            other => Err(Error::Parameter(format!("unknown dataset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subsample {
    pub train: usize,
    pub test: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub classes: usize,
    pub dim: usize,
    pub spread: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n: 300,
            classes: 3,
            dim: 2,
            spread: 0.1,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    /// Directory with the dataset files; relative paths use the data directory.
    pub path: Option<PathBuf>,
    pub subsample: Option<Subsample>,
    pub synthetic: SyntheticSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub pca_dims: Option<usize>,
    pub k: usize,
    pub include_centroid: bool,
    pub normalization: Normalization,
    pub alpha: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub graph_sigma: Option<f64>,
    pub noise_levels: Vec<f64>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub train: TrainConfig,
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    /// Where relative dataset and cache paths resolve.
    pub data_dir: PathBuf,
}

impl ExperimentConfig {
    /// Defaults for a dataset: PCA to 50 dims (300 for Fashion-MNIST, none
    /// for synthetic), all methods, the standard noise grid, seeds 1..=3.
    /// MNIST and Fashion-MNIST use a 8,571/1,429 stratified subsample unless
    /// `full` is set.
    pub fn preset(kind: DatasetKind, full: bool) -> Self {
        let pca_dims = match kind {
            DatasetKind::Mnist | DatasetKind::Usps => Some(50),
            DatasetKind::Fashion => Some(300),
            DatasetKind::Synthetic => None,
        };
        let subsample = match kind {
            DatasetKind::Mnist | DatasetKind::Fashion if !full => Some(Subsample {
                train: 8571,
                test: 1429,
                seed: 20201223,
            }),
            _ => None,
        };
        let path = (kind != DatasetKind::Synthetic).then(|| PathBuf::from(kind.name()));
        ExperimentConfig {
            dataset: DatasetConfig {
                kind,
                path,
                subsample,
                synthetic: SyntheticSpec::default(),
            },
            pca_dims,
            k: 5,
            include_centroid: true,
            normalization: Normalization::Sym,
            alpha: 0.99,
            cg_tol: 1e-6,
            cg_max_iter: 1000,
            graph_sigma: None,
            noise_levels: vec![0.0, 0.15, 0.30, 0.45],
            seeds: vec![1, 2, 3],
            methods: Method::ALL.to_vec(),
            train: TrainConfig::default(),
            workers: None,
            cache_dir: None,
            data_dir: PathBuf::from("."),
        }
    }

    /// Drops the subsample, for full-scale runs.
    pub fn into_full(mut self) -> Self {
        self.dataset.subsample = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.seeds.is_empty() || self.noise_levels.is_empty() {
            return Err(Error::Config("need at least one method, seed and noise level".into()));
        }
        if let Some(l) = self.noise_levels.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(Error::Config(format!("noise level {l} outside [0, 1)")));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if !matches!(self.normalization, Normalization::Sym | Normalization::Rw) {
            return Err(Error::Config("normalization must be sym or rw".into()));
        }
        self.train.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.data_dir.join(p)
        }
    }

    /// Parses a config document. `base_dir` becomes `data_dir`. Errors carry
    /// the line and column of the offending value.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().trim_end().to_string();
            match e.span() {
                Some(span) => located(text, span, &msg),
                None => Error::Config(msg),
            }
        })?;
        raw.into_config(text, base_dir)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, col)
}

fn located(text: &str, span: Range<usize>, msg: &str) -> Error {
    let (line, col) = line_col(text, span.start);
    Error::Config(format!("line {line}, column {col}: {msg}"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    kind: Spanned<String>,
    path: Option<PathBuf>,
    subsample: Option<Subsample>,
    n: Option<usize>,
    classes: Option<usize>,
    dim: Option<usize>,
    spread: Option<f64>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: Spanned<u32>,
    dataset: RawDataset,
    pca_dims: Option<usize>,
    k: Option<Spanned<usize>>,
    include_centroid: Option<bool>,
    normalization: Option<Spanned<String>>,
    alpha: Option<Spanned<f64>>,
    cg_tol: Option<f64>,
    cg_max_iter: Option<usize>,
    graph_sigma: Option<Spanned<f64>>,
    noise_levels: Option<Spanned<Vec<f64>>>,
    seeds: Option<Spanned<Vec<u64>>>,
    methods: Option<Spanned<Vec<String>>>,
    #[serde(default)]
    train: TrainConfig,
    workers: Option<Spanned<usize>>,
    cache_dir: Option<PathBuf>,
}

impl RawConfig {
    fn into_config(self, text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
        let at = |span: Range<usize>, msg: String| located(text, span, &msg);
        if *self.schema_version.get_ref() != SCHEMA_VERSION {
            return Err(at(
                self.schema_version.span(),
                format!("unsupported schema_version {}, expected {SCHEMA_VERSION}", self.schema_version.get_ref()),
            ));
        }
        let kind: DatasetKind = self
            .dataset
            .kind
            .get_ref()
            .parse()
            .map_err(|e: Error| at(self.dataset.kind.span(), e.to_string()))?;
        let mut cfg = ExperimentConfig::preset(kind, false);
        cfg.data_dir = base_dir.to_path_buf();
        cfg.dataset.subsample = self.dataset.subsample;
        if let Some(p) = self.dataset.path {
            cfg.dataset.path = Some(p);
        }
        let s = &mut cfg.dataset.synthetic;
        s.n = self.dataset.n.unwrap_or(s.n);
        s.classes = self.dataset.classes.unwrap_or(s.classes);
        s.dim = self.dataset.dim.unwrap_or(s.dim);
        s.spread = self.dataset.spread.unwrap_or(s.spread);
        s.seed = self.dataset.seed.unwrap_or(s.seed);
        if let Some(d) = self.pca_dims {
            cfg.pca_dims = (d > 0).then_some(d);
        }
        if let Some(k) = self.k {
            if *k.get_ref() == 0 {
                return Err(at(k.span(), "k must be at least 1".into()));
            }
            cfg.k = k.into_inner();
        }
        cfg.include_centroid = self.include_centroid.unwrap_or(true);
        if let Some(n) = self.normalization {
            cfg.normalization = match n.get_ref().as_str() {
                "sym" => Normalization::Sym,
                "rw" => Normalization::Rw,
                other => return Err(at(n.span(), format!("normalization must be \"sym\" or \"rw\", got \"{other}\""))),
            };
        }
        if let Some(a) = self.alpha {
            if !(*a.get_ref() > 0.0 && *a.get_ref() < 1.0) {
                return Err(at(a.span(), format!("alpha {} outside (0, 1)", a.get_ref())));
            }
            cfg.alpha = a.into_inner();
        }
        cfg.cg_tol = self.cg_tol.unwrap_or(cfg.cg_tol);
        cfg.cg_max_iter = self.cg_max_iter.unwrap_or(cfg.cg_max_iter);
        if let Some(sig) = self.graph_sigma {
            if !(*sig.get_ref() > 0.0) {
                return Err(at(sig.span(), "graph_sigma must be positive".into()));
            }
            cfg.graph_sigma = Some(sig.into_inner());
        }
        if let Some(levels) = self.noise_levels {
            if levels.get_ref().is_empty() {
                return Err(at(levels.span(), "noise_levels is empty".into()));
            }
            if let Some(l) = levels.get_ref().iter().find(|l| !(0.0..1.0).contains(*l)) {
                return Err(at(levels.span(), format!("noise level {l} outside [0, 1)")));
            }
            cfg.noise_levels = levels.into_inner();
        }
        if let Some(seeds) = self.seeds {
            if seeds.get_ref().is_empty() {
                return Err(at(seeds.span(), "seeds is empty".into()));
            }
            cfg.seeds = seeds.into_inner();
        }
        if let Some(methods) = self.methods {
            let span = methods.span();
            let parsed = methods
                .into_inner()
                .iter()
                .map(|m| m.parse::<Method>())
                .collect::<Result<Vec<_>>>()
                .map_err(|e| at(span.clone(), e.to_string()))?;
            if parsed.is_empty() {
                return Err(at(span, "methods is empty".into()));
            }
            cfg.methods = parsed;
        }
        cfg.train = self.train;
        if let Some(w) = self.workers {
            if *w.get_ref() == 0 {
                return Err(at(w.span(), "workers must be at least 1".into()));
            }
            cfg.workers = Some(w.into_inner());
        }
        cfg.cache_dir = self.cache_dir;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const USPS: &str = r#"
schema_version = 1
methods = ["hypergraph-ssl", "hgnn-proposed"]
seeds = [4, 5]
pca_dims = 50

[dataset]
kind = "usps"
path = "/data/usps"

[train]
epochs = 50
"#;

    #[test]
    fn parses_and_fills_defaults() {
        let cfg = ExperimentConfig::from_toml(USPS, Path::new("/cfg")).unwrap();
        assert_eq!(cfg.dataset.kind, DatasetKind::Usps);
        assert_eq!(cfg.methods, vec![Method::HypergraphSsl, Method::HgnnProposed]);
        assert_eq!(cfg.noise_levels, vec![0.0, 0.15, 0.30, 0.45]);
        assert_eq!(cfg.k, 5);
        assert_eq!(cfg.alpha, 0.99);
        assert_eq!(cfg.train.epochs, 50);
        assert_eq!(cfg.train.hidden, 64);
        assert_eq!(cfg.pca_dims, Some(50));
        assert_eq!(cfg.resolve(cfg.dataset.path.as_ref().unwrap()), PathBuf::from("/data/usps"));
        assert_eq!(cfg.resolve(Path::new("x")), PathBuf::from("/cfg/x"));
    }

    fn error_text(doc: &str) -> String {
        ExperimentConfig::from_toml(doc, Path::new(".")).unwrap_err().to_string()
    }

    #[test]
    fn errors_point_at_lines() {
        let bad_level = USPS.replace("seeds = [4, 5]", "seeds = [4, 5]\nnoise_levels = [0.0, 1.5]");
        assert!(error_text(&bad_level).contains("line 5"), "{}", error_text(&bad_level));
        let bad_method = USPS.replace("hgnn-proposed", "hgcn");
        assert!(error_text(&bad_method).contains("line 3"));
        let unknown = USPS.replace("epochs = 50", "epochs = 50\nbatch = 3");
        assert!(error_text(&unknown).contains("line 13"), "{}", error_text(&unknown));
        let wrong_type = USPS.replace("pca_dims = 50", "pca_dims = \"fifty\"");
        assert!(error_text(&wrong_type).contains("line 5"), "{}", error_text(&wrong_type));
        let version = USPS.replace("schema_version = 1", "schema_version = 2");
        assert!(error_text(&version).contains("line 2"));
        let kind = USPS.replace("\"usps\"", "\"cifar\"");
        assert!(error_text(&kind).contains("line 8"), "{}", error_text(&kind));
    }

    #[test]
    fn missing_dataset_is_an_error() {
        assert!(ExperimentConfig::from_toml("schema_version = 1\n", Path::new(".")).is_err());
    }

    #[test]
    fn presets() {
        let m = ExperimentConfig::preset(DatasetKind::Mnist, false);
        assert_eq!(m.dataset.subsample.unwrap().train, 8571);
        assert!(m.clone().into_full().dataset.subsample.is_none());
        assert_eq!(ExperimentConfig::preset(DatasetKind::Fashion, true).pca_dims, Some(300));
        for kind in [DatasetKind::Mnist, DatasetKind::Fashion, DatasetKind::Usps, DatasetKind::Synthetic] {
            ExperimentConfig::preset(kind, false).validate().unwrap();
            assert_eq!(kind.name().parse::<DatasetKind>().unwrap(), kind);
        }
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }
}
