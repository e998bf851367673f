//! Benchmark harness: load a dataset, build operators once, then run every
//! (method, noise level, seed) cell on a worker pool.

mod config;
mod selftest;
mod table;

pub use config::{
    DatasetConfig, DatasetKind, ExperimentConfig, Method, Subsample, SyntheticSpec, SCHEMA_VERSION,
};
pub use selftest::{selftest, SelfCheck};
pub use table::{emit_table, median_grid, parse_csv, GridEntry, TableFormat, CSV_HEADER};

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;

use crate::dataset::{load_idx_dataset, load_usps_dataset, synthetic_blobs, ImageDataset};
use crate::error::{Error, Result};
use crate::hypergraph::{
    gcn_operator_from_neighbors, hypergraph_from_neighbors, hypergraph_operator, knn_graph_from_neighbors,
    knn_indices, load_operator, save_operator, Bandwidth, NeighborTable, Normalization, PropagationOperator,
};
use crate::labels::{accuracy, decode_predictions, encode_labels, inject_noise, LabelScheme};
use crate::linalg::DenseMatrix;
use crate::nn::{predict, train_logged, TrainConfig};
use crate::preprocess::{pca_fit, pca_transform};
use crate::ssl::{propagate_features, propagate_labels, PropagationConfig};

pub const DATA_DIR_ENV: &str = "HYPERPROP_DATA_DIR";
pub const WORKERS_ENV: &str = "HYPERPROP_WORKERS";

/// One grid cell's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub method: Method,
    pub noise_level: f64,
    pub seed: u64,
    /// Fraction of test rows classified correctly.
    pub accuracy: f64,
    pub wall_time_s: f64,
    pub pca: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub method: Method,
    pub noise_level: f64,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<CellFailure>,
}

/// Runtime overrides layered over a config: explicit values here beat the
/// environment, which beats the file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub data_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    /// Per-cell training curves (`epoch,loss,train_accuracy`) go here.
    pub train_log_dir: Option<PathBuf>,
}

impl RunOptions {
    /// Fills unset fields from `HYPERPROP_DATA_DIR` and `HYPERPROP_WORKERS`.
    pub fn with_env(mut self) -> Result<Self> {
        if self.data_dir.is_none() {
            self.data_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
        }
        if self.workers.is_none() {
            if let Ok(w) = std::env::var(WORKERS_ENV) {
                let n: usize = w
                    .trim()
                    .parse()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| Error::Config(format!("{WORKERS_ENV}={w} is not a positive integer")))?;
                self.workers = Some(n);
            }
        }
        Ok(self)
    }

    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(d) = &self.data_dir {
            cfg.data_dir = d.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(c) = &self.cache_dir {
            cfg.cache_dir = Some(c.clone());
        }
    }
}

/// Loads the configured dataset and applies the subsample, if any.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<ImageDataset> {
    let ds = &cfg.dataset;
    let dir = || cfg.resolve(ds.path.as_deref().unwrap_or_else(|| Path::new(ds.kind.name())));
    let full = match ds.kind {
        DatasetKind::Mnist | DatasetKind::Fashion => {
            let d = dir();
            load_idx_dataset(
                &d.join("train-images-idx3-ubyte"),
                &d.join("train-labels-idx1-ubyte"),
                &d.join("t10k-images-idx3-ubyte"),
                &d.join("t10k-labels-idx1-ubyte"),
            )?
        }
        DatasetKind::Usps => {
            let d = dir();
            load_usps_dataset(&d.join("zip.train"), &d.join("zip.test"))?
        }
        DatasetKind::Synthetic => {
            let s = ds.synthetic;
            synthetic_blobs(s.n, s.classes, s.dim, s.spread, s.seed)?
        }
    };
    match ds.subsample {
        Some(s) => full.subsample_stratified(s.train, s.test, s.seed),
        None => Ok(full),
    }
}

/// Everything shared by the cells of one experiment.
#[derive(Debug)]
pub struct Prepared {
    pub dataset: ImageDataset,
    pub pca: bool,
    pub sym: Option<PropagationOperator>,
    pub rw: Option<PropagationOperator>,
    pub graph: Option<PropagationOperator>,
    pub gcn: Option<PropagationOperator>,
    /// Smoothed features for the feature-propagated network.
    pub propagated_features: Option<DenseMatrix>,
}

impl Prepared {
    fn operator(&self, which: Normalization) -> Result<&PropagationOperator> {
        let op = match which {
            Normalization::Sym => &self.sym,
            Normalization::Rw => &self.rw,
            Normalization::GraphSym => &self.graph,
            Normalization::Gcn => &self.gcn,
        };
        op.as_ref()
            .ok_or_else(|| Error::Parameter(format!("{which} operator was not prepared")))
    }
}

fn propagation_config(cfg: &ExperimentConfig) -> PropagationConfig {
    PropagationConfig {
        alpha: cfg.alpha,
        tol: cfg.cg_tol,
        max_iter: cfg.cg_max_iter,
    }
}

/// FNV-1a over the features and every setting that shapes the operator.
fn fingerprint(cfg: &ExperimentConfig, x: &DenseMatrix) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(&(x.nrows() as u64).to_le_bytes());
    eat(&(x.ncols() as u64).to_le_bytes());
    for v in x.iter() {
        eat(&v.to_bits().to_le_bytes());
    }
    eat(&(cfg.k as u64).to_le_bytes());
    eat(&[u8::from(cfg.include_centroid)]);
    eat(&cfg.graph_sigma.unwrap_or(0.0).to_bits().to_le_bytes());
    h
}

fn needed_operators(cfg: &ExperimentConfig) -> Vec<Normalization> {
    let mut out = Vec::new();
    for m in &cfg.methods {
        let need = match m {
            Method::GraphSsl => Normalization::GraphSym,
            Method::Gcn => Normalization::Gcn,
            Method::HypergraphSsl | Method::HgnnProposed => Normalization::Sym,
            Method::Hgnn => cfg.normalization,
        };
        if !out.contains(&need) {
            out.push(need);
        }
    }
    out
}

fn build_operator(cfg: &ExperimentConfig, table: &NeighborTable, which: Normalization) -> Result<PropagationOperator> {
    let bandwidth = cfg.graph_sigma.map_or(Bandwidth::Auto, Bandwidth::Fixed);
    match which {
        Normalization::Sym | Normalization::Rw => {
            hypergraph_operator(&hypergraph_from_neighbors(table, cfg.include_centroid)?, which)
        }
        Normalization::GraphSym => knn_graph_from_neighbors(table, bandwidth),
        Normalization::Gcn => gcn_operator_from_neighbors(table, bandwidth),
    }
}

/// Loads, applies PCA, and builds (or reads from the cache) each operator the
/// configured methods need.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let started = Instant::now();
    let raw = load_dataset(cfg)?;
    info!(
        "loaded {}: {} rows × {} features ({:.1}s)",
        cfg.dataset.kind,
        raw.len(),
        raw.dim(),
        started.elapsed().as_secs_f64()
    );
    let dataset = match cfg.pca_dims {
        Some(d) => {
            let model = pca_fit(raw.features(), d)?;
            raw.with_features(pca_transform(&model, raw.features())?)?
        }
        None => raw,
    };
    let x = dataset.features();
    let key = fingerprint(cfg, x);
    let cache_file = |which: Normalization| {
        cfg.cache_dir.as_ref().map(|dir| {
            cfg.resolve(dir)
                .join(format!("{}-{which}-{key:016x}.hpop", cfg.dataset.kind))
        })
    };
    let mut table: Option<NeighborTable> = None;
    let mut prepared = Prepared {
        pca: cfg.pca_dims.is_some(),
        sym: None,
        rw: None,
        graph: None,
        gcn: None,
        propagated_features: None,
        dataset: dataset.clone(),
    };
    for which in needed_operators(cfg) {
        let path = cache_file(which);
        let op = match &path {
            Some(p) if p.exists() => {
                info!("reading cached {which} operator from {}", p.display());
                load_operator(p)?
            }
            _ => {
                if table.is_none() {
                    let t = Instant::now();
                    table = Some(knn_indices(x, cfg.k)?);
                    info!("kNN table (k = {}) in {:.1}s", cfg.k, t.elapsed().as_secs_f64());
                }
                let op = build_operator(cfg, table.as_ref().expect("just built"), which)?;
                if let Some(p) = &path {
                    std::fs::create_dir_all(p.parent().expect("cache file has a parent"))
                        .map_err(|e| Error::io(p, e))?;
                    save_operator(&op, p)?;
                }
                op
            }
        };
        if op.size() != x.nrows() || op.normalization() != which {
            return Err(Error::Parameter(format!(
                "cached {which} operator does not match the dataset"
            )));
        }
        info!("{which} operator: {} nonzeros", op.matrix().nnz());
        match which {
            Normalization::Sym => prepared.sym = Some(op),
            Normalization::Rw => prepared.rw = Some(op),
            Normalization::GraphSym => prepared.graph = Some(op),
            Normalization::Gcn => prepared.gcn = Some(op),
        }
    }
    if cfg.methods.contains(&Method::HgnnProposed) {
        let sym = prepared.operator(Normalization::Sym)?;
        prepared.propagated_features = Some(propagate_features(sym, x, &propagation_config(cfg))?);
    }
    Ok(prepared)
}

fn train_log_path(dir: &Path, cfg: &ExperimentConfig, method: Method, level: f64, seed: u64) -> PathBuf {
    dir.join(format!("{}-{method}-{level}-{seed}.csv", cfg.dataset.kind))
}

/// Runs one cell. The network initialization seed is `seed ^ cfg.train.seed`;
/// the noise seed is `seed`.
pub fn run_cell(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    method: Method,
    noise_level: f64,
    seed: u64,
    train_log_dir: Option<&Path>,
) -> Result<ResultRow> {
    let started = Instant::now();
    let ds = &prepared.dataset;
    let split = inject_noise(ds, noise_level, seed)?;
    let c = ds.num_classes();
    let train_idx = ds.train_indices();
    let pred = match method {
        Method::GraphSsl | Method::HypergraphSsl => {
            let op = prepared.operator(if method == Method::GraphSsl {
                Normalization::GraphSym
            } else {
                Normalization::Sym
            })?;
            let y = encode_labels(&split, train_idx, c, LabelScheme::Pm1)?;
            decode_predictions(&propagate_labels(op, &y, &propagation_config(cfg))?)?
        }
        Method::Gcn | Method::Hgnn | Method::HgnnProposed => {
            let (op, x) = match method {
                Method::Gcn => (prepared.operator(Normalization::Gcn)?, ds.features()),
                Method::Hgnn => (prepared.operator(cfg.normalization)?, ds.features()),
                _ => (
                    prepared.operator(Normalization::Sym)?,
                    prepared
                        .propagated_features
                        .as_ref()
                        .ok_or_else(|| Error::Parameter("propagated features were not prepared".into()))?,
                ),
            };
            let y = encode_labels(&split, train_idx, c, LabelScheme::OneHot)?;
            let tcfg = TrainConfig {
                seed: seed ^ cfg.train.seed,
                ..cfg.train
            };
            let params = match train_log_dir {
                Some(dir) => {
                    let path = train_log_path(dir, cfg, method, noise_level, seed);
                    let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
                    train_logged(op, x, &y, train_idx, &tcfg, Some(&mut w))?
                }
                None => train_logged(op, x, &y, train_idx, &tcfg, None)?,
            };
            predict(op, x, &params)?
        }
    };
    let acc = accuracy(&pred, &split.clean_labels, ds.test_indices())?;
    Ok(ResultRow {
        dataset: cfg.dataset.kind.name().to_string(),
        method,
        noise_level,
        seed,
        accuracy: acc,
        wall_time_s: started.elapsed().as_secs_f64(),
        pca: prepared.pca,
    })
}

/// All cells of `cfg` on a pool of `cfg.workers` threads (one per CPU when
/// unset). Rows come back in (method, level, seed) order regardless of
/// scheduling; failed cells are reported with their coordinates and do not
/// stop the others.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    let mut cfg = cfg.clone();
    opts.apply(&mut cfg);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    if let Some(dir) = &opts.train_log_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    pool.install(|| {
        let prepared = prepare(&cfg)?;
        let mut cells: Vec<(Method, f64, u64)> = Vec::new();
        for &m in &cfg.methods {
            for &l in &cfg.noise_levels {
                cells.extend(cfg.seeds.iter().map(|&s| (m, l, s)));
            }
        }
        let results: Vec<(Method, f64, u64, Result<ResultRow>)> = cells
            .into_par_iter()
            .map(|(m, l, s)| {
                let r = run_cell(&cfg, &prepared, m, l, s, opts.train_log_dir.as_deref());
                match &r {
                    Ok(row) => info!("{m} noise {l} seed {s}: accuracy {:.4} ({:.1}s)", row.accuracy, row.wall_time_s),
                    Err(e) => info!("{m} noise {l} seed {s}: failed: {e}"),
                }
                (m, l, s, r)
            })
            .collect();
        let mut report = ExperimentReport::default();
        for (method, noise_level, seed, r) in results {
            match r {
                Ok(row) => report.rows.push(row),
                Err(e) => report.failures.push(CellFailure {
                    method,
                    noise_level,
                    seed,
                    error: e.to_string(),
                }),
            }
        }
        Ok(report)
    })
}

/// Builds every operator the config needs and writes it to the cache
/// directory. Returns the files present afterwards.
pub fn build_operators(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let mut cfg = cfg.clone();
    opts.apply(&mut cfg);
    if cfg.cache_dir.is_none() {
        return Err(Error::Config("build-ops needs cache_dir in the config or --cache-dir".into()));
    }
    // propagated features are not cached
    cfg.methods.retain(|&m| m != Method::HgnnProposed);
    if !cfg.methods.contains(&Method::HypergraphSsl) {
        cfg.methods.push(Method::HypergraphSsl);
    }
    let prepared = prepare(&cfg)?;
    let dir = cfg.resolve(cfg.cache_dir.as_ref().expect("checked above"));
    let key = fingerprint(&cfg, prepared.dataset.features());
    Ok(needed_operators(&cfg)
        .into_iter()
        .map(|w| dir.join(format!("{}-{w}-{key:016x}.hpop", cfg.dataset.kind)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(methods: Vec<Method>) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::preset(DatasetKind::Synthetic, false);
        cfg.methods = methods;
        cfg.noise_levels = vec![0.0];
        cfg.seeds = vec![1];
        cfg.workers = Some(2);
        cfg
    }

    #[test]
    fn all_methods_separate_blobs() {
        let cfg = synthetic(Method::ALL.to_vec());
        let report = run_experiment(&cfg, &RunOptions::default()).unwrap();
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        assert_eq!(report.rows.len(), 5);
        for row in &report.rows {
            assert!(row.accuracy >= 0.9, "{row:?}");
            assert!(!row.pca);
        }
    }

    fn strip_times(rows: &[ResultRow]) -> Vec<ResultRow> {
        rows.iter()
            .map(|r| ResultRow { wall_time_s: 0.0, ..r.clone() })
            .collect()
    }

    #[test]
    fn cache_and_reruns_are_invisible() {
        let mut cfg = synthetic(vec![Method::HypergraphSsl, Method::Hgnn, Method::GraphSsl]);
        cfg.noise_levels = vec![0.0, 0.3];
        cfg.train.epochs = 30;
        let plain = run_experiment(&cfg, &RunOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            cache_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let files = build_operators(&cfg, &opts).unwrap();
        assert!(files.iter().all(|f| f.exists()));
        assert_eq!(files.len(), 2);
        let cached = run_experiment(&cfg, &opts).unwrap();
        let again = run_experiment(&cfg, &opts).unwrap();
        assert_eq!(strip_times(&plain.rows), strip_times(&cached.rows));
        assert_eq!(strip_times(&cached.rows), strip_times(&again.rows));
    }

    #[test]
    fn failing_cells_do_not_stop_others() {
        let mut cfg = synthetic(vec![Method::HypergraphSsl, Method::Gcn]);
        cfg.cg_max_iter = 1;
        cfg.cg_tol = 1e-12;
        let report = run_experiment(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].method, Method::Gcn);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].method, Method::HypergraphSsl);
        assert!(report.failures[0].error.contains("conjugate gradient"));
    }

    #[test]
    fn missing_files_surface_as_errors() {
        let mut cfg = ExperimentConfig::preset(DatasetKind::Usps, false);
        cfg.data_dir = PathBuf::from("/nonexistent");
        assert!(matches!(run_experiment(&cfg, &RunOptions::default()), Err(Error::Io { .. })));
    }

    #[test]
    fn train_logs_are_written() {
        let mut cfg = synthetic(vec![Method::Hgnn]);
        cfg.train.epochs = 4;
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            train_log_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        run_experiment(&cfg, &opts).unwrap();
        let text = std::fs::read_to_string(dir.path().join("synthetic-hgnn-0-1.csv")).unwrap();
        assert_eq!(text.lines().count(), 5);
    }
}
