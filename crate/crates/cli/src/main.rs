use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use hyperprop::experiment::{
    build_operators, emit_table, run_experiment, selftest, DatasetKind, ExperimentConfig, ExperimentReport,
    Method, RunOptions, TableFormat, DATA_DIR_ENV, WORKERS_ENV,
};
use hyperprop::Error;

/// Exit status for bad flags, bad configs and bad parameters.
const USAGE: u8 = 2;
/// Exit status when a cell or the pipeline fails.
const FAILURE: u8 = 1;

#[derive(Parser)]
#[command(name = "hyperprop", version, about = "Graph and hypergraph semi-supervised classification under label noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Directory that relative dataset paths resolve against.
    #[arg(long, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    /// Worker threads for the cell pool.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Directory for cached operators.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

impl Overrides {
    fn options(&self) -> RunOptions {
        RunOptions {
            data_dir: self.data_dir.clone(),
            workers: self.workers,
            cache_dir: self.cache_dir.clone(),
            train_log_dir: None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every (method, noise level, seed) cell of a config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Where the CSV and text tables go.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Use every image instead of the configured subsample.
        #[arg(long)]
        full: bool,
        /// Write per-cell training curves to this directory.
        #[arg(long)]
        train_log: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a single cell and print its result row.
    Run {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        method: String,
        #[arg(long)]
        noise: f64,
        #[arg(long)]
        seed: u64,
        /// Start from this config instead of the dataset defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        full: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Precompute the operators of a config and store them in its cache directory.
    BuildOps {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check the numerical core against dense reference implementations.
    Selftest,
}

fn usage_error(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::Config(_) | Error::Parameter(_))
    )
}

fn report_cells(report: &ExperimentReport) -> u8 {
    for f in &report.failures {
        eprintln!(
            "cell failed: method {} noise {} seed {}: {}",
            f.method, f.noise_level, f.seed, f.error
        );
    }
    if report.failures.is_empty() {
        0
    } else {
        FAILURE
    }
}

fn bench(config: PathBuf, out: PathBuf, full: bool, train_log: Option<PathBuf>, overrides: Overrides) -> anyhow::Result<u8> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if full {
        cfg = cfg.into_full();
    }
    let opts = RunOptions {
        train_log_dir: train_log,
        ..overrides.options()
    }
    .with_env()?;
    let report = run_experiment(&cfg, &opts)?;
    let status = report_cells(&report);
    if report.rows.is_empty() {
        return Ok(FAILURE);
    }
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let stem = match cfg.pca_dims {
        Some(_) => cfg.dataset.kind.name().to_string(),
        None => format!("{}-nopca", cfg.dataset.kind),
    };
    let csv_path = out.join(format!("{stem}.csv"));
    fs::write(&csv_path, emit_table(&report.rows, TableFormat::Csv)?)
        .with_context(|| format!("writing {}", csv_path.display()))?;
    let text = emit_table(&report.rows, TableFormat::Text)?;
    fs::write(out.join(format!("{stem}.txt")), &text)?;
    print!("{text}");
    eprintln!("wrote {}", csv_path.display());
    Ok(status)
}

#[allow(clippy::too_many_arguments)]
fn run(
    dataset: String,
    method: String,
    noise: f64,
    seed: u64,
    config: Option<PathBuf>,
    full: bool,
    overrides: Overrides,
) -> anyhow::Result<u8> {
    let kind: DatasetKind = dataset.parse()?;
    let mut cfg = match config {
        Some(p) => ExperimentConfig::load(&p)?,
        None => ExperimentConfig::preset(kind, false),
    };
    if cfg.dataset.kind != kind {
        return Err(Error::Config(format!("config is for {}, not {kind}", cfg.dataset.kind)).into());
    }
    if full {
        cfg = cfg.into_full();
    }
    cfg.methods = vec![method.parse::<Method>()?];
    cfg.noise_levels = vec![noise];
    cfg.seeds = vec![seed];
    cfg.validate()?;
    let report = run_experiment(&cfg, &overrides.options().with_env()?)?;
    let status = report_cells(&report);
    if !report.rows.is_empty() {
        print!("{}", emit_table(&report.rows, TableFormat::Csv)?);
    }
    Ok(status)
}

fn build_ops(config: PathBuf, overrides: Overrides) -> anyhow::Result<u8> {
    let cfg = ExperimentConfig::load(&config)?;
    for path in build_operators(&cfg, &overrides.options().with_env()?)? {
        println!("{}", path.display());
    }
    Ok(0)
}

fn run_selftest() -> u8 {
    let checks = selftest();
    for c in &checks {
        println!("{} {:<24} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if checks.iter().all(|c| c.passed) {
        0
    } else {
        FAILURE
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench {
            config,
            out,
            full,
            train_log,
            overrides,
        } => bench(config, out, full, train_log, overrides),
        Command::Run {
            dataset,
            method,
            noise,
            seed,
            config,
            full,
            overrides,
        } => run(dataset, method, noise, seed, config, full, overrides),
        Command::BuildOps { config, overrides } => build_ops(config, overrides),
        Command::Selftest => Ok(run_selftest()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if usage_error(&e) { USAGE } else { FAILURE })
        }
    }
}
