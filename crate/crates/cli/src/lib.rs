//! Experiment driver for generalized Hofstadter matrices: JSON configuration,
//! parallel b-sweeps, CSV datasets and a JSON run summary.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::commands::{Context, Outcome};
use crate::config::{config_hash, ExperimentConfig};
use crate::output::RunSummary;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error(transparent)]
    Core(#[from] hofmat_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Spectra over the b grid.
    Butterfly,
    /// Hausdorff distances from b0 and the power-law fit.
    Holder,
    /// Extremal values and a tracked gap edge over the grid.
    Edges,
    /// The four-step distance chain at b0.
    Chain,
    /// Invariant suite; nonzero exit if a hard check fails.
    Verify,
    /// Assembled quadratic forms against direct quadrature.
    OracleCheck,
    /// Assembles once (cached) and reports the band profile.
    Assemble,
    /// Spectrum at the first grid value.
    Spectrum,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Butterfly => "butterfly",
            Command::Holder => "holder",
            Command::Edges => "edges",
            Command::Chain => "chain",
            Command::Verify => "verify",
            Command::OracleCheck => "oracle-check",
            Command::Assemble => "assemble",
            Command::Spectrum => "spectrum",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hofmat", version, about = "Spectral experiments on generalized Hofstadter matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to HOFMAT_THREADS, then to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized checks (overrides `seed` in the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Resolved options of one run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

fn thread_count(flag: Option<usize>) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("HOFMAT_THREADS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("HOFMAT_THREADS: not a count: {v:?}")))?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        },
    };
    if n == 0 {
        return Err(CliError::Config("threads: must be at least 1".into()));
    }
    Ok(n)
}

fn dispatch(command: Command, ctx: &Context, out_dir: &Path, seed: u64) -> Result<Outcome, CliError> {
    match command {
        Command::Butterfly => commands::butterfly(ctx),
        Command::Holder => commands::holder(ctx),
        Command::Edges => commands::edges(ctx),
        Command::Chain => commands::chain(ctx),
        Command::Verify => commands::verify(ctx, seed),
        Command::OracleCheck => commands::oracle_check(ctx),
        Command::Assemble => commands::assemble_cmd(ctx, &out_dir.join("matrix.bin")),
        Command::Spectrum => commands::spectrum(ctx),
    }
}

/// Runs one command and writes its CSV files and `summary.json`.
pub fn run(command: Command, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let (cfg, text) = ExperimentConfig::load(&opts.config)?;
    let hash = config_hash(&text);
    let seed = opts.seed.unwrap_or(cfg.seed);
    let out_dir = opts.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let threads = thread_count(opts.threads)?;
    std::fs::create_dir_all(&out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Invariant(format!("cannot start worker pool: {e}")))?;
    let ctx = Context::new(cfg)?;
    let outcome = pool.install(|| dispatch(command, &ctx, &out_dir, seed))?;

    let mut outputs = Vec::new();
    for t in &outcome.tables {
        outputs.push(t.write(&out_dir, &hash)?.display().to_string());
    }
    let summary = RunSummary {
        command: command.name().into(),
        config_sha256: hash,
        seed,
        threads,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        passed: outcome.passed(),
        checks: outcome.checks,
        warnings: outcome.warnings,
        outputs,
        results: serde_json::Value::Object(outcome.results),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Invariant(e.to_string()))?;
    std::fs::write(out_dir.join("summary.json"), json + "\n")?;
    Ok(summary)
}

/// Exit code for a finished run: 0 if every hard check passed, else 1.
pub fn exit_code(result: &Result<RunSummary, CliError>) -> i32 {
    match result {
        Ok(s) if s.passed => 0,
        Ok(_) => 1,
        Err(e) => e.exit_code(),
    }
}
