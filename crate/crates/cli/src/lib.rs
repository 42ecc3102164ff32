//! The `qwalk` command line: argument parsing, configuration merging,
//! thread-pool setup, dispatch and exit codes.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a numerical
//! procedure does not converge.

pub mod commands;
pub mod config;
pub mod output;
pub mod reproduce;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use crate::commands::Run;
use crate::config::ExperimentConfig;
use crate::reproduce::Figure;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "QWALK_THREADS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Continuous-time quantum walk experiments")]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for reports and CSVs.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// JSON file of experiment parameters; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: $QWALK_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph, optionally its two-particle extension.
    Graph(ExperimentConfig),
    /// Probability time series of a single walk.
    Evolve(ExperimentConfig),
    /// Two-particle output correlations.
    Correlate(ExperimentConfig),
    /// Corner-to-corner hitting efficiency.
    Hitting(ExperimentConfig),
    /// Mixing time to the limiting distribution.
    Mixing(ExperimentConfig),
    /// Walk centrality versus eigenvector centrality.
    Centrality(ExperimentConfig),
    /// Spatial search for marked vertices.
    Search(ExperimentConfig),
    /// Certificate-based graph isomorphism test.
    Gi(ExperimentConfig),
    /// Chiral displacement probes of SSH2D and BBH lattices.
    Topo(ExperimentConfig),
    /// Regenerate a figure bundle (2A, 2B, 2C, 2D, 3A, 3B, 3C, 3D).
    Reproduce {
        /// Figure id.
        figure: String,
    },
}

/// Error carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let numerical = error
            .chain()
            .any(|c| c.downcast_ref::<qwalk_core::Error>().is_some_and(qwalk_core::Error::is_numerical));
        Failure { code: if numerical { EXIT_NOT_CONVERGED } else { EXIT_INVALID }, error }
    }
}

/// Parses `args`, runs the command and reports errors on stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(lines) => {
            let mut out = std::io::stdout().lock();
            for line in lines {
                let _ = writeln!(out, "{line}");
            }
            ExitCode::from(EXIT_OK)
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn thread_count(flag: Option<usize>) -> anyhow::Result<Option<usize>> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a thread count"))?),
            Err(_) => None,
        },
    };
    anyhow::ensure!(n != Some(0), "thread count must be positive");
    Ok(n)
}

fn run(cli: Cli) -> Result<Vec<String>, Failure> {
    let threads = thread_count(cli.threads)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building thread pool")?;

    let file_config = cli.config.as_deref().map(ExperimentConfig::load).transpose()?.unwrap_or_default();
    let resolve = |flags: ExperimentConfig| -> ExperimentConfig {
        let mut c = flags.overlay(file_config.clone());
        c.seed = cli.seed.or(c.seed);
        c
    };
    let (run, dir): (Run, PathBuf) = pool.install(|| -> Result<_, Failure> {
        Ok(match cli.command {
            Command::Graph(f) => (commands::graph(resolve(f))?, cli.out_dir.clone()),
            Command::Evolve(f) => (commands::evolve(resolve(f))?, cli.out_dir.clone()),
            Command::Correlate(f) => (commands::correlate(resolve(f))?, cli.out_dir.clone()),
            Command::Hitting(f) => (commands::hitting(resolve(f))?, cli.out_dir.clone()),
            Command::Mixing(f) => (commands::mixing(resolve(f))?, cli.out_dir.clone()),
            Command::Centrality(f) => (commands::centrality(resolve(f))?, cli.out_dir.clone()),
            Command::Search(f) => (commands::search(resolve(f))?, cli.out_dir.clone()),
            Command::Gi(f) => (commands::gi(resolve(f))?, cli.out_dir.clone()),
            Command::Topo(f) => (commands::topo(resolve(f))?, cli.out_dir.clone()),
            Command::Reproduce { figure } => {
                let figure: Figure = figure.parse().map_err(anyhow::Error::msg)?;
                let seed = cli.seed.or(file_config.seed).unwrap_or(config::DEFAULT_SEED);
                (reproduce::reproduce(figure, seed)?, cli.out_dir.join(figure.id()))
            }
        })
    })?;
    let written = run.outputs.write_all(&dir)?;
    let mut lines = run.summary;
    lines.extend(written.iter().map(|p| format!("wrote {}", p.display())));
    Ok(lines)
}
