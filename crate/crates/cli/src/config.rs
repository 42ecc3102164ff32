//! Experiment parameters shared by every subcommand.
//!
//! The same struct is parsed from command-line flags and from a `--config`
//! JSON file; flags win. After a subcommand fills in its defaults the
//! resolved struct is echoed into the report.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use qwalk_core::applications::topology::{Axis, TopoFlavor};
use qwalk_core::dynamics::Family;
use qwalk_core::graph::{
    generate_complete, generate_cycle, generate_erdos_renyi, generate_glued_tree, generate_hypercube, generate_path,
    generate_scale_free, generate_star, Graph,
};
use qwalk_core::ParticleKind;
use serde::{Deserialize, Serialize};

/// Base-graph generators reachable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    /// Glued binary tree; `n` is the odd edge-layer count.
    GluedTree,
    /// Hypercube; `n` is the dimension.
    Hypercube,
    Cycle,
    Path,
    Star,
    Complete,
    /// Connected G(n, p).
    ErdosRenyi,
    /// Preferential attachment with `m` links per new vertex.
    ScaleFree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WalkerChoice {
    Quantum,
    Classical,
    Both,
}

impl WalkerChoice {
    pub fn quantum(self) -> bool {
        self != WalkerChoice::Classical
    }

    pub fn classical(self) -> bool {
        self != WalkerChoice::Quantum
    }
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        other => Err(format!("unknown axis '{other}' (expected x or y)")),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Generated base graph.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphKind>,
    /// Graph JSON file; overrides --graph.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_file: Option<PathBuf>,
    /// Second graph JSON file (gi).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_graph_file: Option<PathBuf>,
    /// Size parameter of --graph.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Edge probability for erdos-renyi.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Links per new vertex for scale-free.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Extended-graph family for hitting and mixing.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    /// Family size (tree edge layers, cube dimension, cycle or path length).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    /// distinguishable, boson, fermion or phase:<radians>.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub particles: Option<ParticleKind>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walker: Option<WalkerChoice>,
    /// Input modes of the two particles, e.g. `0,1`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<usize>>,
    /// Start vertices.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    /// Marked vertices for search.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marked: Option<Vec<usize>>,
    /// Evolution time.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Averaging or mixing horizon.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Search horizon in units of sqrt(N).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_factor: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Certificate sample times.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Fixed search hopping rate; tuned automatically when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Compare the graph with a seeded random relabeling of itself (gi).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permute: Option<bool>,
    /// Compare the graph with a seeded degree-preserving rewiring (gi).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rewire: Option<bool>,
    /// ssh2d or bbh.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flavor: Option<TopoFlavor>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    /// Intracell hopping.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    /// Intercell hopping.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[arg(long, value_parser = parse_axis)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    /// Set from the global `--seed` flag.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

macro_rules! overlay_fields {
    ($top:expr, $base:expr; $($field:ident),* $(,)?) => {
        ExperimentConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Field-wise `self` if set, else `base`.
    pub fn overlay(self, base: ExperimentConfig) -> ExperimentConfig {
        overlay_fields!(self, base;
            graph, graph_file, other_graph_file, n, p, m, family, size, particles, walker, inputs, start,
            target, marked, t, t_max, dt, horizon, horizon_factor, steps, times, eps, gamma, threshold,
            permute, rewire, flavor, nx, ny, v, w, axis, seed,
        )
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Loads `graph_file` if given, otherwise generates `graph` with `n`
    /// (and `p`, `m`, seed), filling in `default` when neither is set.
    pub fn resolve_graph(&mut self, default: (GraphKind, usize)) -> anyhow::Result<Graph> {
        if let Some(path) = &self.graph_file {
            if self.graph.is_some() {
                bail!("--graph and --graph-file are mutually exclusive");
            }
            return read_graph(path);
        }
        let kind = *self.graph.get_or_insert(default.0);
        let n = *self.n.get_or_insert(if kind == default.0 { default.1 } else { 6 });
        let seed = self.seed();
        let g = match kind {
            GraphKind::GluedTree => generate_glued_tree(n)?,
            GraphKind::Hypercube => generate_hypercube(n)?,
            GraphKind::Cycle => generate_cycle(n)?,
            GraphKind::Path => generate_path(n)?,
            GraphKind::Star => generate_star(n)?,
            GraphKind::Complete => generate_complete(n)?,
            GraphKind::ErdosRenyi => {
                self.seed = Some(seed);
                generate_erdos_renyi(n, *self.p.get_or_insert(0.25), seed)?
            }
            GraphKind::ScaleFree => {
                self.seed = Some(seed);
                generate_scale_free(n, *self.m.get_or_insert(2), seed)?
            }
        };
        Ok(g)
    }

    /// Exactly two input modes, defaulting to `(0, 1)`.
    pub fn resolve_inputs(&mut self) -> anyhow::Result<(usize, usize)> {
        let inputs = self.inputs.get_or_insert_with(|| vec![0, 1]);
        match inputs.as_slice() {
            &[a, b] => Ok((a, b)),
            other => bail!("--inputs takes exactly two modes, got {}", other.len()),
        }
    }
}

/// Seed used when neither `--seed` nor the config file gives one.
pub const DEFAULT_SEED: u64 = 2024;

pub fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading graph {}", path.display()))?;
    Graph::from_json(&text).with_context(|| format!("parsing graph {}", path.display()))
}
