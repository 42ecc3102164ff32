//! One handler per experiment subcommand. Handlers resolve defaults into the
//! config, run the library, and return the rendered files plus a short
//! human-readable summary.

use anyhow::{bail, ensure};
use qwalk_core::applications::centrality::qw_centrality;
use qwalk_core::applications::isomorphism::{default_certificate_times, gi_test, DEFAULT_GI_THRESHOLD};
use qwalk_core::applications::search::{
    spatial_search, GammaStrategy, SearchParams, SearchStart, SWEEP_HORIZON_FACTOR,
};
use qwalk_core::applications::topology::{amcd, amcqm, build_topo_model, Axis, TopoFlavor};
use qwalk_core::dynamics::{
    classical_hitting, default_dt, instance_mixing, quantum_hitting, Family, HittingResult, MixingResult, WalkInstance,
    Walker,
};
use qwalk_core::evolution::{probability_series, propagator, ClassicalWalk};
use qwalk_core::graph::{brute_force_isomorphic, double_edge_swap, permute_graph, random_permutation, Graph};
use qwalk_core::multiparticle::{
    correlation_via_extended_walk, extended_graph, two_particle_correlation,
};
use qwalk_core::seed::child_seed;
use qwalk_core::{HermitianOperator, ParticleKind, ProbabilityDistribution, QuantumState, VERSION};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{read_graph, ExperimentConfig, GraphKind, WalkerChoice};
use crate::output::{csv, csv_columns, Outputs, Report};

/// Files to write and lines to print for a finished run.
pub struct Run {
    pub outputs: Outputs,
    pub summary: Vec<String>,
}

fn report<R: Serialize>(outputs: &mut Outputs, command: &str, config: &ExperimentConfig, result: &R) -> anyhow::Result<()> {
    outputs.add_json(
        format!("{command}.report.json"),
        &Report { command, version: VERSION, config, result },
    )
}

/// Generates (and optionally extends) a graph, writing it as `graph.json`.
pub fn graph(mut cfg: ExperimentConfig) -> anyhow::Result<Run> {
    let base = cfg.resolve_graph((GraphKind::GluedTree, 5))?;
    let g = match cfg.particles {
        Some(kind) => extended_graph(&base, kind)?.1,
        None => base,
    };
    #[derive(Serialize)]
    struct Summary {
        n: usize,
        edges: usize,
        connected: bool,
        diameter: Option<usize>,
    }
    let s = Summary { n: g.n(), edges: g.edge_count(), connected: g.is_connected(), diameter: g.diameter() };
    let mut outputs = Outputs::default();
    outputs.add("graph.json", g.to_json()? + "\n");
    report(&mut outputs, "graph", &cfg, &s)?;
    Ok(Run { outputs, summary: vec![format!("{} vertices, {} edges", s.n, s.edges)] })
}

/// Probability time series of a quantum or classical walk, optionally on a
/// two-particle extended graph.
pub fn evolve(mut cfg: ExperimentConfig) -> anyhow::Result<Run> {
    let base = cfg.resolve_graph((GraphKind::Path, 6))?;
    let walker = *cfg.walker.get_or_insert(WalkerChoice::Quantum);
    ensure!(walker != WalkerChoice::Both, "evolve runs one walker at a time");
    let t_max = *cfg.t_max.get_or_insert(10.0);
    let dt = *cfg.dt.get_or_insert(0.1);
    ensure!(t_max > 0.0 && dt > 0.0 && dt <= t_max, "need 0 < dt <= t_max");
    let steps = (t_max / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| (k as f64 * dt).min(t_max)).collect();

    let (g, labels, start) = match cfg.particles {
        Some(kind) => {
            let (basis, ext) = extended_graph(&base, kind)?;
            let inputs = cfg.resolve_inputs()?;
            let start = basis
                .index_of(inputs.0, inputs.1)
                .ok_or_else(|| anyhow::anyhow!("inputs {inputs:?} are not a basis state for {kind}"))?;
            (ext, basis.labels(), start)
        }
        None => {
            let start = cfg.start.get_or_insert_with(|| vec![0]);
            ensure!(start.len() == 1, "evolve takes a single start vertex");
            let labels = base.labels().map_or_else(|| (0..base.n()).map(|v| v.to_string()).collect(), <[_]>::to_vec);
            let s = start[0];
            (base, labels, s)
        }
    };
    let rows: Vec<Vec<f64>> = if walker == WalkerChoice::Quantum {
        let h = HermitianOperator::from_graph(&g);
        probability_series(&h, &QuantumState::basis(g.n(), start)?, &times)?.rows
    } else {
        ClassicalWalk::new(&g)
            .distributions(&ProbabilityDistribution::point_mass(g.n(), start)?, &times)?
            .into_iter()
            .map(ProbabilityDistribution::into_vec)
            .collect()
    };
    #[derive(Serialize)]
    struct Result<'a> {
        dim: usize,
        start: usize,
        labels: &'a [String],
        final_time: f64,
        final_distribution: &'a [f64],
    }
    let last = rows.last().expect("grid has at least one point");
    let result = Result { dim: g.n(), start, labels: &labels, final_time: t_max, final_distribution: last };
    let mut header = vec!["t".to_string()];
    header.extend((0..g.n()).map(|k| format!("v{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut outputs = Outputs::default();
    outputs.add("evolve.csv", csv(&header, times.iter().zip(&rows).map(|(&t, r)| [&[t][..], r].concat())));
    report(&mut outputs, "evolve", &cfg, &result)?;
    Ok(Run { outputs, summary: vec![format!("{} vertices, {} time points", g.n(), times.len())] })
}

/// Two-particle output distribution from the correlation formulas, checked
/// against the extended-graph walk when one exists.
pub fn correlate(mut cfg: ExperimentConfig) -> anyhow::Result<Run> {
    let g = cfg.resolve_graph((GraphKind::Path, 4))?;
    let kind = *cfg.particles.get_or_insert(ParticleKind::Boson);
    let inputs = cfg.resolve_inputs()?;
    let t = *cfg.t.get_or_insert(1.0);
    let u = propagator(&HermitianOperator::from_graph(&g), t);
    let (basis, dist) = two_particle_correlation(&u, inputs, kind)?;
    let max_deviation = if kind.has_extended_graph() {
        let (_, walked) = correlation_via_extended_walk(&g, kind, inputs, t)?;
        Some(dist.probs().iter().zip(walked.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    } else {
        None
    };
    #[derive(Serialize)]
    struct Result<'a> {
        labels: Vec<String>,
        probabilities: &'a [f64],
        /// Largest difference from the extended-graph walk.
        max_deviation: Option<f64>,
    }
    let result = Result { labels: basis.labels(), probabilities: dist.probs(), max_deviation };
    let rows = basis.states().iter().zip(dist.probs()).map(|(&(i, j), &p)| vec![i as f64, j as f64, p]);
    let mut outputs = Outputs::default();
    outputs.add("correlate.csv", csv(&["i", "j", "p"], rows));
    report(&mut outputs, "correlate", &cfg, &result)?;
    let mut summary = vec![format!("{} output pairs for {kind}", basis.len())];
    if let Some(d) = max_deviation {
        summary.push(format!("max deviation from extended walk: {d:.3e}"));
    }
    Ok(Run { outputs, summary })
}

#[derive(Serialize)]
struct HittingPeak {
    t_opt: f64,
    efficiency: f64,
}

impl From<&HittingResult> for HittingPeak {
    fn from(r: &HittingResult) -> Self {
        Self { t_opt: r.t_opt, efficiency: r.efficiency }
    }
}

/// Corner-to-corner hitting on a two-boson family member.
pub fn hitting(mut cfg: ExperimentConfig) -> anyhow::Result<Run> {
    let family = *cfg.family.get_or_insert(Family::Ecube);
    let size = *cfg.size.get_or_insert(default_size(family));
    let walker = *cfg.walker.get_or_insert(WalkerChoice::Both);
    let inst = WalkInstance::new(family, size)?;
    let (t_max, dt) = inst.hitting_window();
    let t_max = *cfg.t_max.get_or_insert(t_max);
    let dt = *cfg.dt.get_or_insert(dt);
    let q = walker.quantum().then(|| quantum_hitting(&inst.hamiltonian, inst.start, inst.target, t_max, dt)).transpose()?;
    let c = walker.classical().then(|| classical_hitting(&inst.extended, inst.start, inst.target, t_max, dt)).transpose()?;

    #[derive(Serialize)]
    struct Result {
        dim: usize,
        layers: usize,
        start: String,
        target: String,
        quantum: Option<HittingPeak>,
        classical: Option<HittingPeak>,
        ratio: Option<f64>,
    }
    let labels = inst.basis.labels();
    let result = Result {
        dim: inst.extended.n(),
        layers: inst.layers(),
        start: labels[inst.start].clone(),
        target: labels[inst.target].clone(),
        quantum: q.as_ref().map(Into::into),
        classical: c.as_ref().map(Into::into),
        ratio: q.as_ref().zip(c.as_ref()).map(|(q, c)| q.efficiency / c.efficiency),
    };
    let mut outputs = Outputs::default();
    let mut header = vec!["t"];
    let mut columns: Vec<&[f64]> = Vec::new();
    let times = q.as_ref().or(c.as_ref()).map(|r| r.times.as_slice()).unwrap_or(&[]);
    columns.push(times);
    if let Some(q) = &q {
        header.push("quantum");
        columns.push(&q.profile);
    }
    if let Some(c) = &c {
        header.push("classical");
        columns.push(&c.profile);
    }
    outputs.add("hitting.csv", csv_columns(&header, &columns));
    report(&mut outputs, "hitting", &cfg, &result)?;
    let mut summary = vec![format!("{family} size {size}: {} extended vertices", result.dim)];
    if let Some(q) = &result.quantum {
        summary.push(format!("quantum   efficiency {:.4} at t = {:.4}", q.efficiency, q.t_opt));
    }
    if let Some(c) = &result.classical {
        summary.push(format!("classical efficiency {:.4} at t = {:.4}", c.efficiency, c.t_opt));
    }
    Ok(Run { outputs, summary })
}

pub(crate) fn default_size(family: Family) -> usize {
    match family {
        Family::Ergt => 5,
        Family::Ecube => 4,
        Family::Enet | Family::Egrid => 12,
    }
}

/// Mixing time to the limiting distribution for one family member.
pub fn mixing(mut cfg: ExperimentConfig) -> anyhow::Result<Run> {
    let family = *cfg.family.get_or_insert(Family::Enet);
    let size = *cfg.size.get_or_insert(default_size(family));
    let walker = *cfg.walker.get_or_insert(WalkerChoice::Both);
    let eps = *cfg.eps.get_or_insert(0.25);
    let inst = WalkInstance::new(family, size)?;
    let dt = *cfg.dt.get_or_insert(default_dt(&inst.extended));
    let horizon = cfg.horizon;
    let run = |w: Walker, default_horizon: f64| instance_mixing(&inst, w, eps, horizon.unwrap_or(default_horizon), dt);
    let q = walker.quantum().then(|| run(Walker::Quantum, 200.0)).transpose()?;
    let c = walker.classical().then(|| run(Walker::Classical, 400.0)).transpose()?;

    #[derive(Serialize)]
    struct Result {
        dim: usize,
        quantum_t_mix: Option<f64>,
        classical_t_mix: Option<f64>,
    }
    let result = Result {
        dim: inst.extended.n(),
        quantum_t_mix: q.as_ref().map(|r| r.t_mix),
        classical_t_mix: c.as_ref().map(|r| r.t_mix),
    };
    let mut outputs = Outputs::default();
    let trace = |r: &MixingResult| csv_columns(&["t", "tv"], &[&r.times, &r.trace]);
    if let Some(q) = &q {
        outputs.add("mixing-quantum.csv", trace(q));
    }
    if let Some(c) = &c {
        outputs.add("mixing-classical.csv", trace(c));
    }
    report(&mut outputs, "mixing", &cfg, &result)?;
    let mut summary = vec![format!("{family} size {size}: {} extended vertices, eps = {eps}", result.dim)];
    if let Some(t) = result.quantum_t_mix {
        summary.push(format!("quantum   t_mix {t:.4}"));
    }
    if let Some(t) = result.classical_t_mix {
        summary.push(format!("classical t_mix {t:.4}"));
    }
    Ok(Run { outputs, summary })
}

/// Time-averaged walk occupation versus eigenvector centrality.
pub fn centrality(mut cfg: ExperimentConfig) -> anyhow::Result<Run> {
    let g = cfg.resolve_graph((GraphKind::ScaleFree, 10))?;
    let kind = *cfg.particles.get_or_insert(ParticleKind::Boson);
    let horizon = *cfg.horizon.get_or_insert(500.0);
    let steps = *cfg.steps.get_or_insert(5000);
    let r = qw_centrality(&g, kind, horizon, steps)?;
    let rows = (0..r.qw_scores.len()).map(|v| vec![v as f64, r.qw_scores[v], r.ev_scores[v]]);
    let mut outputs = Outputs::default();
    outputs.add("centrality.csv", csv(&["vertex", "qw", "ev"], rows));
    report(&mut outputs, "centrality", &cfg, &r)?;
    let top = |rank: &[usize]| rank.iter().take(3).map(|&v| r.labels[v].clone()).collect::<Vec<_>>().join(" ");
    Ok(Run {
        outputs,
        summary: vec![
            format!("similarity {:.4}", r.similarity),
            format!("top-3 walk: {} | eigenvector: {}", top(&r.qw_ranking), top(&r.ev_ranking)),
        ],
    })
}

/// Spatial search on a graph or its two-particle extension. Without
/// `--marked`, three distinct marked vertices are drawn from the seed.
pub fn search(mut cfg: ExperimentConfig) -> anyhow::Result<Run> {
    let base = cfg.resolve_graph((GraphKind::ErdosRenyi, 10))?;
    let g = match cfg.particles {
        Some(kind) => extended_graph(&base, kind)?.1,
        None => base,
    };
    let marked = match cfg.marked.clone() {
        Some(m) => m,
        None => {
            let seed = cfg.seed();
            cfg.seed = Some(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 0));
            let m = rand::seq::index::sample(&mut rng, g.n(), 3.min(g.n())).into_vec();
            cfg.marked = Some(m.clone());
            m
        }
    };
    let start = match &cfg.start {
        Some(s) => SearchStart::Vertices(s.clone()),
        None => SearchStart::AllVertices,
    };
    let defaults = SearchParams { horizon_factor: SWEEP_HORIZON_FACTOR, ..SearchParams::default() };
    let params = SearchParams {
        horizon_factor: *cfg.horizon_factor.get_or_insert(defaults.horizon_factor),
        dt: *cfg.dt.get_or_insert(defaults.dt),
        ..defaults
    };
    let gamma = cfg.gamma.map_or(GammaStrategy::Auto, GammaStrategy::Fixed);
    let r = spatial_search(&g, &marked, &start, gamma, &params)?;
    #[derive(Serialize)]
    struct Result {
        dim: usize,
        marked: Vec<usize>,
        t_opt: f64,
        success: f64,
        gamma: f64,
    }
    let result = Result { dim: g.n(), marked, t_opt: r.t_opt, success: r.success, gamma: r.gamma };
    let mut outputs = Outputs::default();
    report(&mut outputs, "search", &cfg, &result)?;
    Ok(Run {
        outputs,
        summary: vec![format!(
            "N = {}: success {:.4} at t = {:.4} (gamma {:.5})",
            result.dim, r.success, r.t_opt, r.gamma
        )],
    })
}

/// Certificate comparison of two graphs: two files, or one graph against a
/// seeded relabeling (`--permute`) or rewiring (`--rewire`) of itself.
pub fn gi(mut cfg: ExperimentConfig) -> anyhow::Result<Run> {
    let g1 = cfg.resolve_graph((GraphKind::ErdosRenyi, 8))?;
    let seed = cfg.seed();
    let g2: Graph = match (&cfg.other_graph_file, cfg.permute.unwrap_or(false), cfg.rewire.unwrap_or(false)) {
        (Some(path), false, false) => read_graph(path)?,
        (None, true, false) => {
            cfg.seed = Some(seed);
            permute_graph(&g1, &random_permutation(g1.n(), child_seed(seed, 1)))?
        }
        (None, false, true) => {
            cfg.seed = Some(seed);
            double_edge_swap(&g1, child_seed(seed, 2))?
        }
        (None, false, false) => bail!("gi needs --other-graph-file, --permute or --rewire"),
        _ => bail!("--other-graph-file, --permute and --rewire are mutually exclusive"),
    };
    let times = cfg.times.get_or_insert_with(default_certificate_times).clone();
    let threshold = *cfg.threshold.get_or_insert(DEFAULT_GI_THRESHOLD);
    let r = gi_test(&g1, &g2, &times, threshold)?;
    #[derive(Serialize)]
    struct Result<'a> {
        #[serde(flatten)]
        test: &'a qwalk_core::applications::isomorphism::GiResult,
        /// Exhaustive check, for graphs small enough to afford it.
        brute_force_isomorphic: Option<bool>,
    }
    let brute = (g1.n() <= qwalk_core::graph::BRUTE_FORCE_MAX_N).then(|| brute_force_isomorphic(&g1, &g2)).transpose()?;
    let result = Result { test: &r, brute_force_isomorphic: brute };
    let mut outputs = Outputs::default();
    if !r.distances.is_empty() {
        outputs.add("gi.csv", csv_columns(&["t", "distance"], &[&times, &r.distances]));
    }
    report(&mut outputs, "gi", &cfg, &result)?;
    let verdict = serde_json::to_value(r.verdict)?;
    let mut summary = vec![format!(
        "{} (mean distance {})",
        verdict.as_str().unwrap_or_default(),
        r.mean_distance.map_or("n/a".to_string(), |d| format!("{d:.4e}"))
    )];
    if let Some(b) = brute {
        summary.push(format!("brute force: {}", if b { "isomorphic" } else { "non-isomorphic" }));
    }
    Ok(Run { outputs, summary })
}

/// Mean chiral displacement (SSH2D) or quadrupole moment (BBH).
pub fn topo(mut cfg: ExperimentConfig) -> anyhow::Result<Run> {
    let flavor = *cfg.flavor.get_or_insert(TopoFlavor::Ssh2d);
    let cells = match flavor {
        TopoFlavor::Ssh2d => 8,
        TopoFlavor::Bbh => 12,
    };
    let nx = *cfg.nx.get_or_insert(cells);
    let ny = *cfg.ny.get_or_insert(cells);
    let v = *cfg.v.get_or_insert(0.1);
    let w = *cfg.w.get_or_insert(1.0);
    let horizon = *cfg.horizon.get_or_insert(50.0);
    let steps = *cfg.steps.get_or_insert(200);
    let model = build_topo_model(flavor, nx, ny, v, w)?;
    let (quantity, value) = match flavor {
        TopoFlavor::Ssh2d => {
            let axis = *cfg.axis.get_or_insert(Axis::Y);
            ("amcd", amcd(&model, axis, &model.central_state(), horizon, steps)?)
        }
        TopoFlavor::Bbh => ("amcqm", amcqm(&model, model.central_pair(), horizon, steps)?),
    };
    #[derive(Serialize)]
    struct Result {
        sites: usize,
        chiral_defect: f64,
        quantity: &'static str,
        value: f64,
    }
    let result = Result { sites: model.dim(), chiral_defect: model.chiral_defect(), quantity, value };
    let mut outputs = Outputs::default();
    report(&mut outputs, "topo", &cfg, &result)?;
    Ok(Run { outputs, summary: vec![format!("{quantity} = {value:.4} on {nx}x{ny} cells (v = {v}, w = {w})")] })
}
