//! Hitting and mixing of quantum versus classical walks on extended graphs.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{
    limiting_distribution, tv_distance, ClassicalWalk, HermitianOperator, ProbabilityDistribution, Propagation,
    QuantumState,
};
use crate::fit::{exponential_fit, linear_fit, power_law_fit, ExponentialFit, LinearFit, PowerLawFit};
use crate::graph::{generate_cycle, generate_glued_tree, generate_hypercube, generate_path, Graph};
use crate::multiparticle::{extended_graph, ExtendedBasis, ParticleKind};
use crate::optimize::{bisect_root, golden_section_max};

/// Base-graph families whose two-boson extensions are used for hitting and mixing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Glued binary tree; size is the tree's (odd) edge-layer count.
    Ergt,
    /// Hypercube; size is the dimension.
    Ecube,
    /// Cycle; size is the vertex count.
    Enet,
    /// Path; size is the vertex count.
    Egrid,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Ergt, Family::Ecube, Family::Enet, Family::Egrid];

    pub fn base_graph(self, size: usize) -> Result<Graph> {
        match self {
            Family::Ergt => generate_glued_tree(size),
            Family::Ecube => generate_hypercube(size),
            Family::Enet => generate_cycle(size),
            Family::Egrid => generate_path(size),
        }
    }

    /// Base vertices of the two corners used for hitting: entrance and the
    /// farthest vertex from it.
    fn corners(self, base: &Graph) -> (usize, usize) {
        match self {
            Family::Enet => (0, base.n() / 2),
            _ => (0, base.n() - 1),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Ergt => "ergt",
            Family::Ecube => "ecube",
            Family::Enet => "enet",
            Family::Egrid => "egrid",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ergt" => Ok(Family::Ergt),
            "ecube" => Ok(Family::Ecube),
            "enet" => Ok(Family::Enet),
            "egrid" => Ok(Family::Egrid),
            other => Err(invalid(format!("unknown family '{other}' (expected ergt, ecube, enet or egrid)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Walker {
    Quantum,
    Classical,
}

impl FromStr for Walker {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quantum" => Ok(Walker::Quantum),
            "classical" => Ok(Walker::Classical),
            other => Err(invalid(format!("unknown walker '{other}' (expected quantum or classical)"))),
        }
    }
}

/// Two-boson extended graph of a family member with its corner-to-corner
/// start and target (both particles on the entrance, both on the exit).
#[derive(Clone, Debug)]
pub struct WalkInstance {
    pub family: Family,
    pub size: usize,
    pub base: Graph,
    pub basis: ExtendedBasis,
    pub extended: Graph,
    pub hamiltonian: HermitianOperator,
    pub start: usize,
    pub target: usize,
}

impl WalkInstance {
    pub fn new(family: Family, size: usize) -> Result<Self> {
        let base = family.base_graph(size)?;
        let (basis, extended) = extended_graph(&base, ParticleKind::Boson)?;
        let hamiltonian = HermitianOperator::from_graph(&extended);
        let (entry, exit) = family.corners(&base);
        let start = basis.index_of(entry, entry).expect("corner in range");
        let target = basis.index_of(exit, exit).expect("corner in range");
        Ok(Self { family, size, base, basis, extended, hamiltonian, start, target })
    }

    /// Edge layers of the extended graph (twice the base diameter for the
    /// layered families).
    pub fn layers(&self) -> usize {
        self.extended
            .max_layer()
            .unwrap_or_else(|| 2 * self.base.diameter().unwrap_or(0))
    }

    /// Hitting window `(t_max, dt)`: twenty time units per extended layer, `dt = 0.01`.
    pub fn hitting_window(&self) -> (f64, f64) {
        (20.0 * self.layers() as f64, 0.01)
    }
}

/// Target-vertex probability over a time window and its refined maximum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingResult {
    pub t_opt: f64,
    pub efficiency: f64,
    pub times: Vec<f64>,
    pub profile: Vec<f64>,
}

fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(invalid(format!("t_max must be positive, got {t_max}")));
    }
    if !(dt > 0.0) {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    if dt > t_max / 10.0 {
        return Err(invalid(format!("grid too coarse: dt = {dt} exceeds t_max / 10")));
    }
    let steps = (t_max / dt).round() as usize;
    Ok((0..=steps).map(|k| (k as f64 * dt).min(t_max)).collect())
}

fn refine_peak<F: FnMut(f64) -> f64>(times: &[f64], profile: &[f64], f: F) -> (f64, f64) {
    refine_at(times, profile, argmax(profile), f)
}

/// Golden-section refinement of the grid peak at index `k`.
fn refine_at<F: FnMut(f64) -> f64>(times: &[f64], profile: &[f64], k: usize, mut f: F) -> (f64, f64) {
    let lo = times[k.saturating_sub(1)];
    let hi = times[(k + 1).min(times.len() - 1)];
    let (t, v) = golden_section_max(&mut f, lo, hi, 1e-10);
    if v >= profile[k] {
        (t, v)
    } else {
        (times[k], profile[k])
    }
}

/// Grid peaks within this fraction of the sampled maximum are refined as
/// candidates for the first optimum.
const CANDIDATE_REL_TOL: f64 = 1e-3;

/// Roundoff allowance when picking the earliest of several equal peaks.
const PEAK_TIE_TOL: f64 = 1e-9;

/// First index whose value is within [`PEAK_TIE_TOL`] of the maximum.
fn argmax(values: &[f64]) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v >= max - PEAK_TIE_TOL).unwrap_or(0)
}

fn check_endpoints(dim: usize, start: usize, target: usize) -> Result<()> {
    if start >= dim || target >= dim {
        return Err(invalid(format!("start/target ({start}, {target}) out of range for {dim} vertices")));
    }
    if start == target {
        return Err(invalid("start and target must differ"));
    }
    Ok(())
}

/// Peak of `|<target| e^{-iHt} |start>|^2` over `[0, t_max]`.
pub fn quantum_hitting(
    h: &HermitianOperator,
    start: usize,
    target: usize,
    t_max: f64,
    dt: f64,
) -> Result<HittingResult> {
    check_endpoints(h.dim(), start, target)?;
    let times = time_grid(t_max, dt)?;
    let prop = Propagation::new(h, &QuantumState::basis(h.dim(), start)?)?;
    let prob = |t: f64| prop.amplitude(target, t).norm_sqr();
    let profile: Vec<f64> = times.iter().map(|&t| prob(t)).collect();
    // Grid samples straddle each peak differently, so a later revival can
    // sample higher than an equally tall earlier one. Refine every local
    // maximum near the top and keep the earliest that reaches the best.
    let max = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last = times.len() - 1;
    let refined: Vec<(f64, f64)> = (0..times.len())
        .filter(|&k| profile[k] >= max * (1.0 - CANDIDATE_REL_TOL))
        .filter(|&k| (k == 0 || profile[k] >= profile[k - 1]) && (k == last || profile[k] >= profile[k + 1]))
        .map(|k| {
            let stationary = (k > 0 && k < last)
                .then(|| bisect_root(|t| prop.probability_derivative(target, t), times[k - 1], times[k + 1], 1e-13))
                .flatten()
                .map(|t| (t, prob(t)))
                .filter(|&(_, v)| v >= profile[k]);
            stationary.unwrap_or_else(|| refine_at(&times, &profile, k, prob))
        })
        .collect();
    let best = refined.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    let (t_opt, efficiency) = refined
        .into_iter()
        .find(|&(_, v)| v >= best - PEAK_TIE_TOL)
        .unwrap_or_else(|| refine_peak(&times, &profile, prob));
    Ok(HittingResult { t_opt, efficiency, times, profile })
}

/// Peak target probability of the classical walk `e^{Qt}` from `start`.
pub fn classical_hitting(g: &Graph, start: usize, target: usize, t_max: f64, dt: f64) -> Result<HittingResult> {
    check_endpoints(g.n(), start, target)?;
    let times = time_grid(t_max, dt)?;
    let walk = ClassicalWalk::new(g);
    let p0 = ProbabilityDistribution::point_mass(g.n(), start)?;
    let profile = walk.vertex_profile(&p0, target, &times)?;
    let (t_opt, efficiency) = refine_peak(&times, &profile, |t| {
        walk.vertex_profile(&p0, target, &[t]).map(|v| v[0]).unwrap_or(0.0)
    });
    Ok(HittingResult { t_opt, efficiency, times, profile })
}

/// Hitting for a family member with its default window.
pub fn instance_hitting(inst: &WalkInstance, walker: Walker) -> Result<HittingResult> {
    let (t_max, dt) = inst.hitting_window();
    match walker {
        Walker::Quantum => quantum_hitting(&inst.hamiltonian, inst.start, inst.target, t_max, dt),
        Walker::Classical => classical_hitting(&inst.extended, inst.start, inst.target, t_max, dt),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HittingPoint {
    pub t_opt: f64,
    pub efficiency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingRow {
    pub size: usize,
    pub layers: usize,
    pub dim: usize,
    pub quantum: HittingPoint,
    pub classical: HittingPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    Linear,
    Exponential,
}

/// Linear and exponential fits of efficiency against extended layer count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFits {
    pub linear: LinearFit,
    pub exponential: ExponentialFit,
    pub better: DecayModel,
}

impl DecayFits {
    fn fit(layers: &[f64], eff: &[f64]) -> Result<Self> {
        let linear = linear_fit(layers, eff)?;
        let exponential = exponential_fit(layers, eff)?;
        let better = if exponential.residual < linear.residual { DecayModel::Exponential } else { DecayModel::Linear };
        Ok(Self { linear, exponential, better })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingScaling {
    pub family: Family,
    pub rows: Vec<HittingRow>,
    pub quantum: DecayFits,
    pub classical: DecayFits,
}

/// Quantum and classical hitting across sizes, with decay fits versus layers.
pub fn hitting_scaling(family: Family, sizes: &[usize]) -> Result<HittingScaling> {
    if sizes.len() < 2 {
        return Err(invalid("hitting scaling needs at least two sizes to fit a trend"));
    }
    let rows = sizes
        .par_iter()
        .map(|&size| {
            let inst = WalkInstance::new(family, size)?;
            if inst.extended.n() > 500 {
                return Err(invalid(format!("size {size} gives {} extended vertices (limit 500)", inst.extended.n())));
            }
            let q = instance_hitting(&inst, Walker::Quantum)?;
            let c = instance_hitting(&inst, Walker::Classical)?;
            Ok(HittingRow {
                size,
                layers: inst.layers(),
                dim: inst.extended.n(),
                quantum: HittingPoint { t_opt: q.t_opt, efficiency: q.efficiency },
                classical: HittingPoint { t_opt: c.t_opt, efficiency: c.efficiency },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let layers: Vec<f64> = rows.iter().map(|r| r.layers as f64).collect();
    let q: Vec<f64> = rows.iter().map(|r| r.quantum.efficiency).collect();
    let c: Vec<f64> = rows.iter().map(|r| r.classical.efficiency).collect();
    Ok(HittingScaling { family, quantum: DecayFits::fit(&layers, &q)?, classical: DecayFits::fit(&layers, &c)?, rows })
}

/// Distance-to-limit trace and the time after which it stays below `epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingResult {
    pub t_mix: f64,
    pub epsilon: f64,
    pub reference: Vec<f64>,
    pub times: Vec<f64>,
    pub trace: Vec<f64>,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

fn mixing_steps(horizon: f64, dt: f64) -> Result<usize> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    if !(dt > 0.0) || dt > horizon {
        return Err(invalid(format!("dt must lie in (0, horizon], got {dt}")));
    }
    Ok(((horizon / dt).round() as usize).max(1))
}

/// Earliest grid time after which every trace value is `<= eps`.
fn settle_time(times: &[f64], trace: &[f64], eps: f64, horizon: f64) -> Result<f64> {
    if trace.last().is_none_or(|&v| v > eps) {
        return Err(Error::NotConverged(format!(
            "distance still above eps = {eps} at horizon {horizon}; increase the horizon"
        )));
    }
    let k = trace.iter().rposition(|&v| v > eps).map_or(0, |k| k + 1);
    Ok(times[k])
}

/// Default grid step: one hundredth of the graph diameter.
pub fn default_dt(g: &Graph) -> f64 {
    0.01 * g.diameter().unwrap_or(1).max(1) as f64
}

/// Quantum mixing: TV distance between the running time average (on
/// `t_k = k dt`, `k = 1..`) and the limiting distribution.
pub fn quantum_mixing_time(
    h: &HermitianOperator,
    psi0: &QuantumState,
    eps: f64,
    horizon: f64,
    dt: f64,
) -> Result<MixingResult> {
    check_eps(eps)?;
    let steps = mixing_steps(horizon, dt)?;
    let reference = limiting_distribution(h, psi0, None)?.into_vec();
    let prop = Propagation::new(h, psi0)?;
    let mut sum = vec![0.0; h.dim()];
    let mut avg = vec![0.0; h.dim()];
    let mut times = Vec::with_capacity(steps);
    let mut trace = Vec::with_capacity(steps);
    for k in 1..=steps {
        let t = k as f64 * dt;
        for (s, p) in sum.iter_mut().zip(prop.probabilities(t)) {
            *s += p;
        }
        for (a, s) in avg.iter_mut().zip(&sum) {
            *a = s / k as f64;
        }
        times.push(t);
        trace.push(tv_distance(&avg, &reference)?);
    }
    let t_mix = settle_time(&times, &trace, eps, horizon)?;
    Ok(MixingResult { t_mix, epsilon: eps, reference, times, trace })
}

/// Classical mixing: pointwise TV distance between `p(t_k)` (`k = 0..`) and
/// the stationary limit of `e^{Qt} p0`.
pub fn classical_mixing_time(
    g: &Graph,
    p0: &ProbabilityDistribution,
    eps: f64,
    horizon: f64,
    dt: f64,
) -> Result<MixingResult> {
    check_eps(eps)?;
    let steps = mixing_steps(horizon, dt)?;
    let walk = ClassicalWalk::new(g);
    let reference = walk.stationary(p0)?.into_vec();
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let trace = walk
        .distributions(p0, &times)?
        .iter()
        .map(|p| tv_distance(p.probs(), &reference))
        .collect::<Result<Vec<_>>>()?;
    let t_mix = settle_time(&times, &trace, eps, horizon)?;
    Ok(MixingResult { t_mix, epsilon: eps, reference, times, trace })
}

/// Mixing from the corner start (both particles on vertex 0) of a family member.
pub fn instance_mixing(inst: &WalkInstance, walker: Walker, eps: f64, horizon: f64, dt: f64) -> Result<MixingResult> {
    match walker {
        Walker::Quantum => {
            let psi0 = QuantumState::basis(inst.extended.n(), inst.start)?;
            quantum_mixing_time(&inst.hamiltonian, &psi0, eps, horizon, dt)
        }
        Walker::Classical => {
            let p0 = ProbabilityDistribution::point_mass(inst.extended.n(), inst.start)?;
            classical_mixing_time(&inst.extended, &p0, eps, horizon, dt)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingSweepConfig {
    pub eps: f64,
    pub quantum_horizon: f64,
    pub classical_horizon: f64,
    /// `None` uses [`default_dt`] of each extended graph.
    pub dt: Option<f64>,
}

impl Default for MixingSweepConfig {
    fn default() -> Self {
        Self { eps: 0.25, quantum_horizon: 200.0, classical_horizon: 400.0, dt: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingRow {
    pub size: usize,
    pub dim: usize,
    pub quantum_t_mix: f64,
    pub classical_t_mix: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingScaling {
    pub family: Family,
    pub config: MixingSweepConfig,
    pub rows: Vec<MixingRow>,
    /// Power laws of mixing time against base size.
    pub quantum: PowerLawFit,
    pub classical: PowerLawFit,
}

/// Quantum and classical mixing times across sizes, with power-law fits.
pub fn mixing_scaling(family: Family, sizes: &[usize], config: MixingSweepConfig) -> Result<MixingScaling> {
    if sizes.len() < 2 {
        return Err(invalid("mixing scaling needs at least two sizes to fit a trend"));
    }
    let rows = sizes
        .par_iter()
        .map(|&size| {
            let inst = WalkInstance::new(family, size)?;
            let dt = config.dt.unwrap_or_else(|| default_dt(&inst.extended));
            let q = instance_mixing(&inst, Walker::Quantum, config.eps, config.quantum_horizon, dt)?;
            let c = instance_mixing(&inst, Walker::Classical, config.eps, config.classical_horizon, dt)?;
            Ok(MixingRow { size, dim: inst.extended.n(), quantum_t_mix: q.t_mix, classical_t_mix: c.t_mix })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.size as f64).collect();
    let q: Vec<f64> = rows.iter().map(|r| r.quantum_t_mix).collect();
    let c: Vec<f64> = rows.iter().map(|r| r.classical_t_mix).collect();
    Ok(MixingScaling { family, config, quantum: power_law_fit(&x, &q)?, classical: power_law_fit(&x, &c)?, rows })
}
