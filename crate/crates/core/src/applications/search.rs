//! Spatial search with `H = gamma A + sum_w |w><w|`.


use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::evolution::{HermitianOperator, Propagation, QuantumState};
use crate::fit::{sqrt_fit, LinearFit};
use crate::graph::{generate_erdos_renyi, Graph};
use crate::multiparticle::{extended_graph, ParticleKind};
use crate::optimize::golden_section_max;
use crate::seed::child_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaStrategy {
    /// Maximize the peak success probability over `gamma` in `(0, 2 / lambda_max]`.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStart {
    /// Uniform superposition over every vertex.
    AllVertices,
    /// Uniform superposition over the listed vertices.
    Vertices(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchParams {
    /// Horizon is `horizon_factor * sqrt(N)`.
    pub horizon_factor: f64,
    pub dt: f64,
    /// Relative bracket tolerance of the `gamma` search.
    pub gamma_tol: f64,
    /// A revival counts as the peak's first attainment once it comes within
    /// this fraction of the maximum.
    pub peak_rel_tol: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self { horizon_factor: 10.0, dt: 0.02, gamma_tol: 1e-3, peak_rel_tol: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub t_opt: f64,
    pub success: f64,
    pub gamma: f64,
}

fn validate(n: usize, marked: &[usize], start: &SearchStart) -> Result<()> {
    if marked.is_empty() {
        return Err(invalid("marked set is empty"));
    }
    let check = |set: &[usize], what: &str| -> Result<()> {
        let mut seen = vec![false; n];
        for &v in set {
            if v >= n {
                return Err(invalid(format!("{what} vertex {v} out of range for {n} vertices")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(invalid(format!("{what} vertex {v} listed twice")));
            }
        }
        Ok(())
    };
    check(marked, "marked")?;
    if let SearchStart::Vertices(s) = start {
        if s.is_empty() {
            return Err(invalid("start set is empty"));
        }
        check(s, "start")?;
    }
    Ok(())
}

struct Searcher<'a> {
    adjacency: DMatrix<f64>,
    marked: &'a [usize],
    psi0: QuantumState,
    horizon: f64,
    dt: f64,
    peak_rel_tol: f64,
}

impl Searcher<'_> {
    fn hamiltonian(&self, gamma: f64) -> HermitianOperator {
        let mut m = &self.adjacency * gamma;
        for &w in self.marked {
            m[(w, w)] += 1.0;
        }
        HermitianOperator::from_real(&m).expect("symmetric by construction")
    }

    /// First time of peak success within the horizon, refined around the grid maximum.
    fn peak(&self, gamma: f64) -> SearchResult {
        let h = self.hamiltonian(gamma);
        let prop = Propagation::new(&h, &self.psi0).expect("dimensions match");
        let success = |t: f64| -> f64 {
            self.marked.iter().map(|&w| prop.amplitude(w, t).norm_sqr()).sum::<f64>()
        };
        let steps = (self.horizon / self.dt).ceil() as usize;
        let times: Vec<f64> = (0..=steps).map(|k| (k as f64 * self.dt).min(self.horizon)).collect();
        let values: Vec<f64> = times.iter().map(|&t| success(t)).collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let k = values.iter().position(|&v| v >= max * (1.0 - self.peak_rel_tol)).unwrap_or(0);
        let (mut t_opt, mut best) = (times[k], values[k]);
        if k > 0 {
            let hi = times[(k + 1).min(steps)];
            let (t, v) = golden_section_max(success, times[k - 1], hi, 1e-9);
            if v > best {
                (t_opt, best) = (t, v);
            }
        }
        SearchResult { t_opt, success: best.min(1.0), gamma }
    }
}

/// Spatial search for `marked` from `start` within `horizon_factor * sqrt(N)`.
pub fn spatial_search(
    g: &Graph,
    marked: &[usize],
    start: &SearchStart,
    gamma: GammaStrategy,
    params: &SearchParams,
) -> Result<SearchResult> {
    let n = g.n();
    validate(n, marked, start)?;
    if !(params.horizon_factor > 0.0) || !(params.dt > 0.0) || !(params.gamma_tol > 0.0) {
        return Err(invalid("search horizon factor, dt and gamma tolerance must be positive"));
    }
    if !(0.0..1.0).contains(&params.peak_rel_tol) {
        return Err(invalid("peak tolerance must lie in [0, 1)"));
    }
    let psi0 = match start {
        SearchStart::AllVertices => QuantumState::uniform(n)?,
        SearchStart::Vertices(s) => QuantumState::uniform_over(n, s)?,
    };
    let searcher = Searcher {
        adjacency: g.adjacency(),
        marked,
        psi0,
        horizon: params.horizon_factor * (n as f64).sqrt(),
        dt: params.dt,
        peak_rel_tol: params.peak_rel_tol,
    };
    match gamma {
        GammaStrategy::Fixed(gm) => {
            if !(gm > 0.0) || !gm.is_finite() {
                return Err(invalid(format!("gamma must be positive, got {gm}")));
            }
            Ok(searcher.peak(gm))
        }
        GammaStrategy::Auto => {
            let lambda_max = HermitianOperator::from_graph(g)
                .spectral_decompose()
                .eigenvalues()
                .last()
                .copied()
                .unwrap_or(0.0);
            if !(lambda_max > 0.0) {
                return Err(invalid("automatic gamma needs a graph with at least one edge"));
            }
            let hi = 2.0 / lambda_max;
            let (gm, _) = golden_section_max(|gm| searcher.peak(gm).success, hi * 1e-6, hi, params.gamma_tol * hi);
            Ok(searcher.peak(gm))
        }
    }
}

/// How a sweep picks the initial state of each trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStart {
    AllVertices,
    /// This many random vertices, disjoint from the marked set.
    Random(usize),
}

/// Default sweep horizon, in units of `sqrt(N)`.
pub const SWEEP_HORIZON_FACTOR: f64 = 1.25;

/// Search over two-boson extensions of connected Erdős–Rényi graphs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSweep {
    pub base_sizes: Vec<usize>,
    pub seeds: usize,
    pub edge_probability: f64,
    pub marked: usize,
    pub start: SweepStart,
    pub params: SearchParams,
    pub seed: u64,
}

impl Default for SearchSweep {
    fn default() -> Self {
        Self {
            base_sizes: (5..=20).collect(),
            seeds: 20,
            edge_probability: 0.25,
            marked: 3,
            start: SweepStart::AllVertices,
            params: SearchParams { horizon_factor: SWEEP_HORIZON_FACTOR, ..SearchParams::default() },
            seed: 2024,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchTrial {
    pub base_n: usize,
    pub dim: usize,
    pub trial: usize,
    pub marked: Vec<usize>,
    pub t_opt: f64,
    pub success: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchScaling {
    pub trials: Vec<SearchTrial>,
    /// `t_opt = slope * sqrt(N) + intercept` over all trials.
    pub fit: LinearFit,
    pub mean_success: f64,
}

fn run_trial(sweep: &SearchSweep, base_n: usize, trial: usize) -> Result<SearchTrial> {
    let task_seed = child_seed(child_seed(sweep.seed, base_n as u64), trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed);
    let base = generate_erdos_renyi(base_n, sweep.edge_probability, rand::Rng::random(&mut rng))?;
    let (_, ext) = extended_graph(&base, ParticleKind::Boson)?;
    let dim = ext.n();
    let extra = match sweep.start {
        SweepStart::AllVertices => 0,
        SweepStart::Random(k) => k,
    };
    if sweep.marked + extra > dim {
        return Err(invalid(format!("cannot pick {} vertices out of {dim}", sweep.marked + extra)));
    }
    let picks = rand::seq::index::sample(&mut rng, dim, sweep.marked + extra).into_vec();
    let marked = picks[..sweep.marked].to_vec();
    let start = match sweep.start {
        SweepStart::AllVertices => SearchStart::AllVertices,
        SweepStart::Random(_) => SearchStart::Vertices(picks[sweep.marked..].to_vec()),
    };
    let r = spatial_search(&ext, &marked, &start, GammaStrategy::Auto, &sweep.params)?;
    Ok(SearchTrial { base_n, dim, trial, marked, t_opt: r.t_opt, success: r.success, gamma: r.gamma })
}

/// Runs every `(size, trial)` task in parallel; each task's randomness
/// depends only on `(seed, size, trial)`, and results keep task order.
pub fn search_scaling(sweep: &SearchSweep) -> Result<SearchScaling> {
    if sweep.seeds < 1 || sweep.marked < 1 {
        return Err(invalid("search sweep needs at least one seed and one marked vertex"));
    }
    let tasks: Vec<(usize, usize)> =
        sweep.base_sizes.iter().flat_map(|&n| (0..sweep.seeds).map(move |s| (n, s))).collect();
    let trials = tasks
        .par_iter()
        .map(|&(n, s)| run_trial(sweep, n, s))
        .collect::<Result<Vec<_>>>()?;
    let n: Vec<f64> = trials.iter().map(|t| t.dim as f64).collect();
    let t: Vec<f64> = trials.iter().map(|t| t.t_opt).collect();
    let fit = sqrt_fit(&n, &t)?;
    let mean_success = trials.iter().map(|t| t.success).sum::<f64>() / trials.len() as f64;
    Ok(SearchScaling { trials, fit, mean_success })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_complete, generate_path, permute_graph};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn two_vertex_rabi() {
        let g = generate_path(2).unwrap();
        let r = spatial_search(&g, &[1], &SearchStart::Vertices(vec![0]), GammaStrategy::Auto, &SearchParams::default())
            .unwrap();
        assert!(r.success > 0.9, "{r:?}");
        assert!(r.t_opt > 0.0);
    }

    #[test]
    fn complete_graph_optimal_gamma() {
        // on K_N the critical hopping rate is 1/N and success approaches 1
        let n = 64;
        let g = generate_complete(n).unwrap();
        let r = spatial_search(&g, &[5], &SearchStart::AllVertices, GammaStrategy::Fixed(1.0 / n as f64), &SearchParams::default())
            .unwrap();
        assert!(r.success > 0.95, "{r:?}");
        assert_abs_diff_eq!(r.t_opt, FRAC_PI_2 * (n as f64).sqrt(), epsilon = 0.5);
    }

    #[test]
    fn start_inside_marked_is_immediate() {
        let g = generate_path(4).unwrap();
        let r = spatial_search(&g, &[1, 2], &SearchStart::Vertices(vec![2]), GammaStrategy::Fixed(0.5), &SearchParams::default())
            .unwrap();
        assert_eq!(r.t_opt, 0.0);
        assert_abs_diff_eq!(r.success, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn validation() {
        let g = generate_path(4).unwrap();
        let p = SearchParams::default();
        assert!(spatial_search(&g, &[], &SearchStart::AllVertices, GammaStrategy::Auto, &p).is_err());
        assert!(spatial_search(&g, &[9], &SearchStart::AllVertices, GammaStrategy::Auto, &p).is_err());
        assert!(spatial_search(&g, &[1, 1], &SearchStart::AllVertices, GammaStrategy::Auto, &p).is_err());
        assert!(spatial_search(&g, &[1], &SearchStart::AllVertices, GammaStrategy::Fixed(-1.0), &p).is_err());
    }

    #[test]
    fn relabeling_invariance() {
        let g = generate_erdos_renyi(9, 0.4, 3).unwrap();
        let perm: Vec<usize> = (0..9).map(|i| (i * 4 + 1) % 9).collect();
        let g2 = permute_graph(&g, &perm).unwrap();
        let p = SearchParams::default();
        let a = spatial_search(&g, &[2, 7], &SearchStart::Vertices(vec![0, 4]), GammaStrategy::Fixed(0.3), &p).unwrap();
        let start2 = SearchStart::Vertices(vec![perm[0], perm[4]]);
        let b = spatial_search(&g2, &[perm[2], perm[7]], &start2, GammaStrategy::Fixed(0.3), &p).unwrap();
        assert_abs_diff_eq!(a.success, b.success, epsilon = 1e-9);
    }

    #[test]
    fn sweep_is_deterministic() {
        let sweep = SearchSweep { base_sizes: vec![5, 6], seeds: 2, ..SearchSweep::default() };
        let a = search_scaling(&sweep).unwrap();
        let b = search_scaling(&sweep).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials.len(), 4);
        assert_eq!(a.trials[0].dim, 15);
    }
}
