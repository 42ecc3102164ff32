//! Relabeling-invariant walk certificates and a one-sided isomorphism test.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::evolution::{l1_distance, HermitianOperator, Propagation, QuantumState};
use crate::graph::Graph;
use crate::multiparticle::{extended_graph, ParticleKind};

pub const DEFAULT_GI_THRESHOLD: f64 = 0.05;

/// `t = 0.5, 1.0, ..., 5.0`.
pub fn default_certificate_times() -> Vec<f64> {
    (1..=10).map(|k| 0.5 * k as f64).collect()
}

/// Sorted (descending) measurement profiles of the two-boson walk from the
/// uniform superposition over extended vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphCertificate {
    pub times: Vec<f64>,
    pub sorted_profiles: Vec<Vec<f64>>,
}

pub fn graph_certificate(g: &Graph, times: &[f64]) -> Result<GraphCertificate> {
    if times.is_empty() {
        return Err(invalid("certificate needs at least one time"));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) || times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("certificate times must be finite and strictly ascending"));
    }
    let (_, ext) = extended_graph(g, ParticleKind::Boson)?;
    let h = HermitianOperator::from_graph(&ext);
    let prop = Propagation::new(&h, &QuantumState::uniform(ext.n())?)?;
    let sorted_profiles = times
        .iter()
        .map(|&t| {
            let mut p = prop.probabilities(t);
            p.sort_by(|a, b| b.total_cmp(a));
            p
        })
        .collect();
    Ok(GraphCertificate { times: times.to_vec(), sorted_profiles })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GiVerdict {
    ConsistentWithIsomorphic,
    NonIsomorphic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GiResult {
    pub verdict: GiVerdict,
    /// L1 distance between sorted profiles at each time; empty when the
    /// vertex counts differ.
    pub distances: Vec<f64>,
    pub mean_distance: Option<f64>,
}

/// Mean certificate distance `<= threshold` means "consistent with
/// isomorphic"; certificates are necessary, not sufficient, conditions.
pub fn gi_test(g1: &Graph, g2: &Graph, times: &[f64], threshold: f64) -> Result<GiResult> {
    if !(threshold >= 0.0) {
        return Err(invalid(format!("threshold must be nonnegative, got {threshold}")));
    }
    if g1.n() != g2.n() {
        return Ok(GiResult { verdict: GiVerdict::NonIsomorphic, distances: Vec::new(), mean_distance: None });
    }
    let c1 = graph_certificate(g1, times)?;
    let c2 = graph_certificate(g2, times)?;
    let distances = c1
        .sorted_profiles
        .iter()
        .zip(&c2.sorted_profiles)
        .map(|(a, b)| l1_distance(a, b))
        .collect::<Result<Vec<_>>>()?;
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    let verdict = if mean <= threshold { GiVerdict::ConsistentWithIsomorphic } else { GiVerdict::NonIsomorphic };
    Ok(GiResult { verdict, distances, mean_distance: Some(mean) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{brute_force_isomorphic, generate_erdos_renyi, generate_path, generate_star, permute_graph};

    #[test]
    fn certificate_at_zero_is_sorted_uniform() {
        let c = graph_certificate(&generate_path(4).unwrap(), &[0.0]).unwrap();
        assert_eq!(c.sorted_profiles[0].len(), 10);
        for p in &c.sorted_profiles[0] {
            assert!((p - 0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn permutation_invariance() {
        let g = generate_erdos_renyi(8, 0.4, 5).unwrap();
        let perm = [3, 7, 0, 5, 1, 6, 2, 4];
        let times = default_certificate_times();
        let a = graph_certificate(&g, &times).unwrap();
        let b = graph_certificate(&permute_graph(&g, &perm).unwrap(), &times).unwrap();
        for (x, y) in a.sorted_profiles.iter().zip(&b.sorted_profiles) {
            assert!(l1_distance(x, y).unwrap() < 1e-10);
        }
    }

    #[test]
    fn path_versus_star() {
        let (p, s) = (generate_path(4).unwrap(), generate_star(4).unwrap());
        let a = graph_certificate(&p, &[1.0]).unwrap();
        let b = graph_certificate(&s, &[1.0]).unwrap();
        assert!(l1_distance(&a.sorted_profiles[0], &b.sorted_profiles[0]).unwrap() > 0.05);
        let r = gi_test(&p, &s, &default_certificate_times(), DEFAULT_GI_THRESHOLD).unwrap();
        assert_eq!(r.verdict, GiVerdict::NonIsomorphic);
        assert!(!brute_force_isomorphic(&p, &s).unwrap());
    }

    #[test]
    fn isomorphic_pair_is_consistent() {
        let g = generate_erdos_renyi(7, 0.5, 1).unwrap();
        let h = permute_graph(&g, &[6, 5, 4, 3, 2, 1, 0]).unwrap();
        let r = gi_test(&g, &h, &default_certificate_times(), DEFAULT_GI_THRESHOLD).unwrap();
        assert_eq!(r.verdict, GiVerdict::ConsistentWithIsomorphic);
        assert!(r.mean_distance.unwrap() < 1e-9);
    }

    #[test]
    fn size_mismatch_is_non_isomorphic() {
        let r = gi_test(&generate_path(4).unwrap(), &generate_path(5).unwrap(), &[1.0], 0.05).unwrap();
        assert_eq!(r.verdict, GiVerdict::NonIsomorphic);
        assert!(r.distances.is_empty());
    }

    #[test]
    fn bad_times() {
        let g = generate_path(3).unwrap();
        assert!(graph_certificate(&g, &[]).is_err());
        assert!(graph_certificate(&g, &[1.0, 0.5]).is_err());
    }
}
