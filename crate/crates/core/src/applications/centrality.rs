//! Eigenvector centrality versus time-averaged quantum-walk occupation.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::evolution::{time_average_distribution, HermitianOperator, QuantumState};
use crate::graph::Graph;
use crate::multiparticle::{extended_graph, ParticleKind};

/// Largest extended graph accepted by [`qw_centrality`].
pub const MAX_CENTRALITY_DIM: usize = 300;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentralityReport {
    pub kind: ParticleKind,
    pub labels: Vec<String>,
    pub qw_scores: Vec<f64>,
    pub ev_scores: Vec<f64>,
    /// Cosine similarity of the two score vectors.
    pub similarity: f64,
    pub qw_ranking: Vec<usize>,
    pub ev_ranking: Vec<usize>,
}

/// Perron vector of `A`: nonnegative, unit L2 norm.
pub fn eigenvector_centrality(g: &Graph) -> Result<Vec<f64>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let h = HermitianOperator::from_graph(g);
    let s = h.spectral_decompose();
    let top = s.eigenvectors().column(g.n() - 1);
    let sign = if top.iter().map(|z| z.re).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let mut v: Vec<f64> = top.iter().map(|z| (sign * z.re).max(0.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(invalid("cosine similarity of a zero vector"));
    }
    Ok(dot / (na * nb))
}

/// Vertex indices by descending score; ties keep index order.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// Time-averaged occupation of the walk on the extended graph of `base`,
/// started from the uniform superposition, compared with the extended
/// graph's eigenvector centrality.
pub fn qw_centrality(base: &Graph, kind: ParticleKind, horizon: f64, steps: usize) -> Result<CentralityReport> {
    let dim = crate::multiparticle::extended_dimension(base.n(), kind);
    if dim > MAX_CENTRALITY_DIM {
        return Err(invalid(format!("extended dimension {dim} exceeds {MAX_CENTRALITY_DIM}")));
    }
    let (basis, ext) = extended_graph(base, kind)?;
    let h = HermitianOperator::from_graph(&ext);
    let psi0 = QuantumState::uniform(ext.n())?;
    let qw_scores = time_average_distribution(&h, &psi0, horizon, steps)?.into_vec();
    let ev_scores = eigenvector_centrality(&ext)?;
    let similarity = cosine_similarity(&qw_scores, &ev_scores)?;
    Ok(CentralityReport {
        kind,
        labels: basis.labels(),
        qw_ranking: ranking(&qw_scores),
        ev_ranking: ranking(&ev_scores),
        qw_scores,
        ev_scores,
        similarity,
    })
}
