//! Two-particle walks as single-particle walks on extended graphs.
//!
//! The extended Hamiltonian is `S (A x I + I x A) S^dagger`, where `S` maps
//! onto the symmetric or antisymmetric two-particle subspace (or is the
//! identity for distinguishable particles). The permanent/determinant
//! formulas in [`two_particle_correlation`] give the same distributions
//! without building the extended graph.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{
    evolve_quantum, unitarity_defect, HermitianOperator, ProbabilityDistribution, QuantumState,
};
use crate::graph::Graph;

const UNITARY_TOL: f64 = 1e-10;

/// Exchange symmetry of the two walkers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ParticleKind {
    Distinguishable,
    Boson,
    Fermion,
    /// Exchange phase in `[0, 2 pi)`: 0 behaves as bosons, pi as fermions.
    Phased(f64),
}

impl ParticleKind {
    pub fn phased(phi: f64) -> Result<Self> {
        if !(0.0..TAU).contains(&phi) {
            return Err(invalid(format!("exchange phase {phi} not in [0, 2pi)")));
        }
        Ok(Self::Phased(phi))
    }

    /// Whether a real extended graph exists for this kind.
    pub fn has_extended_graph(self) -> bool {
        !matches!(self, Self::Phased(_))
    }
}

impl fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Distinguishable => f.write_str("distinguishable"),
            Self::Boson => f.write_str("boson"),
            Self::Fermion => f.write_str("fermion"),
            Self::Phased(phi) => write!(f, "phase:{phi}"),
        }
    }
}

impl FromStr for ParticleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "distinguishable" => Ok(Self::Distinguishable),
            "boson" => Ok(Self::Boson),
            "fermion" => Ok(Self::Fermion),
            other => match other.strip_prefix("phase:") {
                Some(rest) => {
                    let phi: f64 = rest
                        .parse()
                        .map_err(|_| invalid(format!("bad exchange phase '{rest}'")))?;
                    Self::phased(phi)
                }
                None => Err(invalid(format!(
                    "unknown particle kind '{s}' (expected distinguishable, boson, fermion or phase:<radians>)"
                ))),
            },
        }
    }
}

impl TryFrom<String> for ParticleKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ParticleKind> for String {
    fn from(k: ParticleKind) -> String {
        k.to_string()
    }
}

/// Number of two-particle basis states on `n` modes.
pub fn extended_dimension(n: usize, kind: ParticleKind) -> usize {
    match kind {
        ParticleKind::Distinguishable => n * n,
        ParticleKind::Boson | ParticleKind::Phased(_) => n * (n + 1) / 2,
        ParticleKind::Fermion => n * n.saturating_sub(1) / 2,
    }
}

/// Lexicographically ordered two-particle basis.
///
/// Pairs are ordered `(i, j)` for distinguishable particles, `i <= j` for
/// bosons (and phased correlations), `i < j` for fermions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendedBasis {
    base_n: usize,
    kind: ParticleKind,
    states: Vec<(usize, usize)>,
}

impl ExtendedBasis {
    pub fn new(base_n: usize, kind: ParticleKind) -> Self {
        let mut states = Vec::with_capacity(extended_dimension(base_n, kind));
        for i in 0..base_n {
            let lo = match kind {
                ParticleKind::Distinguishable => 0,
                ParticleKind::Boson | ParticleKind::Phased(_) => i,
                ParticleKind::Fermion => i + 1,
            };
            states.extend((lo..base_n).map(|j| (i, j)));
        }
        Self { base_n, kind, states }
    }

    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn kind(&self) -> ParticleKind {
        self.kind
    }

    pub fn states(&self) -> &[(usize, usize)] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index of the state holding modes `i` and `j` (order-insensitive for
    /// identical particles); `None` for out-of-range modes or fermionic double occupation.
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.base_n;
        if i >= n || j >= n {
            return None;
        }
        match self.kind {
            ParticleKind::Distinguishable => Some(i * n + j),
            ParticleKind::Boson | ParticleKind::Phased(_) => Some(boson_index(n, i.min(j), i.max(j))),
            ParticleKind::Fermion => {
                if i == j {
                    return None;
                }
                let (a, b) = (i.min(j), i.max(j));
                Some(a * (n - 1) - a * a.saturating_sub(1) / 2 + (b - a - 1))
            }
        }
    }

    /// Expansion of basis state `k` over ordered pairs `|ab>`.
    fn components(&self, k: usize) -> Vec<((usize, usize), f64)> {
        let (i, j) = self.states[k];
        match self.kind {
            ParticleKind::Distinguishable => vec![((i, j), 1.0)],
            ParticleKind::Boson | ParticleKind::Phased(_) if i == j => vec![((i, i), 1.0)],
            ParticleKind::Boson | ParticleKind::Phased(_) => {
                vec![((i, j), FRAC_1_SQRT_2), ((j, i), FRAC_1_SQRT_2)]
            }
            ParticleKind::Fermion => vec![((i, j), FRAC_1_SQRT_2), ((j, i), -FRAC_1_SQRT_2)],
        }
    }

    /// `<state | ab>` for the unique basis state with nonzero overlap.
    fn overlap(&self, a: usize, b: usize) -> Option<(usize, f64)> {
        match self.kind {
            ParticleKind::Distinguishable => Some((a * self.base_n + b, 1.0)),
            ParticleKind::Boson | ParticleKind::Phased(_) => {
                let c = if a == b { 1.0 } else { FRAC_1_SQRT_2 };
                Some((boson_index(self.base_n, a.min(b), a.max(b)), c))
            }
            ParticleKind::Fermion => {
                let idx = self.index_of(a, b)?;
                Some((idx, if a < b { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 }))
            }
        }
    }

    /// Basis state with both particles placed on the given modes.
    pub fn input_state(&self, inputs: (usize, usize)) -> Result<QuantumState> {
        let (a, b) = inputs;
        if a >= self.base_n || b >= self.base_n {
            return Err(invalid(format!("input modes ({a}, {b}) out of range for {} vertices", self.base_n)));
        }
        if self.kind == ParticleKind::Fermion && a == b {
            return Err(invalid("two fermions cannot occupy the same vertex"));
        }
        let idx = self.index_of(a, b).expect("validated above");
        QuantumState::basis(self.len(), idx)
    }

    /// Pair labels such as `"(0,3)"`.
    pub fn labels(&self) -> Vec<String> {
        self.states.iter().map(|(i, j)| format!("({i},{j})")).collect()
    }
}

fn boson_index(n: usize, a: usize, b: usize) -> usize {
    // rows 0..a hold n, n-1, ..., n-a+1 states
    a * n - a * a.saturating_sub(1) / 2 + (b - a)
}

fn check_base(g: &Graph) -> Result<()> {
    if g.n() < 2 {
        return Err(invalid("extended graphs need at least two base vertices"));
    }
    Ok(())
}

/// Extended basis and `H_ext = S (A x I + I x A) S^dagger` (real symmetric).
pub fn build_extended_hamiltonian(g: &Graph, kind: ParticleKind) -> Result<(ExtendedBasis, HermitianOperator)> {
    let (basis, m) = extended_matrix(g, kind)?;
    Ok((basis, HermitianOperator::from_real(&m)?))
}

fn extended_matrix(g: &Graph, kind: ParticleKind) -> Result<(ExtendedBasis, DMatrix<f64>)> {
    check_base(g)?;
    if !kind.has_extended_graph() {
        return Err(invalid("a phased exchange symmetry has no real extended graph; use the correlation oracle"));
    }
    let basis = ExtendedBasis::new(g.n(), kind);
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.n()];
    for e in g.edges() {
        adj[e.u].push((e.v, e.w));
        adj[e.v].push((e.u, e.w));
    }
    let dim = basis.len();
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        for ((a, b), c) in basis.components(k) {
            // first particle hops
            for &(a2, w) in &adj[a] {
                if let Some((row, o)) = basis.overlap(a2, b) {
                    m[(row, k)] += c * w * o;
                }
            }
            for &(b2, w) in &adj[b] {
                if let Some((row, o)) = basis.overlap(a, b2) {
                    m[(row, k)] += c * w * o;
                }
            }
        }
    }
    // symmetrize away last-bit rounding
    let m = (&m + m.transpose()) * 0.5;
    Ok((basis, m))
}

/// Weighted extended graph; vertex labels are mode pairs and, when the base
/// graph is layered, the extended layer is the sum of the two base layers.
pub fn extended_graph(g: &Graph, kind: ParticleKind) -> Result<(ExtendedBasis, Graph)> {
    let (basis, m) = extended_matrix(g, kind)?;
    let dim = basis.len();
    let mut edges = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            let w = m[(i, j)];
            if w.abs() > 1e-14 {
                edges.push((i, j, w));
            }
        }
    }
    let mut ext = Graph::new(dim, edges)?.with_labels(basis.labels())?;
    if let Some(layers) = g.layers() {
        let ext_layers = basis.states().iter().map(|&(i, j)| layers[i] + layers[j]).collect();
        ext = ext.with_layers(ext_layers)?;
    }
    Ok((basis, ext))
}

/// Output distribution of two particles entering modes `inputs` of the
/// single-particle unitary `u`, via permanents (bosons), determinants
/// (fermions), products (distinguishable) or the phase-interpolated form.
pub fn two_particle_correlation(
    u: &DMatrix<Complex64>,
    inputs: (usize, usize),
    kind: ParticleKind,
) -> Result<(ExtendedBasis, ProbabilityDistribution)> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u.ncols() });
    }
    let defect = unitarity_defect(u);
    if !(defect <= UNITARY_TOL) {
        return Err(Error::NotUnitary(defect));
    }
    let (a, b) = inputs;
    if a >= n || b >= n {
        return Err(invalid(format!("input modes ({a}, {b}) out of range for {n} modes")));
    }
    if a == b && matches!(kind, ParticleKind::Fermion | ParticleKind::Phased(_)) {
        return Err(invalid("doubly occupied input is not allowed for this particle kind"));
    }
    let basis = ExtendedBasis::new(n, kind);
    let probs = basis
        .states()
        .iter()
        .map(|&(i, j)| {
            let direct = u[(i, a)] * u[(j, b)];
            let exchanged = u[(i, b)] * u[(j, a)];
            match kind {
                ParticleKind::Distinguishable => direct.norm_sqr(),
                ParticleKind::Boson => {
                    let norm = (if i == j { 2.0 } else { 1.0 }) * (if a == b { 2.0 } else { 1.0 });
                    (direct + exchanged).norm_sqr() / norm
                }
                ParticleKind::Fermion => (direct - exchanged).norm_sqr(),
                ParticleKind::Phased(phi) => {
                    let ph = Complex64::from_polar(1.0, phi);
                    let x_ij = direct + ph * exchanged;
                    if i == j {
                        x_ij.norm_sqr() / 2.0
                    } else {
                        let x_ji = u[(j, a)] * u[(i, b)] + ph * u[(j, b)] * u[(i, a)];
                        (x_ij.norm_sqr() + x_ji.norm_sqr()) / 2.0
                    }
                }
            }
        })
        .collect();
    Ok((basis, ProbabilityDistribution::new(probs)?))
}

/// Same distribution as [`two_particle_correlation`] with `U = e^{-iAt}`, but
/// obtained by walking a single particle on the extended graph.
pub fn correlation_via_extended_walk(
    g: &Graph,
    kind: ParticleKind,
    inputs: (usize, usize),
    t: f64,
) -> Result<(ExtendedBasis, ProbabilityDistribution)> {
    let (basis, h) = build_extended_hamiltonian(g, kind)?;
    let psi0 = basis.input_state(inputs)?;
    let psi = evolve_quantum(&h, &psi0, t)?;
    Ok((basis, psi.probabilities()?))
}
