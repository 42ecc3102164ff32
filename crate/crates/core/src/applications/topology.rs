//! Two-dimensional SSH and BBH lattices with real-space chiral probes.
//!
//! Each unit cell holds four sites `s = a + 2b`, where `a` and `b` are the
//! sublattice indices along x and y. Intracell bonds carry `v`, intercell
//! bonds `w`, with open boundaries. The BBH lattice flips the sign of the x
//! bonds on `b = 1` rows, which threads pi flux through every plaquette.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{HermitianOperator, Propagation, QuantumState};
use crate::graph::Graph;
use crate::multiparticle::{build_extended_hamiltonian, ParticleKind};

pub const CHIRAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopoFlavor {
    Ssh2d,
    Bbh,
}

impl std::str::FromStr for TopoFlavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ssh2d" => Ok(Self::Ssh2d),
            "bbh" => Ok(Self::Bbh),
            other => Err(invalid(format!("unknown lattice '{other}' (expected ssh2d or bbh)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Debug)]
pub struct TopoModel {
    pub flavor: TopoFlavor,
    pub nx: usize,
    pub ny: usize,
    pub v: f64,
    pub w: f64,
    pub graph: Graph,
    pub hamiltonian: HermitianOperator,
    /// `(-1)^(a+b)`.
    pub chiral: Vec<f64>,
    /// `(-1)^a`.
    pub chiral_x: Vec<f64>,
    /// `(-1)^b`.
    pub chiral_y: Vec<f64>,
    /// Cell index relative to the central cell `(nx/2, ny/2)`.
    pub cell_x: Vec<f64>,
    pub cell_y: Vec<f64>,
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl TopoModel {
    pub fn dim(&self) -> usize {
        4 * self.nx * self.ny
    }

    pub fn site(&self, cx: usize, cy: usize, a: usize, b: usize) -> usize {
        site_index(self.ny, cx, cy, a, b)
    }

    pub fn central_cell(&self) -> (usize, usize) {
        (self.nx / 2, self.ny / 2)
    }

    /// The two `Gamma = +1` sites of the central cell.
    pub fn central_pair(&self) -> (usize, usize) {
        let (cx, cy) = self.central_cell();
        (self.site(cx, cy, 0, 0), self.site(cx, cy, 1, 1))
    }

    /// Equal superposition on [`Self::central_pair`].
    pub fn central_state(&self) -> QuantumState {
        let (a, b) = self.central_pair();
        QuantumState::uniform_over(self.dim(), &[a, b]).expect("two distinct in-range sites")
    }

    /// `max |Gamma H Gamma + H|`.
    pub fn chiral_defect(&self) -> f64 {
        let h = self.hamiltonian.entries();
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((h[(i, j)] * (self.chiral[i] * self.chiral[j]) + h[(i, j)]).norm());
            }
        }
        worst
    }

    /// Diagonal of `Gamma_axis m_axis`.
    pub fn displacement_operator(&self, axis: Axis) -> Vec<f64> {
        let (g, m) = match axis {
            Axis::X => (&self.chiral_x, &self.cell_x),
            Axis::Y => (&self.chiral_y, &self.cell_y),
        };
        g.iter().zip(m).map(|(a, b)| a * b).collect()
    }
}

fn site_index(ny: usize, cx: usize, cy: usize, a: usize, b: usize) -> usize {
    4 * (cx * ny + cy) + a + 2 * b
}

pub fn build_topo_model(flavor: TopoFlavor, nx: usize, ny: usize, v: f64, w: f64) -> Result<TopoModel> {
    if nx < 2 || ny < 2 {
        return Err(invalid(format!("lattice needs at least 2 x 2 cells, got {nx} x {ny}")));
    }
    if !v.is_finite() || !w.is_finite() {
        return Err(invalid("hopping amplitudes must be finite"));
    }
    let dim = 4 * nx * ny;
    let at = |cx, cy, a, b| site_index(ny, cx, cy, a, b);
    let mut edges = Vec::new();
    let mut push = |u: usize, t: usize, weight: f64| {
        if weight != 0.0 {
            edges.push((u, t, weight));
        }
    };
    for cx in 0..nx {
        for cy in 0..ny {
            for s in 0..2 {
                let row_sign = if flavor == TopoFlavor::Bbh { sign(s) } else { 1.0 };
                // x bonds on row b = s
                push(at(cx, cy, 0, s), at(cx, cy, 1, s), row_sign * v);
                if cx + 1 < nx {
                    push(at(cx, cy, 1, s), at(cx + 1, cy, 0, s), row_sign * w);
                }
                // y bonds on column a = s
                push(at(cx, cy, s, 0), at(cx, cy, s, 1), v);
                if cy + 1 < ny {
                    push(at(cx, cy, s, 1), at(cx, cy + 1, s, 0), w);
                }
            }
        }
    }
    let graph = Graph::new(dim, edges)?;
    let hamiltonian = HermitianOperator::from_graph(&graph);
    let (mut chiral, mut chiral_x, mut chiral_y) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let (mut cell_x, mut cell_y) = (vec![0.0; dim], vec![0.0; dim]);
    for cx in 0..nx {
        for cy in 0..ny {
            for a in 0..2 {
                for b in 0..2 {
                    let k = at(cx, cy, a, b);
                    chiral[k] = sign(a + b);
                    chiral_x[k] = sign(a);
                    chiral_y[k] = sign(b);
                    cell_x[k] = cx as f64 - (nx / 2) as f64;
                    cell_y[k] = cy as f64 - (ny / 2) as f64;
                }
            }
        }
    }
    let model = TopoModel { flavor, nx, ny, v, w, graph, hamiltonian, chiral, chiral_x, chiral_y, cell_x, cell_y };
    let defect = model.chiral_defect();
    if defect > CHIRAL_TOL {
        return Err(Error::ChiralSymmetryBroken(defect));
    }
    Ok(model)
}

fn averaging_grid(horizon: f64, steps: usize) -> Result<Vec<f64>> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    if steps < 1 {
        return Err(invalid("need at least one time step"));
    }
    Ok((1..=steps).map(|k| horizon * k as f64 / steps as f64).collect())
}

fn expectation(psi: &DVector<Complex64>, diag: &[f64]) -> f64 {
    psi.iter().zip(diag).map(|(z, d)| z.norm_sqr() * d).sum()
}

/// Time-averaged mean chiral displacement along `axis`:
/// `(1/steps) sum_k <psi(t_k)| Gamma_axis m_axis |psi(t_k)>`, `t_k = k T / steps`.
pub fn amcd(model: &TopoModel, axis: Axis, initial: &QuantumState, horizon: f64, steps: usize) -> Result<f64> {
    let times = averaging_grid(horizon, steps)?;
    let op = model.displacement_operator(axis);
    let prop = Propagation::new(&model.hamiltonian, initial)?;
    Ok(times.iter().map(|&t| expectation(&prop.amplitudes(t), &op)).sum::<f64>() / steps as f64)
}

/// Prefactor fixing the topological plateau of [`amcqm`] at one half.
pub const AMCQM_PREFACTOR: f64 = 4.0;

fn check_sites(model: &TopoModel, sites: (usize, usize)) -> Result<()> {
    let dim = model.dim();
    if sites.0 >= dim || sites.1 >= dim {
        return Err(invalid(format!("sites {sites:?} out of range for {dim} sites")));
    }
    if sites.0 == sites.1 {
        return Err(invalid("two fermions cannot start on the same site"));
    }
    Ok(())
}

/// Time-averaged mean chiral quadrupole moment of two fermions starting on
/// `sites`: `4 <X Y>`, where `X` and `Y` sum `Gamma_x m_x` and `Gamma_y m_y`
/// over both particles.
///
/// The two-fermion state stays a Slater determinant of the evolved
/// orbitals, so only the single-particle propagator is needed.
pub fn amcqm(model: &TopoModel, sites: (usize, usize), horizon: f64, steps: usize) -> Result<f64> {
    check_sites(model, sites)?;
    let times = averaging_grid(horizon, steps)?;
    let x = model.displacement_operator(Axis::X);
    let y = model.displacement_operator(Axis::Y);
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
    let dim = model.dim();
    let pa = Propagation::new(&model.hamiltonian, &QuantumState::basis(dim, sites.0)?)?;
    let pb = Propagation::new(&model.hamiltonian, &QuantumState::basis(dim, sites.1)?)?;
    let mut total = 0.0;
    for &t in &times {
        let (a, b) = (pa.amplitudes(t), pb.amplitudes(t));
        let cross = |op: &[f64], u: &DVector<Complex64>, v: &DVector<Complex64>| -> Complex64 {
            u.iter().zip(v.iter()).zip(op).map(|((p, q), o)| p.conj() * q * *o).sum()
        };
        let direct = expectation(&a, &x) * expectation(&b, &y) + expectation(&b, &x) * expectation(&a, &y);
        let exchange = 2.0 * (cross(&x, &a, &b) * cross(&y, &b, &a)).re;
        let one_body = expectation(&a, &xy) + expectation(&b, &xy);
        total += direct - exchange + one_body;
    }
    Ok(AMCQM_PREFACTOR * total / steps as f64)
}

/// [`amcqm`] computed on the fermion-extended graph of the lattice. Costs
/// `O(C(4 nx ny, 2)^3)`, so only practical for small lattices.
pub fn amcqm_extended(model: &TopoModel, sites: (usize, usize), horizon: f64, steps: usize) -> Result<f64> {
    check_sites(model, sites)?;
    let times = averaging_grid(horizon, steps)?;
    let (basis, h) = build_extended_hamiltonian(&model.graph, ParticleKind::Fermion)?;
    let x = model.displacement_operator(Axis::X);
    let y = model.displacement_operator(Axis::Y);
    let op: Vec<f64> = basis.states().iter().map(|&(i, j)| (x[i] + x[j]) * (y[i] + y[j])).collect();
    let prop = Propagation::new(&h, &basis.input_state(sites)?)?;
    let total: f64 = times.iter().map(|&t| expectation(&prop.amplitudes(t), &op)).sum();
    Ok(AMCQM_PREFACTOR * total / steps as f64)
}
