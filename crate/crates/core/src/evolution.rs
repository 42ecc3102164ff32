//! Spectral machinery for continuous-time walks.
//!
//! Every propagator goes through one dense Hermitian eigendecomposition,
//! cached on the operator, after which each time point costs `O(dim^2)`
//! (or `O(dim)` for a single amplitude).

use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_NORM_TOL: f64 = 1e-10;
pub const NEGATIVE_PROB_TOL: f64 = 1e-12;
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Relative tolerance used to group numerically degenerate eigenvalues.
pub const DEFAULT_DEGENERACY_REL_TOL: f64 = 1e-8;

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Index ranges of eigenvalue clusters whose consecutive gaps are `<= tol`.
    pub fn degenerate_groups(&self, tol: f64) -> Vec<std::ops::Range<usize>> {
        let mut groups = Vec::new();
        let mut start = 0;
        for k in 1..=self.eigenvalues.len() {
            if k == self.eigenvalues.len() || self.eigenvalues[k] - self.eigenvalues[k - 1] > tol {
                groups.push(start..k);
                start = k;
            }
        }
        groups
    }

    /// `tol = rel * max |lambda|`.
    pub fn default_degeneracy_tol(&self) -> f64 {
        let scale = self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        DEFAULT_DEGENERACY_REL_TOL * scale
    }
}

/// Dense Hermitian matrix with a lazily computed, cached spectral decomposition.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    entries: DMatrix<Complex64>,
    real: bool,
    spectrum: OnceLock<Spectrum>,
}

fn max_hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

impl HermitianOperator {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        let defect = max_hermitian_defect(&entries);
        if defect > HERMITIAN_TOL || !defect.is_finite() {
            return Err(Error::NotHermitian(defect));
        }
        let real = entries.iter().all(|z| z.im == 0.0);
        Ok(Self { entries, real, spectrum: OnceLock::new() })
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    /// `H = A` for the graph's weighted adjacency matrix.
    pub fn from_graph(g: &Graph) -> Self {
        let a = g.adjacency().map(|x| Complex64::new(x, 0.0));
        Self { entries: a, real: true, spectrum: OnceLock::new() }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Real part of the entries.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }

    /// Ascending eigenvalues and orthonormal eigenvectors, computed once.
    pub fn spectral_decompose(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| decompose(&self.entries, self.real))
    }
}

fn decompose(m: &DMatrix<Complex64>, real: bool) -> Spectrum {
    let n = m.nrows();
    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = if real {
        let eig = m.map(|z| z.re).symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Spectrum { eigenvalues, eigenvectors }
}

/// Spectral decomposition of `h` (cached on the operator).
pub fn spectral_decompose(h: &HermitianOperator) -> &Spectrum {
    h.spectral_decompose()
}

/// Unit-norm complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<Complex64>,
}

impl QuantumState {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(invalid(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_raw(amplitudes: DVector<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// Normalizes the given amplitudes.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self { amplitudes: amplitudes / Complex64::new(norm, 0.0) })
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(invalid(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        Self::uniform_over(dim, &(0..dim).collect::<Vec<_>>())
    }

    /// Equal real amplitudes on `support`.
    pub fn uniform_over(dim: usize, support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(invalid("empty support"));
        }
        let mut v = DVector::zeros(dim);
        let a = Complex64::new(1.0 / (support.len() as f64).sqrt(), 0.0);
        for &k in support {
            if k >= dim {
                return Err(invalid(format!("vertex {k} out of range for dimension {dim}")));
            }
            if v[k] != Complex64::new(0.0, 0.0) {
                return Err(invalid(format!("vertex {k} listed twice")));
            }
            v[k] = a;
        }
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Born-rule measurement distribution.
    pub fn probabilities(&self) -> Result<ProbabilityDistribution> {
        ProbabilityDistribution::new(self.amplitudes.iter().map(|z| z.norm_sqr()).collect())
    }
}

/// Nonnegative vector summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityDistribution {
    probs: Vec<f64>,
}

impl ProbabilityDistribution {
    /// Clamps roundoff negatives (down to `-1e-12`) and renormalizes when the
    /// sum is within `1e-9` of one; anything worse is an error.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -NEGATIVE_PROB_TOL {
                return Err(Error::InvalidDistribution(format!("entry {i} is {p}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("sum is {sum}")));
        }
        probs.iter_mut().for_each(|p| *p /= sum);
        Ok(Self { probs })
    }

    pub fn point_mass(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(invalid(format!("index {k} out of range for dimension {dim}")));
        }
        let mut probs = vec![0.0; dim];
        probs[k] = 1.0;
        Ok(Self { probs })
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        Ok(Self { probs: vec![1.0 / dim as f64; dim] })
    }

    /// Empirical distribution of sample counts.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("no counts".into()));
        }
        Ok(Self { probs: counts.iter().map(|&c| c as f64 / total as f64).collect() })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `e^{-iHt}` applied to a fixed initial state, for many `t`.
#[derive(Debug)]
pub struct Propagation<'a> {
    spectrum: &'a Spectrum,
    coeffs: DVector<Complex64>,
}

impl<'a> Propagation<'a> {
    pub fn new(h: &'a HermitianOperator, psi0: &QuantumState) -> Result<Self> {
        check_dim(h.dim(), psi0.dim())?;
        let spectrum = h.spectral_decompose();
        let coeffs = spectrum.eigenvectors.ad_mul(&psi0.amplitudes);
        Ok(Self { spectrum, coeffs })
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
    }

    /// Coefficients of the initial state in the eigenbasis.
    pub fn coefficients(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    fn phased(&self, t: f64) -> DVector<Complex64> {
        DVector::from_iterator(
            self.coeffs.len(),
            self.coeffs
                .iter()
                .zip(&self.spectrum.eigenvalues)
                .map(|(c, &l)| c * Complex64::from_polar(1.0, -l * t)),
        )
    }

    pub fn amplitudes(&self, t: f64) -> DVector<Complex64> {
        &self.spectrum.eigenvectors * self.phased(t)
    }

    /// `<vertex| e^{-iHt} |psi0>` in `O(dim)`.
    pub fn amplitude(&self, vertex: usize, t: f64) -> Complex64 {
        let row = self.spectrum.eigenvectors.row(vertex);
        self.coeffs
            .iter()
            .zip(&self.spectrum.eigenvalues)
            .zip(row.iter())
            .map(|((c, &l), v)| v * c * Complex64::from_polar(1.0, -l * t))
            .sum()
    }

    /// `d/dt |<vertex|psi(t)>|^2`.
    pub fn probability_derivative(&self, vertex: usize, t: f64) -> f64 {
        let row = self.spectrum.eigenvectors.row(vertex);
        let (mut a, mut da) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for ((c, &l), v) in self.coeffs.iter().zip(&self.spectrum.eigenvalues).zip(row.iter()) {
            let term = v * c * Complex64::from_polar(1.0, -l * t);
            a += term;
            da += term * Complex64::new(0.0, -l);
        }
        2.0 * (a.conj() * da).re
    }

    /// Raw `|psi(t)|^2` without validation.
    pub fn probabilities(&self, t: f64) -> Vec<f64> {
        self.amplitudes(t).iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn state(&self, t: f64) -> QuantumState {
        QuantumState::from_raw(self.amplitudes(t))
    }
}

/// `|psi(t)> = e^{-iHt} |psi0>`.
pub fn evolve_quantum(h: &HermitianOperator, psi0: &QuantumState, t: f64) -> Result<QuantumState> {
    check_dim(h.dim(), psi0.dim())?;
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    Ok(Propagation::new(h, psi0)?.state(t))
}

/// Dense unitary `e^{-iHt} = V e^{-i Lambda t} V^dagger`.
pub fn propagator(h: &HermitianOperator, t: f64) -> DMatrix<Complex64> {
    let s = h.spectral_decompose();
    let mut scaled = s.eigenvectors.clone();
    for (j, &l) in s.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -l * t);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    scaled * s.eigenvectors.adjoint()
}

/// `max |U^dagger U - I|`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let g = u.ad_mul(u);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Continuous-time random walk with generator `Q = A - D` (unit rate per
/// unit edge weight, column sums zero, symmetric).
#[derive(Clone, Debug)]
pub struct ClassicalWalk {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl ClassicalWalk {
    pub fn new(g: &Graph) -> Self {
        let mut q = g.adjacency();
        for (i, d) in g.degrees().into_iter().enumerate() {
            q[(i, i)] -= d;
        }
        let eig = q.symmetric_eigen();
        let n = g.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        Self {
            eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
            eigenvectors: DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]),
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Generator eigenvalues (all `<= 0`), ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn coefficients(&self, p0: &ProbabilityDistribution) -> Result<DVector<f64>> {
        check_dim(self.dim(), p0.len())?;
        Ok(self.eigenvectors.tr_mul(&DVector::from_column_slice(p0.probs())))
    }

    /// Raw `p(t)` without clamping.
    fn raw(&self, coeffs: &DVector<f64>, t: f64) -> DVector<f64> {
        let scaled = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(&self.eigenvalues).map(|(c, &l)| c * (l * t).exp()),
        );
        &self.eigenvectors * scaled
    }

    pub fn distribution(&self, p0: &ProbabilityDistribution, t: f64) -> Result<ProbabilityDistribution> {
        let c = self.coefficients(p0)?;
        ProbabilityDistribution::new(self.raw(&c, t).iter().copied().collect())
    }

    /// Probability at `vertex` over a time grid, `O(dim)` per point.
    pub fn vertex_profile(
        &self,
        p0: &ProbabilityDistribution,
        vertex: usize,
        times: &[f64],
    ) -> Result<Vec<f64>> {
        let c = self.coefficients(p0)?;
        let row = self.eigenvectors.row(vertex);
        Ok(times
            .iter()
            .map(|&t| {
                c.iter()
                    .zip(&self.eigenvalues)
                    .zip(row.iter())
                    .map(|((c, &l), v)| v * c * (l * t).exp())
                    .sum::<f64>()
                    .max(0.0)
            })
            .collect())
    }

    /// Full distributions over a time grid.
    pub fn distributions(
        &self,
        p0: &ProbabilityDistribution,
        times: &[f64],
    ) -> Result<Vec<ProbabilityDistribution>> {
        let c = self.coefficients(p0)?;
        times
            .iter()
            .map(|&t| ProbabilityDistribution::new(self.raw(&c, t).iter().copied().collect()))
            .collect()
    }

    /// `t -> infinity` limit: projection of `p0` onto the kernel of `Q`.
    pub fn stationary(&self, p0: &ProbabilityDistribution) -> Result<ProbabilityDistribution> {
        let c = self.coefficients(p0)?;
        let scale = self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        let kept = DVector::from_iterator(
            c.len(),
            c.iter().zip(&self.eigenvalues).map(|(&c, &l)| if l.abs() <= 1e-9 * scale { c } else { 0.0 }),
        );
        ProbabilityDistribution::new((&self.eigenvectors * kept).iter().copied().collect())
    }
}

/// `p(t) = e^{Qt} p0` on `g`.
pub fn evolve_classical(g: &Graph, p0: &ProbabilityDistribution, t: f64) -> Result<ProbabilityDistribution> {
    check_dim(g.n(), p0.len())?;
    if t == 0.0 {
        return Ok(p0.clone());
    }
    ClassicalWalk::new(g).distribution(p0, t)
}

/// Long-time average distribution: `sum_lambda |Pi_lambda psi0|^2` per vertex.
/// `degeneracy_tol = None` uses `1e-8 * max |lambda|`.
pub fn limiting_distribution(
    h: &HermitianOperator,
    psi0: &QuantumState,
    degeneracy_tol: Option<f64>,
) -> Result<ProbabilityDistribution> {
    let prop = Propagation::new(h, psi0)?;
    let spectrum = prop.spectrum();
    let tol = degeneracy_tol.unwrap_or_else(|| spectrum.default_degeneracy_tol());
    let v = spectrum.eigenvectors();
    let c = prop.coefficients();
    let n = h.dim();
    let mut p = vec![0.0; n];
    for group in spectrum.degenerate_groups(tol) {
        let block = v.columns(group.start, group.len());
        let projected = block * c.rows(group.start, group.len());
        for (pi, z) in p.iter_mut().zip(projected.iter()) {
            *pi += z.norm_sqr();
        }
    }
    ProbabilityDistribution::new(p)
}

/// Riemann average of `|psi(t_k)|^2` over `t_k = k T / steps`, `k = 1..=steps`.
pub fn time_average_distribution(
    h: &HermitianOperator,
    psi0: &QuantumState,
    horizon: f64,
    steps: usize,
) -> Result<ProbabilityDistribution> {
    if !(horizon > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    if steps < 1 {
        return Err(invalid("time average needs at least one step"));
    }
    let prop = Propagation::new(h, psi0)?;
    let mut acc = vec![0.0; h.dim()];
    for k in 1..=steps {
        let t = horizon * k as f64 / steps as f64;
        for (a, p) in acc.iter_mut().zip(prop.probabilities(t)) {
            *a += p;
        }
    }
    ProbabilityDistribution::new(acc.into_iter().map(|a| a / steps as f64).collect())
}

fn check_lengths(p: &[f64], q: &[f64]) -> Result<()> {
    check_dim(p.len(), q.len())
}

/// `1/2 sum |p - q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    Ok(0.5 * l1_distance(p, q)?)
}

/// `sum |p - q|`.
pub fn l1_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    check_lengths(p, q)?;
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum())
}

/// `(sum sqrt(p q))^2`.
pub fn classical_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    check_lengths(p, q)?;
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt()).sum();
    Ok(bc * bc)
}

/// Multinomial draw of `shots` samples from `p`, via sequential binomials.
pub fn sample_counts(p: &ProbabilityDistribution, shots: u64, seed: u64) -> Result<Vec<u64>> {
    if shots < 1 {
        return Err(invalid("need at least one shot"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = p.probs();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    for (i, &pi) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass_left > 0.0 { (pi / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q)
            .map_err(|e| invalid(format!("binomial sampler: {e}")))?
            .sample(&mut rng);
        counts[i] = k;
        remaining -= k;
        mass_left -= pi;
    }
    Ok(counts)
}

/// Per-vertex values over a time grid, written as `t,v0,v1,...`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn push(&mut self, t: f64, row: Vec<f64>) {
        self.times.push(t);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let width = self.rows.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for k in 0..width {
            let _ = write!(out, ",v{k}");
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.rows) {
            let _ = write!(out, "{t}");
            for x in row {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
        out
    }
}

/// Measurement distributions `|psi(t)|^2` at each time in `times`.
pub fn probability_series(h: &HermitianOperator, psi0: &QuantumState, times: &[f64]) -> Result<TimeSeries> {
    let prop = Propagation::new(h, psi0)?;
    let mut ts = TimeSeries::default();
    for &t in times {
        ts.push(t, prop.probabilities(t));
    }
    Ok(ts)
}
