//! End-to-end acceptance criteria. Each test prints one PASS/FAIL line and
//! then asserts it. Tests are serialized so the runtime limits measure one
//! criterion at a time.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qwalk_core::applications::isomorphism::{
    default_certificate_times, graph_certificate, gi_test, GiVerdict, DEFAULT_GI_THRESHOLD,
};
use qwalk_core::applications::search::{search_scaling, SearchSweep};
use qwalk_core::applications::topology::{amcd, amcqm, build_topo_model, Axis, TopoFlavor};
use qwalk_core::dynamics::{
    classical_mixing_time, default_dt, hitting_scaling, instance_hitting, mixing_scaling, quantum_mixing_time,
    DecayModel, Family, MixingSweepConfig, WalkInstance, Walker,
};
use qwalk_core::evolution::{evolve_classical, evolve_quantum, propagator};
use qwalk_core::graph::{
    brute_force_isomorphic, double_edge_swap, generate_erdos_renyi, permute_graph, random_permutation, Graph,
};
use qwalk_core::multiparticle::{correlation_via_extended_walk, two_particle_correlation};
use qwalk_core::{HermitianOperator, ParticleKind, ProbabilityDistribution, QuantumState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

/// Writes straight to stdout, bypassing libtest's capture, so the line
/// shows up for passing tests too.
fn verdict(criterion: u32, title: &str, pass: bool, detail: String, elapsed: Duration) -> bool {
    let _ = writeln!(
        std::io::stdout().lock(),
        "criterion {criterion} [{}] {title}: {detail} ({:.1} s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn random_graph(rng: &mut ChaCha8Rng, n_range: std::ops::RangeInclusive<usize>) -> Graph {
    let n = rng.random_range(n_range);
    let p = rng.random_range(0.3..0.8);
    generate_erdos_renyi(n, p, rng.random()).expect("connected sample")
}

#[test]
fn criterion_1_mapping_equivalence() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let kinds = [ParticleKind::Distinguishable, ParticleKind::Boson, ParticleKind::Fermion];
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let g = random_graph(&mut rng, 2..=8);
        let kind = kinds[rng.random_range(0..kinds.len())];
        let a = rng.random_range(0..g.n());
        let b = if kind == ParticleKind::Fermion {
            (a + rng.random_range(1..g.n())) % g.n()
        } else {
            rng.random_range(0..g.n())
        };
        let t = rng.random_range(0.0..5.0);
        let u = propagator(&HermitianOperator::from_graph(&g), t);
        let (_, oracle) = two_particle_correlation(&u, (a, b), kind).unwrap();
        let (_, walked) = correlation_via_extended_walk(&g, kind, (a, b), t).unwrap();
        for (x, y) in oracle.probs().iter().zip(walked.probs()) {
            worst = worst.max((x - y).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-10 && elapsed < Duration::from_secs(10);
    assert!(verdict(1, "mapping equivalence", pass, format!("max error {worst:.3e} over 200 cases"), elapsed));
}

#[test]
fn criterion_2_glued_tree_hitting() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let inst = WalkInstance::new(Family::Ergt, 5).unwrap();
    assert_eq!(inst.extended.n(), 105);
    let q = instance_hitting(&inst, Walker::Quantum).unwrap().efficiency;
    let c = instance_hitting(&inst, Walker::Classical).unwrap().efficiency;
    let ratio = q / c;
    let direct = (q - 0.7059).abs() <= 0.02 && (c - 0.0095).abs() <= 0.002 && ratio > 50.0;
    let (pass, route) = if direct {
        (true, "published values".to_string())
    } else {
        // fallback: exponential classical decay against a much slower quantum one
        let s = hitting_scaling(Family::Ergt, &[3, 5, 7]).unwrap();
        let q_decay = -s.quantum.exponential.rate;
        let c_decay = -s.classical.exponential.rate;
        let exp_classical = s.classical.better == DecayModel::Exponential;
        let sub_exp_quantum = q_decay <= 0.5 * c_decay;
        (
            ratio > 50.0 && exp_classical && sub_exp_quantum,
            format!(
                "fallback: classical exponential fit better = {exp_classical}, decay rates quantum {q_decay:.4} / classical {c_decay:.4}"
            ),
        )
    };
    let elapsed = start.elapsed();
    let pass = pass && elapsed < Duration::from_secs(60);
    let detail = format!("quantum {q:.4}, classical {c:.5}, ratio {ratio:.1}; {route}");
    assert!(verdict(2, "glued-tree hitting", pass, detail, elapsed));
}

#[test]
fn criterion_3_hypercube_hitting() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let inst = WalkInstance::new(Family::Ecube, 4).unwrap();
    assert_eq!(inst.extended.n(), 136);
    let q = instance_hitting(&inst, Walker::Quantum).unwrap().efficiency;
    let c = instance_hitting(&inst, Walker::Classical).unwrap().efficiency;
    let elapsed = start.elapsed();
    let q_ok = (q - 0.9582).abs() <= 0.02;
    let c_ok = (c - 0.0073).abs() <= 0.002;
    let pass = q_ok && c_ok && elapsed < Duration::from_secs(60);
    let detail = format!("quantum {q:.4} (target 0.9582 +/- 0.02: {q_ok}), classical {c:.5} (target 0.0073 +/- 0.002: {c_ok})");
    assert!(verdict(3, "hypercube hitting", pass, detail, elapsed));
}

#[test]
fn criterion_4_mixing_scaling() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let sizes: Vec<usize> = (8..=20).collect();
    let s = mixing_scaling(Family::Enet, &sizes, MixingSweepConfig { eps: 0.25, ..MixingSweepConfig::default() })
        .unwrap();
    assert_eq!(s.rows.last().unwrap().dim, 210);
    let last = s.rows.last().unwrap();
    let ratio = last.quantum_t_mix / last.classical_t_mix;
    let elapsed = start.elapsed();
    let pass = (0.7..=1.3).contains(&s.quantum.exponent)
        && (1.7..=2.3).contains(&s.classical.exponent)
        && ratio <= 0.6
        && elapsed < Duration::from_secs(300);
    let detail = format!(
        "exponents quantum {:.3}, classical {:.3}; t_mix ratio at n = 20: {ratio:.3}",
        s.quantum.exponent, s.classical.exponent
    );
    assert!(verdict(4, "mixing scaling", pass, detail, elapsed));
}

#[test]
fn criterion_5_search_scaling() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let sweep = SearchSweep::default();
    assert!(sweep.seeds >= 20);
    let s = search_scaling(&sweep).unwrap();
    let dims: Vec<usize> = s.trials.iter().map(|t| t.dim).collect();
    assert_eq!((dims.iter().min(), dims.iter().max()), (Some(&15), Some(&210)));
    let elapsed = start.elapsed();
    let pass = (0.5..=1.1).contains(&s.fit.slope)
        && (0.35..=0.65).contains(&s.mean_success)
        && elapsed < Duration::from_secs(900);
    let detail = format!(
        "t_opt = {:.4} sqrt(N) + {:.4} over {} trials, mean success {:.4}",
        s.fit.slope,
        s.fit.intercept,
        s.trials.len(),
        s.mean_success
    );
    assert!(verdict(5, "search scaling", pass, detail, elapsed));
}

#[test]
fn criterion_6_isomorphism_soundness_and_power() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let times = default_certificate_times();
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let mut worst_iso = 0.0f64;
    for _ in 0..200 {
        let g = random_graph(&mut rng, 4..=20);
        let h = permute_graph(&g, &random_permutation(g.n(), rng.random())).unwrap();
        let r = gi_test(&g, &h, &times, DEFAULT_GI_THRESHOLD).unwrap();
        worst_iso = worst_iso.max(r.mean_distance.unwrap());
    }

    let (mut pairs, mut flagged) = (0, 0);
    while pairs < 200 {
        let g = random_graph(&mut rng, 5..=8);
        let Ok(h) = double_edge_swap(&g, rng.random()) else { continue };
        let mut dg = g.edge_degrees();
        let mut dh = h.edge_degrees();
        dg.sort_unstable();
        dh.sort_unstable();
        assert_eq!(dg, dh);
        if brute_force_isomorphic(&g, &h).unwrap() {
            continue;
        }
        pairs += 1;
        if gi_test(&g, &h, &times, DEFAULT_GI_THRESHOLD).unwrap().verdict == GiVerdict::NonIsomorphic {
            flagged += 1;
        }
    }
    let power = flagged as f64 / pairs as f64;
    let elapsed = start.elapsed();
    let pass = worst_iso < 1e-9 && power >= 0.95 && elapsed < Duration::from_secs(300);
    let detail = format!("max isomorphic mean distance {worst_iso:.2e}; flagged {flagged}/{pairs} non-isomorphic");
    assert!(verdict(6, "isomorphism soundness and power", pass, detail, elapsed));
}

#[test]
fn criterion_7_topological_probes() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let (horizon, steps) = (50.0, 200);
    let mut values = BTreeMap::new();
    let mut chiral = 0.0f64;
    for (v, w) in [(0.1, 1.0), (1.0, 0.1)] {
        let ssh = build_topo_model(TopoFlavor::Ssh2d, 8, 8, v, w).unwrap();
        chiral = chiral.max(ssh.chiral_defect());
        values.insert(("amcd", v > w), amcd(&ssh, Axis::Y, &ssh.central_state(), horizon, steps).unwrap());
        let bbh = build_topo_model(TopoFlavor::Bbh, 12, 12, v, w).unwrap();
        chiral = chiral.max(bbh.chiral_defect());
        values.insert(("amcqm", v > w), amcqm(&bbh, bbh.central_pair(), horizon, steps).unwrap());
    }
    let near = |x: f64, target: f64| (x - target).abs() <= 0.05;
    let elapsed = start.elapsed();
    let pass = near(values[&("amcd", false)], 0.5)
        && near(values[&("amcd", true)], 0.0)
        && near(values[&("amcqm", false)], 0.5)
        && near(values[&("amcqm", true)], 0.0)
        && chiral <= 1e-9
        && elapsed < Duration::from_secs(300);
    let detail = format!(
        "SSH2D 8x8 AMCD_y {:.4} / {:.4}; BBH 12x12 AMCQM {:.4} / {:.4}; chiral defect {chiral:.1e}",
        values[&("amcd", false)],
        values[&("amcd", true)],
        values[&("amcqm", false)],
        values[&("amcqm", true)]
    );
    assert!(verdict(7, "topological probes", pass, detail, elapsed));
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..dim {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> QuantumState {
    let v = DVector::from_fn(dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    QuantumState::normalized(v).unwrap()
}

#[test]
fn criterion_8_invariant_suite() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();

    let mut worst_norm = 0.0f64;
    for _ in 0..100 {
        let dim = rng.random_range(1..=210);
        let h = random_hermitian(&mut rng, dim);
        let psi = evolve_quantum(&h, &random_state(&mut rng, dim), rng.random_range(-100.0..100.0)).unwrap();
        worst_norm = worst_norm.max((psi.norm() - 1.0).abs());
    }
    if worst_norm > 1e-9 {
        failures.push(format!("unitarity {worst_norm:.2e}"));
    }

    let mut worst_mass = 0.0f64;
    let mut negative = false;
    for _ in 0..100 {
        let g = random_graph(&mut rng, 2..=20);
        let p0 = ProbabilityDistribution::point_mass(g.n(), rng.random_range(0..g.n())).unwrap();
        let p = evolve_classical(&g, &p0, rng.random_range(0.0..50.0)).unwrap();
        negative |= p.probs().iter().any(|&x| x < 0.0);
        worst_mass = worst_mass.max((p.probs().iter().sum::<f64>() - 1.0).abs());
    }
    if negative || worst_mass > 1e-9 {
        failures.push(format!("stochasticity (negative = {negative}, mass {worst_mass:.2e})"));
    }

    let mut worst_comp = 0.0f64;
    for _ in 0..100 {
        let dim = rng.random_range(1..=60);
        let h = random_hermitian(&mut rng, dim);
        let psi0 = random_state(&mut rng, dim);
        let (t1, t2) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let stepped = evolve_quantum(&h, &evolve_quantum(&h, &psi0, t1).unwrap(), t2).unwrap();
        let direct = evolve_quantum(&h, &psi0, t1 + t2).unwrap();
        let err = stepped.amplitudes().iter().zip(direct.amplitudes().iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst_comp = worst_comp.max(err);
    }
    if worst_comp > 1e-8 {
        failures.push(format!("composition {worst_comp:.2e}"));
    }

    let times = default_certificate_times();
    let mut worst_cert = 0.0f64;
    for _ in 0..100 {
        let g = random_graph(&mut rng, 3..=12);
        let h = permute_graph(&g, &random_permutation(g.n(), rng.random())).unwrap();
        let (c1, c2) = (graph_certificate(&g, &times).unwrap(), graph_certificate(&h, &times).unwrap());
        for (p, q) in c1.sorted_profiles.iter().zip(&c2.sorted_profiles) {
            worst_cert = worst_cert.max(p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }
    if worst_cert > 1e-10 {
        failures.push(format!("certificate invariance {worst_cert:.2e}"));
    }

    let mut monotone_violations = 0;
    for _ in 0..100 {
        let g = random_graph(&mut rng, 3..=10);
        let (e1, e2) = (rng.random_range(0.05..0.5), rng.random_range(0.05..0.5));
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let dt = default_dt(&g);
        let p0 = ProbabilityDistribution::point_mass(g.n(), 0).unwrap();
        let c = |eps| classical_mixing_time(&g, &p0, eps, 200.0, dt).map(|r| r.t_mix);
        if let (Ok(a), Ok(b)) = (c(lo), c(hi)) {
            monotone_violations += usize::from(a < b);
        }
        let h = HermitianOperator::from_graph(&g);
        let psi0 = QuantumState::basis(g.n(), 0).unwrap();
        let q = |eps| quantum_mixing_time(&h, &psi0, eps, 400.0, dt).map(|r| r.t_mix);
        match (q(lo), q(hi)) {
            (Ok(a), Ok(b)) => monotone_violations += usize::from(a < b),
            // the looser epsilon must settle whenever the tighter one does
            (Ok(_), Err(_)) => monotone_violations += 1,
            _ => {}
        }
    }
    if monotone_violations > 0 {
        failures.push(format!("epsilon monotonicity ({monotone_violations} violations)"));
    }

    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(120);
    let detail = if failures.is_empty() {
        format!(
            "norm {worst_norm:.1e}, mass {worst_mass:.1e}, composition {worst_comp:.1e}, certificate {worst_cert:.1e}, monotone ok"
        )
    } else {
        failures.join("; ")
    };
    assert!(verdict(8, "invariant suite (100 instances each)", pass, detail, elapsed));
}

fn run_bundle(dir: &Path, figure: &str, threads: usize) {
    let status = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(["--out-dir", dir.to_str().unwrap(), "--threads", &threads.to_string(), "reproduce", figure])
        .output()
        .expect("spawn qwalk");
    assert!(status.status.success(), "reproduce {figure}: {}", String::from_utf8_lossy(&status.stderr));
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for figure in std::fs::read_dir(dir).unwrap() {
        let figure = figure.unwrap().path();
        for f in std::fs::read_dir(&figure).unwrap() {
            let f = f.unwrap().path();
            let key = f.strip_prefix(dir).unwrap().display().to_string();
            files.insert(key, std::fs::read(&f).unwrap());
        }
    }
    files
}

/// Largest difference between corresponding numbers of two text files with
/// the same token layout; `None` if the layouts differ.
fn numeric_drift(a: &[u8], b: &[u8]) -> Option<f64> {
    let split = |s: &[u8]| -> Vec<String> {
        String::from_utf8_lossy(s)
            .split(|c: char| c == ',' || c == ':' || c.is_whitespace() || c == '[' || c == ']')
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    };
    let (ta, tb) = (split(a), split(b));
    if ta.len() != tb.len() {
        return None;
    }
    let mut drift = 0.0f64;
    for (x, y) in ta.iter().zip(&tb) {
        match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(p), Ok(q)) => drift = drift.max((p - q).abs()),
            _ if x == y => {}
            _ => return None,
        }
    }
    Some(drift)
}

#[test]
fn criterion_9_reproduce_determinism() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let figures = ["2A", "2B", "2C", "2D", "3A", "3B", "3C", "3D"];
    let runs: Vec<(usize, tempfile::TempDir)> = [1, 1, 2]
        .into_iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            for f in figures {
                run_bundle(dir.path(), f, threads);
            }
            (threads, dir)
        })
        .collect();
    let trees: Vec<_> = runs.iter().map(|(_, d)| read_tree(d.path())).collect();
    let expected_files = figures.len();
    let bundles: std::collections::BTreeSet<_> =
        trees[0].keys().map(|k| k.split(std::path::MAIN_SEPARATOR).next().unwrap().to_string()).collect();
    let mut problems = Vec::new();
    if bundles.len() != expected_files {
        problems.push(format!("expected {expected_files} bundles, found {}", bundles.len()));
    }
    if trees[0] != trees[1] {
        let differing: Vec<_> = trees[0].keys().filter(|k| trees[0].get(*k) != trees[1].get(*k)).collect();
        problems.push(format!("same thread count not byte-identical: {differing:?}"));
    }
    let mut worst = 0.0f64;
    if trees[0].keys().ne(trees[2].keys()) {
        problems.push("file sets differ across thread counts".into());
    } else {
        for (k, a) in &trees[0] {
            match numeric_drift(a, &trees[2][k]) {
                Some(d) => worst = worst.max(d),
                None => problems.push(format!("{k} differs structurally across thread counts")),
            }
        }
    }
    if worst > 1e-12 {
        problems.push(format!("drift {worst:.2e} across thread counts"));
    }
    let elapsed = start.elapsed();
    let pass = problems.is_empty();
    let detail = if pass {
        format!("{} files byte-identical at 1 thread; max drift 1 vs 2 threads {worst:.1e}", trees[0].len())
    } else {
        problems.join("; ")
    };
    assert!(verdict(9, "reproduce determinism", pass, detail, elapsed));
}
