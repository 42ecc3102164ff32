//! Weighted undirected graphs and the generators for every graph family the
//! walk experiments run on.
//!
//! Vertex ordering is fixed per family so that serialized graphs are
//! reproducible bit for bit:
//!
//! * glued trees are numbered column by column (BFS order from the entrance),
//!   children of local vertex `i` are `2i` and `2i + 1` in the next column;
//! * hypercube vertex `v` is the integer whose binary digits are its label;
//! * Cartesian products number `(i, j)` as `i * n + j`.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Resampling cap for connected Erdős–Rényi draws.
pub const ER_RETRY_CAP: u32 = 100;

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Weighted undirected graph. Edges are stored once with `u < v`, sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    labels: Option<Vec<String>>,
    layers: Option<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from `(u, v, w)` triples. Rejects self-loops, duplicate
    /// edges, out-of-range endpoints and non-finite weights.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut out: Vec<Edge> = Vec::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
            if !w.is_finite() {
                return Err(invalid(format!("non-finite weight on edge ({u}, {v})")));
            }
            let (u, v) = if u < v { (u, v) } else { (v, u) };
            out.push(Edge { u, v, w });
        }
        out.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
        if let Some(pair) = out.windows(2).find(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(invalid(format!("duplicate edge ({}, {})", pair[0].u, pair[0].v)));
        }
        Ok(Self { n, edges: out, labels: None, layers: None })
    }

    /// Unit-weight graph from vertex pairs.
    pub fn unweighted(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(n, pairs.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_layers(mut self, layers: Vec<usize>) -> Result<Self> {
        if layers.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: layers.len() });
        }
        self.layers = Some(layers);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn layers(&self) -> Option<&[usize]> {
        self.layers.as_deref()
    }

    /// Largest layer index, if the graph is layered.
    pub fn max_layer(&self) -> Option<usize> {
        self.layers.as_ref().and_then(|l| l.iter().copied().max())
    }

    /// Dense symmetric adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.u, e.v)] = e.w;
            a[(e.v, e.u)] = e.w;
        }
        a
    }

    /// Weighted degrees.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.u] += e.w;
            d[e.v] += e.w;
        }
        d
    }

    /// Number of incident edges per vertex, ignoring weights.
    pub fn edge_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.u] += 1;
            d[e.v] += 1;
        }
        d
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        adj
    }

    fn bfs_distances(&self, adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap_or(0);
            for &y in &adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.neighbors();
        self.bfs_distances(&adj, 0).iter().all(Option::is_some)
    }

    /// Hop-count diameter; `None` for disconnected graphs.
    pub fn diameter(&self) -> Option<usize> {
        let adj = self.neighbors();
        let mut best = 0;
        for s in 0..self.n {
            for d in self.bfs_distances(&adj, s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }
}

/// On-disk JSON form: `{"n": .., "edges": [[u, v, w], ..], "labels": [..], "layers": [..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<usize>>,
}

impl From<&Graph> for GraphFile {
    fn from(g: &Graph) -> Self {
        Self {
            n: g.n,
            edges: g.edges.iter().map(|e| (e.u, e.v, e.w)).collect(),
            labels: g.labels.clone(),
            layers: g.layers.clone(),
        }
    }
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        let mut g = Graph::new(file.n, file.edges)?;
        if let Some(labels) = file.labels {
            g = g.with_labels(labels)?;
        }
        if let Some(layers) = file.layers {
            g = g.with_layers(layers)?;
        }
        Ok(g)
    }
}

impl Graph {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GraphFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

/// How the two leaf columns of a glued tree are joined.
#[derive(Clone, Debug, PartialEq)]
pub enum Gluing {
    /// Left leaf `i` joined to right leaf `i`.
    LeafToLeaf,
    /// Left leaf `i` joined to right leaf `perm[i]`.
    Permutation(Vec<usize>),
    /// Leaves joined by a seeded random alternating cycle, so every leaf has
    /// two neighbours across the gap.
    RandomCycle { seed: u64 },
}

fn tree_columns(edge_layers: usize) -> Result<Vec<usize>> {
    if edge_layers < 3 || edge_layers % 2 == 0 {
        return Err(invalid(format!(
            "glued tree needs an odd number of edge layers >= 3, got {edge_layers}"
        )));
    }
    if edge_layers > 25 {
        return Err(invalid(format!("glued tree with {edge_layers} edge layers is too large")));
    }
    let depth = (edge_layers - 1) / 2;
    let half: Vec<usize> = (0..=depth).map(|k| 1usize << k).collect();
    Ok(half.iter().chain(half.iter().rev()).copied().collect())
}

/// Binary glued tree with leaf-to-leaf gluing.
pub fn generate_glued_tree(edge_layers: usize) -> Result<Graph> {
    glued_tree(edge_layers, &Gluing::LeafToLeaf)
}

/// Two depth-`d` binary trees joined at their leaves; `edge_layers = 2d + 1`.
/// Entrance is vertex 0, exit is vertex `n - 1`, and `layers` holds the
/// column index.
pub fn glued_tree(edge_layers: usize, gluing: &Gluing) -> Result<Graph> {
    let cols = tree_columns(edge_layers)?;
    let depth = (edge_layers - 1) / 2;
    let mut offsets = Vec::with_capacity(cols.len());
    let mut n = 0;
    for &c in &cols {
        offsets.push(n);
        n += c;
    }
    let last = cols.len() - 1;
    let mut edges = Vec::new();
    for k in 0..depth {
        for i in 0..cols[k] {
            for child in [2 * i, 2 * i + 1] {
                edges.push((offsets[k] + i, offsets[k + 1] + child));
                edges.push((offsets[last - k] + i, offsets[last - k - 1] + child));
            }
        }
    }
    let leaves = cols[depth];
    let left = offsets[depth];
    let right = offsets[depth + 1];
    match gluing {
        Gluing::LeafToLeaf => {
            edges.extend((0..leaves).map(|i| (left + i, right + i)));
        }
        Gluing::Permutation(perm) => {
            check_bijection(perm, leaves)?;
            edges.extend((0..leaves).map(|i| (left + i, right + perm[i])));
        }
        Gluing::RandomCycle { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let pl = shuffled(leaves, &mut rng);
            let pr = shuffled(leaves, &mut rng);
            for i in 0..leaves {
                edges.push((left + pl[i], right + pr[i]));
                edges.push((right + pr[i], left + pl[(i + 1) % leaves]));
            }
        }
    }
    let layers = cols.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c)).collect();
    Graph::unweighted(n, edges)?.with_layers(layers)
}

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    // Fisher-Yates, spelled out so the sequence is pinned to this crate.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
    v
}

/// `dim`-dimensional hypercube; layers are Hamming weights and labels are the
/// binary strings (most significant bit first).
pub fn generate_hypercube(dim: usize) -> Result<Graph> {
    if !(1..=16).contains(&dim) {
        return Err(invalid(format!("hypercube dimension must be in 1..=16, got {dim}")));
    }
    let n = 1usize << dim;
    let mut edges = Vec::with_capacity(n * dim / 2);
    for v in 0..n {
        for b in 0..dim {
            let u = v ^ (1 << b);
            if v < u {
                edges.push((v, u));
            }
        }
    }
    let layers = (0..n).map(|v| v.count_ones() as usize).collect();
    let labels = (0..n).map(|v| format!("{v:0dim$b}")).collect();
    Graph::unweighted(n, edges)?.with_layers(layers)?.with_labels(labels)
}

pub fn generate_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(invalid(format!("cycle needs n >= 3, got {n}")));
    }
    Graph::unweighted(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Path graph; layers are distances from vertex 0.
pub fn generate_path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(invalid(format!("path needs n >= 2, got {n}")));
    }
    Graph::unweighted(n, (0..n - 1).map(|i| (i, i + 1)))?.with_layers((0..n).collect())
}

/// Star with hub 0.
pub fn generate_star(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(invalid(format!("star needs n >= 2, got {n}")));
    }
    Graph::unweighted(n, (1..n).map(|i| (0, i)))
}

pub fn generate_complete(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(invalid("complete graph needs n >= 1"));
    }
    Graph::unweighted(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

/// G(n, p) conditioned on connectivity: attempt `k` uses seed `seed + k`,
/// up to [`ER_RETRY_CAP`] attempts.
pub fn generate_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 1 {
        return Err(invalid("Erdős–Rényi graph needs n >= 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("edge probability must be in [0, 1], got {p}")));
    }
    for attempt in 0..ER_RETRY_CAP {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(u64::from(attempt)));
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    pairs.push((i, j));
                }
            }
        }
        let g = Graph::unweighted(n, pairs)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ConnectivityRetriesExhausted { attempts: ER_RETRY_CAP })
}

/// Preferential attachment: a clique on `m + 1` vertices, then each new
/// vertex attaches to `m` distinct existing vertices chosen with probability
/// proportional to their current degree.
pub fn generate_scale_free(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 || m >= n {
        return Err(invalid(format!("scale-free graph needs 1 <= m < n, got m = {m}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    // Every edge endpoint, so a uniform pick is a degree-weighted pick.
    let mut endpoints = Vec::new();
    for i in 0..=m {
        for j in i + 1..=m {
            pairs.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    for v in m + 1..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            pairs.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    Graph::unweighted(n, pairs)
}

/// Uniformly random permutation of `0..n`.
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    shuffled(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Swap attempts before [`double_edge_swap`] gives up.
pub const SWAP_ATTEMPTS: usize = 1000;

/// One degree-preserving rewiring `{a-b, c-d} -> {a-d, c-b}` of an unweighted
/// graph. The result has the same degree sequence but need not be
/// connected or non-isomorphic to `g`.
pub fn double_edge_swap(g: &Graph, seed: u64) -> Result<Graph> {
    let mut pairs: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.u, e.v)).collect();
    if pairs.len() < 2 {
        return Err(invalid("double-edge swap needs at least two edges"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SWAP_ATTEMPTS {
        let i = rng.random_range(0..pairs.len());
        let j = rng.random_range(0..pairs.len());
        let (a, b) = pairs[i];
        let (c, d) = if rng.random::<bool>() { pairs[j] } else { (pairs[j].1, pairs[j].0) };
        if i == j || a == c || a == d || b == c || b == d {
            continue;
        }
        let new1 = (a.min(d), a.max(d));
        let new2 = (c.min(b), c.max(b));
        if pairs.contains(&new1) || pairs.contains(&new2) {
            continue;
        }
        pairs[i] = new1;
        pairs[j] = new2;
        return Graph::unweighted(g.n, pairs);
    }
    Err(invalid(format!("no valid double-edge swap found in {SWAP_ATTEMPTS} attempts")))
}

/// Cartesian power `G □ G` (only `power = 2` is supported). Vertex `(i, j)`
/// is `i * n + j`; adjacency is `A ⊗ I + I ⊗ A`.
pub fn cartesian_power(g: &Graph, power: usize) -> Result<Graph> {
    if power != 2 {
        return Err(invalid(format!("only Cartesian power 2 is supported, got {power}")));
    }
    let n = g.n;
    let mut edges = Vec::with_capacity(2 * n * g.edges.len());
    for e in &g.edges {
        for k in 0..n {
            edges.push((e.u * n + k, e.v * n + k, e.w));
            edges.push((k * n + e.u, k * n + e.v, e.w));
        }
    }
    let mut out = Graph::new(n * n, edges)?;
    if let Some(layers) = &g.layers {
        out = out.with_layers((0..n * n).map(|x| layers[x / n] + layers[x % n]).collect())?;
    }
    Ok(out)
}

fn check_bijection(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotBijection(n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::NotBijection(n));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Relabels vertex `v` as `perm[v]`; labels and layers travel with vertices.
pub fn permute_graph(g: &Graph, perm: &[usize]) -> Result<Graph> {
    check_bijection(perm, g.n)?;
    let mut out = Graph::new(g.n, g.edges.iter().map(|e| (perm[e.u], perm[e.v], e.w)))?;
    let carry = |src: &[usize]| {
        let mut dst = vec![0; g.n];
        for (v, &x) in src.iter().enumerate() {
            dst[perm[v]] = x;
        }
        dst
    };
    if let Some(layers) = &g.layers {
        out.layers = Some(carry(layers));
    }
    if let Some(labels) = &g.labels {
        let mut dst = vec![String::new(); g.n];
        for (v, l) in labels.iter().enumerate() {
            dst[perm[v]] = l.clone();
        }
        out.labels = Some(dst);
    }
    Ok(out)
}

/// Inverse of a bijection.
pub fn invert_permutation(perm: &[usize]) -> Result<Vec<usize>> {
    check_bijection(perm, perm.len())?;
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    Ok(inv)
}

/// Largest vertex count accepted by [`brute_force_isomorphic`].
pub const BRUTE_FORCE_MAX_N: usize = 9;

/// Exhaustive isomorphism check by backtracking over vertex maps.
pub fn brute_force_isomorphic(g1: &Graph, g2: &Graph) -> Result<bool> {
    let n = g1.n.max(g2.n);
    if n > BRUTE_FORCE_MAX_N {
        return Err(invalid(format!(
            "brute-force isomorphism limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    if g1.n != g2.n || g1.edges.len() != g2.edges.len() {
        return Ok(false);
    }
    let mut d1 = g1.edge_degrees();
    let mut d2 = g2.edge_degrees();
    d1.sort_unstable();
    d2.sort_unstable();
    if d1 != d2 {
        return Ok(false);
    }
    let a1 = g1.adjacency();
    let a2 = g2.adjacency();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(extend_map(0, &a1, &a2, &mut map, &mut used))
}

fn extend_map(
    v: usize,
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    let n = map.len();
    if v == n {
        return true;
    }
    for cand in 0..n {
        if used[cand] {
            continue;
        }
        let consistent = (0..v).all(|u| (a1[(u, v)] - a2[(map[u], cand)]).abs() <= WEIGHT_TOL);
        if !consistent {
            continue;
        }
        map[v] = cand;
        used[cand] = true;
        if extend_map(v + 1, a1, a2, map, used) {
            return true;
        }
        used[cand] = false;
    }
    map[v] = usize::MAX;
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom2(n: usize) -> usize {
        n * (n - 1) / 2
    }

    #[test]
    fn glued_tree_column_sizes() {
        let g = generate_glued_tree(5).unwrap();
        assert_eq!(g.n(), 14);
        let layers = g.layers().unwrap();
        let mut counts = vec![0; 6];
        for &l in layers {
            counts[l] += 1;
        }
        assert_eq!(counts, vec![1, 2, 4, 4, 2, 1]);
        // two-boson extension size C(n + 1, 2)
        assert_eq!(binom2(g.n() + 1), 105);

        let g3 = generate_glued_tree(3).unwrap();
        assert_eq!(g3.n(), 6);
        assert_eq!(binom2(g3.n() + 1), 21);
    }

    #[test]
    fn glued_tree_degrees() {
        let g = generate_glued_tree(3).unwrap();
        let d = g.edge_degrees();
        assert_eq!(d[0], 2);
        assert_eq!(d[5], 2);
        // leaves: one parent plus one glue edge
        assert!(d[1..5].iter().all(|&x| x == 2));
        let g5 = generate_glued_tree(5).unwrap();
        let d5 = g5.edge_degrees();
        assert_eq!(&d5[1..3], &[3, 3]);
        assert!(d5[3..11].iter().all(|&x| x == 2));
    }

    #[test]
    fn glued_tree_rejects_even_or_small() {
        assert!(generate_glued_tree(4).is_err());
        assert!(generate_glued_tree(1).is_err());
        assert!(generate_glued_tree(0).is_err());
    }

    #[test]
    fn random_cycle_gluing_gives_degree_three_leaves() {
        let g = glued_tree(5, &Gluing::RandomCycle { seed: 11 }).unwrap();
        let d = g.edge_degrees();
        assert!(d[3..11].iter().all(|&x| x == 3));
        assert_eq!(g.edge_count(), 6 + 6 + 8);
    }

    #[test]
    fn gluing_permutation_must_be_bijective() {
        assert!(glued_tree(5, &Gluing::Permutation(vec![0, 0, 1, 2])).is_err());
        assert!(glued_tree(5, &Gluing::Permutation(vec![3, 2, 1, 0])).is_ok());
    }

    #[test]
    fn layered_edges_join_consecutive_layers() {
        for g in [
            generate_glued_tree(7).unwrap(),
            generate_hypercube(5).unwrap(),
            glued_tree(5, &Gluing::RandomCycle { seed: 3 }).unwrap(),
        ] {
            let l = g.layers().unwrap();
            for e in g.edges() {
                assert_eq!(l[e.u].abs_diff(l[e.v]), 1);
            }
        }
    }

    #[test]
    fn hypercube_is_regular() {
        let g = generate_hypercube(4).unwrap();
        assert_eq!(g.n(), 16);
        assert!(g.edge_degrees().iter().all(|&d| d == 4));
        assert_eq!(binom2(17), 136);
        assert_eq!(g.labels().unwrap()[5], "0101");
        let k2 = generate_hypercube(1).unwrap();
        assert_eq!(k2.n(), 2);
        assert_eq!(k2.edge_count(), 1);
        assert!(generate_hypercube(0).is_err());
        assert!(generate_hypercube(17).is_err());
    }

    #[test]
    fn cycle_and_path() {
        let c = generate_cycle(3).unwrap();
        assert_eq!(c.edge_count(), 3);
        assert!(c.edge_degrees().iter().all(|&d| d == 2));
        assert_eq!(binom2(21), 210);
        assert_eq!(binom2(20), 190);
        assert!(generate_cycle(2).is_err());
        assert!(generate_path(1).is_err());
        assert_eq!(generate_path(19).unwrap().diameter(), Some(18));
    }

    #[test]
    fn erdos_renyi_extremes_and_determinism() {
        let k = generate_erdos_renyi(6, 1.0, 1).unwrap();
        assert_eq!(k.edge_count(), 15);
        assert!(matches!(
            generate_erdos_renyi(4, 0.0, 1),
            Err(Error::ConnectivityRetriesExhausted { attempts: 100 })
        ));
        let a = generate_erdos_renyi(20, 0.3, 7).unwrap();
        let b = generate_erdos_renyi(20, 0.3, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.is_connected());
        assert!(generate_erdos_renyi(5, 1.5, 0).is_err());
    }

    #[test]
    fn scale_free_edge_count() {
        let g = generate_scale_free(10, 2, 42).unwrap();
        assert_eq!(g.edge_count(), 3 + 2 * 7);
        assert_eq!(g, generate_scale_free(10, 2, 42).unwrap());
        let clique = generate_scale_free(4, 3, 0).unwrap();
        assert_eq!(clique, generate_complete(4).unwrap());
        assert!(generate_scale_free(3, 3, 0).is_err());
        assert!(generate_scale_free(3, 0, 0).is_err());
    }

    #[test]
    fn cartesian_square_of_k2_is_four_cycle() {
        let k2 = generate_path(2).unwrap();
        let sq = cartesian_power(&k2, 2).unwrap();
        assert_eq!(sq.n(), 4);
        assert_eq!(sq.edge_count(), 4);
        assert!(sq.edge_degrees().iter().all(|&d| d == 2));
        assert!(brute_force_isomorphic(&sq, &generate_cycle(4).unwrap()).unwrap());
        assert!(cartesian_power(&k2, 3).is_err());
    }

    #[test]
    fn cartesian_square_of_triangle() {
        let g = cartesian_power(&generate_cycle(3).unwrap(), 2).unwrap();
        assert_eq!(g.n(), 9);
        assert!(g.edge_degrees().iter().all(|&d| d == 4));
    }

    #[test]
    fn cartesian_adjacency_is_kronecker_sum() {
        let g = Graph::new(4, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (0, 3, 1.5), (0, 2, 0.25)])
            .unwrap();
        let a = g.adjacency();
        let id = DMatrix::<f64>::identity(4, 4);
        let expected = a.kronecker(&id) + id.kronecker(&a);
        let got = cartesian_power(&g, 2).unwrap().adjacency();
        assert!((expected - got).abs().max() < 1e-15);
    }

    #[test]
    fn permutation_round_trip() {
        let g = generate_erdos_renyi(12, 0.4, 5).unwrap();
        let id: Vec<usize> = (0..12).collect();
        assert_eq!(permute_graph(&g, &id).unwrap(), g);
        let perm = vec![3, 7, 0, 11, 2, 9, 1, 5, 10, 4, 8, 6];
        let inv = invert_permutation(&perm).unwrap();
        let back = permute_graph(&permute_graph(&g, &perm).unwrap(), &inv).unwrap();
        assert_eq!(back, g);
        assert!(permute_graph(&g, &[0, 0, 1]).is_err());
    }

    #[test]
    fn permutation_preserves_degree_multiset() {
        let g = generate_erdos_renyi(12, 0.4, 9).unwrap();
        let perm = vec![5, 4, 3, 2, 1, 0, 11, 10, 9, 8, 7, 6];
        let mut a = g.edge_degrees();
        let mut b = permute_graph(&g, &perm).unwrap().edge_degrees();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn brute_force_examples() {
        let g = generate_erdos_renyi(7, 0.5, 2).unwrap();
        let h = permute_graph(&g, &[6, 0, 5, 1, 4, 2, 3]).unwrap();
        assert!(brute_force_isomorphic(&g, &h).unwrap());
        let path = generate_path(4).unwrap();
        let star = generate_star(4).unwrap();
        assert!(!brute_force_isomorphic(&path, &star).unwrap());
        let c6 = generate_cycle(6).unwrap();
        let triangles = Graph::unweighted(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(!brute_force_isomorphic(&c6, &triangles).unwrap());
        assert!(brute_force_isomorphic(&generate_cycle(10).unwrap(), &generate_cycle(10).unwrap())
            .is_err());
    }

    #[test]
    fn brute_force_respects_weights() {
        let a = Graph::new(3, [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let b = Graph::new(3, [(0, 1, 2.0), (1, 2, 1.0)]).unwrap();
        let c = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(brute_force_isomorphic(&a, &b).unwrap());
        assert!(!brute_force_isomorphic(&a, &c).unwrap());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::unweighted(3, [(0, 0)]).is_err());
        assert!(Graph::unweighted(3, [(0, 3)]).is_err());
        assert!(Graph::unweighted(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let g = generate_hypercube(2).unwrap();
        let text = g.to_json().unwrap();
        assert_eq!(Graph::from_json(&text).unwrap(), g);
        assert!(Graph::from_json(r#"{"n": 2, "edges": [[0, 1, 1.0]], "extra": 1}"#).is_err());
        let bare = Graph::from_json(r#"{"n": 2, "edges": [[1, 0, 1.0]]}"#).unwrap();
        assert_eq!(bare.edges()[0].u, 0);
    }

    #[test]
    fn swap_keeps_degree_sequence() {
        let g = generate_erdos_renyi(8, 0.5, 3).unwrap();
        let h = double_edge_swap(&g, 9).unwrap();
        assert_eq!(h, double_edge_swap(&g, 9).unwrap());
        assert_ne!(h, g);
        assert_eq!(h.edge_degrees(), g.edge_degrees());
        assert!(double_edge_swap(&generate_path(2).unwrap(), 0).is_err());
        // K4 has no room to rewire
        assert!(double_edge_swap(&generate_complete(4).unwrap(), 0).is_err());
    }

    #[test]
    fn random_permutation_is_a_bijection() {
        let mut p = random_permutation(10, 4);
        assert_eq!(p, random_permutation(10, 4));
        p.sort_unstable();
        assert_eq!(p, (0..10).collect::<Vec<_>>());
    }
}
