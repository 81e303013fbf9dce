//! Node-to-node distance functions feeding the nonlocal transition matrix.
//!
//! Three distances are provided: the shortest-path distance (hop count, or
//! weight sum on weighted graphs), the logarithmic distance built from the
//! regularized Laplacian kernel `(I + L)^{-1}`, and the metro distance on a
//! multilayer graph, which charges one unit per line change.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::io::{Read, Write};
use std::ops::Add;

use faer::prelude::*;
use faer::Mat;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Digraph, MultilayerGraph};

/// Extended nonnegative real: a finite distance or `+∞`.
///
/// The derived ordering places every `Finite` value below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Dist {
    Finite(f64),
    Infinite,
}

impl Dist {
    pub const ZERO: Dist = Dist::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, Dist::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Dist::Finite(x) => Some(x),
            Dist::Infinite => None,
        }
    }

    /// IEEE representation, `+∞` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn from_f64(x: f64) -> Dist {
        if x == f64::INFINITY {
            Dist::Infinite
        } else {
            Dist::Finite(x)
        }
    }

    pub fn min(self, other: Dist) -> Dist {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Add for Dist {
    type Output = Dist;

    fn add(self, rhs: Dist) -> Dist {
        match (self, rhs) {
            (Dist::Finite(a), Dist::Finite(b)) => Dist::Finite(a + b),
            _ => Dist::Infinite,
        }
    }
}

/// Dense `n × n` table of distances `δ(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Dist>,
}

impl DistanceMatrix {
    /// Validates zero diagonal, nonnegative finite entries and absence of NaN.
    pub fn new(n: usize, d: Vec<Dist>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: d.len() });
        }
        for (idx, &x) in d.iter().enumerate() {
            let (i, j) = (idx / n, idx % n);
            if let Dist::Finite(v) = x {
                if v.is_nan() || v < 0.0 {
                    return Err(Error::InvalidDistanceMatrix(format!("entry ({i}, {j}) = {v}")));
                }
            }
            if i == j && x != Dist::ZERO {
                return Err(Error::InvalidDistanceMatrix(format!("nonzero diagonal at {i}")));
            }
        }
        Ok(Self { n, d })
    }

    /// Builds from IEEE values, `f64::INFINITY` meaning unreachable.
    pub fn from_f64(n: usize, values: &[f64]) -> Result<Self> {
        Self::new(n, values.iter().map(|&x| Dist::from_f64(x)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Dist {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Dist] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Distinct finite off-diagonal values, sorted ascending.
    pub fn finite_off_diagonal_values(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = (0..self.n)
            .flat_map(|i| (0..self.n).filter(move |&j| j != i).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.get(i, j).finite())
            .collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        vals
    }

    const MAGIC: [u8; 8] = *b"NLPRDIST";

    /// Row-major binary dump: 8-byte magic, `n` as little-endian u64, then `n²`
    /// little-endian f64 values with `+∞` stored as IEEE infinity.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&Self::MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for &x in &self.d {
            w.write_all(&x.to_f64().to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if magic != Self::MAGIC {
            return Err(Error::InvalidDistanceMatrix("bad magic header".into()));
        }
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let n = u64::from_le_bytes(buf) as usize;
        let mut d = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            r.read_exact(&mut buf)?;
            d.push(Dist::from_f64(f64::from_le_bytes(buf)));
        }
        Self::new(n, d)
    }

    /// CSV export: one row per matrix row, `inf` for unreachable pairs. With
    /// labels, a header row and a leading label column are added.
    pub fn write_csv<W: Write>(&self, w: W, labels: Option<&[String]>) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        if let Some(labels) = labels {
            let mut header = vec![String::new()];
            header.extend(labels.iter().cloned());
            out.write_record(&header)?;
        }
        for i in 0..self.n {
            let mut rec: Vec<String> = Vec::with_capacity(self.n + 1);
            if let Some(labels) = labels {
                rec.push(labels[i].clone());
            }
            rec.extend(self.row(i).iter().map(|x| match x {
                Dist::Finite(v) => format!("{v}"),
                Dist::Infinite => "inf".to_string(),
            }));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Which distance feeds the nonlocal transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceMethod {
    ShortestPath,
    Logarithmic,
    /// Requires a multilayer graph.
    Metro,
}

impl DistanceMethod {
    pub fn name(self) -> &'static str {
        match self {
            DistanceMethod::ShortestPath => "sp",
            DistanceMethod::Logarithmic => "log",
            DistanceMethod::Metro => "metro",
        }
    }
}

impl std::str::FromStr for DistanceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sp" | "shortest-path" => Ok(DistanceMethod::ShortestPath),
            "log" | "logarithmic" => Ok(DistanceMethod::Logarithmic),
            "metro" => Ok(DistanceMethod::Metro),
            other => Err(Error::InvalidParameter(format!("unknown distance method {other:?}"))),
        }
    }
}

/// Distance of a single-layer graph. `Metro` needs layer information and is
/// rejected here; use [`metro_distance`].
pub fn graph_distance(g: &Digraph, method: DistanceMethod) -> Result<DistanceMatrix> {
    match method {
        DistanceMethod::ShortestPath => shortest_path_all_pairs(g),
        DistanceMethod::Logarithmic => logarithmic_distance(g),
        DistanceMethod::Metro => Err(Error::InvalidParameter("metro distance requires a multilayer graph".into())),
    }
}

/// All-pairs shortest-path algorithm selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApspAlgorithm {
    /// Breadth-first search for unweighted graphs, Dijkstra otherwise.
    #[default]
    Auto,
    /// Per-source breadth-first search (hop counts, weights ignored).
    Bfs,
    /// Per-source label-setting search on nonnegative weights.
    Dijkstra,
    /// Dense `O(n³)` dynamic programme, kept for cross-checking.
    FloydWarshall,
}

/// Shortest-path distance `δ_Γ(i, j)`: minimal hop count (weighted: weight sum)
/// along a directed path, `+∞` when `j` is unreachable from `i`.
pub fn shortest_path_all_pairs(g: &Digraph) -> Result<DistanceMatrix> {
    shortest_path_all_pairs_with(g, ApspAlgorithm::Auto)
}

pub fn shortest_path_all_pairs_with(g: &Digraph, algo: ApspAlgorithm) -> Result<DistanceMatrix> {
    let n = g.n();
    let algo = match algo {
        ApspAlgorithm::Auto if g.is_weighted() => ApspAlgorithm::Dijkstra,
        ApspAlgorithm::Auto => ApspAlgorithm::Bfs,
        other => other,
    };
    let raw = match algo {
        ApspAlgorithm::FloydWarshall => floyd_warshall(g),
        _ => {
            let mut raw = vec![f64::INFINITY; n * n];
            raw.par_chunks_mut(n.max(1)).enumerate().for_each(|(s, row)| {
                if algo == ApspAlgorithm::Dijkstra {
                    dijkstra_row(g, s, row)
                } else {
                    bfs_row(&|u| g.out_neighbors(u), s, row)
                }
            });
            raw
        }
    };
    DistanceMatrix::from_f64(n, &raw)
}

fn bfs_row<'a>(neighbors: &dyn Fn(usize) -> &'a [usize], source: usize, row: &mut [f64]) {
    multi_source_bfs(neighbors, &[source], row)
}

fn multi_source_bfs<'a>(neighbors: &dyn Fn(usize) -> &'a [usize], sources: &[usize], row: &mut [f64]) {
    let mut queue = VecDeque::with_capacity(row.len());
    for &s in sources {
        row[s] = 0.0;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        let next = row[u] + 1.0;
        for &v in neighbors(u) {
            if row[v] == f64::INFINITY {
                row[v] = next;
                queue.push_back(v);
            }
        }
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

fn dijkstra_row(g: &Digraph, source: usize, row: &mut [f64]) {
    let mut heap = BinaryHeap::new();
    row[source] = 0.0;
    heap.push(HeapItem(0.0, source));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > row[u] {
            continue;
        }
        let nbrs = g.out_neighbors(u);
        let ws = g.out_weights(u);
        for (p, &v) in nbrs.iter().enumerate() {
            let w = ws.map_or(1.0, |ws| ws[p]);
            let cand = d + w;
            if cand < row[v] {
                row[v] = cand;
                heap.push(HeapItem(cand, v));
            }
        }
    }
}

fn floyd_warshall(g: &Digraph) -> Vec<f64> {
    let n = g.n();
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for (i, j) in g.edges() {
        let w = g.weight(i, j).unwrap_or(1.0);
        if w < d[i * n + j] {
            d[i * n + j] = w;
        }
    }
    for k in 0..n {
        let row_k: Vec<f64> = d[k * n..(k + 1) * n].to_vec();
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == f64::INFINITY {
                continue;
            }
            let row_i = &mut d[i * n..(i + 1) * n];
            for (dij, &dkj) in row_i.iter_mut().zip(&row_k) {
                let cand = dik + dkj;
                if cand < *dij {
                    *dij = cand;
                }
            }
        }
    }
    d
}

/// Entries of the kernel below this threshold are treated as exact zeros, giving
/// an infinite distance instead of a `-∞` logarithm.
pub const KERNEL_ZERO: f64 = 1e-300;

/// Residual tolerance `‖(I + L)X − I‖_max` above which the kernel solve is
/// rejected.
pub const KERNEL_RESIDUAL_LIMIT: f64 = 1e-8;

/// Regularized Laplacian kernel `S = (I + L)^{-1}` with `L = D_out − A`
/// (binary adjacency), returned row-major together with the max-norm residual.
pub fn regularized_laplacian_kernel(g: &Digraph) -> Result<(Vec<f64>, f64)> {
    let n = g.n();
    let m = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            1.0 + g.out_neighbors(i).len() as f64
        } else if g.has_edge(i, j) {
            -1.0
        } else {
            0.0
        }
    });
    let x = m.partial_piv_lu().solve(Mat::<f64>::identity(n, n));
    let prod = &m * &x;
    let mut residual = 0.0f64;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let v = x[(i, j)];
            if !v.is_finite() {
                return Err(Error::SolverFailure("non-finite entry in (I + L)^-1".into()));
            }
            out[i * n + j] = v;
            let target = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((prod[(i, j)] - target).abs());
        }
    }
    if residual > KERNEL_RESIDUAL_LIMIT {
        return Err(Error::SolverFailure(format!("kernel residual {residual:e}")));
    }
    Ok((out, residual))
}

/// Logarithmic distance `δ_log = (U + Uᵀ)/2` with `U = h1ᵀ − H`, `H = log S`
/// entrywise and `h = diag(H)`. Pairs with a vanishing kernel entry in either
/// direction are at infinite distance.
pub fn logarithmic_distance(g: &Digraph) -> Result<DistanceMatrix> {
    let n = g.n();
    let (s, _) = regularized_laplacian_kernel(g)?;
    let log = |v: f64| if v < KERNEL_ZERO { None } else { Some(v.ln()) };
    let h: Vec<f64> = (0..n)
        .map(|i| log(s[i * n + i]).ok_or_else(|| Error::SolverFailure(format!("vanishing diagonal {i}"))))
        .collect::<Result<_>>()?;
    let mut d = vec![Dist::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            d[i * n + j] = match (log(s[i * n + j]), log(s[j * n + i])) {
                (Some(hij), Some(hji)) => {
                    let u_ij = h[i] - hij;
                    let u_ji = h[j] - hji;
                    Dist::Finite((0.5 * (u_ij + u_ji)).max(0.0))
                }
                _ => Dist::Infinite,
            };
        }
    }
    DistanceMatrix::new(n, d)
}

/// Supra-graph of a multilayer graph: node `i` in layer `ℓ` becomes
/// `ℓ·n + i`; copies of a node are joined whenever the node has incident edges
/// in both layers.
#[derive(Debug, Clone)]
pub struct ExpandedGraph {
    base_n: usize,
    k: usize,
    graph: Digraph,
}

impl ExpandedGraph {
    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn copy_index(&self, node: usize, layer: usize) -> usize {
        layer * self.base_n + node
    }
}

#[allow(clippy::needless_range_loop)]
pub fn expand_multilayer(m: &MultilayerGraph) -> ExpandedGraph {
    let (n, k) = (m.n(), m.k());
    let membership = m.membership();
    let mut edges = Vec::new();
    for l in 0..k {
        for &(i, j) in m.layer_edges(l) {
            edges.push((l * n + i, l * n + j));
            edges.push((l * n + j, l * n + i));
        }
    }
    for i in 0..n {
        for l1 in 0..k {
            for l2 in (l1 + 1)..k {
                if membership[l1][i] && membership[l2][i] {
                    edges.push((l1 * n + i, l2 * n + i));
                    edges.push((l2 * n + i, l1 * n + i));
                }
            }
        }
    }
    let labels = (0..k)
        .flat_map(|l| (0..n).map(move |i| (l, i)))
        .map(|(l, i)| format!("{}@{}", m.labels()[i], m.layer_names()[l]))
        .collect();
    let graph = Digraph::with_labels(labels, edges).expect("expanded indices are in range and loop-free");
    ExpandedGraph { base_n: n, k, graph }
}

/// Metro distance `δ_M(i, j) = min_{ℓ1, ℓ2} δ(i_ℓ1, j_ℓ2)` on the expanded
/// graph, one unit per station hop and per line change.
pub fn metro_distance(m: &MultilayerGraph) -> Result<DistanceMatrix> {
    let (n, k) = (m.n(), m.k());
    let membership = m.membership();
    let copies: Vec<Vec<usize>> =
        (0..n).map(|i| (0..k).filter(|&l| membership[l][i]).map(|l| l * n + i).collect()).collect();
    if let Some(i) = copies.iter().position(Vec::is_empty) {
        return Err(Error::IsolatedNode(m.labels()[i].clone()));
    }
    let expanded = expand_multilayer(m);
    let eg = expanded.graph();
    let nbrs = |u: usize| eg.out_neighbors(u);
    let mut raw = vec![f64::INFINITY; n * n];
    raw.par_chunks_mut(n.max(1)).enumerate().for_each_init(
        || vec![f64::INFINITY; n * k],
        |scratch, (i, row)| {
            scratch.fill(f64::INFINITY);
            // starting on any of i's lines is free
            multi_source_bfs(&nbrs, &copies[i], scratch);
            for (j, out) in row.iter_mut().enumerate() {
                *out = copies[j].iter().map(|&c| scratch[c]).fold(f64::INFINITY, f64::min);
            }
            row[i] = 0.0;
        },
    );
    DistanceMatrix::from_f64(n, &raw)
}
