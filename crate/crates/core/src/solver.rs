//! Stationary distributions of Google matrices and the rooted-similarity resolvent.

use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;
use faer::Mat;
use rayon::prelude::*;

use crate::distance::{graph_distance, DistanceMatrix, DistanceMethod};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::transition::{
    google_matrix, local_transition, nonlocal_transition, GoogleMatrix, SmoothingFamily, SmoothingKind,
    StochasticMatrix,
};

/// Tolerance on `Σ scores = 1` accepted by [`RankVector::new`].
pub const RANK_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StationaryMethod {
    /// `sᵀ ← c·sᵀP̃ + (1−c)vᵀ`, renormalized each sweep.
    #[default]
    PowerIteration,
    /// Direct LU solve of `(I − Gᵀ)s = 0` with the normalization row `1ᵀs = 1`.
    DenseSolve,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stop once `‖sᵀG − sᵀ‖₁ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub method: StationaryMethod,
    /// Positive start vector (normalized internally); uniform when absent.
    pub start: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 10_000, method: StationaryMethod::PowerIteration, start: None }
    }
}

#[derive(Debug, Clone)]
pub struct Stationary {
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// `‖sᵀG − sᵀ‖₁` at the returned vector's predecessor (power iteration) or
    /// at the returned vector (dense solve).
    pub residual: f64,
}

pub fn stationary_distribution(g: &GoogleMatrix, opts: &SolverOptions) -> Result<Stationary> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol = {} must be positive", opts.tol)));
    }
    match opts.method {
        StationaryMethod::PowerIteration => power_iteration(g, opts),
        StationaryMethod::DenseSolve => dense_stationary(g),
    }
}

const COLUMN_BLOCK: usize = 256;

/// `out = c·sᵀP̃ + (1−c)vᵀ`, blocked over columns.
fn google_step(g: &GoogleMatrix, s: &[f64], out: &mut [f64]) {
    let n = g.n();
    let c = g.c();
    let p = g.base().as_slice();
    let v = g.teleport();
    out.par_chunks_mut(COLUMN_BLOCK).enumerate().for_each(|(b, block)| {
        let j0 = b * COLUMN_BLOCK;
        block.fill(0.0);
        for (i, &si) in s.iter().enumerate() {
            if si == 0.0 {
                continue;
            }
            let row = &p[i * n + j0..i * n + j0 + block.len()];
            for (o, &pij) in block.iter_mut().zip(row) {
                *o += si * pij;
            }
        }
        for (o, &vj) in block.iter_mut().zip(&v[j0..]) {
            *o = c * *o + (1.0 - c) * vj;
        }
    });
}

fn power_iteration(g: &GoogleMatrix, opts: &SolverOptions) -> Result<Stationary> {
    let n = g.n();
    let mut s = match &opts.start {
        Some(start) => {
            if start.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: start.len() });
            }
            if start.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::InvalidParameter("start vector must be positive".into()));
            }
            let total: f64 = start.iter().sum();
            start.iter().map(|x| x / total).collect()
        }
        None => vec![1.0 / n as f64; n],
    };
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        google_step(g, &s, &mut next);
        let total: f64 = next.iter().sum();
        residual = next.iter().zip(&s).map(|(a, b)| (a - b).abs()).sum();
        for (si, &x) in s.iter_mut().zip(&next) {
            *si = x / total;
        }
        if residual <= opts.tol {
            return Ok(Stationary { scores: s, iterations: it, residual });
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual })
}

fn dense_stationary(g: &GoogleMatrix) -> Result<Stationary> {
    let n = g.n();
    let dense = g.dense();
    // rows of (I − Gᵀ), last one replaced by 1ᵀ
    let a = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == n - 1 {
            1.0
        } else {
            let id = if i == j { 1.0 } else { 0.0 };
            id - dense[j * n + i]
        }
    });
    let mut rhs = Mat::<f64>::zeros(n, 1);
    rhs[(n - 1, 0)] = 1.0;
    let x = a.partial_piv_lu().solve(&rhs);
    let scores: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if scores.iter().any(|x| !x.is_finite()) {
        return Err(Error::SolverFailure("singular stationary system".into()));
    }
    let mut out = vec![0.0; n];
    google_step(g, &scores, &mut out);
    let residual = out.iter().zip(&scores).map(|(a, b)| (a - b).abs()).sum();
    Ok(Stationary { scores, iterations: 0, residual })
}

/// Resolvent `X = (1−c)(I − cPᵀ)^{-1}`, row-major.
pub fn resolvent(p: &StochasticMatrix, c: f64) -> Result<Vec<f64>> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidParameter(format!("c = {c} must lie in (0, 1)")));
    }
    let n = p.n();
    let m = Mat::<f64>::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - c * p.get(i, j)
    });
    // (I − cPᵀ)^{-1} = ((I − cP)^{-1})ᵀ
    let y = m.partial_piv_lu().solve(Mat::<f64>::identity(n, n));
    let scale = 1.0 - c;
    let mut x = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let v = y[(j, i)];
            if !v.is_finite() {
                return Err(Error::SolverFailure("non-finite entry in (I - cP)^-1".into()));
            }
            x[i * n + j] = scale * v;
        }
    }
    Ok(x)
}

/// Symmetric similarity `S = X + Xᵀ`.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    n: usize,
    s: Vec<f64>,
    alpha: Option<f64>,
    c: f64,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.s[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.s
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn with_alpha(mut self, alpha: Option<f64>) -> Self {
        self.alpha = alpha;
        self
    }
}

/// Relative tolerance on detailed balance `d_i p_ij = d_j p_ji`.
const BALANCE_TOL: f64 = 1e-11;

/// Weights `d` with `d_i p_ij = d_j p_ji` for all pairs, if they exist.
/// Chains built from symmetric weights `p = D^{-1}W` are of this kind.
pub fn reversible_weights(p: &StochasticMatrix) -> Option<Vec<f64>> {
    let n = p.n();
    let mut d = vec![0.0; n];
    let mut queue = std::collections::VecDeque::new();
    for root in 0..n {
        if d[root] != 0.0 {
            continue;
        }
        d[root] = 1.0;
        queue.push_back(root);
        while let Some(i) = queue.pop_front() {
            for (j, &pij) in p.row(i).iter().enumerate() {
                if pij == 0.0 || d[j] != 0.0 {
                    continue;
                }
                let pji = p.get(j, i);
                if pji == 0.0 {
                    return None;
                }
                d[j] = d[i] * pij / pji;
                queue.push_back(j);
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let a = d[i] * p.get(i, j);
            let b = d[j] * p.get(j, i);
            if (a - b).abs() > BALANCE_TOL * a.max(b) {
                return None;
            }
        }
    }
    Some(d)
}

/// `(I − cA)^{-1}` for the symmetrized `A = D^{1/2} P D^{-1/2}`, via Cholesky.
fn reversible_resolvent(p: &StochasticMatrix, d: &[f64], c: f64) -> Option<Mat<f64>> {
    let n = p.n();
    let root: Vec<f64> = d.iter().map(|x| x.sqrt()).collect();
    let a = Mat::<f64>::from_fn(n, n, |i, j| {
        let aij = root[i] * p.get(i, j) / root[j];
        let aji = root[j] * p.get(j, i) / root[i];
        let id = if i == j { 1.0 } else { 0.0 };
        id - c * 0.5 * (aij + aji)
    });
    let m = a.llt(faer::Side::Lower).ok()?.inverse();
    Some(m)
}

/// Rooted PageRank similarity `S = X + Xᵀ`, `X = (1−c)(I − cPᵀ)^{-1}`.
///
/// Reversible chains go through a Cholesky factorization of the symmetrized
/// matrix; all others through LU.
pub fn rooted_similarity(p: &StochasticMatrix, c: f64) -> Result<SimilarityMatrix> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidParameter(format!("c = {c} must lie in (0, 1)")));
    }
    let n = p.n();
    if let Some(d) = reversible_weights(p) {
        if let Some(m) = reversible_resolvent(p, &d, c) {
            // S_ij = (1−c)·M_ij·(d_i + d_j)/√(d_i d_j), mirrored for exact symmetry
            let mut s = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let mij = 0.5 * (m[(i, j)] + m[(j, i)]);
                    let v = (1.0 - c) * mij * ((d[i] + d[j]) / (d[i] * d[j]).sqrt());
                    s[i * n + j] = v;
                    s[j * n + i] = v;
                }
            }
            if s.iter().all(|x| x.is_finite()) {
                return Ok(SimilarityMatrix { n, s, alpha: None, c });
            }
        }
    }
    rooted_similarity_lu(p, c)
}

/// Rooted similarity through the general LU resolvent.
pub fn rooted_similarity_lu(p: &StochasticMatrix, c: f64) -> Result<SimilarityMatrix> {
    let n = p.n();
    let x = resolvent(p, c)?;
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = x[i * n + j] + x[j * n + i];
        }
    }
    Ok(SimilarityMatrix { n, s, alpha: None, c })
}

/// How a rank vector was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMeta {
    /// `None` for classical (local) PageRank.
    pub distance: Option<DistanceMethod>,
    pub smoothing: Option<SmoothingKind>,
    pub c: f64,
}

/// Label-keyed stationary distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    labels: Vec<String>,
    scores: Vec<f64>,
    alpha: Option<f64>,
    meta: Option<RankMeta>,
}

impl RankVector {
    /// Requires matching lengths, nonnegative scores and `Σ = 1 ± 1e-10`.
    pub fn new(labels: Vec<String>, scores: Vec<f64>) -> Result<Self> {
        if labels.len() != scores.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), got: scores.len() });
        }
        if scores.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidDistribution("negative or non-finite score".into()));
        }
        let total: f64 = scores.iter().sum();
        if (total - 1.0).abs() > RANK_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("scores sum to {total}")));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::DuplicateLabel(dup.clone()));
        }
        Ok(Self { labels, scores, alpha: None, meta: None })
    }

    pub fn with_meta(mut self, alpha: Option<f64>, meta: RankMeta) -> Self {
        self.alpha = alpha;
        self.meta = Some(meta);
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn meta(&self) -> Option<&RankMeta> {
        self.meta.as_ref()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score_of(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.scores[i])
    }

    /// Node indices ordered by descending score, ties by ascending label.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.scores[b].total_cmp(&self.scores[a]).then_with(|| self.labels[a].cmp(&self.labels[b]))
        });
        idx
    }

    /// Labels best first, using the deterministic tie-break of [`RankVector::order`].
    pub fn ranked_labels(&self) -> Vec<String> {
        self.order().into_iter().map(|i| self.labels[i].clone()).collect()
    }
}

/// Configuration of one (local or nonlocal) PageRank computation on a graph.
#[derive(Debug, Clone)]
pub struct PageRankSpec {
    pub c: f64,
    /// `None` for the local (classical) model.
    pub nonlocal: Option<(DistanceMethod, SmoothingFamily)>,
    pub teleport: Option<Vec<f64>>,
    pub solver: SolverOptions,
}

impl PageRankSpec {
    pub fn local(c: f64) -> Self {
        Self { c, nonlocal: None, teleport: None, solver: SolverOptions::default() }
    }

    pub fn nonlocal(c: f64, distance: DistanceMethod, smoothing: SmoothingFamily) -> Self {
        Self { c, nonlocal: Some((distance, smoothing)), teleport: None, solver: SolverOptions::default() }
    }

    fn meta(&self) -> RankMeta {
        RankMeta { distance: self.nonlocal.map(|(d, _)| d), smoothing: self.nonlocal.map(|(_, f)| f.kind()), c: self.c }
    }
}

/// Transition matrix for `spec` on `g`, using `dm` when a precomputed distance
/// is supplied.
pub fn transition_for(g: &Digraph, spec: &PageRankSpec, dm: Option<&DistanceMatrix>) -> Result<StochasticMatrix> {
    match spec.nonlocal {
        None => local_transition(g),
        Some((method, f)) => match dm {
            Some(dm) => nonlocal_transition(dm, &f),
            None => nonlocal_transition(&graph_distance(g, method)?, &f),
        },
    }
}

/// End-to-end PageRank: distance, transition, teleportation, stationary vector.
pub fn pagerank(g: &Digraph, spec: &PageRankSpec) -> Result<RankVector> {
    let p = transition_for(g, spec, None)?;
    rank_from_transition(p, g.labels().to_vec(), spec)
}

/// Same as [`pagerank`] with a caller-supplied distance matrix (e.g. metro).
pub fn pagerank_with_distance(labels: Vec<String>, dm: &DistanceMatrix, spec: &PageRankSpec) -> Result<RankVector> {
    let (_, f) =
        spec.nonlocal.ok_or_else(|| Error::InvalidParameter("a distance matrix needs a nonlocal spec".into()))?;
    let p = nonlocal_transition(dm, &f)?;
    rank_from_transition(p, labels, spec)
}

fn rank_from_transition(p: StochasticMatrix, labels: Vec<String>, spec: &PageRankSpec) -> Result<RankVector> {
    let g = google_matrix(p, spec.c, spec.teleport.clone())?;
    let st = stationary_distribution(&g, &spec.solver)?;
    let alpha = spec.nonlocal.map(|(_, f)| f.alpha());
    Ok(RankVector::new(labels, st.scores)?.with_meta(alpha, spec.meta()))
}
