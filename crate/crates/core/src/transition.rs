//! Local and nonlocal transition matrices and their teleported Google matrices.
//!
//! All stochastic matrices are held dense and already patched: rows without any
//! admissible successor are replaced by the uniform row `1ᵀ/n`, and the indices
//! of those rows are kept in [`StochasticMatrix::dangling`] so the unpatched
//! matrix stays recoverable.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::distance::{Dist, DistanceMatrix};
use crate::error::{Error, Result};
use crate::graph::Digraph;

/// Default cap on the node count for dense `n × n` storage.
pub const DEFAULT_MAX_DENSE_NODES: usize = 20_000;

static MAX_DENSE_NODES: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_DENSE_NODES);

/// Sets the process-wide node cap for dense matrices.
pub fn set_max_dense_nodes(limit: usize) {
    MAX_DENSE_NODES.store(limit, Ordering::Relaxed);
}

pub fn max_dense_nodes() -> usize {
    MAX_DENSE_NODES.load(Ordering::Relaxed)
}

fn check_dense(n: usize) -> Result<()> {
    check_dense_against(n, max_dense_nodes())
}

fn check_dense_against(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    Ok(())
}

/// Tolerance on row sums of stochastic matrices and on teleport distributions.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SmoothingKind {
    /// `f_α(x) = x^{-α}`: the Lévy random walk.
    PowerLaw,
    /// `f_α(x) = e^{-αx}`.
    Exponential,
}

impl SmoothingKind {
    pub fn name(self) -> &'static str {
        match self {
            SmoothingKind::PowerLaw => "power",
            SmoothingKind::Exponential => "exp",
        }
    }
}

impl std::str::FromStr for SmoothingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" | "powerlaw" | "power-law" => Ok(SmoothingKind::PowerLaw),
            "exp" | "exponential" => Ok(SmoothingKind::Exponential),
            other => Err(Error::InvalidParameter(format!("unknown smoothing kind {other:?}"))),
        }
    }
}

/// Nonincreasing decay `f_α` applied to distances, with `f_α(+∞) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingFamily {
    kind: SmoothingKind,
    alpha: f64,
}

impl SmoothingFamily {
    /// `alpha` must be finite and nonnegative; `alpha = 0` gives the uniform kernel.
    pub fn new(kind: SmoothingKind, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be finite and >= 0")));
        }
        Ok(Self { kind, alpha })
    }

    pub fn power_law(alpha: f64) -> Result<Self> {
        Self::new(SmoothingKind::PowerLaw, alpha)
    }

    pub fn exponential(alpha: f64) -> Result<Self> {
        Self::new(SmoothingKind::Exponential, alpha)
    }

    pub fn kind(&self) -> SmoothingKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn evaluate(&self, x: Dist) -> Result<f64> {
        let x = match x {
            Dist::Infinite => return Ok(0.0),
            Dist::Finite(x) => x,
        };
        match self.kind {
            SmoothingKind::PowerLaw if x == 0.0 => Err(Error::PowerLawAtZero),
            SmoothingKind::PowerLaw => Ok(x.powf(-self.alpha)),
            SmoothingKind::Exponential => Ok((-self.alpha * x).exp()),
        }
    }
}

/// Dense row-stochastic matrix with the set of uniformly patched rows.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    p: Vec<f64>,
    dangling: Vec<usize>,
}

impl StochasticMatrix {
    /// Wraps a dense row-major matrix, checking nonnegativity and unit row sums.
    pub fn from_dense(n: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: p.len() });
        }
        for i in 0..n {
            let row = &p[i * n..(i + 1) * n];
            if row.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return Err(Error::InvalidDistribution(format!("row {i} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidDistribution(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { n, p, dangling: Vec::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Rows that had no admissible successor and were replaced by `1ᵀ/n`.
    pub fn dangling(&self) -> &[usize] {
        &self.dangling
    }

    /// Entry of the unpatched matrix (zero on dangling rows).
    pub fn raw(&self, i: usize, j: usize) -> f64 {
        if self.dangling.binary_search(&i).is_ok() {
            0.0
        } else {
            self.get(i, j)
        }
    }

    /// `max_ij |self_ij − other_ij|`.
    pub fn max_abs_diff(&self, other: &StochasticMatrix) -> f64 {
        self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `P = D_out^{-1} A` on the binary adjacency, dangling rows patched to `1ᵀ/n`.
/// Edge weights are ignored.
pub fn local_transition(g: &Digraph) -> Result<StochasticMatrix> {
    let n = g.n();
    check_dense(n)?;
    let mut p = vec![0.0; n * n];
    let mut dangling = Vec::new();
    for i in 0..n {
        let row = &mut p[i * n..(i + 1) * n];
        let nbrs = g.out_neighbors(i);
        if nbrs.is_empty() {
            row.fill(1.0 / n as f64);
            dangling.push(i);
        } else {
            let w = 1.0 / nbrs.len() as f64;
            for &j in nbrs {
                row[j] = w;
            }
        }
    }
    Ok(StochasticMatrix { n, p, dangling })
}

/// Nonlocal transition: `p_ij = f(δ(i,j)) / Σ_{k≠i} f(δ(i,k))` for finite
/// `δ(i,j)`, zero diagonal, rows with no finite off-diagonal distance patched
/// to `1ᵀ/n`.
pub fn nonlocal_transition(dm: &DistanceMatrix, f: &SmoothingFamily) -> Result<StochasticMatrix> {
    let n = dm.n();
    check_dense(n)?;
    let mut p = vec![0.0; n * n];
    let dangling_flags: Vec<bool> = p
        .par_chunks_mut(n.max(1))
        .enumerate()
        .map(|(i, row)| fill_nonlocal_row(dm.row(i), i, f, row))
        .collect::<Result<_>>()?;
    let dangling = dangling_flags.iter().enumerate().filter_map(|(i, &d)| d.then_some(i)).collect();
    Ok(StochasticMatrix { n, p, dangling })
}

/// Fills one row; returns whether it was dangling.
fn fill_nonlocal_row(dist: &[Dist], i: usize, f: &SmoothingFamily, row: &mut [f64]) -> Result<bool> {
    let n = row.len();
    let mut any_finite = false;
    let mut total = 0.0;
    for (j, (&d, out)) in dist.iter().zip(row.iter_mut()).enumerate() {
        if j == i || !d.is_finite() {
            continue;
        }
        any_finite = true;
        let w = f.evaluate(d)?;
        *out = w;
        total += w;
    }
    if !any_finite {
        row.fill(1.0 / n as f64);
        return Ok(true);
    }
    if total == 0.0 {
        return Err(Error::SmoothingUnderflow { row: i, alpha: f.alpha() });
    }
    if !total.is_finite() {
        return Err(Error::SmoothingOverflow { row: i, alpha: f.alpha() });
    }
    for x in row.iter_mut() {
        *x /= total;
    }
    Ok(false)
}

/// Teleported matrix `G = c·P̃ + (1−c)·1vᵀ`, stored as its factors.
#[derive(Debug, Clone)]
pub struct GoogleMatrix {
    c: f64,
    base: StochasticMatrix,
    v: Vec<f64>,
}

/// Validates `c ∈ (0, 1]` and an optional teleport distribution (default uniform).
pub fn google_matrix(base: StochasticMatrix, c: f64, v: Option<Vec<f64>>) -> Result<GoogleMatrix> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidTeleportFactor(c));
    }
    let n = base.n();
    let v = match v {
        Some(v) => {
            validate_distribution(&v, n)?;
            v
        }
        None => vec![1.0 / n as f64; n],
    };
    Ok(GoogleMatrix { c, base, v })
}

pub(crate) fn validate_distribution(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if v.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidDistribution("negative or non-finite entry".into()));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(())
}

impl GoogleMatrix {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn base(&self) -> &StochasticMatrix {
        &self.base
    }

    pub fn teleport(&self) -> &[f64] {
        &self.v
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c * self.base.get(i, j) + (1.0 - self.c) * self.v[j]
    }

    pub fn row_into(&self, i: usize, out: &mut [f64]) {
        let keep = 1.0 - self.c;
        for ((o, &p), &v) in out.iter_mut().zip(self.base.row(i)).zip(&self.v) {
            *o = self.c * p + keep * v;
        }
    }

    /// Row-major dense materialization.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n * n];
        out.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| self.row_into(i, row));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::shortest_path_all_pairs;

    fn path3() -> Digraph {
        Digraph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn assert_row(m: &StochasticMatrix, i: usize, expect: &[f64]) {
        for (j, &e) in expect.iter().enumerate() {
            assert!((m.get(i, j) - e).abs() < 1e-12, "p[{i}][{j}] = {} != {e}", m.get(i, j));
        }
    }

    #[test]
    fn smoothing_values() {
        let p = SmoothingFamily::power_law(2.0).unwrap();
        assert_eq!(p.evaluate(Dist::Finite(2.0)).unwrap(), 0.25);
        assert_eq!(p.evaluate(Dist::Infinite).unwrap(), 0.0);
        assert!(matches!(p.evaluate(Dist::ZERO), Err(Error::PowerLawAtZero)));
        let e = SmoothingFamily::exponential(1.0).unwrap();
        assert_eq!(e.evaluate(Dist::ZERO).unwrap(), 1.0);
        assert_eq!(e.evaluate(Dist::Infinite).unwrap(), 0.0);
        assert!(SmoothingFamily::power_law(-1.0).is_err());
    }

    #[test]
    fn local_path() {
        let p = local_transition(&path3()).unwrap();
        assert_row(&p, 0, &[0.0, 1.0, 0.0]);
        assert_row(&p, 2, &[1.0 / 3.0; 3]);
        assert_eq!(p.dangling(), &[2]);
        assert_eq!(p.raw(2, 0), 0.0);
    }

    #[test]
    fn local_k3_and_cycle() {
        let k3 = Digraph::new(3, [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]).unwrap();
        let p = local_transition(&k3).unwrap();
        assert_row(&p, 0, &[0.0, 0.5, 0.5]);
        assert_row(&p, 2, &[0.5, 0.5, 0.0]);
        let c4 = Digraph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let p = local_transition(&c4).unwrap();
        for i in 0..4 {
            let row = p.row(i);
            assert_eq!(row.iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(row[(i + 1) % 4], 1.0);
        }
    }

    #[test]
    fn nonlocal_path_power_law() {
        let dm = shortest_path_all_pairs(&path3()).unwrap();
        let p = nonlocal_transition(&dm, &SmoothingFamily::power_law(1.0).unwrap()).unwrap();
        // 1/(1 + 1/2) and (1/2)/(1 + 1/2)
        assert_row(&p, 0, &[0.0, 2.0 / 3.0, 1.0 / 3.0]);
        assert_row(&p, 1, &[0.0, 0.0, 1.0]);
        assert_eq!(p.dangling(), &[2]);
    }

    #[test]
    fn alpha_zero_is_uniform_over_reachable() {
        let g = Digraph::new(4, [(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap();
        let dm = shortest_path_all_pairs(&g).unwrap();
        for f in [SmoothingFamily::power_law(0.0).unwrap(), SmoothingFamily::exponential(0.0).unwrap()] {
            let p = nonlocal_transition(&dm, &f).unwrap();
            assert_row(&p, 0, &[0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
            assert_eq!(p.dangling(), &[3]);
        }
    }

    #[test]
    fn underflow_reported_with_row_and_alpha() {
        let dm = DistanceMatrix::from_f64(2, &[0.0, 800.0, f64::INFINITY, 0.0]).unwrap();
        let f = SmoothingFamily::exponential(1.0).unwrap();
        assert!(matches!(
            nonlocal_transition(&dm, &f),
            Err(Error::SmoothingUnderflow { row: 0, alpha }) if alpha == 1.0
        ));
    }

    #[test]
    fn google_matrix_rows() {
        let p = local_transition(&path3()).unwrap();
        let g = google_matrix(p.clone(), 0.85, None).unwrap();
        let mut row = vec![0.0; 3];
        g.row_into(0, &mut row);
        for (a, b) in row.iter().zip([0.05, 0.90, 0.05]) {
            assert!((a - b).abs() < 1e-12);
        }
        let g1 = google_matrix(p.clone(), 1.0, None).unwrap();
        assert_eq!(g1.dense(), p.as_slice());
    }

    #[test]
    fn google_matrix_validation() {
        let p = local_transition(&path3()).unwrap();
        assert!(matches!(google_matrix(p.clone(), 0.0, None), Err(Error::InvalidTeleportFactor(_))));
        assert!(matches!(google_matrix(p.clone(), 1.5, None), Err(Error::InvalidTeleportFactor(_))));
        assert!(google_matrix(p.clone(), 0.5, Some(vec![0.5, 0.5, 0.5])).is_err());
        assert!(google_matrix(p.clone(), 0.5, Some(vec![1.0, 0.0])).is_err());
        assert!(google_matrix(p, 0.5, Some(vec![1.0, 0.0, 0.0])).is_ok());
    }

    #[test]
    fn dense_limit_enforced() {
        assert!(matches!(check_dense_against(3, 2), Err(Error::TooLarge { n: 3, limit: 2 })));
        assert!(check_dense_against(2, 2).is_ok());
        assert_eq!(max_dense_nodes(), DEFAULT_MAX_DENSE_NODES);
    }

    #[test]
    fn from_dense_validates_rows() {
        assert!(StochasticMatrix::from_dense(2, vec![0.5, 0.5, 1.0, 0.0]).is_ok());
        assert!(StochasticMatrix::from_dense(2, vec![0.5, 0.6, 1.0, 0.0]).is_err());
        assert!(StochasticMatrix::from_dense(2, vec![1.5, -0.5, 1.0, 0.0]).is_err());
    }
}
