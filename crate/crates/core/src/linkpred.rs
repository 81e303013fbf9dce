//! Link prediction by rooted PageRank similarity: edge removal, candidate
//! scoring, top-m accuracy and grid cross-validation of `(α, c)`.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distance::{graph_distance, DistanceMatrix, DistanceMethod};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::solver::rooted_similarity;
use crate::transition::{local_transition, nonlocal_transition, SmoothingFamily, SmoothingKind, StochasticMatrix};

pub const DEFAULT_C_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.85, 0.9, 0.99];
pub const DEFAULT_ALPHA_GRID: [f64; 13] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 2.0, 3.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub fraction_removed: f64,
    pub seed: u64,
    /// Only remove edges whose loss keeps the graph strongly connected.
    pub preserve_connectivity: bool,
}

impl SplitSpec {
    pub fn new(fraction_removed: f64, seed: u64) -> Result<Self> {
        if !(fraction_removed > 0.0 && fraction_removed < 1.0) {
            return Err(Error::InvalidParameter(format!("fraction {fraction_removed} outside (0, 1)")));
        }
        Ok(Self { fraction_removed, seed, preserve_connectivity: false })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvGrid {
    pub c_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub folds: usize,
    pub trials: usize,
}

impl Default for CvGrid {
    fn default() -> Self {
        Self { c_values: DEFAULT_C_GRID.to_vec(), alpha_values: DEFAULT_ALPHA_GRID.to_vec(), folds: 10, trials: 15 }
    }
}

impl CvGrid {
    pub fn validate(&self) -> Result<()> {
        if self.c_values.is_empty() || self.alpha_values.is_empty() {
            return Err(Error::InvalidParameter("empty grid".into()));
        }
        if let Some(c) = self.c_values.iter().find(|&&c| !(c > 0.0 && c < 1.0)) {
            return Err(Error::InvalidParameter(format!("grid c = {c} outside (0, 1)")));
        }
        if let Some(a) = self.alpha_values.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidParameter(format!("grid alpha = {a} must be positive")));
        }
        if self.folds < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials = 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    LocalRooted,
    NonlocalRooted,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LocalRooted => "local",
            Method::NonlocalRooted => "nonlocal",
        }
    }
}

/// Distance and smoothing used by the nonlocal method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scoring {
    pub distance: DistanceMethod,
    pub smoothing: SmoothingKind,
}

impl Default for Scoring {
    fn default() -> Self {
        Self { distance: DistanceMethod::ShortestPath, smoothing: SmoothingKind::PowerLaw }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub method: Method,
    pub c: f64,
    /// `None` for the local method.
    pub alpha: Option<f64>,
    pub accuracy: f64,
}

/// Prediction units of `g`: unordered pairs `i < j` when symmetric, ordered
/// edges otherwise.
pub fn edge_units(g: &Digraph) -> Vec<(usize, usize)> {
    if g.is_symmetric() {
        g.undirected_edges()
    } else {
        g.edges().collect()
    }
}

fn expand_units(units: &[(usize, usize)], undirected: bool) -> Vec<(usize, usize)> {
    if undirected {
        units.iter().flat_map(|&(i, j)| [(i, j), (j, i)]).collect()
    } else {
        units.to_vec()
    }
}

/// Samples `round(|units|·fraction)` units uniformly without replacement.
/// Returns the training graph and the removed units.
pub fn remove_edges(g: &Digraph, spec: &SplitSpec) -> Result<(Digraph, Vec<(usize, usize)>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    remove_edges_with(g, spec, &mut rng)
}

fn remove_edges_with<R: Rng>(g: &Digraph, spec: &SplitSpec, rng: &mut R) -> Result<(Digraph, Vec<(usize, usize)>)> {
    let undirected = g.is_symmetric();
    let mut units = edge_units(g);
    let target = units.len() as f64 * spec.fraction_removed;
    if target < 1.0 {
        return Err(Error::TooSmall(format!(
            "{} edges x fraction {} removes no edge",
            units.len(),
            spec.fraction_removed
        )));
    }
    let m = target.round() as usize;
    units.shuffle(rng);
    let removed: Vec<(usize, usize)> = if spec.preserve_connectivity {
        let mut current = g.clone();
        let mut picked = Vec::with_capacity(m);
        for &u in &units {
            if picked.len() == m {
                break;
            }
            let trial = current.without_edges(&expand_units(&[u], undirected));
            if trial.is_strongly_connected() {
                current = trial;
                picked.push(u);
            }
        }
        if picked.len() < m {
            return Err(Error::TooSmall(format!("only {} edges removable without disconnecting", picked.len())));
        }
        picked
    } else {
        units.truncate(m);
        units
    };
    let train = g.without_edges(&expand_units(&removed, undirected));
    Ok((train, removed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub source: usize,
    pub target: usize,
    pub score: f64,
}

/// Position of each node's label in ascending label order.
fn label_ranks(g: &Digraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| g.label(a).cmp(g.label(b)));
    let mut rank = vec![0; g.n()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

fn pair_order(a: &ScoredPair, b: &ScoredPair, rank: &[usize]) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| (rank[a.source], rank[a.target]).cmp(&(rank[b.source], rank[b.target])))
}

/// Non-edges of `train` scored by `S_ij`; unordered `i < j` pairs when `train`
/// is symmetric.
fn candidates(train: &Digraph, s: &crate::solver::SimilarityMatrix, undirected: bool) -> Vec<ScoredPair> {
    let n = train.n();
    let mut out = Vec::new();
    for i in 0..n {
        let nbrs = train.out_neighbors(i);
        let start = if undirected { i + 1 } else { 0 };
        for j in start..n {
            if j == i || nbrs.binary_search(&j).is_ok() {
                continue;
            }
            out.push(ScoredPair { source: i, target: j, score: s.get(i, j) });
        }
    }
    out
}

fn transition(
    train: &Digraph,
    method: Method,
    alpha: Option<f64>,
    dm: Option<&DistanceMatrix>,
    scoring: &Scoring,
) -> Result<StochasticMatrix> {
    match method {
        Method::LocalRooted => local_transition(train),
        Method::NonlocalRooted => {
            let alpha = alpha.ok_or_else(|| Error::InvalidParameter("nonlocal scoring needs alpha".into()))?;
            let f = SmoothingFamily::new(scoring.smoothing, alpha)?;
            match dm {
                Some(dm) => nonlocal_transition(dm, &f),
                None => nonlocal_transition(&graph_distance(train, scoring.distance)?, &f),
            }
        }
    }
}

/// Every candidate non-edge of `train`, sorted by descending score with ties
/// broken by ascending label pair.
pub fn score_nonedges(
    train: &Digraph,
    method: Method,
    alpha: Option<f64>,
    c: f64,
    scoring: &Scoring,
) -> Result<Vec<ScoredPair>> {
    let p = transition(train, method, alpha, None, scoring)?;
    let s = rooted_similarity(&p, c)?;
    let rank = label_ranks(train);
    let mut out = candidates(train, &s, train.is_symmetric());
    out.sort_by(|a, b| pair_order(a, b, &rank));
    Ok(out)
}

fn canonical(i: usize, j: usize, undirected: bool) -> (usize, usize) {
    if undirected && j < i {
        (j, i)
    } else {
        (i, j)
    }
}

/// `|top-m ∩ removed| / m` over an already sorted list.
pub fn prediction_accuracy(scored: &[ScoredPair], removed: &[(usize, usize)], undirected: bool) -> f64 {
    let m = removed.len();
    if m == 0 {
        return 0.0;
    }
    let truth: HashSet<(usize, usize)> = removed.iter().map(|&(i, j)| canonical(i, j, undirected)).collect();
    let hits = scored.iter().take(m).filter(|p| truth.contains(&canonical(p.source, p.target, undirected))).count();
    hits as f64 / m as f64
}

/// Top-m accuracy by partial selection instead of a full sort.
fn fast_accuracy(mut cands: Vec<ScoredPair>, truth: &HashSet<(usize, usize)>, rank: &[usize], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if cands.len() > m {
        cands.select_nth_unstable_by(m - 1, |a, b| pair_order(a, b, rank));
        cands.truncate(m);
    }
    let hits = cands.iter().filter(|p| truth.contains(&(p.source, p.target))).count();
    hits as f64 / m as f64
}

/// Accuracy of predicting `removed` from `train` at one parameter point.
pub fn evaluate_split(
    train: &Digraph,
    removed: &[(usize, usize)],
    method: Method,
    alpha: Option<f64>,
    c: f64,
    scoring: &Scoring,
) -> Result<f64> {
    let undirected = train.is_symmetric();
    let p = transition(train, method, alpha, None, scoring)?;
    let s = rooted_similarity(&p, c)?;
    let truth: HashSet<_> = removed.iter().map(|&(i, j)| canonical(i, j, undirected)).collect();
    Ok(fast_accuracy(candidates(train, &s, undirected), &truth, &label_ranks(train), removed.len()))
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct CvChoice {
    pub c: f64,
    pub alpha: Option<f64>,
    pub mean_accuracy: f64,
}

/// Mean fold accuracy for every grid point, indexed `[alpha][c]`. The local
/// method has a single alpha row.
pub fn cv_accuracy_table(
    train: &Digraph,
    grid: &CvGrid,
    method: Method,
    scoring: &Scoring,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    grid.validate()?;
    let undirected = train.is_symmetric();
    let mut units = edge_units(train);
    if units.len() < grid.folds {
        return Err(Error::TooSmall(format!("{} edges for {} folds", units.len(), grid.folds)));
    }
    units.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let alphas: Vec<Option<f64>> = match method {
        Method::LocalRooted => vec![None],
        Method::NonlocalRooted => grid.alpha_values.iter().map(|&a| Some(a)).collect(),
    };
    let rank = label_ranks(train);
    let mut table = vec![vec![0.0; grid.c_values.len()]; alphas.len()];
    for fold in 0..grid.folds {
        let held: Vec<(usize, usize)> = units.iter().skip(fold).step_by(grid.folds).copied().collect();
        let fold_train = train.without_edges(&expand_units(&held, undirected));
        let truth: HashSet<_> = held.iter().copied().collect();
        let dm = match method {
            Method::LocalRooted => None,
            Method::NonlocalRooted => Some(graph_distance(&fold_train, scoring.distance)?),
        };
        let points: Vec<(usize, usize)> =
            (0..alphas.len()).flat_map(|a| (0..grid.c_values.len()).map(move |c| (a, c))).collect();
        let scores: Vec<f64> = points
            .par_iter()
            .map(|&(a, ci)| {
                let p = transition(&fold_train, method, alphas[a], dm.as_ref(), scoring)?;
                let s = rooted_similarity(&p, grid.c_values[ci])?;
                Ok(fast_accuracy(candidates(&fold_train, &s, undirected), &truth, &rank, held.len()))
            })
            .collect::<Result<_>>()?;
        for (&(a, ci), acc) in points.iter().zip(scores) {
            table[a][ci] += acc / grid.folds as f64;
        }
    }
    Ok(table)
}

/// Argmax of a `[alpha][c]` table; ties go to larger alpha, then larger c.
pub fn argmax_grid(table: &[Vec<f64>], grid: &CvGrid, method: Method) -> CvChoice {
    let mut best: Option<(f64, f64, f64)> = None;
    for (a, row) in table.iter().enumerate() {
        let alpha = match method {
            Method::LocalRooted => f64::NEG_INFINITY,
            Method::NonlocalRooted => grid.alpha_values[a],
        };
        for (ci, &acc) in row.iter().enumerate() {
            let c = grid.c_values[ci];
            let better = match best {
                None => true,
                Some((b_acc, b_alpha, b_c)) => {
                    acc > b_acc || (acc == b_acc && (alpha > b_alpha || (alpha == b_alpha && c > b_c)))
                }
            };
            if better {
                best = Some((acc, alpha, c));
            }
        }
    }
    let (mean_accuracy, alpha, c) = best.expect("validated grid is non-empty");
    CvChoice { c, alpha: (method == Method::NonlocalRooted).then_some(alpha), mean_accuracy }
}

/// `folds`-fold cross-validation over the train graph's edges.
pub fn cross_validate(
    train: &Digraph,
    grid: &CvGrid,
    method: Method,
    scoring: &Scoring,
    seed: u64,
) -> Result<CvChoice> {
    let table = cv_accuracy_table(train, grid, method, scoring, seed)?;
    Ok(argmax_grid(&table, grid, method))
}

/// One master seed drives every trial: trial `t` uses the `t`-th draw.
pub fn trial_seeds(master: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..trials).map(|_| rng.random()).collect()
}

/// Repeated split, cross-validation and evaluation for both methods.
/// `split.seed` is the master seed.
pub fn run_trials(g: &Digraph, grid: &CvGrid, split: &SplitSpec, scoring: &Scoring) -> Result<Vec<TrialResult>> {
    grid.validate()?;
    let seeds = trial_seeds(split.seed, grid.trials);
    let per_trial: Vec<Vec<TrialResult>> = seeds
        .par_iter()
        .enumerate()
        .map(|(t, &seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (train, removed) = remove_edges_with(g, split, &mut rng)?;
            let cv_seed: u64 = rng.random();
            [Method::LocalRooted, Method::NonlocalRooted]
                .into_iter()
                .map(|method| {
                    let choice = cross_validate(&train, grid, method, scoring, cv_seed)?;
                    let accuracy = evaluate_split(&train, &removed, method, choice.alpha, choice.c, scoring)?;
                    Ok(TrialResult { trial: t, method, c: choice.c, alpha: choice.alpha, accuracy })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Quartiles by linear interpolation between order statistics.
pub fn quartiles(values: &[f64]) -> Option<[f64; 3]> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    Some([q(0.25), q(0.5), q(0.75)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub method: Method,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

pub fn summarize(results: &[TrialResult]) -> Vec<Summary> {
    [Method::LocalRooted, Method::NonlocalRooted]
        .into_iter()
        .filter_map(|method| {
            let acc: Vec<f64> = results.iter().filter(|r| r.method == method).map(|r| r.accuracy).collect();
            quartiles(&acc).map(|[q1, median, q3]| Summary { method, q1, median, q3 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn ten_edge_split() {
        let g = Digraph::new(11, (0..10).map(|i| (i, i + 1))).unwrap();
        let spec = SplitSpec::new(0.1, 7).unwrap();
        let (train, removed) = remove_edges(&g, &spec).unwrap();
        assert_eq!(removed.len(), 1);
        assert_eq!(train.edge_count(), 9);
        let (train2, removed2) = remove_edges(&g, &spec).unwrap();
        assert_eq!(removed, removed2);
        assert_eq!(train.to_edge_list(), train2.to_edge_list());
    }

    #[test]
    fn undirected_triangle_removes_both_orientations() {
        let g = generators::complete(3).unwrap();
        let (train, removed) = remove_edges(&g, &SplitSpec::new(0.34, 1).unwrap()).unwrap();
        assert_eq!(removed.len(), 1);
        assert_eq!(train.edge_count(), 4);
        let (i, j) = removed[0];
        assert!(!train.has_edge(i, j) && !train.has_edge(j, i));
    }

    #[test]
    fn too_small_split_rejected() {
        let g = generators::path(5).unwrap();
        assert!(matches!(remove_edges(&g, &SplitSpec::new(0.1, 0).unwrap()), Err(Error::TooSmall(_))));
    }

    #[test]
    fn connectivity_preserving_split() {
        let g = generators::cycle(20).unwrap().with_added_edges(&[(0, 10), (10, 0)]).unwrap();
        let spec = SplitSpec { preserve_connectivity: true, ..SplitSpec::new(0.1, 3).unwrap() };
        let (train, removed) = remove_edges(&g, &spec).unwrap();
        assert_eq!(removed.len(), 2);
        assert!(train.is_strongly_connected());
    }

    #[test]
    fn accuracy_examples() {
        let sp = |s, t, score| ScoredPair { source: s, target: t, score };
        let list = [sp(0, 1, 0.9), sp(0, 2, 0.8), sp(1, 2, 0.1), sp(2, 3, 0.0)];
        assert_eq!(prediction_accuracy(&list, &[(0, 1), (0, 2)], true), 1.0);
        assert_eq!(prediction_accuracy(&list, &[(1, 2), (2, 3)], true), 0.0);
        assert_eq!(prediction_accuracy(&list, &[(2, 0), (2, 3)], true), 0.5);
    }

    #[test]
    fn tiny_c_scores_vanish() {
        let g = generators::path(5).unwrap();
        let scored = score_nonedges(&g, Method::LocalRooted, None, 1e-14, &Scoring::default()).unwrap();
        assert!(scored.iter().all(|p| p.score.abs() < 1e-12));
        let first = scored[0];
        assert_eq!((first.source, first.target), (0, 2));
    }

    #[test]
    fn single_point_grid_is_returned() {
        let g = generators::watts_strogatz(20, 4, 0.2, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let grid = CvGrid { c_values: vec![0.5], alpha_values: vec![2.0], folds: 4, trials: 1 };
        let choice = cross_validate(&g, &grid, Method::NonlocalRooted, &Scoring::default(), 1).unwrap();
        assert_eq!((choice.c, choice.alpha), (0.5, Some(2.0)));
    }

    #[test]
    fn argmax_tie_prefers_larger_alpha_then_c() {
        let grid = CvGrid { c_values: vec![0.3, 0.6], alpha_values: vec![1.0, 2.0], folds: 2, trials: 1 };
        let table = vec![vec![0.5, 0.5], vec![0.5, 0.4]];
        let choice = argmax_grid(&table, &grid, Method::NonlocalRooted);
        assert_eq!((choice.c, choice.alpha), (0.3, Some(2.0)));
        let flat = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let choice = argmax_grid(&flat, &grid, Method::NonlocalRooted);
        assert_eq!((choice.c, choice.alpha), (0.6, Some(2.0)));
    }

    #[test]
    fn quartile_interpolation() {
        assert_eq!(quartiles(&[1.0, 2.0, 3.0, 4.0, 5.0]), Some([2.0, 3.0, 4.0]));
        assert_eq!(quartiles(&[4.0, 1.0, 3.0, 2.0]), Some([1.75, 2.5, 3.25]));
        assert_eq!(quartiles(&[]), None);
    }

    #[test]
    fn grid_validation() {
        assert!(CvGrid::default().validate().is_ok());
        let bad = CvGrid { c_values: vec![1.0], ..CvGrid::default() };
        assert!(bad.validate().is_err());
        let bad = CvGrid { alpha_values: vec![0.0], ..CvGrid::default() };
        assert!(bad.validate().is_err());
    }
}
