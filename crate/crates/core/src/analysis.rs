//! Stability and rank-comparison analytics.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::distance::{metro_distance, shortest_path_all_pairs, DistanceMatrix, DistanceMethod};
use crate::error::{Error, Result};
use crate::graph::{Digraph, MultilayerGraph};
use crate::solver::{pagerank_with_distance, stationary_distribution, PageRankSpec, RankVector, SolverOptions};
use crate::transition::{
    google_matrix, local_transition, nonlocal_transition, GoogleMatrix, SmoothingFamily, SmoothingKind,
};

/// `τ₁ ≥ 1 − NOT_ERGODIC_MARGIN` is treated as non-ergodic.
pub const NOT_ERGODIC_MARGIN: f64 = 1e-14;

/// Slack added to the right-hand side of the perturbation bound.
pub const PERTURBATION_SLACK: f64 = 1e-10;

/// Relative threshold for numerically tied scores.
pub const TIE_THRESHOLD: f64 = 1e-12;

/// `½ max_{i,j} Σ_k |M_ik − M_jk|` for a row-major `n × n` matrix.
pub fn ergodicity_coefficient_dense(n: usize, m: &[f64]) -> Result<f64> {
    if m.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: m.len() });
    }
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let ri = &m[i * n..(i + 1) * n];
            ((i + 1)..n)
                .map(|j| {
                    let rj = &m[j * n..(j + 1) * n];
                    ri.iter().zip(rj).map(|(a, b)| (a - b).abs()).sum::<f64>()
                })
                .fold(0.0_f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok((0.5 * best).min(1.0))
}

/// `τ₁(G)` by the pairwise-row scan over the materialized Google matrix.
pub fn ergodicity_coefficient(g: &GoogleMatrix) -> f64 {
    ergodicity_coefficient_dense(g.n(), &g.dense()).expect("square by construction")
}

/// `1 / (1 − τ₁)`.
pub fn condition_from_tau(tau: f64) -> Result<f64> {
    if tau >= 1.0 - NOT_ERGODIC_MARGIN {
        return Err(Error::NotErgodic(tau));
    }
    Ok(1.0 / (1.0 - tau))
}

pub fn condition_number(g: &GoogleMatrix) -> Result<f64> {
    condition_from_tau(ergodicity_coefficient(g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationReport {
    /// `‖s − s̄‖₁`.
    pub lhs: f64,
    /// `‖G − Ḡ‖ / (1 − τ₁(G))` with the maximum absolute row sum norm.
    pub rhs: f64,
    pub satisfied: bool,
}

/// Maximum absolute row sum of `A − B`.
pub fn max_row_sum_diff(n: usize, a: &[f64], b: &[f64]) -> f64 {
    a.par_chunks(n.max(1))
        .zip(b.par_chunks(n.max(1)))
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()).sum::<f64>())
        .reduce(|| 0.0, f64::max)
}

/// Solves both chains and checks `‖s − s̄‖₁ ≤ ‖G − Ḡ‖/(1 − τ₁(G)) + 1e-10`.
pub fn perturbation_bound_check(
    g: &GoogleMatrix,
    gbar: &GoogleMatrix,
    opts: &SolverOptions,
) -> Result<PerturbationReport> {
    if g.n() != gbar.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: gbar.n() });
    }
    let n = g.n();
    let s = stationary_distribution(g, opts)?.scores;
    let sbar = stationary_distribution(gbar, opts)?.scores;
    let lhs: f64 = s.iter().zip(&sbar).map(|(a, b)| (a - b).abs()).sum();
    let dense = g.dense();
    let tau = ergodicity_coefficient_dense(n, &dense)?;
    let r = max_row_sum_diff(n, &dense, &gbar.dense());
    let rhs = r * condition_from_tau(tau)?;
    Ok(PerturbationReport { lhs, rhs, satisfied: lhs <= rhs + PERTURBATION_SLACK })
}

/// Scores of `b` permuted into `a`'s label order.
fn aligned_scores(a: &RankVector, b: &RankVector) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LabelMismatch(format!("{} vs {} labels", a.len(), b.len())));
    }
    let index: std::collections::HashMap<&str, usize> =
        b.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    a.labels()
        .iter()
        .map(|l| {
            index
                .get(l.as_str())
                .map(|&i| b.scores()[i])
                .ok_or_else(|| Error::LabelMismatch(format!("{l:?} missing from second vector")))
        })
        .collect()
}

/// Kendall τ-b between two rank vectors over the same label set. Scores
/// within `1e-12·max(s)` of each other count as tied.
pub fn kendall_tau(a: &RankVector, b: &RankVector) -> Result<f64> {
    let y = aligned_scores(a, b)?;
    kendall_tau_b(&snap_ties(a.scores()), &snap_ties(&y))
}

/// Replaces each chain of numerically tied scores by its smallest member.
pub fn snap_ties(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(0.0_f64, f64::max);
    let eps = TIE_THRESHOLD * max;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut out = scores.to_vec();
    let mut anchor = f64::NAN;
    let mut prev = f64::NAN;
    for &i in &idx {
        let x = scores[i];
        if prev.is_nan() || x - prev > eps {
            anchor = x;
        }
        out[i] = anchor;
        prev = x;
    }
    out
}

fn tie_pairs(sorted: &[f64]) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Merge sort that returns the number of inversions.
fn sort_counting_swaps(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_counting_swaps(&mut v[..mid], buf) + sort_counting_swaps(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Tie-corrected Kendall τ-b in `O(n log n)`.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let n = x.len() as u64;
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let n1 = tie_pairs(&xs);
    let mut joint = 0u64;
    let mut run = 1u64;
    for w in idx.windows(2) {
        if x[w[0]] == x[w[1]] && y[w[0]] == y[w[1]] {
            run += 1;
        } else {
            joint += run * (run - 1) / 2;
            run = 1;
        }
    }
    joint += run * (run - 1) / 2;

    let mut buf = Vec::with_capacity(ys.len());
    let swaps = sort_counting_swaps(&mut ys, &mut buf);
    let n2 = tie_pairs(&ys);
    let n0 = n * n.saturating_sub(1) / 2;

    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::InvalidParameter("Kendall tau undefined for a constant score vector".into()));
    }
    let num = n0 as f64 - n1 as f64 - n2 as f64 + joint as f64 - 2.0 * swaps as f64;
    Ok((num / denom).clamp(-1.0, 1.0))
}

/// Node labels best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    items: Vec<String>,
}

impl RankedList {
    pub fn new(items: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(items.len());
        if let Some(dup) = items.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::DuplicateLabel(dup.clone()));
        }
        Ok(Self { items })
    }

    /// Descending score, ties by ascending label.
    pub fn from_rank_vector(r: &RankVector) -> Self {
        Self { items: r.ranked_labels() }
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// `ISIM_k = (1/k) Σ_{j≤k} |Δ(p_{1..j}, q_{1..j})| / (2j)` for `k = 1..=k_max`.
pub fn intersection_similarity(p: &RankedList, q: &RankedList, k_max: usize) -> Result<Vec<f64>> {
    let limit = p.len().min(q.len());
    if k_max > limit {
        return Err(Error::InvalidParameter(format!("k_max = {k_max} exceeds list length {limit}")));
    }
    let mut in_p = HashSet::with_capacity(k_max);
    let mut in_q = HashSet::with_capacity(k_max);
    let mut common = 0usize;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(k_max);
    for j in 1..=k_max {
        let a = p.items[j - 1].as_str();
        let b = q.items[j - 1].as_str();
        in_p.insert(a);
        if in_q.contains(a) {
            common += 1;
        }
        in_q.insert(b);
        if in_p.contains(b) {
            common += 1;
        }
        // |Δ| = 2j − 2·common
        acc += 1.0 - common as f64 / j as f64;
        out.push(acc / j as f64);
    }
    Ok(out)
}

/// `Σ s_i²`.
pub fn inverse_participation_ratio(s: &RankVector) -> f64 {
    s.scores().iter().map(|x| x * x).sum()
}

/// Number of adjacent pairs in sorted order with `|s_i − s_j| ≤ 1e-12·max(s)`.
pub fn numerical_ties(scores: &[f64]) -> usize {
    let max = scores.iter().copied().fold(0.0_f64, f64::max);
    let eps = TIE_THRESHOLD * max;
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).filter(|w| w[1] - w[0] <= eps).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicityRow {
    pub alpha: f64,
    pub smoothing: SmoothingKind,
    pub tau_alpha: f64,
    pub tau_local: f64,
}

impl ErgodicityRow {
    pub fn difference(&self) -> f64 {
        self.tau_local - self.tau_alpha
    }
}

/// `τ₁(G_α)` against `τ₁(G)` on shortest-path distances, one row per α.
pub fn ergodicity_sweep(g: &Digraph, alphas: &[f64], kind: SmoothingKind, c: f64) -> Result<Vec<ErgodicityRow>> {
    let dm = shortest_path_all_pairs(g)?;
    let tau_local = ergodicity_coefficient(&google_matrix(local_transition(g)?, c, None)?);
    alphas
        .par_iter()
        .map(|&alpha| {
            let f = SmoothingFamily::new(kind, alpha)?;
            let gm = google_matrix(nonlocal_transition(&dm, &f)?, c, None)?;
            Ok(ErgodicityRow { alpha, smoothing: kind, tau_alpha: ergodicity_coefficient(&gm), tau_local })
        })
        .collect()
}

/// One PageRank profile: `alpha = None` is the local model.
#[derive(Debug, Clone)]
pub struct Profile {
    pub alpha: Option<f64>,
    pub ranks: RankVector,
}

/// Nonlocal profiles over `alphas` followed by the local profile.
pub fn pagerank_profiles(
    g: &Digraph,
    dm: &DistanceMatrix,
    distance: DistanceMethod,
    kind: SmoothingKind,
    alphas: &[f64],
    c: f64,
) -> Result<Vec<Profile>> {
    let mut out: Vec<Profile> = alphas
        .par_iter()
        .map(|&alpha| {
            let spec = PageRankSpec::nonlocal(c, distance, SmoothingFamily::new(kind, alpha)?);
            Ok(Profile { alpha: Some(alpha), ranks: pagerank_with_distance(g.labels().to_vec(), dm, &spec)? })
        })
        .collect::<Result<_>>()?;
    let local = crate::solver::pagerank(g, &PageRankSpec::local(c))?;
    out.push(Profile { alpha: None, ranks: local });
    Ok(out)
}

/// Undirected `C_n` plus the single directed chord `from → to`.
pub fn perturbed_cycle(n: usize, from: usize, to: usize) -> Result<Digraph> {
    let base = crate::generators::cycle(n)?;
    base.with_added_edges(&[(from, to)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KendallRow {
    pub alpha: f64,
    pub smoothing: SmoothingKind,
    pub tau: f64,
}

/// Kendall τ between nonlocal and local PageRank for every `(kind, α)`.
pub fn kendall_sweep(
    g: &Digraph,
    distance: DistanceMethod,
    kinds: &[SmoothingKind],
    alphas: &[f64],
    c: f64,
) -> Result<Vec<KendallRow>> {
    let dm = crate::distance::graph_distance(g, distance)?;
    let local = crate::solver::pagerank(g, &PageRankSpec::local(c))?;
    let grid: Vec<(SmoothingKind, f64)> = kinds.iter().flat_map(|&k| alphas.iter().map(move |&a| (k, a))).collect();
    grid.par_iter()
        .map(|&(kind, alpha)| {
            let spec = PageRankSpec::nonlocal(c, distance, SmoothingFamily::new(kind, alpha)?);
            let r = pagerank_with_distance(g.labels().to_vec(), &dm, &spec)?;
            Ok(KendallRow { alpha, smoothing: kind, tau: kendall_tau(&r, &local)? })
        })
        .collect()
}

/// ISIM curves of three rankings against a ground-truth list.
#[derive(Debug, Clone, PartialEq)]
pub struct IsimTable {
    pub sp: Vec<f64>,
    pub metro: Vec<f64>,
    pub local: Vec<f64>,
}

/// Rankings of a multilayer network by nonlocal PageRank on metro and on
/// aggregate shortest-path distance, plus local PageRank on the aggregate.
#[derive(Debug, Clone)]
pub struct MetroRanking {
    pub metro: RankVector,
    pub sp: RankVector,
    pub local: RankVector,
}

pub fn metro_rankings(m: &MultilayerGraph, kind: SmoothingKind, alpha: f64, c: f64) -> Result<MetroRanking> {
    let f = SmoothingFamily::new(kind, alpha)?;
    let agg = m.aggregate();
    let dm = metro_distance(m)?;
    let metro = pagerank_with_distance(m.labels().to_vec(), &dm, &PageRankSpec::nonlocal(c, DistanceMethod::Metro, f))?;
    let sp = crate::solver::pagerank(&agg, &PageRankSpec::nonlocal(c, DistanceMethod::ShortestPath, f))?;
    let local = crate::solver::pagerank(&agg, &PageRankSpec::local(c))?;
    Ok(MetroRanking { metro, sp, local })
}

/// `r`'s ranking restricted to labels present in `truth`.
pub fn restricted_ranking(r: &RankVector, truth: &RankedList) -> RankedList {
    let keep: HashSet<&str> = truth.items().iter().map(String::as_str).collect();
    let items = r.ranked_labels().into_iter().filter(|l| keep.contains(l.as_str())).collect();
    RankedList { items }
}

impl MetroRanking {
    /// ISIM of each ranking against `truth`, comparing only labels in `truth`.
    pub fn isim(&self, truth: &RankedList, k_max: usize) -> Result<IsimTable> {
        let curve = |r: &RankVector| intersection_similarity(&restricted_ranking(r, truth), truth, k_max);
        Ok(IsimTable { sp: curve(&self.sp)?, metro: curve(&self.metro)?, local: curve(&self.local)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transition::StochasticMatrix;

    fn rv(scores: &[f64]) -> RankVector {
        let total: f64 = scores.iter().sum();
        let labels = (0..scores.len()).map(|i| format!("n{i}")).collect();
        RankVector::new(labels, scores.iter().map(|s| s / total).collect()).unwrap()
    }

    fn list(items: &[&str]) -> RankedList {
        RankedList::new(items.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn tau_of_uniform_and_permutation() {
        let n = 4;
        assert_eq!(ergodicity_coefficient_dense(n, &[0.25; 16]).unwrap(), 0.0);
        let mut perm = vec![0.0; 16];
        for (i, j) in [(0, 2), (1, 0), (2, 3), (3, 1)] {
            perm[i * n + j] = 1.0;
        }
        assert_eq!(ergodicity_coefficient_dense(n, &perm).unwrap(), 1.0);
    }

    #[test]
    fn condition_number_values() {
        assert_eq!(condition_from_tau(0.0).unwrap(), 1.0);
        assert_eq!(condition_from_tau(0.5).unwrap(), 2.0);
        assert!(matches!(condition_from_tau(1.0), Err(Error::NotErgodic(_))));
    }

    #[test]
    fn condition_bounded_by_teleport() {
        let g = crate::generators::path(6).unwrap();
        let gm = google_matrix(local_transition(&g).unwrap(), 0.85, None).unwrap();
        let tau = ergodicity_coefficient(&gm);
        assert!(tau <= 0.85 + 1e-15);
        assert!(condition_number(&gm).unwrap() <= 1.0 / 0.15 + 1e-9);
    }

    #[test]
    fn identical_matrices_bound_is_tight_zero() {
        let g = crate::generators::cycle(8).unwrap();
        let gm = google_matrix(local_transition(&g).unwrap(), 0.85, None).unwrap();
        let r = perturbation_bound_check(&gm, &gm.clone(), &SolverOptions::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert!(r.satisfied);
    }

    #[test]
    fn kendall_examples() {
        let a = rv(&[1.0, 2.0, 3.0, 4.0]);
        assert!((kendall_tau(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let rev = rv(&[4.0, 3.0, 2.0, 1.0]);
        assert!((kendall_tau(&a, &rev).unwrap() + 1.0).abs() < 1e-15);
        let b = rv(&[1.0, 3.0, 2.0, 4.0]);
        assert!((kendall_tau(&a, &b).unwrap() - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn kendall_with_ties_matches_tau_b_formula() {
        // x ties (0,1); y ties (2,3): concordant 4, discordant 0, n0 = 6, n1 = n2 = 1
        let x = [1.0, 1.0, 2.0, 3.0];
        let y = [1.0, 2.0, 3.0, 3.0];
        let tau = kendall_tau_b(&x, &y).unwrap();
        let expected = (4.0 - 0.0) / (5.0_f64 * 5.0).sqrt();
        assert!((tau - expected).abs() < 1e-15, "{tau}");
    }

    #[test]
    fn kendall_rejects_label_mismatch() {
        let a = rv(&[1.0, 2.0]);
        let b = RankVector::new(vec!["n0".into(), "zz".into()], vec![0.5, 0.5]).unwrap();
        assert!(matches!(kendall_tau(&a, &b), Err(Error::LabelMismatch(_))));
    }

    #[test]
    fn isim_examples() {
        let p = list(&["a", "b", "c"]);
        let q = list(&["b", "a", "c"]);
        let v = intersection_similarity(&p, &q, 3).unwrap();
        let expected = [1.0, 0.5, 1.0 / 3.0];
        for (x, y) in v.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(intersection_similarity(&p, &p, 3).unwrap().iter().all(|&x| x == 0.0));
        let r = list(&["x", "y", "z"]);
        assert!(intersection_similarity(&p, &r, 3).unwrap().iter().all(|&x| x == 1.0));
        assert!(intersection_similarity(&p, &q, 4).is_err());
        assert!(RankedList::new(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn ipr_examples() {
        assert!((inverse_participation_ratio(&rv(&[0.5, 0.25, 0.25])) - 0.375).abs() < 1e-15);
        assert!((inverse_participation_ratio(&rv(&[1.0; 8])) - 0.125).abs() < 1e-15);
        assert_eq!(inverse_participation_ratio(&rv(&[0.0, 1.0, 0.0])), 1.0);
    }

    #[test]
    fn near_ties_are_snapped() {
        let s = [0.3, 0.3 + 1e-17, 0.2, 0.2 - 1e-17];
        assert_eq!(snap_ties(&s), vec![0.3, 0.3, 0.2 - 1e-17, 0.2 - 1e-17]);
        let a = rv(&[0.3, 0.3, 0.2, 0.2]);
        let b = RankVector::new(a.labels().to_vec(), vec![0.3 + 1e-17, 0.3 - 1e-17, 0.2 + 1e-17, 0.2 - 1e-17]).unwrap();
        assert!((kendall_tau(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ties_diagnostic() {
        assert_eq!(numerical_ties(&[0.25, 0.25, 0.5]), 1);
        assert_eq!(numerical_ties(&[0.1, 0.2, 0.7]), 0);
    }

    #[test]
    fn tau_of_teleported_matrix_scales_with_c() {
        let p = StochasticMatrix::from_dense(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let gm = google_matrix(p, 0.6, None).unwrap();
        assert!((ergodicity_coefficient(&gm) - 0.6).abs() < 1e-15);
    }
}
