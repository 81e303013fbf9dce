//! Synthetic and embedded test graphs. Nodes are labelled `"0".."n-1"`.

use std::collections::HashSet;

use delaunator::{triangulate, Point};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Digraph;

const ZACHARY: &str = include_str!("../data/zachary.txt");

fn undirected(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Digraph> {
    Digraph::new(n, pairs.into_iter().flat_map(|(i, j)| [(i, j), (j, i)]))
}

/// Undirected cycle `C_n`.
pub fn cycle(n: usize) -> Result<Digraph> {
    if n < 3 {
        return Err(Error::TooSmall(format!("cycle needs n >= 3, got {n}")));
    }
    undirected(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Undirected path `P_n`.
pub fn path(n: usize) -> Result<Digraph> {
    if n < 2 {
        return Err(Error::TooSmall(format!("path needs n >= 2, got {n}")));
    }
    undirected(n, (0..n - 1).map(|i| (i, i + 1)))
}

pub fn complete(n: usize) -> Result<Digraph> {
    if n < 2 {
        return Err(Error::TooSmall(format!("complete graph needs n >= 2, got {n}")));
    }
    Digraph::new(n, (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))))
}

/// `G(n, p)`. Directed samples every ordered pair independently.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, directed: bool, rng: &mut R) -> Result<Digraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::TooSmall("n = 0".into()));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || (!directed && j < i) {
                continue;
            }
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    if directed {
        Digraph::new(n, edges)
    } else {
        undirected(n, edges)
    }
}

/// Undirected Watts–Strogatz small world: ring lattice with `k/2` neighbours
/// per side, each lattice edge rewired with probability `beta`.
pub fn watts_strogatz<R: Rng + ?Sized>(n: usize, k: usize, beta: f64, rng: &mut R) -> Result<Digraph> {
    if !k.is_multiple_of(2) || k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("need even 0 < k < n, got k = {k}, n = {n}")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("rewiring probability {beta} outside [0, 1]")));
    }
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    for i in 0..n {
        for s in 1..=k / 2 {
            edges.insert(key(i, (i + s) % n));
        }
    }
    for s in 1..=k / 2 {
        for i in 0..n {
            let old = key(i, (i + s) % n);
            if !rng.random_bool(beta) || !edges.contains(&old) {
                continue;
            }
            let degree = edges.iter().filter(|&&(a, b)| a == i || b == i).count();
            if degree >= n - 1 {
                continue;
            }
            loop {
                let w = rng.random_range(0..n);
                if w != i && !edges.contains(&key(i, w)) {
                    edges.remove(&old);
                    edges.insert(key(i, w));
                    break;
                }
            }
        }
    }
    let mut pairs: Vec<_> = edges.into_iter().collect();
    pairs.sort_unstable();
    undirected(n, pairs)
}

/// Undirected Delaunay triangulation of `n` uniform points in the unit square.
pub fn delaunay<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Digraph> {
    if n < 3 {
        return Err(Error::TooSmall(format!("triangulation needs n >= 3, got {n}")));
    }
    let points: Vec<Point> = (0..n).map(|_| Point { x: rng.random::<f64>(), y: rng.random::<f64>() }).collect();
    let t = triangulate(&points);
    if t.triangles.is_empty() {
        return Err(Error::InvalidParameter("degenerate point set".into()));
    }
    let mut pairs = HashSet::new();
    for tri in t.triangles.chunks_exact(3) {
        for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let mut pairs: Vec<_> = pairs.into_iter().collect();
    pairs.sort_unstable();
    undirected(n, pairs)
}

/// Zachary's karate club: 34 members, 78 undirected friendships.
pub fn zachary() -> Digraph {
    let pairs = ZACHARY.lines().filter(|l| !l.trim().is_empty()).map(|l| {
        let mut it = l.split_whitespace().map(|t| t.parse::<usize>().expect("embedded data"));
        (it.next().expect("embedded data"), it.next().expect("embedded data"))
    });
    undirected(34, pairs).expect("embedded data")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zachary_shape() {
        let g = zachary();
        assert_eq!(g.n(), 34);
        assert_eq!(g.undirected_edges().len(), 78);
        assert!(g.is_symmetric());
        let deg = g.out_degrees();
        assert_eq!(deg[0], 16.0);
        assert_eq!(deg[33], 17.0);
        assert_eq!(deg[11], 1.0);
    }

    #[test]
    fn cycle_and_path() {
        let c = cycle(5).unwrap();
        assert_eq!(c.edge_count(), 10);
        assert!(c.out_degrees().values().iter().all(|&d| d == 2.0));
        let p = path(4).unwrap();
        assert_eq!(p.out_degrees().values(), &[1.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn watts_strogatz_keeps_edge_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = watts_strogatz(100, 4, 0.2, &mut rng).unwrap();
        assert_eq!(g.undirected_edges().len(), 200);
        let lattice = watts_strogatz(10, 2, 0.0, &mut rng).unwrap();
        assert_eq!(lattice.edge_count(), cycle(10).unwrap().edge_count());
    }

    #[test]
    fn erdos_renyi_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(erdos_renyi(6, 1.0, true, &mut rng).unwrap().edge_count(), 30);
        assert_eq!(erdos_renyi(6, 0.0, false, &mut rng).unwrap().edge_count(), 0);
    }

    #[test]
    fn delaunay_is_planar_and_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = delaunay(200, &mut rng).unwrap();
        let m = g.undirected_edges().len();
        assert!(m <= 3 * 200 - 6);
        assert!(m >= 200);
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn seeded_generators_are_reproducible() {
        let a = watts_strogatz(30, 4, 0.3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = watts_strogatz(30, 4, 0.3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a.to_edge_list(), b.to_edge_list());
    }
}
