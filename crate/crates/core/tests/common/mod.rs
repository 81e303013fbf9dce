//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's numerical kernels.

#![allow(dead_code)]

use std::collections::VecDeque;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(n: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs())).unwrap();
        assert!(a[piv * n + col].abs() > 1e-300, "singular system");
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for r in (col + 1)..n {
            let f = a[r * n + col] / a[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = ((r + 1)..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - tail) / a[r * n + r];
    }
    x
}

/// Stationary vector of a dense row-stochastic `g`: solves `(I − gᵀ)s = 0`
/// with the last equation replaced by `Σ s = 1`.
pub fn stationary_by_elimination(n: usize, g: &[f64]) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = if i == j { 1.0 } else { 0.0 } - g[j * n + i];
        }
    }
    for j in 0..n {
        a[(n - 1) * n + j] = 1.0;
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    gauss_solve(n, a, b)
}

fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// `S = X + Xᵀ` with `X = (1−c) Σ_{k=0}^{terms} c^k (Pᵀ)^k`.
pub fn neumann_similarity(n: usize, p: &[f64], c: f64, terms: usize) -> Vec<f64> {
    let mut power = vec![0.0; n * n];
    for i in 0..n {
        power[i * n + i] = 1.0;
    }
    let mut sum = power.clone();
    let mut scale = 1.0;
    for _ in 0..terms {
        power = matmul(n, &power, p);
        scale *= c;
        for (s, q) in sum.iter_mut().zip(&power) {
            *s += scale * q;
        }
    }
    // sum = Σ c^k P^k, so X = (1−c)·sumᵀ and S = (1−c)(sum + sumᵀ)
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = (1.0 - c) * (sum[i * n + j] + sum[j * n + i]);
        }
    }
    s
}

/// Hop distance from `src` to `dst` by a fresh breadth-first search.
pub fn bfs_pair(adj: &[Vec<usize>], src: usize, dst: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[src] = 0;
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        if u == dst {
            return Some(dist[u]);
        }
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    None
}

/// Kendall τ-b by enumerating every pair.
pub fn kendall_brute(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut conc, mut disc, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                conc += 1;
            } else {
                disc += 1;
            }
        }
    }
    let denom = (((conc + disc + tx) * (conc + disc + ty)) as f64).sqrt();
    (conc - disc) as f64 / denom
}

/// `½ max_{i,j} max_{‖δ‖∞≤1} |δᵀ(m_i − m_j)|`, evaluated pair by pair with
/// the maximizing sign vector chosen explicitly.
pub fn tau_by_sign_vectors(n: usize, m: &[f64]) -> f64 {
    let mut best = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let mut pos = 0.0;
            let mut neg = 0.0;
            for k in 0..n {
                let d = m[i * n + k] - m[j * n + k];
                if d > 0.0 {
                    pos += d;
                } else {
                    neg -= d;
                }
            }
            best = best.max(pos + neg);
        }
    }
    0.5 * best
}
