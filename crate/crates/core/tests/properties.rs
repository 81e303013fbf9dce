mod common;

use faer::Mat;
use nonlocal_pagerank::analysis::{
    ergodicity_coefficient, ergodicity_coefficient_dense, intersection_similarity, kendall_tau_b, RankedList,
};
use nonlocal_pagerank::distance::{
    logarithmic_distance, metro_distance, shortest_path_all_pairs, shortest_path_all_pairs_with, ApspAlgorithm, Dist,
};
use nonlocal_pagerank::io::{parse_graph, write_graph, GraphFormat, LoadedGraph};
use nonlocal_pagerank::solver::{resolvent, stationary_distribution, SolverOptions};
use nonlocal_pagerank::transition::{google_matrix, local_transition, nonlocal_transition};
use nonlocal_pagerank::{Digraph, DistanceMatrix, MultilayerGraph, SmoothingFamily, SmoothingKind};
use proptest::prelude::*;

fn digraph(max_n: usize, max_edges: usize) -> impl Strategy<Value = Digraph> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n), 0..=max_edges)
            .prop_map(move |pairs| Digraph::new(n, pairs.into_iter().filter(|(i, j)| i != j)).unwrap())
    })
}

fn weighted_digraph(max_n: usize) -> impl Strategy<Value = Digraph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 0.01f64..10.0), 0..=4 * n).prop_map(move |rows| {
            let labels = (0..n).map(|i| i.to_string()).collect();
            Digraph::with_weights(labels, rows.into_iter().filter(|(i, j, _)| i != j)).unwrap()
        })
    })
}

fn multilayer(max_n: usize) -> impl Strategy<Value = MultilayerGraph> {
    (3..=max_n, 1usize..=3).prop_flat_map(|(n, k)| {
        prop::collection::vec(prop::collection::vec((0..n, 0..n), 1..=2 * n), k).prop_map(move |layers| {
            let mut layers: Vec<Vec<(usize, usize)>> =
                layers.into_iter().map(|l| l.into_iter().filter(|(i, j)| i != j).collect()).collect();
            // every node gets at least one incident edge
            let k = layers.len();
            for v in 0..n {
                layers[v % k].push((v, (v + 1) % n));
            }
            MultilayerGraph::from_layers(n, layers).unwrap()
        })
    })
}

fn smoothing() -> impl Strategy<Value = SmoothingFamily> {
    (prop::bool::ANY, 0.0f64..6.0).prop_map(|(power, alpha)| {
        let kind = if power { SmoothingKind::PowerLaw } else { SmoothingKind::Exponential };
        SmoothingFamily::new(kind, alpha).unwrap()
    })
}

fn adjacency(g: &Digraph) -> Vec<Vec<usize>> {
    (0..g.n()).map(|i| g.out_neighbors(i).to_vec()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bfs_matches_floyd_warshall(g in digraph(50, 150)) {
        let a = shortest_path_all_pairs(&g).unwrap();
        let b = shortest_path_all_pairs_with(&g, ApspAlgorithm::FloydWarshall).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn dijkstra_matches_floyd_warshall(g in weighted_digraph(25)) {
        let a = shortest_path_all_pairs_with(&g, ApspAlgorithm::Dijkstra).unwrap();
        let b = shortest_path_all_pairs_with(&g, ApspAlgorithm::FloydWarshall).unwrap();
        for i in 0..g.n() {
            for j in 0..g.n() {
                match (a.get(i, j), b.get(i, j)) {
                    (Dist::Finite(x), Dist::Finite(y)) => prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0)),
                    (x, y) => prop_assert_eq!(x, y),
                }
            }
        }
    }

    #[test]
    fn apsp_matches_per_pair_bfs(g in digraph(30, 80)) {
        let dm = shortest_path_all_pairs(&g).unwrap();
        let adj = adjacency(&g);
        for i in 0..g.n() {
            for j in 0..g.n() {
                let oracle = common::bfs_pair(&adj, i, j).map_or(Dist::Infinite, |d| Dist::Finite(d as f64));
                prop_assert_eq!(dm.get(i, j), oracle);
            }
        }
    }

    #[test]
    fn metro_dominates_aggregate(m in multilayer(15)) {
        let metro = metro_distance(&m).unwrap();
        let agg = shortest_path_all_pairs(&m.aggregate()).unwrap();
        for i in 0..m.n() {
            prop_assert_eq!(metro.get(i, i), Dist::ZERO);
            for j in 0..m.n() {
                prop_assert!(metro.get(i, j) >= agg.get(i, j));
            }
        }
    }

    #[test]
    fn aggregate_contains_every_layer_edge(m in multilayer(15)) {
        let agg = m.aggregate();
        for l in 0..m.k() {
            for &(i, j) in m.layer_edges(l) {
                prop_assert!(agg.has_edge(i, j) && agg.has_edge(j, i));
            }
        }
    }

    #[test]
    fn log_distance_symmetric_zero_diagonal(g in digraph(15, 40)) {
        let dm = logarithmic_distance(&g).unwrap();
        prop_assert!(dm.is_symmetric());
        for i in 0..g.n() {
            prop_assert_eq!(dm.get(i, i), Dist::ZERO);
        }
    }

    #[test]
    fn distance_binary_round_trip(g in digraph(20, 40)) {
        let dm = shortest_path_all_pairs(&g).unwrap();
        let mut buf = Vec::new();
        dm.write_binary(&mut buf).unwrap();
        prop_assert_eq!(DistanceMatrix::read_binary(buf.as_slice()).unwrap(), dm);
    }

    #[test]
    fn transition_rows_are_stochastic(g in digraph(30, 90), f in smoothing()) {
        let dm = shortest_path_all_pairs(&g).unwrap();
        for p in [local_transition(&g).unwrap(), nonlocal_transition(&dm, &f).unwrap()] {
            for i in 0..g.n() {
                let row = p.row(i);
                prop_assert!(row.iter().all(|&x| x >= 0.0));
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn stationary_start_vector_invariance(g in digraph(30, 90), scale in prop::collection::vec(0.1f64..10.0, 30)) {
        let gm = google_matrix(local_transition(&g).unwrap(), 0.85, None).unwrap();
        let a = stationary_distribution(&gm, &SolverOptions::default()).unwrap().scores;
        let start = scale[..g.n()].to_vec();
        let opts = SolverOptions { start: Some(start), ..Default::default() };
        let b = stationary_distribution(&gm, &opts).unwrap().scores;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-11);
        }
    }

    #[test]
    fn stationary_matches_elimination(g in digraph(50, 150), f in smoothing()) {
        let p = nonlocal_transition(&shortest_path_all_pairs(&g).unwrap(), &f).unwrap();
        let gm = google_matrix(p, 0.85, None).unwrap();
        let s = stationary_distribution(&gm, &SolverOptions::default()).unwrap().scores;
        let oracle = common::stationary_by_elimination(g.n(), &gm.dense());
        for (x, y) in s.iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn resolvent_columns_sum_to_one(g in digraph(25, 60), c in 0.05f64..0.95) {
        let p = local_transition(&g).unwrap();
        let n = g.n();
        let x = resolvent(&p, c).unwrap();
        for j in 0..n {
            let col: f64 = (0..n).map(|i| x[i * n + j]).sum();
            prop_assert!((col - 1.0).abs() <= 1e-10, "column {} sums to {}", j, col);
        }
    }

    #[test]
    fn tau_matches_sign_vector_oracle(g in digraph(12, 30), f in smoothing(), c in 0.1f64..1.0) {
        let p = nonlocal_transition(&shortest_path_all_pairs(&g).unwrap(), &f).unwrap();
        let gm = google_matrix(p, c, None).unwrap();
        let tau = ergodicity_coefficient(&gm);
        let oracle = common::tau_by_sign_vectors(g.n(), &gm.dense());
        prop_assert!((tau - oracle).abs() <= 1e-14);
        prop_assert!((0.0..=1.0).contains(&tau));
        prop_assert!(tau <= c + 1e-14);
    }

    #[test]
    fn eigenvalues_bounded_by_tau(g in digraph(30, 90), f in smoothing()) {
        let n = g.n();
        let p = nonlocal_transition(&shortest_path_all_pairs(&g).unwrap(), &f).unwrap();
        let gm = google_matrix(p, 0.85, None).unwrap();
        let dense = gm.dense();
        let tau = ergodicity_coefficient_dense(n, &dense).unwrap();
        let m = Mat::<f64>::from_fn(n, n, |i, j| dense[i * n + j]);
        let eig = m.eigenvalues().unwrap();
        let mut moduli: Vec<(f64, f64)> = eig.iter().map(|z| ((z.re - 1.0).hypot(z.im), z.re.hypot(z.im))).collect();
        moduli.sort_by(|a, b| a.0.total_cmp(&b.0));
        prop_assert!(moduli[0].0 < 1e-9, "no Perron eigenvalue near 1");
        for &(_, modulus) in &moduli[1..] {
            prop_assert!(modulus <= tau + 1e-9, "|lambda| = {} > tau = {}", modulus, tau);
        }
    }

    #[test]
    fn kendall_matches_brute_force(
        x in prop::collection::vec(0u8..6, 2..40),
        y in prop::collection::vec(0u8..6, 40),
    ) {
        let x: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let y: Vec<f64> = y[..x.len()].iter().map(|&v| v as f64).collect();
        let oracle = common::kendall_brute(&x, &y);
        match kendall_tau_b(&x, &y) {
            Ok(t) => prop_assert!((t - oracle).abs() <= 1e-12, "{} vs {}", t, oracle),
            Err(_) => prop_assert!(oracle.is_nan()),
        }
    }

    #[test]
    fn kendall_symmetric_and_monotone_invariant(
        x in prop::collection::vec(0u32..1000, 2..60),
        y in prop::collection::vec(0u32..1000, 60),
    ) {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let yf: Vec<f64> = y[..x.len()].iter().map(|&v| v as f64).collect();
        let (Ok(t), Ok(back)) = (kendall_tau_b(&xf, &yf), kendall_tau_b(&yf, &xf)) else {
            return Ok(());
        };
        prop_assert_eq!(t, back);
        let fx: Vec<f64> = xf.iter().map(|v| 2.0 * v + 1.0).collect();
        let gy: Vec<f64> = yf.iter().map(|v| v * v).collect();
        prop_assert!((kendall_tau_b(&fx, &gy).unwrap() - t).abs() <= 1e-15);
    }

    #[test]
    fn isim_first_entry_is_binary(perm in Just((0..10).collect::<Vec<u32>>()).prop_shuffle()) {
        let p = RankedList::new((0..10).map(|i| i.to_string()).collect()).unwrap();
        let q = RankedList::new(perm.iter().map(|i| i.to_string()).collect()).unwrap();
        let v = intersection_similarity(&p, &q, 10).unwrap();
        prop_assert!(v[0] == 0.0 || v[0] == 1.0);
        prop_assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn edge_list_round_trip(g in digraph(20, 60)) {
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        if g.edge_count() == 0 {
            prop_assert!(parse_graph(&text, GraphFormat::EdgeList, true).is_err());
            return Ok(());
        }
        let LoadedGraph::Single(back) = parse_graph(&text, GraphFormat::EdgeList, true).unwrap().graph else {
            panic!("edge list parsed as multilayer");
        };
        let mut a = g.to_edge_list();
        let mut b = back.to_edge_list();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }
}
