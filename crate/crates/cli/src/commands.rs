use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nonlocal_pagerank::analysis::{
    ergodicity_sweep, intersection_similarity, kendall_sweep, kendall_tau, metro_rankings, pagerank_profiles,
    perturbed_cycle, RankedList,
};
use nonlocal_pagerank::distance::{graph_distance, metro_distance, shortest_path_all_pairs};
use nonlocal_pagerank::io::{
    read_graph, read_ranks, read_teleport, read_usage, usage_ranking, write_ergodicity_csv, write_isim_csv,
    write_kendall_csv, write_linkpred_csv, write_profiles_csv, write_ranks, Loaded, LoadedGraph,
};
use nonlocal_pagerank::linkpred::{run_trials, summarize, CvGrid, Scoring, SplitSpec};
use nonlocal_pagerank::solver::{pagerank, pagerank_with_distance, PageRankSpec, SolverOptions, StationaryMethod};
use nonlocal_pagerank::{DistanceMethod, SmoothingFamily, SmoothingKind};

use crate::{
    Command, CompareArgs, DistanceArgs, ErgodicityArgs, GraphInput, KendallSweepArgs, LinkpredArgs, MetricArg,
    MetroRankArgs, PagerankArgs, PerturbCycleArgs, UsageError,
};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Pagerank(a) => pagerank_cmd(a),
        Command::Distance(a) => distance_cmd(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Ergodicity(a) => ergodicity_cmd(a),
        Command::KendallSweep(a) => kendall_sweep_cmd(a),
        Command::Linkpred(a) => linkpred_cmd(a),
        Command::PerturbCycle(a) => perturb_cycle_cmd(a),
        Command::MetroRank(a) => metro_rank_cmd(a),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Buffered writer to `path`, or stdout.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn load(input: &GraphInput) -> Result<Loaded> {
    let loaded = read_graph(&input.graph, input.format.map(Into::into), !input.undirected)
        .with_context(|| format!("reading {}", input.graph.display()))?;
    if loaded.self_loops_dropped > 0 {
        eprintln!("note: dropped {} self-loop(s)", loaded.self_loops_dropped);
    }
    Ok(loaded)
}

fn pagerank_cmd(a: PagerankArgs) -> Result<()> {
    let method = a.distance.method();
    let f = match (method, a.alpha) {
        (Some(_), Some(alpha)) => Some(SmoothingFamily::new(a.smoothing.into(), alpha)?),
        (Some(_), None) => return Err(usage("--alpha is required with a nonlocal --distance")),
        (None, Some(_)) => return Err(usage("--alpha needs --distance sp, log or metro")),
        (None, None) => None,
    };
    let loaded = load(&a.input)?;
    let n = match &loaded.graph {
        LoadedGraph::Single(g) => g.n(),
        LoadedGraph::Multilayer(m) => m.n(),
    };
    let teleport = match &a.teleport {
        Some(p) => Some(read_teleport(File::open(p).with_context(|| format!("opening {}", p.display()))?, n)?),
        None => None,
    };
    let solver = SolverOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        method: if a.dense_solve { StationaryMethod::DenseSolve } else { StationaryMethod::PowerIteration },
        start: None,
    };
    let mut spec = match (method, f) {
        (Some(m), Some(f)) => PageRankSpec::nonlocal(a.c, m, f),
        _ => PageRankSpec::local(a.c),
    };
    spec.teleport = teleport;
    spec.solver = solver;
    let ranks = match (&loaded.graph, method) {
        (LoadedGraph::Multilayer(m), Some(DistanceMethod::Metro)) => {
            pagerank_with_distance(m.labels().to_vec(), &metro_distance(m)?, &spec)?
        }
        (LoadedGraph::Single(_), Some(DistanceMethod::Metro)) => {
            return Err(usage("--distance metro needs a multilayer `src dst layer` graph"))
        }
        (g, _) => pagerank(&g.as_digraph(), &spec)?,
    };
    write_ranks(&ranks, sink(a.out.as_deref())?)?;
    Ok(())
}

fn distance_cmd(a: DistanceArgs) -> Result<()> {
    let input = GraphInput { graph: a.input.clone(), format: a.format, undirected: a.undirected };
    let loaded = load(&input)?;
    let method: DistanceMethod = a.method.into();
    let (dm, labels) = match (&loaded.graph, method) {
        (LoadedGraph::Multilayer(m), DistanceMethod::Metro) => (metro_distance(m)?, m.labels().to_vec()),
        (LoadedGraph::Single(_), DistanceMethod::Metro) => {
            return Err(usage("--method metro needs a multilayer `src dst layer` graph"))
        }
        (g, m) => {
            let g = g.as_digraph();
            (graph_distance(&g, m)?, g.labels().to_vec())
        }
    };
    let out = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    if a.csv || a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        dm.write_csv(out, Some(&labels))?;
    } else {
        dm.write_binary(out)?;
    }
    Ok(())
}

fn read_rank_file(p: &PathBuf) -> Result<nonlocal_pagerank::RankVector> {
    let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
    read_ranks(f).with_context(|| format!("reading {}", p.display()))
}

fn compare_cmd(a: CompareArgs) -> Result<()> {
    let ra = read_rank_file(&a.a)?;
    let rb = read_rank_file(&a.b)?;
    let mut out = io::stdout().lock();
    match a.metric {
        MetricArg::Kendall => {
            if a.k.is_some() {
                return Err(usage("--k applies to --metric isim only"));
            }
            writeln!(out, "{}", kendall_tau(&ra, &rb)?)?;
        }
        MetricArg::Isim => {
            let (p, q) = (RankedList::from_rank_vector(&ra), RankedList::from_rank_vector(&rb));
            let k = a.k.unwrap_or(p.len().min(q.len()));
            if k == 0 || k > p.len().min(q.len()) {
                return Err(usage(format!("--k must lie in 1..={}", p.len().min(q.len()))));
            }
            writeln!(out, "k,isim")?;
            for (i, v) in intersection_similarity(&p, &q, k)?.iter().enumerate() {
                writeln!(out, "{},{}", i + 1, v)?;
            }
        }
    }
    Ok(())
}

fn ergodicity_cmd(a: ErgodicityArgs) -> Result<()> {
    let g = load(&a.input)?.graph.as_digraph();
    let rows = ergodicity_sweep(&g, &a.alphas.0, a.smoothing.into(), a.c)?;
    write_ergodicity_csv(&rows, sink(a.out.as_deref())?)?;
    Ok(())
}

fn kendall_sweep_cmd(a: KendallSweepArgs) -> Result<()> {
    let method: DistanceMethod = a.distance.into();
    if method == DistanceMethod::Metro {
        return Err(usage("kendall-sweep supports --distance sp or log"));
    }
    let g = load(&a.input)?.graph.as_digraph();
    let kinds: Vec<SmoothingKind> = a.smoothing.iter().map(|&s| s.into()).collect();
    let rows = kendall_sweep(&g, method, &kinds, &a.alphas.0, a.c)?;
    write_kendall_csv(&rows, sink(a.out.as_deref())?)?;
    Ok(())
}

fn linkpred_cmd(a: LinkpredArgs) -> Result<()> {
    let method: DistanceMethod = a.distance.into();
    if method == DistanceMethod::Metro {
        return Err(usage("linkpred supports --distance sp or log"));
    }
    let g = load(&a.input)?.graph.as_digraph();
    let mut grid = CvGrid { folds: a.folds as usize, trials: a.trials as usize, ..CvGrid::default() };
    if let Some(c) = a.grid_c {
        grid.c_values = c.0;
    }
    if let Some(al) = a.grid_alpha {
        grid.alpha_values = al.0;
    }
    let split = SplitSpec::new(a.fraction, a.seed)?;
    let scoring = Scoring { distance: method, smoothing: a.smoothing.into() };
    let results = run_trials(&g, &grid, &split, &scoring)?;
    write_linkpred_csv(&results, &summarize(&results), sink(a.out.as_deref())?)?;
    Ok(())
}

fn perturb_cycle_cmd(a: PerturbCycleArgs) -> Result<()> {
    let n = a.n as usize;
    let (from, to) = a.chord;
    if from > n || to > n {
        return Err(usage(format!("chord endpoints must lie in 1..={n}")));
    }
    let g = perturbed_cycle(n, from - 1, to - 1)?;
    let dm = shortest_path_all_pairs(&g)?;
    let mut profiles = pagerank_profiles(&g, &dm, DistanceMethod::ShortestPath, a.smoothing.into(), &a.alphas.0, a.c)?;
    // 1-based node numbers in the output, matching --chord
    for p in &mut profiles {
        let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        p.ranks = nonlocal_pagerank::RankVector::new(labels, p.ranks.scores().to_vec())?
            .with_meta(p.ranks.alpha(), p.ranks.meta().cloned().expect("pipeline output carries metadata"));
    }
    write_profiles_csv(&profiles, sink(a.out.as_deref())?)?;
    Ok(())
}

fn data_path(explicit: Option<PathBuf>, file: &str, flag: &str) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p);
    }
    match std::env::var_os("NLPR_DATA_DIR") {
        Some(dir) => Ok(PathBuf::from(dir).join(file)),
        None => Err(usage(format!("{flag} not given and NLPR_DATA_DIR is unset"))),
    }
}

fn metro_rank_cmd(a: MetroRankArgs) -> Result<()> {
    if a.k == 0 {
        return Err(usage("--k must be positive"));
    }
    let graph = data_path(a.graph, "tube.tsv", "--graph")?;
    let usage_path = data_path(a.usage, "tube_usage.csv", "--usage")?;
    let loaded = read_graph(&graph, None, false).with_context(|| format!("reading {}", graph.display()))?;
    let LoadedGraph::Multilayer(m) = loaded.graph else {
        bail!("{} is not a multilayer `src dst layer` file", graph.display());
    };
    let records = read_usage(File::open(&usage_path).with_context(|| format!("opening {}", usage_path.display()))?)?;
    let truth_rows = usage_ranking(&records, a.year, Some(m.labels()));
    if truth_rows.is_empty() {
        bail!("no usage rows for year {} match the network's stations", a.year);
    }
    let truth = RankedList::new(truth_rows.iter().map(|r| r.0.clone()).collect())?;
    let ranks = metro_rankings(&m, a.smoothing.into(), a.alpha, a.c)?;
    let k = a.k.min(truth.len());
    let table = ranks.isim(&truth, k)?;
    write_isim_csv(&table.sp, &table.metro, &table.local, sink(a.out.as_deref())?)?;
    if let Some(p) = a.ranks_out {
        write_ranks(&ranks.metro, File::create(&p).with_context(|| format!("creating {}", p.display()))?)?;
    }
    Ok(())
}
