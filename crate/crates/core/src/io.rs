//! Graph, rank, teleport and usage file formats, plus the CSV tables emitted
//! for plotting.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::analysis::{ErgodicityRow, KendallRow, Profile};
use crate::error::{Error, Result};
use crate::graph::{Digraph, MultilayerGraph};
use crate::linkpred::{Summary, TrialResult};
use crate::solver::RankVector;
use crate::transition::validate_distribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    /// `src dst [weight]` per line.
    EdgeList,
    /// `src dst layer` per line.
    Multilayer,
    /// Matrix Market coordinate format, 1-based.
    MatrixMarket,
}

impl std::str::FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edgelist" | "edges" => Ok(GraphFormat::EdgeList),
            "multilayer" => Ok(GraphFormat::Multilayer),
            "mtx" | "matrix-market" => Ok(GraphFormat::MatrixMarket),
            other => Err(Error::InvalidParameter(format!("unknown graph format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum LoadedGraph {
    Single(Digraph),
    Multilayer(MultilayerGraph),
}

impl LoadedGraph {
    /// The graph itself, or the aggregate of a multilayer graph.
    pub fn as_digraph(&self) -> Digraph {
        match self {
            LoadedGraph::Single(g) => g.clone(),
            LoadedGraph::Multilayer(m) => m.aggregate(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub graph: LoadedGraph,
    pub self_loops_dropped: usize,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            None
        } else {
            Some((i + 1, t.split_whitespace().collect()))
        }
    })
}

fn detect(path: &Path, text: &str) -> GraphFormat {
    let is_mtx = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx"))
        || text.trim_start().starts_with("%%MatrixMarket");
    if is_mtx {
        return GraphFormat::MatrixMarket;
    }
    match data_lines(text).next() {
        Some((_, cols)) if cols.len() == 3 && cols[2].parse::<f64>().is_err() => GraphFormat::Multilayer,
        _ => GraphFormat::EdgeList,
    }
}

/// Reads a graph, auto-detecting the format unless `hint` is given.
/// `directed = false` inserts both orientations of every edge-list row;
/// multilayer input is always undirected.
pub fn read_graph(path: impl AsRef<Path>, hint: Option<GraphFormat>, directed: bool) -> Result<Loaded> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_graph(&text, hint.unwrap_or_else(|| detect(path, &text)), directed)
}

pub fn parse_graph(text: &str, format: GraphFormat, directed: bool) -> Result<Loaded> {
    match format {
        GraphFormat::EdgeList => parse_edge_list(text, directed),
        GraphFormat::Multilayer => parse_multilayer(text),
        GraphFormat::MatrixMarket => parse_matrix_market(text),
    }
}

fn parse_edge_list(text: &str, directed: bool) -> Result<Loaded> {
    let mut pairs = Vec::new();
    let mut weighted = Vec::new();
    for (line, cols) in data_lines(text) {
        match cols.as_slice() {
            [a, b] => pairs.push((a.to_string(), b.to_string())),
            [a, b, w] => {
                let w: f64 =
                    w.parse().map_err(|_| Error::Parse { line, msg: format!("weight {w:?} is not a number") })?;
                weighted.push((a.to_string(), b.to_string(), w));
            }
            _ => return Err(Error::Parse { line, msg: format!("expected 2 or 3 columns, got {}", cols.len()) }),
        }
        if !pairs.is_empty() && !weighted.is_empty() {
            return Err(Error::Parse { line, msg: "mixed weighted and unweighted rows".into() });
        }
    }
    let (graph, self_loops_dropped) = if weighted.is_empty() {
        Digraph::from_edge_list(&pairs, directed)?
    } else {
        Digraph::from_weighted_edge_list(&weighted, directed)?
    };
    Ok(Loaded { graph: LoadedGraph::Single(graph), self_loops_dropped })
}

fn parse_multilayer(text: &str) -> Result<Loaded> {
    let mut rows = Vec::new();
    for (line, cols) in data_lines(text) {
        match cols.as_slice() {
            [a, b, l] => rows.push((a.to_string(), b.to_string(), l.to_string())),
            _ => {
                return Err(Error::Parse { line, msg: format!("expected `src dst layer`, got {} columns", cols.len()) })
            }
        }
    }
    let (m, self_loops_dropped) = MultilayerGraph::from_triples(&rows)?;
    Ok(Loaded { graph: LoadedGraph::Multilayer(m), self_loops_dropped })
}

fn parse_matrix_market(text: &str) -> Result<Loaded> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::EmptyEdgeList)?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse { line: 1, msg: "missing %%MatrixMarket matrix header".into() });
    }
    if tokens[2] != "coordinate" {
        return Err(Error::Parse { line: 1, msg: format!("unsupported layout {:?}", tokens[2]) });
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" | "skew-symmetric" | "hermitian" => true,
        other => return Err(Error::Parse { line: 1, msg: format!("unsupported symmetry {other:?}") }),
    };
    let mut size: Option<usize> = None;
    let mut edges = Vec::new();
    let mut loops = 0;
    for (i, raw) in lines {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let cols: Vec<&str> = t.split_whitespace().collect();
        let index = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse { line, msg: format!("bad index {s:?}") });
        let Some(n) = size else {
            if cols.len() != 3 {
                return Err(Error::Parse { line, msg: "expected `rows cols entries` size line".into() });
            }
            let (r, c) = (index(cols[0])?, index(cols[1])?);
            if r != c {
                return Err(Error::Parse { line, msg: format!("adjacency matrix must be square, got {r}x{c}") });
            }
            size = Some(r);
            continue;
        };
        if cols.len() < 2 {
            return Err(Error::Parse { line, msg: "expected `row col [value]`".into() });
        }
        let (r, c) = (index(cols[0])?, index(cols[1])?);
        if r == 0 || c == 0 || r > n || c > n {
            return Err(Error::Parse { line, msg: format!("index ({r}, {c}) outside 1..={n}") });
        }
        if r == c {
            loops += 1;
            continue;
        }
        edges.push((r - 1, c - 1));
        if symmetric {
            edges.push((c - 1, r - 1));
        }
    }
    let n = size.ok_or(Error::EmptyEdgeList)?;
    if n == 0 {
        return Err(Error::EmptyEdgeList);
    }
    let labels = (1..=n).map(|i| i.to_string()).collect();
    let g = Digraph::with_labels(labels, edges)?;
    Ok(Loaded { graph: LoadedGraph::Single(g), self_loops_dropped: loops })
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains(char::is_whitespace) || label.starts_with('#') || label.starts_with('%') {
        return Err(Error::InvalidParameter(format!("label {label:?} cannot be written as an edge-list token")));
    }
    Ok(())
}

/// Tab-separated edge list; a third column carries weights when present.
/// Nodes without edges are not representable and are lost.
pub fn write_graph<W: Write>(g: &Digraph, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    for l in g.labels() {
        check_label(l)?;
    }
    for (i, j) in g.edges() {
        match g.weight(i, j).filter(|_| g.is_weighted()) {
            Some(x) => writeln!(w, "{}\t{}\t{}", g.label(i), g.label(j), x)?,
            None => writeln!(w, "{}\t{}", g.label(i), g.label(j))?,
        }
    }
    w.flush()?;
    Ok(())
}

/// `src dst layer` rows, one per undirected layer edge.
pub fn write_multilayer<W: Write>(m: &MultilayerGraph, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    for l in m.labels().iter().chain(m.layer_names()) {
        check_label(l)?;
    }
    for l in 0..m.k() {
        for &(i, j) in m.layer_edges(l) {
            writeln!(w, "{}\t{}\t{}", m.labels()[i], m.labels()[j], m.layer_names()[l])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `label,score,rank`, best first.
pub fn write_ranks<W: Write>(r: &RankVector, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["label", "score", "rank"])?;
    for (pos, i) in r.order().into_iter().enumerate() {
        out.write_record([r.labels()[i].as_str(), &r.scores()[i].to_string(), &(pos + 1).to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_ranks<R: Read>(r: R) -> Result<RankVector> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column {name:?}") })
    };
    let (li, si) = (col("label")?, col("score")?);
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let label = rec.get(li).ok_or_else(|| Error::Parse { line, msg: "missing label".into() })?;
        let score = rec
            .get(si)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Parse { line, msg: "missing or malformed score".into() })?;
        labels.push(label.to_string());
        scores.push(score);
    }
    if labels.is_empty() {
        return Err(Error::Parse { line: 1, msg: "no rank rows".into() });
    }
    RankVector::new(labels, scores)
}

/// One nonnegative weight per line, in node order; normalized to sum 1.
pub fn read_teleport<R: Read>(r: R, n: usize) -> Result<Vec<f64>> {
    let mut v = Vec::with_capacity(n);
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let x: f64 =
            t.parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("weight {t:?} is not a number") })?;
        v.push(x);
    }
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if v.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidDistribution("teleport weights must be nonnegative".into()));
    }
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidDistribution("teleport weights sum to zero".into()));
    }
    for x in &mut v {
        *x /= total;
    }
    validate_distribution(&v, n)?;
    Ok(v)
}

/// `station,year,passengers` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageRecord {
    pub station: String,
    pub year: i32,
    pub passengers: f64,
}

pub fn read_usage<R: Read>(r: R) -> Result<Vec<UsageRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let bad = |what: &str| Error::Parse { line, msg: format!("malformed {what}") };
        let station = rec.get(0).ok_or_else(|| bad("station"))?.trim().to_string();
        let year = rec.get(1).and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("year"))?;
        let passengers = rec.get(2).and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("passengers"))?;
        out.push(UsageRecord { station, year, passengers });
    }
    Ok(out)
}

/// Stations of `year` by descending passengers (ties by station name),
/// restricted to `known` labels when given.
pub fn usage_ranking(records: &[UsageRecord], year: i32, known: Option<&[String]>) -> Vec<(String, f64)> {
    let keep: Option<std::collections::HashSet<&str>> = known.map(|k| k.iter().map(String::as_str).collect());
    let mut by_station: HashMap<&str, f64> = HashMap::new();
    for r in records.iter().filter(|r| r.year == year) {
        if keep.as_ref().is_none_or(|k| k.contains(r.station.as_str())) {
            *by_station.entry(r.station.as_str()).or_default() += r.passengers;
        }
    }
    let mut out: Vec<(String, f64)> = by_station.into_iter().map(|(s, p)| (s.to_string(), p)).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

fn fmt_alpha(alpha: Option<f64>) -> String {
    alpha.map_or_else(|| "inf".to_string(), |a| a.to_string())
}

/// `alpha,smoothing,tau`.
pub fn write_kendall_csv<W: Write>(rows: &[KendallRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["alpha", "smoothing", "tau"])?;
    for r in rows {
        out.write_record([r.alpha.to_string(), r.smoothing.name().to_string(), r.tau.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `alpha,smoothing,tau_alpha,tau_local,difference`.
pub fn write_ergodicity_csv<W: Write>(rows: &[ErgodicityRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["alpha", "smoothing", "tau_alpha", "tau_local", "difference"])?;
    for r in rows {
        out.write_record([
            r.alpha.to_string(),
            r.smoothing.name().to_string(),
            r.tau_alpha.to_string(),
            r.tau_local.to_string(),
            r.difference().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `node,alpha,score`; the local profile is written with `alpha = inf`.
pub fn write_profiles_csv<W: Write>(profiles: &[Profile], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["node", "alpha", "score"])?;
    for p in profiles {
        let alpha = fmt_alpha(p.alpha);
        for (label, score) in p.ranks.labels().iter().zip(p.ranks.scores()) {
            out.write_record([label.as_str(), &alpha, &score.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `k,isim_sp,isim_metro,isim_local`; the three columns must share a length.
pub fn write_isim_csv<W: Write>(sp: &[f64], metro: &[f64], local: &[f64], w: W) -> Result<()> {
    if sp.len() != metro.len() || sp.len() != local.len() {
        return Err(Error::DimensionMismatch { expected: sp.len(), got: metro.len().min(local.len()) });
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k", "isim_sp", "isim_metro", "isim_local"])?;
    for k in 0..sp.len() {
        out.write_record([(k + 1).to_string(), sp[k].to_string(), metro[k].to_string(), local[k].to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `trial,method,c,alpha,accuracy`, then one `q1`/`median`/`q3` row per method.
pub fn write_linkpred_csv<W: Write>(results: &[TrialResult], summary: &[Summary], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["trial", "method", "c", "alpha", "accuracy"])?;
    for r in results {
        out.write_record([
            r.trial.to_string(),
            r.method.name().to_string(),
            r.c.to_string(),
            r.alpha.map(|a| a.to_string()).unwrap_or_default(),
            r.accuracy.to_string(),
        ])?;
    }
    for s in summary {
        for (tag, v) in [("q1", s.q1), ("median", s.median), ("q3", s.q3)] {
            out.write_record([tag, s.method.name(), "", "", &v.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}
