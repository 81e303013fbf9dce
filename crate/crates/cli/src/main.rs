//! `nlpr`: command-line front end for nonlocal PageRank.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on usage errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nonlocal_pagerank::io::GraphFormat;
use nonlocal_pagerank::{DistanceMethod, SmoothingKind};

#[derive(Debug, Parser)]
#[command(name = "nlpr", version, about = "Nonlocal PageRank toolkit")]
pub struct Cli {
    /// Largest node count allowed for dense n x n matrices.
    #[arg(long, global = true, value_name = "N")]
    pub max_dense: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Local or nonlocal PageRank of a graph, written as `label,score,rank`.
    Pagerank(PagerankArgs),
    /// All-pairs distance matrix (binary, or CSV with `--csv`).
    Distance(DistanceArgs),
    /// Compare two rank files by Kendall tau-b or intersection similarity.
    Compare(CompareArgs),
    /// Ergodicity coefficient of nonlocal vs local Google matrices per alpha.
    Ergodicity(ErgodicityArgs),
    /// Kendall tau between nonlocal and local PageRank per (smoothing, alpha).
    KendallSweep(KendallSweepArgs),
    /// Link-prediction trials with grid cross-validation of (alpha, c).
    Linkpred(LinkpredArgs),
    /// PageRank profiles of an undirected cycle with one added directed chord.
    PerturbCycle(PerturbCycleArgs),
    /// Metro-distance PageRank of a multilayer network against usage data.
    MetroRank(MetroRankArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    None,
    Sp,
    Log,
    Metro,
}

impl DistanceArg {
    pub fn method(self) -> Option<DistanceMethod> {
        match self {
            DistanceArg::None => None,
            DistanceArg::Sp => Some(DistanceMethod::ShortestPath),
            DistanceArg::Log => Some(DistanceMethod::Logarithmic),
            DistanceArg::Metro => Some(DistanceMethod::Metro),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Sp,
    Log,
    Metro,
}

impl From<MethodArg> for DistanceMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sp => DistanceMethod::ShortestPath,
            MethodArg::Log => DistanceMethod::Logarithmic,
            MethodArg::Metro => DistanceMethod::Metro,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SmoothingArg {
    Power,
    Exp,
}

impl From<SmoothingArg> for SmoothingKind {
    fn from(s: SmoothingArg) -> Self {
        match s {
            SmoothingArg::Power => SmoothingKind::PowerLaw,
            SmoothingArg::Exp => SmoothingKind::Exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Edgelist,
    Multilayer,
    Mtx,
}

impl From<FormatArg> for GraphFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Edgelist => GraphFormat::EdgeList,
            FormatArg::Multilayer => GraphFormat::Multilayer,
            FormatArg::Mtx => GraphFormat::MatrixMarket,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Kendall,
    Isim,
}

#[derive(Debug, Args)]
pub struct GraphInput {
    /// Graph file: edge list, multilayer `src dst layer`, or Matrix Market.
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Override format auto-detection.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Insert both orientations of every edge-list row.
    #[arg(long)]
    pub undirected: bool,
}

#[derive(Debug, Args)]
pub struct PagerankArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// Distance for the nonlocal walk; `none` is classical PageRank.
    #[arg(long, value_enum, default_value = "none")]
    pub distance: DistanceArg,
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "power")]
    pub smoothing: SmoothingArg,
    /// Teleportation factor in (0, 1].
    #[arg(long, value_parser = parse_c_closed, default_value = "0.85")]
    pub c: f64,
    /// Teleport distribution: one nonnegative weight per line, node order.
    #[arg(long, value_name = "FILE")]
    pub teleport: Option<PathBuf>,
    #[arg(long, value_parser = parse_positive, default_value = "1e-12")]
    pub tol: f64,
    #[arg(long, default_value = "10000")]
    pub max_iter: usize,
    /// Solve the stationary system directly instead of power iteration.
    #[arg(long)]
    pub dense_solve: bool,
    /// Output CSV; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub undirected: bool,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Write CSV with an `inf` literal instead of the binary format.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_name = "RANKS.csv")]
    pub a: PathBuf,
    #[arg(long, value_name = "RANKS.csv")]
    pub b: PathBuf,
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    /// Longest prefix for ISIM; defaults to the list length.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ErgodicityArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[arg(long, value_parser = parse_alpha_list)]
    pub alphas: AlphaList,
    #[arg(long, value_enum, default_value = "power")]
    pub smoothing: SmoothingArg,
    #[arg(long, value_parser = parse_c_closed, default_value = "0.85")]
    pub c: f64,
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KendallSweepArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[arg(long, value_parser = parse_alpha_list)]
    pub alphas: AlphaList,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "power,exp")]
    pub smoothing: Vec<SmoothingArg>,
    #[arg(long, value_enum, default_value = "sp")]
    pub distance: MethodArg,
    #[arg(long, value_parser = parse_c_closed, default_value = "0.85")]
    pub c: f64,
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LinkpredArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[arg(long, value_parser = parse_open_unit, default_value = "0.1")]
    pub fraction: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value = "15")]
    pub trials: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..), default_value = "10")]
    pub folds: u64,
    #[arg(long, value_parser = parse_c_list)]
    pub grid_c: Option<AlphaList>,
    #[arg(long, value_parser = parse_positive_list)]
    pub grid_alpha: Option<AlphaList>,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "power")]
    pub smoothing: SmoothingArg,
    #[arg(long, value_enum, default_value = "sp")]
    pub distance: MethodArg,
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerturbCycleArgs {
    #[arg(long, default_value = "100", value_parser = clap::value_parser!(u64).range(3..))]
    pub n: u64,
    /// Added directed edge `from,to`, 1-based node numbers.
    #[arg(long, value_parser = parse_chord, default_value = "40,1")]
    pub chord: (usize, usize),
    #[arg(long, value_parser = parse_alpha_list)]
    pub alphas: AlphaList,
    #[arg(long, value_enum, default_value = "power")]
    pub smoothing: SmoothingArg,
    #[arg(long, value_parser = parse_c_closed, default_value = "0.85")]
    pub c: f64,
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetroRankArgs {
    /// Multilayer `src dst layer` file; defaults to `$NLPR_DATA_DIR/tube.tsv`.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// `station,year,passengers` CSV; defaults to `$NLPR_DATA_DIR/tube_usage.csv`.
    #[arg(long, value_name = "CSV")]
    pub usage: Option<PathBuf>,
    #[arg(long, default_value = "2017")]
    pub year: i32,
    #[arg(long, value_parser = parse_alpha, default_value = "1.7")]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "power")]
    pub smoothing: SmoothingArg,
    #[arg(long, value_parser = parse_c_closed, default_value = "0.85")]
    pub c: f64,
    #[arg(long, default_value = "15")]
    pub k: usize,
    /// ISIM table `k,isim_sp,isim_metro,isim_local`; stdout when absent.
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
    /// Also write the metro-distance ranking here.
    #[arg(long, value_name = "CSV")]
    pub ranks_out: Option<PathBuf>,
}

/// Comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaList(pub Vec<f64>);

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("{s:?} is not a number"))
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a = parse_f64(s)?;
    if a >= 0.0 && a.is_finite() {
        Ok(a)
    } else {
        Err(format!("alpha must be finite and >= 0, got {a}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let a = parse_f64(s)?;
    if a > 0.0 && a.is_finite() {
        Ok(a)
    } else {
        Err(format!("expected a positive number, got {a}"))
    }
}

fn parse_c_closed(s: &str) -> Result<f64, String> {
    let c = parse_f64(s)?;
    if c > 0.0 && c <= 1.0 {
        Ok(c)
    } else {
        Err(format!("c must lie in (0, 1], got {c}"))
    }
}

fn parse_open_unit(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("expected a value in (0, 1), got {x}"))
    }
}

fn parse_list(s: &str, each: fn(&str) -> Result<f64, String>) -> Result<AlphaList, String> {
    let v = s.split(',').filter(|t| !t.trim().is_empty()).map(each).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(AlphaList(v))
}

fn parse_alpha_list(s: &str) -> Result<AlphaList, String> {
    parse_list(s, parse_alpha)
}

fn parse_positive_list(s: &str) -> Result<AlphaList, String> {
    parse_list(s, parse_positive)
}

fn parse_c_list(s: &str) -> Result<AlphaList, String> {
    parse_list(s, parse_open_unit)
}

fn parse_chord(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `from,to`, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("{t:?} is not a node number"));
    let (a, b) = (p(a)?, p(b)?);
    if a == 0 || b == 0 || a == b {
        return Err("chord endpoints are distinct 1-based node numbers".into());
    }
    Ok((a, b))
}

/// An error attributable to the invocation rather than the computation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Some(limit) = cli.max_dense {
        nonlocal_pagerank::transition::set_max_dense_nodes(limit);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
