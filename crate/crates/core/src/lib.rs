//! Nonlocal PageRank: centrality and link prediction driven by random walks
//! whose jump probabilities decay with graph distance.
//!
//! The pipeline is `graph → distance → transition → solver`, with
//! [`analysis`] for stability and rank-comparison measures and [`linkpred`]
//! for the rooted-similarity link-prediction harness.

pub mod analysis;
pub mod distance;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod linkpred;
pub mod solver;
pub mod transition;

pub use distance::{Dist, DistanceMatrix, DistanceMethod};
pub use error::{Error, Result};
pub use graph::{Digraph, MultilayerGraph};
pub use solver::{pagerank, PageRankSpec, RankVector, SimilarityMatrix};
pub use transition::{GoogleMatrix, SmoothingFamily, SmoothingKind, StochasticMatrix};
