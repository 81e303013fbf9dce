//! Graph substrate: loop-less labelled digraphs and undirected multilayer graphs.
//!
//! Node identity is the string label. Internal indices are a private bijection
//! fixed at construction (first-appearance order for edge-list input), so every
//! result keyed by label is stable under reorderings of the input.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};

/// Loop-less directed graph with node labels and optional positive edge weights.
///
/// Out-neighbour lists are kept sorted and deduplicated. An undirected graph is a
/// `Digraph` holding both orientations of every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<usize>>,
    weights: Option<Vec<Vec<f64>>>,
}

/// Out-degree of every node (weight sums for weighted graphs).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector(Vec<f64>);

impl DegreeVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for DegreeVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn build_index(labels: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(index)
}

impl Digraph {
    /// Unweighted digraph on `n` nodes labelled `"0".."n-1"`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::with_labels(default_labels(n), edges)
    }

    /// Unweighted digraph with explicit labels. Duplicate edges collapse.
    pub fn with_labels(labels: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = labels.len();
        let index = build_index(&labels)?;
        let mut adj = vec![Vec::new(); n];
        for (i, j) in edges {
            check_edge(i, j, n)?;
            adj[i].push(j);
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Self { labels, index, adj, weights: None })
    }

    /// Weighted digraph. Every weight must be positive and finite; for duplicate
    /// edges the smallest weight is kept.
    pub fn with_weights(labels: Vec<String>, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let n = labels.len();
        let index = build_index(&labels)?;
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, w) in edges {
            check_edge(i, j, n)?;
            if w < 0.0 {
                return Err(Error::NegativeWeight(w));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidWeight(w));
            }
            rows[i].push((j, w));
        }
        let mut adj = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for mut row in rows {
            row.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            row.dedup_by_key(|e| e.0);
            adj.push(row.iter().map(|e| e.0).collect());
            weights.push(row.iter().map(|e| e.1).collect());
        }
        Ok(Self { labels, index, adj, weights: Some(weights) })
    }

    /// Builds a graph from labelled pairs. Nodes are numbered in first-appearance
    /// order, self-loops are dropped and counted, duplicates collapse. Undirected
    /// input inserts both orientations.
    ///
    /// Returns the graph and the number of dropped self-loops.
    pub fn from_edge_list<S: AsRef<str>>(pairs: &[(S, S)], directed: bool) -> Result<(Self, usize)> {
        if pairs.is_empty() {
            return Err(Error::EmptyEdgeList);
        }
        let mut labels = LabelInterner::default();
        let mut edges = Vec::with_capacity(pairs.len() * if directed { 1 } else { 2 });
        let mut loops = 0;
        for (a, b) in pairs {
            let i = labels.intern(a.as_ref());
            let j = labels.intern(b.as_ref());
            if i == j {
                loops += 1;
                continue;
            }
            edges.push((i, j));
            if !directed {
                edges.push((j, i));
            }
        }
        Ok((Self::with_labels(labels.into_labels(), edges)?, loops))
    }

    /// Weighted counterpart of [`Digraph::from_edge_list`].
    pub fn from_weighted_edge_list<S: AsRef<str>>(triples: &[(S, S, f64)], directed: bool) -> Result<(Self, usize)> {
        if triples.is_empty() {
            return Err(Error::EmptyEdgeList);
        }
        let mut labels = LabelInterner::default();
        let mut edges = Vec::with_capacity(triples.len() * 2);
        let mut loops = 0;
        for (a, b, w) in triples {
            let i = labels.intern(a.as_ref());
            let j = labels.intern(b.as_ref());
            if i == j {
                loops += 1;
                continue;
            }
            edges.push((i, j, *w));
            if !directed {
                edges.push((j, i, *w));
            }
        }
        Ok((Self::with_weights(labels.into_labels(), edges)?, loops))
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Outgoing weights parallel to [`Digraph::out_neighbors`]; `None` when unweighted.
    pub fn out_weights(&self, i: usize) -> Option<&[f64]> {
        self.weights.as_ref().map(|w| w[i].as_slice())
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let pos = self.adj[i].binary_search(&j).ok()?;
        Some(self.weights.as_ref().map_or(1.0, |w| w[i][pos]))
    }

    /// Number of directed edges `m = |E|`.
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// All directed edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, row)| row.iter().map(move |&j| (i, j)))
    }

    /// True when `(i, j) ∈ E` implies `(j, i) ∈ E`.
    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(i, j)| self.has_edge(j, i))
    }

    /// Unordered edges `i < j` of a symmetric graph.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        self.edges().filter(|&(i, j)| i < j).collect()
    }

    pub fn out_degrees(&self) -> DegreeVector {
        let values = match &self.weights {
            Some(w) => w.iter().map(|row| row.iter().sum()).collect(),
            None => self.adj.iter().map(|row| row.len() as f64).collect(),
        };
        DegreeVector(values)
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n();
        if n <= 1 {
            return true;
        }
        let mut reverse = vec![Vec::new(); n];
        for (i, j) in self.edges() {
            reverse[j].push(i);
        }
        reaches_all(&self.adj, 0) && reaches_all(&reverse, 0)
    }

    /// Labelled edge list; inverse of [`Digraph::from_edge_list`] (directed) on
    /// graphs without isolated nodes.
    pub fn to_edge_list(&self) -> Vec<(String, String)> {
        self.edges().map(|(i, j)| (self.labels[i].clone(), self.labels[j].clone())).collect()
    }

    /// Copy of the graph with the given directed edges removed. Labels, node
    /// set and remaining weights are preserved.
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Digraph {
        let drop: HashSet<(usize, usize)> = removed.iter().copied().collect();
        let mut adj = Vec::with_capacity(self.n());
        let mut weights = self.weights.as_ref().map(|_| Vec::with_capacity(self.n()));
        for (i, row) in self.adj.iter().enumerate() {
            let keep: Vec<usize> = (0..row.len()).filter(|&p| !drop.contains(&(i, row[p]))).collect();
            adj.push(keep.iter().map(|&p| row[p]).collect());
            if let (Some(out), Some(src)) = (weights.as_mut(), self.weights.as_ref()) {
                out.push(keep.iter().map(|&p| src[i][p]).collect());
            }
        }
        Digraph { labels: self.labels.clone(), index: self.index.clone(), adj, weights }
    }

    /// Copy of an unweighted graph with extra directed edges added.
    pub fn with_added_edges(&self, added: &[(usize, usize)]) -> Result<Digraph> {
        let edges: Vec<(usize, usize)> = self.edges().chain(added.iter().copied()).collect();
        match &self.weights {
            None => Digraph::with_labels(self.labels.clone(), edges),
            Some(_) => {
                let weighted = edges.into_iter().map(|(i, j)| (i, j, self.weight(i, j).unwrap_or(1.0)));
                Digraph::with_weights(self.labels.clone(), weighted)
            }
        }
    }
}

fn check_edge(i: usize, j: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::NodeOutOfRange { node: i, n });
    }
    if j >= n {
        return Err(Error::NodeOutOfRange { node: j, n });
    }
    if i == j {
        return Err(Error::SelfLoop(i));
    }
    Ok(())
}

fn reaches_all(adj: &[Vec<usize>], start: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == adj.len()
}

#[derive(Default)]
pub(crate) struct LabelInterner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelInterner {
    pub(crate) fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        i
    }

    pub(crate) fn into_labels(self) -> Vec<String> {
        self.labels
    }
}

/// `k` undirected layers over a shared node set.
///
/// Each layer is stored as canonical pairs `i < j`; symmetry holds by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilayerGraph {
    labels: Vec<String>,
    layer_names: Vec<String>,
    layers: Vec<Vec<(usize, usize)>>,
}

impl MultilayerGraph {
    pub fn new(labels: Vec<String>, layer_names: Vec<String>, layers: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let n = labels.len();
        build_index(&labels)?;
        if layer_names.len() != layers.len() {
            return Err(Error::DimensionMismatch { expected: layers.len(), got: layer_names.len() });
        }
        let layers = layers
            .into_iter()
            .map(|edges| {
                let mut canon = Vec::with_capacity(edges.len());
                for (i, j) in edges {
                    check_edge(i, j, n)?;
                    canon.push((i.min(j), i.max(j)));
                }
                canon.sort_unstable();
                canon.dedup();
                Ok(canon)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { labels, layer_names, layers })
    }

    /// Unlabelled convenience constructor: nodes `"0".."n-1"`, layers `"0".."k-1"`.
    pub fn from_layers(n: usize, layers: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let names = default_labels(layers.len());
        Self::new(default_labels(n), names, layers)
    }

    /// Builds from `(src, dst, layer)` rows. Nodes and layers are numbered in
    /// first-appearance order; self-loops are dropped and counted.
    pub fn from_triples<S: AsRef<str>>(rows: &[(S, S, S)]) -> Result<(Self, usize)> {
        if rows.is_empty() {
            return Err(Error::EmptyEdgeList);
        }
        let mut nodes = LabelInterner::default();
        let mut layer_keys = LabelInterner::default();
        let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut loops = 0;
        for (a, b, l) in rows {
            let i = nodes.intern(a.as_ref());
            let j = nodes.intern(b.as_ref());
            let layer = layer_keys.intern(l.as_ref());
            if layer == layers.len() {
                layers.push(Vec::new());
            }
            if i == j {
                loops += 1;
                continue;
            }
            layers[layer].push((i, j));
        }
        Ok((Self::new(nodes.into_labels(), layer_keys.into_labels(), layers)?, loops))
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.layers.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn layer_names(&self) -> &[String] {
        &self.layer_names
    }

    /// Canonical `i < j` edges of layer `l`.
    pub fn layer_edges(&self, l: usize) -> &[(usize, usize)] {
        &self.layers[l]
    }

    /// `membership[l][i]` is true when node `i` has an incident edge in layer `l`.
    pub fn membership(&self) -> Vec<Vec<bool>> {
        self.layers
            .iter()
            .map(|edges| {
                let mut inc = vec![false; self.n()];
                for &(i, j) in edges {
                    inc[i] = true;
                    inc[j] = true;
                }
                inc
            })
            .collect()
    }

    /// Union of all layers as an undirected (symmetric) digraph.
    pub fn aggregate(&self) -> Digraph {
        let edges = self.layers.iter().flatten().flat_map(|&(i, j)| [(i, j), (j, i)]);
        Digraph::with_labels(self.labels.clone(), edges).expect("layers were validated on construction")
    }
}
