//! Sparse, immutable graphs with string node labels.
//!
//! Nodes are addressed internally by dense indices in label first-appearance
//! order. Undirected edges are stored canonically as `(u, v)` with `u < v`;
//! self-loops are dropped and duplicate edges collapsed at construction.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Counts of edges discarded while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub duplicate_edges: usize,
    pub self_loops: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    directed: bool,
    out_degree: Vec<u64>,
    in_degree: Vec<u64>,
    // Undirected: neighbours. Directed: out-neighbours.
    adjacency: Vec<Vec<usize>>,
}

/// Incremental construction from labelled edges.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    seen: HashSet<(usize, usize)>,
    directed: bool,
    report: IngestReport,
}

impl GraphBuilder {
    pub fn new(directed: bool) -> Self {
        GraphBuilder {
            directed,
            ..Default::default()
        }
    }

    /// Interns `label`, returning its index.
    pub fn add_node(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn add_edge(&mut self, u: &str, v: &str) {
        let u = self.add_node(u);
        let v = self.add_node(v);
        self.add_edge_indices(u, v);
    }

    fn add_edge_indices(&mut self, u: usize, v: usize) {
        if u == v {
            self.report.self_loops += 1;
            return;
        }
        let key = if self.directed || u < v { (u, v) } else { (v, u) };
        if self.seen.insert(key) {
            self.edges.push(key);
        } else {
            self.report.duplicate_edges += 1;
        }
    }

    pub fn build(self) -> (Graph, IngestReport) {
        let graph = Graph::assemble(self.labels, self.index, self.edges, self.directed);
        (graph, self.report)
    }
}

impl Graph {
    /// Builds a graph from labels and index pairs, applying the same
    /// canonicalisation rules as the edge-list loader.
    pub fn from_edges<I>(labels: Vec<String>, edges: I, directed: bool) -> Result<(Graph, IngestReport)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut builder = GraphBuilder::new(directed);
        for label in &labels {
            let before = builder.labels.len();
            if builder.add_node(label) != before {
                return Err(Error::InvalidParameter(format!("duplicate node label '{label}'")));
            }
        }
        let n = labels.len();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            builder.add_edge_indices(u, v);
        }
        Ok(builder.build())
    }

    fn assemble(
        labels: Vec<String>,
        index: HashMap<String, usize>,
        edges: Vec<(usize, usize)>,
        directed: bool,
    ) -> Graph {
        let n = labels.len();
        let mut out_degree = vec![0u64; n];
        let mut in_degree = vec![0u64; n];
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            out_degree[u] += 1;
            in_degree[v] += 1;
            adjacency[u].push(v);
            if !directed {
                out_degree[v] += 1;
                in_degree[u] += 1;
                adjacency[v].push(u);
            }
        }
        Graph {
            labels,
            index,
            edges,
            directed,
            out_degree,
            in_degree,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Edges in insertion order; undirected edges satisfy `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Undirected degree, or out-degree for directed graphs.
    pub fn degree(&self, node: usize) -> u64 {
        self.out_degree[node]
    }

    pub fn in_degree(&self, node: usize) -> u64 {
        self.in_degree[node]
    }

    /// Neighbours (undirected) or out-neighbours (directed).
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }
}

/// Loads a whitespace-separated edge list. Lines starting with `#` and blank
/// lines are ignored.
pub fn load_graph(path: impl AsRef<Path>, directed: bool) -> Result<(Graph, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_edge_list(BufReader::new(file), directed, path)
}

pub fn read_edge_list<R: BufRead>(
    reader: R,
    directed: bool,
    source: impl AsRef<Path>,
) -> Result<(Graph, IngestReport)> {
    let source = source.as_ref();
    let mut builder = GraphBuilder::new(directed);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::parse(
                source,
                lineno + 1,
                format!("expected 2 columns, found {}", tokens.len()),
            ));
        }
        builder.add_edge(tokens[0], tokens[1]);
    }
    let (graph, report) = builder.build();
    if report.duplicate_edges > 0 {
        log::warn!("{}: dropped {} duplicate edge(s)", source.display(), report.duplicate_edges);
    }
    if report.self_loops > 0 {
        log::warn!("{}: dropped {} self-loop(s)", source.display(), report.self_loops);
    }
    Ok((graph, report))
}

/// Writes one `u<TAB>v` line per edge. Isolated nodes are not representable.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W) -> std::io::Result<()> {
    for &(u, v) in graph.edges() {
        writeln!(out, "{}\t{}", graph.label(u), graph.label(v))?;
    }
    Ok(())
}

/// Sum of degrees over `nodes`; for undirected graphs `total_degree(V) = 2|E|`.
/// For directed graphs this is the sum of in- and out-degrees.
pub fn total_degree(graph: &Graph, nodes: &[usize]) -> u64 {
    nodes
        .iter()
        .map(|&i| {
            if graph.directed {
                graph.out_degree[i] + graph.in_degree[i]
            } else {
                graph.out_degree[i]
            }
        })
        .sum()
}

/// `(outdegree, indegree)` of a node set in a directed graph.
pub fn out_in_degree(graph: &Graph, nodes: &[usize]) -> Result<(u64, u64)> {
    if !graph.directed {
        return Err(Error::NotDirected);
    }
    Ok(nodes.iter().fold((0, 0), |(o, i), &n| {
        (o + graph.out_degree[n], i + graph.in_degree[n])
    }))
}

/// Observed links between node sets `a` and `b`.
///
/// Undirected with `a == b` (as sets) counts edge stubs, i.e. twice the number
/// of internal edges. Undirected with disjoint sets counts crossing edges.
/// Directed counts arrows from `a` to `b`.
pub fn observed_links(graph: &Graph, a: &[usize], b: &[usize]) -> Result<u64> {
    let n = graph.node_count();
    let mut in_a = vec![false; n];
    let mut in_b = vec![false; n];
    for &i in a {
        in_a[i] = true;
    }
    for &i in b {
        in_b[i] = true;
    }
    let same = in_a == in_b;
    if !same && in_a.iter().zip(&in_b).any(|(&x, &y)| x && y) {
        return Err(Error::OverlappingSets);
    }
    let mut count = 0u64;
    for &(u, v) in graph.edges() {
        if graph.directed {
            if in_a[u] && in_b[v] {
                count += 1;
            }
        } else if same {
            if in_a[u] && in_a[v] {
                count += 2;
            }
        } else if (in_a[u] && in_b[v]) || (in_b[u] && in_a[v]) {
            count += 1;
        }
    }
    Ok(count)
}

/// Subgraph induced by the labels in `keep` that exist in `graph`. Node order
/// follows the original graph.
pub fn induced_subgraph<'a, I>(graph: &Graph, keep: I) -> Result<Graph>
where
    I: IntoIterator<Item = &'a str>,
{
    let keep: HashSet<&str> = keep.into_iter().collect();
    let mut remap = vec![usize::MAX; graph.node_count()];
    let mut labels = Vec::new();
    for (i, label) in graph.labels.iter().enumerate() {
        if keep.contains(label.as_str()) {
            remap[i] = labels.len();
            labels.push(label.clone());
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let edges = graph
        .edges
        .iter()
        .filter(|&&(u, v)| remap[u] != usize::MAX && remap[v] != usize::MAX)
        .map(|&(u, v)| (remap[u], remap[v]));
    let (sub, _) = Graph::from_edges(labels, edges, graph.directed)?;
    Ok(sub)
}
