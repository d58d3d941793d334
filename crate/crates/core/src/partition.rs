//! Node partitions and per-community degree/link tallies.

use std::collections::HashMap;
use std::fs::File;
use std::hash::Hash;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Assignment of every node to exactly one of `q` non-empty communities
/// with dense ids `0..q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    q: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let q = assignment.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; q];
        for &c in &assignment {
            seen[c] = true;
        }
        if let Some(empty) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("community {empty} is empty")));
        }
        Ok(Partition { assignment, q })
    }

    /// Dense ids assigned in order of first appearance.
    pub fn from_labels<T: Eq + Hash + Clone>(labels: &[T]) -> Self {
        let mut ids: HashMap<T, usize> = HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l.clone()).or_insert(next)
            })
            .collect();
        Partition { assignment, q: ids.len() }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            q: n,
        }
    }

    pub fn whole(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            q: usize::from(n > 0),
        }
    }

    /// Renumbers communities by first appearance. Two partitions describe the
    /// same grouping iff their canonical forms are equal.
    pub fn canonical(&self) -> Partition {
        Partition::from_labels(&self.assignment)
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_count(&self) -> usize {
        self.q
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.q];
        for (node, &c) in self.assignment.iter().enumerate() {
            out[c].push(node);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.q];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub(crate) fn ensure_covers(&self, graph: &Graph) -> Result<()> {
        if self.node_count() != graph.node_count() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} nodes but graph has {}",
                self.node_count(),
                graph.node_count()
            )));
        }
        Ok(())
    }
}

/// Reads a `node_label community_label` file against `graph`.
pub fn load_partition(path: impl AsRef<Path>, graph: &Graph) -> Result<Partition> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_partition(BufReader::new(file), graph, path)
}

pub fn read_partition<R: BufRead>(reader: R, graph: &Graph, source: impl AsRef<Path>) -> Result<Partition> {
    let source = source.as_ref();
    let mut community: Vec<Option<String>> = vec![None; graph.node_count()];
    let mut order: Vec<usize> = Vec::with_capacity(graph.node_count());
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
        let node = graph.node_index(tokens[0]).ok_or_else(|| {
            Error::parse(source, lineno + 1, format!("node '{}' is not in the graph", tokens[0]))
        })?;
        if community[node].is_some() {
            return Err(Error::parse(
                source,
                lineno + 1,
                format!("duplicate assignment for node '{}'", tokens[0]),
            ));
        }
        community[node] = Some(tokens[1].to_owned());
        order.push(node);
    }
    if let Some(missing) = community.iter().position(Option::is_none) {
        return Err(Error::UncoveredNode(graph.label(missing).to_owned()));
    }
    // Dense ids follow first appearance in the file, not node order.
    let mut ids: HashMap<&str, usize> = HashMap::new();
    for &node in &order {
        let next = ids.len();
        ids.entry(community[node].as_deref().unwrap()).or_insert(next);
    }
    let assignment = community
        .iter()
        .map(|c| ids[c.as_deref().unwrap()])
        .collect();
    Ok(Partition {
        assignment,
        q: ids.len(),
    })
}

/// Writes `label<TAB>community_id`, one line per node in index order.
pub fn write_partition<W: Write>(graph: &Graph, partition: &Partition, mut out: W) -> std::io::Result<()> {
    for (node, &c) in partition.assignment().iter().enumerate() {
        writeln!(out, "{}\t{}", graph.label(node), c)?;
    }
    Ok(())
}

/// Per-community degrees and the community-level link matrix.
///
/// Undirected: `out_degree[r] = in_degree[r] = d_r`, `links[r][r]` is the
/// internal stub count (twice the internal edges), `links[r][s]` for `r != s`
/// counts crossing edges and is symmetric. Directed: `links[r][s]` counts
/// arrows from `r` to `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCounts {
    pub q: usize,
    pub directed: bool,
    pub out_degree: Vec<u64>,
    pub in_degree: Vec<u64>,
    links: Vec<u64>,
}

impl BlockCounts {
    pub fn tally(graph: &Graph, partition: &Partition) -> Result<Self> {
        partition.ensure_covers(graph)?;
        let q = partition.community_count();
        let directed = graph.is_directed();
        let mut out_degree = vec![0u64; q];
        let mut in_degree = vec![0u64; q];
        let mut links = vec![0u64; q * q];
        for &(u, v) in graph.edges() {
            let (r, s) = (partition.community_of(u), partition.community_of(v));
            out_degree[r] += 1;
            in_degree[s] += 1;
            if directed {
                links[r * q + s] += 1;
            } else {
                out_degree[s] += 1;
                in_degree[r] += 1;
                if r == s {
                    links[r * q + r] += 2;
                } else {
                    links[r * q + s] += 1;
                    links[s * q + r] += 1;
                }
            }
        }
        Ok(BlockCounts {
            q,
            directed,
            out_degree,
            in_degree,
            links,
        })
    }

    pub fn links(&self, r: usize, s: usize) -> u64 {
        self.links[r * self.q + s]
    }

    /// `d_V` for undirected graphs, `i_V` (arrow count) for directed ones.
    pub fn population(&self) -> u64 {
        self.in_degree.iter().sum()
    }
}
