//! Network comparison through relative community structure validation.
//!
//! For a pair of graphs both are reduced to their common nodes, each is
//! clustered with Louvain, small communities are dropped, and each partition
//! is scored on its own graph and on the other one. The ratio of the two
//! scores is the relative index `R(P_i | G_j)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::clustering::{complete_linkage, louvain, Dendrogram, DistanceMatrix};
use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, Graph};
use crate::indices::{csv_report, Alpha};
use crate::partition::Partition;
use crate::rng::{derive_seed, stable_hash};

/// Default strict lower bound on retained community size.
pub const DEFAULT_MIN_SIZE: usize = 5;

/// Index used in the numerator and denominator of the relative index.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    #[default]
    Ucsv,
    Wcsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareOptions {
    pub alpha: Alpha,
    pub min_size: usize,
    pub index: IndexKind,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            alpha: Alpha::default(),
            min_size: DEFAULT_MIN_SIZE,
            index: IndexKind::Ucsv,
        }
    }
}

/// Communities that passed the size filter, restricted to their nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredPartition {
    /// Retained node indices of the original graph, ascending.
    pub nodes: Vec<usize>,
    /// Partition of `nodes` (position `k` describes `nodes[k]`).
    pub partition: Partition,
}

/// Keeps communities with strictly more than `min_size` members.
pub fn filter_small_communities(partition: &Partition, min_size: usize) -> Result<FilteredPartition> {
    if min_size == 0 {
        return Err(Error::InvalidParameter("min_size must be at least 1".into()));
    }
    let sizes = partition.sizes();
    let nodes: Vec<usize> = (0..partition.node_count())
        .filter(|&i| sizes[partition.community_of(i)] > min_size)
        .collect();
    if nodes.is_empty() {
        return Err(Error::NoCommunitiesSurvive(min_size));
    }
    let kept: Vec<usize> = nodes.iter().map(|&i| partition.community_of(i)).collect();
    Ok(FilteredPartition {
        nodes,
        partition: Partition::from_labels(&kept),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeIndex {
    pub value: f64,
    /// The partition scored zero on its own graph; `value` is then 0.
    pub undefined: bool,
    pub own: f64,
    pub other: f64,
}

/// `index(p | g_other) / index(p | g_own)`. Both graphs must carry the same
/// node order, which `p` describes.
pub fn relative_ucsv(
    partition: &Partition,
    own: &Graph,
    other: &Graph,
    alpha: Alpha,
    index: IndexKind,
) -> Result<RelativeIndex> {
    let score = |g: &Graph| -> Result<f64> {
        let report = csv_report(g, partition, alpha)?;
        Ok(match index {
            IndexKind::Ucsv => report.ucsv,
            IndexKind::Wcsv => report.wcsv,
        })
    };
    let own_score = score(own)?;
    let other_score = score(other)?;
    if own_score == 0.0 {
        log::warn!("partition scores 0 on its own graph; relative index undefined");
        return Ok(RelativeIndex {
            value: 0.0,
            undefined: true,
            own: own_score,
            other: other_score,
        });
    }
    Ok(RelativeIndex {
        value: other_score / own_score,
        undefined: false,
        own: own_score,
        other: other_score,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub common_nodes: usize,
    /// Communities kept after filtering, for the first and second graph.
    pub communities: (usize, usize),
    /// `R(P_1 | G_2)`.
    pub r12: RelativeIndex,
    /// `R(P_2 | G_1)`.
    pub r21: RelativeIndex,
}

/// Subgraph of `graph` on `labels`, with nodes in the order of `labels`.
fn reorder(graph: &Graph, labels: &[String]) -> Result<Graph> {
    let sub = induced_subgraph(graph, labels.iter().map(String::as_str))?;
    let position: std::collections::HashMap<&str, usize> =
        labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let edges = sub
        .edges()
        .iter()
        .map(|&(u, v)| (position[sub.label(u)], position[sub.label(v)]));
    Ok(Graph::from_edges(labels.to_vec(), edges, graph.is_directed())?.0)
}

fn restrict(graph: &Graph, nodes: &[usize]) -> Result<Graph> {
    let labels: Vec<String> = nodes.iter().map(|&i| graph.label(i).to_owned()).collect();
    reorder(graph, &labels)
}

/// Compares two graphs on their common nodes. Both graphs are clustered
/// with the same Louvain seed over the common nodes in sorted label order,
/// so swapping the arguments swaps the two relative indices.
pub fn compare_pair(g1: &Graph, g2: &Graph, options: &CompareOptions, seed: u64) -> Result<PairComparison> {
    let mut common: Vec<String> = g1
        .labels()
        .iter()
        .filter(|l| g2.node_index(l).is_some())
        .cloned()
        .collect();
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    common.sort_unstable();
    let h1 = reorder(g1, &common)?;
    let h2 = reorder(g2, &common)?;
    let louvain_seed = derive_seed(seed, &[0]);

    let side = |own: &Graph, other: &Graph| -> Result<(usize, RelativeIndex)> {
        let p = louvain(own, louvain_seed)?;
        let kept = filter_small_communities(&p, options.min_size)?;
        let own_k = restrict(own, &kept.nodes)?;
        let other_k = restrict(other, &kept.nodes)?;
        let r = relative_ucsv(&kept.partition, &own_k, &other_k, options.alpha, options.index)?;
        Ok((kept.partition.community_count(), r))
    };
    let (q1, r12) = side(&h1, &h2)?;
    let (q2, r21) = side(&h2, &h1)?;
    Ok(PairComparison {
        common_nodes: common.len(),
        communities: (q1, q2),
        r12,
        r21,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDetail {
    pub i: usize,
    pub j: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<PairComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonResult {
    pub names: Vec<String>,
    /// `r[i][j] = R(P_i | G_j)`, unit diagonal.
    pub r: Vec<Vec<f64>>,
    /// Entries that are 0 because the pair failed or the ratio was undefined.
    pub undefined: Vec<Vec<bool>>,
    pub s: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub pairs: Vec<PairDetail>,
}

impl ComparisonResult {
    pub fn failed_pairs(&self) -> usize {
        self.pairs.iter().filter(|p| p.error.is_some()).count()
    }

    /// `D` as a distance matrix. Negative distances (possible when some
    /// `R` exceeds 1) are clamped to 0.
    pub fn distance_matrix(&self) -> Result<DistanceMatrix> {
        let rows = self
            .d
            .iter()
            .map(|row| row.iter().map(|&x| x.max(0.0)).collect())
            .collect();
        DistanceMatrix::new(self.names.clone(), rows)
    }

    pub fn dendrogram(&self) -> Result<Dendrogram> {
        complete_linkage(&self.distance_matrix()?)
    }
}

/// `S = (R + R^T) / 2` and `D = 1 - S`.
pub fn similarity_and_distance(r: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = r.len();
    let s: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (r[i][j] + r[j][i]) / 2.0).collect())
        .collect();
    let d = s.iter().map(|row| row.iter().map(|x| 1.0 - x).collect()).collect();
    (s, d)
}

/// Seed for a pair, independent of the order the graphs were given in.
fn pair_seed(seed: u64, a: &str, b: &str) -> u64 {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    derive_seed(seed, &[stable_hash(a), stable_hash(b)])
}

/// All pairwise comparisons. Names must be unique; permuting the input
/// permutes rows and columns of every matrix and nothing else.
pub fn compare_all(graphs: &[(String, Graph)], options: &CompareOptions, seed: u64) -> Result<ComparisonResult> {
    let n = graphs.len();
    if n < 2 {
        return Err(Error::InvalidParameter("comparison needs at least two graphs".into()));
    }
    let names: Vec<String> = graphs.iter().map(|(name, _)| name.clone()).collect();
    let mut sorted = names.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter(format!("duplicate graph name '{}'", w[0])));
    }

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let details: Vec<PairDetail> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let seed = pair_seed(seed, &names[i], &names[j]);
            // run in name order so the result does not depend on input order
            let swap = names[i] > names[j];
            let (a, b) = if swap { (j, i) } else { (i, j) };
            match compare_pair(&graphs[a].1, &graphs[b].1, options, seed) {
                Ok(mut res) => {
                    if swap {
                        std::mem::swap(&mut res.r12, &mut res.r21);
                        res.communities = (res.communities.1, res.communities.0);
                    }
                    PairDetail { i, j, seed, result: Some(res), error: None }
                }
                Err(e) => {
                    log::warn!("comparison of '{}' and '{}' failed: {e}", names[i], names[j]);
                    PairDetail { i, j, seed, result: None, error: Some(e.to_string()) }
                }
            }
        })
        .collect();

    let mut r = vec![vec![0.0; n]; n];
    let mut undefined = vec![vec![false; n]; n];
    for (k, row) in r.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    for p in &details {
        match &p.result {
            Some(res) => {
                r[p.i][p.j] = res.r12.value;
                r[p.j][p.i] = res.r21.value;
                undefined[p.i][p.j] = res.r12.undefined;
                undefined[p.j][p.i] = res.r21.undefined;
            }
            None => {
                undefined[p.i][p.j] = true;
                undefined[p.j][p.i] = true;
            }
        }
    }
    let (s, d) = similarity_and_distance(&r);
    Ok(ComparisonResult {
        names,
        r,
        undefined,
        s,
        d,
        pairs: details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::read_edge_list;

    fn sized(sizes: &[usize]) -> Partition {
        let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect();
        Partition::new(labels).unwrap()
    }

    #[test]
    fn filter_is_strict() {
        let f = filter_small_communities(&sized(&[10, 3, 8]), 5).unwrap();
        assert_eq!(f.partition.community_count(), 2);
        assert_eq!(f.nodes.len(), 18);
        assert_eq!(f.partition.sizes(), vec![10, 8]);
        let f = filter_small_communities(&sized(&[6, 6]), 5).unwrap();
        assert_eq!(f.partition, sized(&[6, 6]));
        assert!(matches!(
            filter_small_communities(&sized(&[2, 2]), 5),
            Err(Error::NoCommunitiesSurvive(5))
        ));
        assert!(filter_small_communities(&sized(&[2, 2]), 0).is_err());
    }

    /// Two 7-cliques joined by one edge.
    fn barbell() -> Graph {
        let mut text = String::new();
        for c in ["a", "b"] {
            for i in 0..7 {
                for j in i + 1..7 {
                    text.push_str(&format!("{c}{i} {c}{j}\n"));
                }
            }
        }
        text.push_str("a0 b0\n");
        read_edge_list(text.as_bytes(), false, "t").unwrap().0
    }

    #[test]
    fn relative_index_against_itself_and_empty_graph() {
        let g = barbell();
        let p = Partition::from_labels(&g.labels().iter().map(|l| &l[..1]).collect::<Vec<_>>());
        let same = relative_ucsv(&p, &g, &g, Alpha::default(), IndexKind::Ucsv).unwrap();
        assert!(same.own > 0.0);
        assert_eq!(same.value, 1.0);
        let (empty, _) = Graph::from_edges(g.labels().to_vec(), [], false).unwrap();
        let r = relative_ucsv(&p, &g, &empty, Alpha::default(), IndexKind::Ucsv).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(!r.undefined);
        let r = relative_ucsv(&p, &empty, &g, Alpha::default(), IndexKind::Ucsv).unwrap();
        assert!(r.undefined);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn identical_graphs_give_unit_indices() {
        let g = barbell();
        let opts = CompareOptions::default();
        let res = compare_pair(&g, &g, &opts, 9).unwrap();
        assert_eq!(res.common_nodes, 14);
        assert_eq!(res.communities, (2, 2));
        assert_eq!((res.r12.value, res.r21.value), (1.0, 1.0));

        let all = compare_all(&[("x".into(), g.clone()), ("y".into(), g)], &opts, 9).unwrap();
        assert_eq!(all.d, vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(all.failed_pairs(), 0);
    }

    #[test]
    fn disjoint_labels_fail() {
        let (a, _) = read_edge_list("a b".as_bytes(), false, "t").unwrap();
        let (b, _) = read_edge_list("c d".as_bytes(), false, "t").unwrap();
        assert!(matches!(
            compare_pair(&a, &b, &CompareOptions::default(), 0),
            Err(Error::EmptyIntersection)
        ));
        let all = compare_all(&[("a".into(), a), ("b".into(), b)], &CompareOptions::default(), 0).unwrap();
        assert_eq!(all.failed_pairs(), 1);
        assert!(all.undefined[0][1] && all.undefined[1][0]);
        assert_eq!(all.r[0][1], 0.0);
    }

    #[test]
    fn symmetrised_matrices() {
        let (s, d) = similarity_and_distance(&[vec![1.0, 0.6], vec![0.4, 1.0]]);
        assert_eq!(s, vec![vec![1.0, 0.5], vec![0.5, 1.0]]);
        assert_eq!(d, vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
    }

    #[test]
    fn duplicate_names_rejected() {
        let g = barbell();
        assert!(compare_all(&[("x".into(), g.clone()), ("x".into(), g)], &CompareOptions::default(), 0).is_err());
    }
}
