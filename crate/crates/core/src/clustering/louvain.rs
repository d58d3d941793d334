//! Louvain modularity optimisation (resolution 1).
//!
//! Each level sweeps the nodes in a seeded random order, moving each to the
//! neighbouring community with the largest positive modularity gain until a
//! sweep makes no move. Communities are then collapsed into weighted
//! super-nodes and the next level runs on that graph. The algorithm stops
//! when a level leaves every node in place.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::rng::{derive_seed, seeded_rng};

use super::modularity;

/// Gains below this are treated as ties to stop oscillation on rounding noise.
const GAIN_EPS: f64 = 1e-12;

/// One aggregation level: the partition of the original nodes reached after
/// it and the corresponding modularity.
#[derive(Debug, Clone, PartialEq)]
pub struct LouvainLevel {
    pub partition: Partition,
    pub modularity: f64,
}

struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    strength: Vec<f64>,
    two_m: f64,
}

impl WeightedGraph {
    fn from_graph(graph: &Graph) -> Self {
        let n = graph.node_count();
        let adjacency: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| graph.neighbors(i).iter().map(|&j| (j, 1.0)).collect())
            .collect();
        let strength = (0..n).map(|i| graph.degree(i) as f64).collect();
        WeightedGraph {
            adjacency,
            self_loops: vec![0.0; n],
            strength,
            two_m: 2.0 * graph.edge_count() as f64,
        }
    }

    fn len(&self) -> usize {
        self.adjacency.len()
    }

    /// Local moving phase. Returns the community of each node and whether
    /// anything moved.
    fn local_moves(&self, order: &[usize]) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut community: Vec<usize> = (0..n).collect();
        let mut total: Vec<f64> = self.strength.clone();
        let mut weight_to = vec![0.0f64; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;
        loop {
            let mut moved = false;
            for &i in order {
                let current = community[i];
                let k_i = self.strength[i];
                for &(j, w) in &self.adjacency[i] {
                    let c = community[j];
                    if weight_to[c] == 0.0 {
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                total[current] -= k_i;
                let gain = |c: usize, w: f64| w - total[c] * k_i / self.two_m;
                let mut best = current;
                let mut best_gain = gain(current, weight_to[current]);
                for &c in &touched {
                    let g = gain(c, weight_to[c]);
                    if g > best_gain + GAIN_EPS {
                        best = c;
                        best_gain = g;
                    }
                }
                total[best] += k_i;
                community[i] = best;
                if best != current {
                    moved = true;
                    any_move = true;
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
        }
        (community, any_move)
    }

    fn aggregate(&self, dense: &[usize], q: usize) -> WeightedGraph {
        let mut self_loops = vec![0.0; q];
        let mut strength = vec![0.0; q];
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); q];
        for i in 0..self.len() {
            let ci = dense[i];
            strength[ci] += self.strength[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in &self.adjacency[i] {
                let cj = dense[j];
                if ci == cj {
                    // each internal edge is seen from both endpoints
                    self_loops[ci] += w / 2.0;
                } else {
                    *rows[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        WeightedGraph {
            adjacency: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
            self_loops,
            strength,
            two_m: self.two_m,
        }
    }
}

/// All levels, starting with the singleton partition.
pub fn louvain_levels(graph: &Graph, seed: u64) -> Result<Vec<LouvainLevel>> {
    if graph.is_directed() {
        return Err(Error::NotUndirected);
    }
    if graph.edge_count() == 0 {
        return Err(Error::EdgelessGraph);
    }
    let n = graph.node_count();
    let mut membership: Vec<usize> = (0..n).collect();
    let singletons = Partition::singletons(n);
    let mut levels = vec![LouvainLevel {
        modularity: modularity(graph, &singletons)?,
        partition: singletons,
    }];
    let mut current = WeightedGraph::from_graph(graph);
    for level in 0u64.. {
        let mut order: Vec<usize> = (0..current.len()).collect();
        order.shuffle(&mut seeded_rng(derive_seed(seed, &[level])));
        let (community, moved) = current.local_moves(&order);
        if !moved {
            break;
        }
        let dense = Partition::from_labels(&community);
        for m in membership.iter_mut() {
            *m = dense.community_of(*m);
        }
        let partition = Partition::from_labels(&membership);
        levels.push(LouvainLevel {
            modularity: modularity(graph, &partition)?,
            partition,
        });
        current = current.aggregate(dense.assignment(), dense.community_count());
    }
    Ok(levels)
}

/// Final Louvain partition; communities numbered by first node appearance.
pub fn louvain(graph: &Graph, seed: u64) -> Result<Partition> {
    let levels = louvain_levels(graph, seed)?;
    Ok(levels.into_iter().last().expect("at least the singleton level").partition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::read_edge_list;

    fn graph(text: &str) -> Graph {
        read_edge_list(text.as_bytes(), false, "t").unwrap().0
    }

    #[test]
    fn splits_two_triangles() {
        let g = graph("a b\nb c\nc a\nd e\ne f\nf d");
        for seed in 0..10 {
            let p = louvain(&g, seed).unwrap();
            assert_eq!(p.assignment(), [0, 0, 0, 1, 1, 1]);
        }
    }

    #[test]
    fn complete_graph_is_one_community() {
        let mut text = String::new();
        for i in 0..6 {
            for j in i + 1..6 {
                text.push_str(&format!("{i} {j}\n"));
            }
        }
        let g = graph(&text);
        for seed in 0..10 {
            assert_eq!(louvain(&g, seed).unwrap().community_count(), 1);
        }
    }

    #[test]
    fn modularity_never_decreases_across_levels() {
        // ring of 6 cliques of size 4 joined by single edges
        let mut text = String::new();
        for c in 0..6 {
            for i in 0..4 {
                for j in i + 1..4 {
                    text.push_str(&format!("{}_{} {}_{}\n", c, i, c, j));
                }
            }
            text.push_str(&format!("{}_0 {}_3\n", c, (c + 1) % 6));
        }
        let g = graph(&text);
        let levels = louvain_levels(&g, 3).unwrap();
        assert!(levels.len() >= 2);
        for w in levels.windows(2) {
            assert!(w[1].modularity >= w[0].modularity - 1e-12);
        }
        assert_eq!(levels.last().unwrap().partition.community_count(), 6);
    }

    #[test]
    fn rejects_edgeless_and_directed() {
        let (g, _) = Graph::from_edges(vec!["a".into(), "b".into()], [], false).unwrap();
        assert!(louvain(&g, 0).is_err());
        let (d, _) = read_edge_list("a b".as_bytes(), true, "t").unwrap();
        assert!(louvain(&d, 0).is_err());
    }
}
