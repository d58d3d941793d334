//! Clauset–Newman–Moore greedy agglomeration.
//!
//! Starting from singletons, the pair of connected communities with the
//! largest modularity gain is merged until no connected pair remains; the
//! partition with the highest modularity along the way is returned.
//!
//! Gains are compared in exact integer arithmetic scaled by `(2m)^2`, so
//! ties are real ties and are broken by the smallest `(i, j)` pair.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

pub fn fast_greedy(graph: &Graph) -> Result<Partition> {
    if graph.is_directed() {
        return Err(Error::NotUndirected);
    }
    if graph.edge_count() == 0 {
        return Err(Error::EdgelessGraph);
    }
    let n = graph.node_count();
    let two_m = 2 * graph.edge_count() as i128;
    let mut degree: Vec<i128> = (0..n).map(|i| graph.degree(i) as i128).collect();
    // links[i][j]: number of edges between communities i and j (i != j)
    let mut links: Vec<BTreeMap<usize, i128>> = vec![BTreeMap::new(); n];
    for &(u, v) in graph.edges() {
        *links[u].entry(v).or_insert(0) += 1;
        *links[v].entry(u).or_insert(0) += 1;
    }
    let mut alive = vec![true; n];
    // Q * (2m)^2
    let mut q_scaled: i128 = -degree.iter().map(|d| d * d).sum::<i128>();
    let mut best_q = q_scaled;
    let mut merges: Vec<(usize, usize)> = Vec::new();
    let mut best_len = 0;

    loop {
        let mut best: Option<(i128, usize, usize)> = None;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for (&j, &e) in links[i].range(i + 1..) {
                let gain = 2 * (e * two_m - degree[i] * degree[j]);
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, i, j));
                }
            }
        }
        let Some((gain, i, j)) = best else { break };
        // merge j into i
        let row_j = std::mem::take(&mut links[j]);
        for (k, e) in row_j {
            if k == i {
                continue;
            }
            links[k].remove(&j);
            *links[k].entry(i).or_insert(0) += e;
            *links[i].entry(k).or_insert(0) += e;
        }
        links[i].remove(&j);
        degree[i] += degree[j];
        degree[j] = 0;
        alive[j] = false;
        q_scaled += gain;
        merges.push((i, j));
        if q_scaled > best_q {
            best_q = q_scaled;
            best_len = merges.len();
        }
    }

    let mut parent: Vec<usize> = (0..n).collect();
    for &(i, j) in &merges[..best_len] {
        parent[j] = i;
    }
    fn root(parent: &[usize], mut x: usize) -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    }
    let roots: Vec<usize> = (0..n).map(|x| root(&parent, x)).collect();
    Ok(Partition::from_labels(&roots))
}
