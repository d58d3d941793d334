use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::{BlockCounts, Partition};

/// Newman–Girvan modularity `Q = sum_r (e_rr - a_r^2)`, where `e_rr` is the
/// fraction of edges inside community `r` and `a_r` its fraction of stubs.
pub fn modularity(graph: &Graph, partition: &Partition) -> Result<f64> {
    if graph.is_directed() {
        return Err(Error::NotUndirected);
    }
    if graph.edge_count() == 0 {
        return Err(Error::EdgelessGraph);
    }
    let counts = BlockCounts::tally(graph, partition)?;
    // Q (2m)^2 = sum_r (2m stubs_rr - d_r^2), summed exactly
    let two_m = i128::from(counts.population());
    let scaled: i128 = (0..counts.q)
        .map(|r| {
            let d = i128::from(counts.out_degree[r]);
            two_m * i128::from(counts.links(r, r)) - d * d
        })
        .sum();
    Ok(scaled as f64 / (two_m * two_m) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::read_edge_list;

    fn complete(labels: &[&str]) -> String {
        let mut s = String::new();
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                s.push_str(&format!("{a} {b}\n"));
            }
        }
        s
    }

    #[test]
    fn two_disjoint_k5() {
        let text = complete(&["a", "b", "c", "d", "e"]) + &complete(&["f", "g", "h", "i", "j"]);
        let (g, _) = read_edge_list(text.as_bytes(), false, "t").unwrap();
        let p = Partition::new(vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]).unwrap();
        assert!((modularity(&g, &p).unwrap() - 0.5).abs() < 1e-12);
        assert!(modularity(&g, &Partition::whole(10)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn halving_complete_graph_is_negative() {
        let (g, _) = read_edge_list(complete(&["a", "b", "c", "d"]).as_bytes(), false, "t").unwrap();
        let q = modularity(&g, &Partition::new(vec![0, 0, 1, 1]).unwrap()).unwrap();
        // e_rr = 1/6, a_r = 1/2: 2 (1/6 - 1/4)
        assert!((q - 2.0 * (1.0 / 6.0 - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let (g, _) = read_edge_list("a b".as_bytes(), true, "t").unwrap();
        assert!(matches!(modularity(&g, &Partition::whole(2)), Err(Error::NotUndirected)));
        let (g, _) = Graph::from_edges(vec!["a".into()], [], false).unwrap();
        assert!(matches!(modularity(&g, &Partition::whole(1)), Err(Error::EdgelessGraph)));
    }
}
