use proptest::prelude::*;

use csvnet::clustering::{
    complete_linkage, cut_dendrogram, fast_greedy, louvain, louvain_levels, modularity, parse_newick, to_newick,
    Dendrogram, DistanceMatrix,
};
use csvnet::dcsbm::degrade_partition;
use csvnet::enrichment::enrichment_matrix;
use csvnet::graph::Graph;
use csvnet::indices::{csv_report, Alpha};
use csvnet::partition::{BlockCounts, Partition};
use csvnet::stats::{bh_adjust, hypergeom_pmf, lower_mid_p, upper_mid_p, HypergeomParams};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// Undirected graph on `2..=max_n` nodes with arbitrary edges.
fn graph_strategy(max_n: usize, directed: bool) -> impl Strategy<Value = Graph> {
    (2..=max_n)
        .prop_flat_map(move |n| (Just(n), prop::collection::vec((0..n, 0..n), 1..4 * n)))
        .prop_map(move |(n, edges)| Graph::from_edges(labels(n), edges, directed).unwrap().0)
        .prop_filter("needs an edge", |g| g.edge_count() > 0)
}

fn graph_and_partition(directed: bool) -> impl Strategy<Value = (Graph, Partition)> {
    graph_strategy(14, directed).prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), prop::collection::vec(0..4usize, n)).prop_map(|(g, ids)| (g, Partition::from_labels(&ids)))
    })
}

/// Exact tail probabilities from the pmf on the full support.
fn tails_by_enumeration(x: u64, p: &HypergeomParams) -> (f64, f64) {
    let (lo, hi) = p.support();
    let above: f64 = (x + 1..=hi).map(|y| hypergeom_pmf(y, p)).sum();
    let below: f64 = (lo..x).map(|y| hypergeom_pmf(y, p)).sum();
    let at = hypergeom_pmf(x, p);
    (0.5 * at + above, 0.5 * at + below)
}

/// Every internal node as (sorted member labels, height), sorted.
fn clusters(d: &Dendrogram) -> Vec<(Vec<String>, u64)> {
    let mut members: Vec<Vec<String>> = d.leaf_labels.iter().map(|l| vec![l.clone()]).collect();
    let mut out = Vec::new();
    for m in &d.merges {
        let mut joined = [members[m.left].clone(), members[m.right].clone()].concat();
        joined.sort();
        out.push((joined.clone(), m.height.to_bits()));
        members.push(joined);
    }
    out.sort();
    out
}

proptest! {
    #[test]
    fn mid_p_matches_enumeration(n in 1u64..200, k_frac in 0.0f64..=1.0, d_frac in 0.0f64..=1.0, x_frac in 0.0f64..=1.0) {
        let k = (k_frac * n as f64) as u64;
        let draws = (d_frac * n as f64) as u64;
        let p = HypergeomParams::new(n, k, draws).unwrap();
        let (lo, hi) = p.support();
        let x = lo + ((hi - lo) as f64 * x_frac) as u64;
        let (up, low) = tails_by_enumeration(x, &p);
        prop_assert!((upper_mid_p(x, &p) - up).abs() < 1e-12);
        prop_assert!((lower_mid_p(x, &p) - low).abs() < 1e-12);
        prop_assert!((upper_mid_p(x, &p) + lower_mid_p(x, &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bh_is_bounded_and_order_preserving(p in prop::collection::vec(0.0f64..=1.0, 1..60)) {
        let adj = bh_adjust(&p);
        for i in 0..p.len() {
            // m p / rank with m == rank may round one ulp below p
            prop_assert!(adj[i] >= p[i] * (1.0 - 1e-15) && adj[i] <= 1.0);
            for j in 0..p.len() {
                if p[i] <= p[j] {
                    prop_assert!(adj[i] <= adj[j]);
                }
            }
        }
    }

    #[test]
    fn block_counts_conserve_stubs((g, p) in graph_and_partition(false)) {
        let c = BlockCounts::tally(&g, &p).unwrap();
        let two_m = 2 * g.edge_count() as u64;
        prop_assert_eq!(c.population(), two_m);
        prop_assert_eq!(c.out_degree.iter().sum::<u64>(), two_m);
        let links: u64 = (0..c.q).flat_map(|r| (0..c.q).map(move |s| (r, s))).map(|(r, s)| c.links(r, s)).sum();
        prop_assert_eq!(links, two_m);
        for r in 0..c.q {
            let row: u64 = (0..c.q).map(|s| c.links(r, s)).sum();
            prop_assert_eq!(row, c.out_degree[r]);
        }
    }

    #[test]
    fn directed_counts_conserve_arrows((g, p) in graph_and_partition(true)) {
        let c = BlockCounts::tally(&g, &p).unwrap();
        let m = g.edge_count() as u64;
        prop_assert_eq!(c.population(), m);
        prop_assert_eq!(c.out_degree.iter().sum::<u64>(), m);
    }

    #[test]
    fn family_size_and_index_order((g, p) in graph_and_partition(false)) {
        let q = p.community_count();
        let m = enrichment_matrix(&g, &p).unwrap();
        prop_assert_eq!(m.len(), q + q * (q - 1) / 2);
        let report = csv_report(&g, &p, Alpha::default()).unwrap();
        prop_assert!(report.wcsv <= report.ucsv);
        prop_assert!((0.0..=1.0).contains(&report.ucsv));
    }

    #[test]
    fn directed_family_size((g, p) in graph_and_partition(true)) {
        let q = p.community_count();
        prop_assert_eq!(enrichment_matrix(&g, &p).unwrap().len(), q * q);
    }

    #[test]
    fn indices_ignore_community_numbering((g, p) in graph_and_partition(false), shift in 1usize..4) {
        let q = p.community_count();
        let relabeled: Vec<usize> = p.assignment().iter().map(|&c| (c + shift) % q).collect();
        let other = Partition::new(relabeled).unwrap();
        let a = csv_report(&g, &p, Alpha::default()).unwrap();
        let b = csv_report(&g, &other, Alpha::default()).unwrap();
        prop_assert_eq!(a.ucsv, b.ucsv);
        prop_assert!((a.wcsv - b.wcsv).abs() < 1e-12);
        if g.edge_count() > 0 {
            prop_assert_eq!(modularity(&g, &p).unwrap(), modularity(&g, &other).unwrap());
        }
    }

    #[test]
    fn detection_outputs_are_valid(g in graph_strategy(30, false), seed in any::<u64>()) {
        let levels = louvain_levels(&g, seed).unwrap();
        for w in levels.windows(2) {
            prop_assert!(w[1].modularity >= w[0].modularity - 1e-12);
        }
        let singles = modularity(&g, &Partition::singletons(g.node_count())).unwrap();
        let lv = louvain(&g, seed).unwrap();
        prop_assert_eq!(lv.node_count(), g.node_count());
        prop_assert!(modularity(&g, &lv).unwrap() >= singles - 1e-12);
        let fg = fast_greedy(&g).unwrap();
        prop_assert_eq!(fg.node_count(), g.node_count());
        let q = modularity(&g, &fg).unwrap();
        prop_assert!((-0.5..=1.0).contains(&q));
        prop_assert!(q >= singles - 1e-12);
    }

    #[test]
    fn dendrogram_cuts_and_newick(values in prop::collection::vec(1u32..8, 28)) {
        let n = 8;
        let mut rows = vec![vec![0.0; n]; n];
        let mut it = values.into_iter();
        for i in 0..n {
            for j in 0..i {
                let x = f64::from(it.next().unwrap());
                rows[i][j] = x;
                rows[j][i] = x;
            }
        }
        let d = DistanceMatrix::new(labels(n), rows).unwrap();
        let dend = complete_linkage(&d).unwrap();
        prop_assert!(dend.merges.windows(2).all(|w| w[0].height <= w[1].height));
        for k in 1..=n {
            let ids = cut_dendrogram(&dend, k).unwrap();
            prop_assert_eq!(ids.iter().max().unwrap() + 1, k);
        }
        prop_assert_eq!(clusters(&parse_newick(&to_newick(&dend)).unwrap()), clusters(&dend));
    }

    #[test]
    fn degradation_moves_exact_count(n in 8usize..200, frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let ids: Vec<usize> = (0..n).map(|i| i % 4).collect();
        let p = Partition::new(ids).unwrap();
        if let Ok(d) = degrade_partition(&p, frac, seed) {
            let changed = (0..n).filter(|&i| d.community_of(i) != p.community_of(i)).count();
            prop_assert_eq!(changed, (frac * n as f64).round() as usize);
            prop_assert_eq!(d.node_count(), n);
        }
    }
}
