//! One-tailed network enrichment tests over a graph partition.
//!
//! Each community is tested for over-enrichment of internal links, each pair
//! of communities for under-enrichment of crossing links, and the whole
//! family is adjusted jointly with Benjamini–Hochberg.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::graph::Graph;
use crate::partition::{BlockCounts, Partition};
use crate::stats::{bh_adjust, lower_mid_p, upper_mid_p, HypergeomParams};

/// Mid-p assigned to tests on communities without any stubs.
pub const DEGENERATE_P: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    WithinOver,
    BetweenUnder,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::WithinOver => "within-over",
            Direction::BetweenUnder => "between-under",
        }
    }
}

/// A single test before family-wise adjustment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub r: usize,
    pub s: usize,
    pub direction: Direction,
    pub n_obs: u64,
    pub params: HypergeomParams,
    pub raw_p: f64,
    pub degenerate: bool,
}

impl TestOutcome {
    /// Null expectation `n K / N`.
    pub fn mu0(&self) -> f64 {
        self.params.mean()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrichmentResult {
    pub r: usize,
    pub s: usize,
    pub direction: Direction,
    pub n_obs: u64,
    pub mu0: f64,
    pub raw_p: f64,
    pub adj_p: f64,
    pub degenerate: bool,
    #[serde(skip)]
    pub params: HypergeomParams,
}

impl EnrichmentResult {
    fn adjusted(test: TestOutcome, adj_p: f64) -> Self {
        EnrichmentResult {
            r: test.r,
            s: test.s,
            direction: test.direction,
            n_obs: test.n_obs,
            mu0: test.mu0(),
            raw_p: test.raw_p,
            adj_p,
            degenerate: test.degenerate,
            params: test.params,
        }
    }
}

/// Full family of tests for one partition, BH-adjusted.
///
/// Ordering: within tests by `r`, then between tests in lexicographic
/// `(r, s)` order (`r < s` undirected, `r != s` directed).
#[derive(Debug, Clone, PartialEq)]
pub struct EnrichmentMatrix {
    pub results: Vec<EnrichmentResult>,
    pub q: usize,
    pub directed: bool,
}

impl EnrichmentMatrix {
    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    /// The test covering `(r, s)`. For undirected graphs `(r, s)` and
    /// `(s, r)` name the same test.
    pub fn get(&self, r: usize, s: usize) -> Option<&EnrichmentResult> {
        let q = self.q;
        if r >= q || s >= q {
            return None;
        }
        if r == s {
            return self.results.get(r);
        }
        let idx = if self.directed {
            // q*(q-1) between tests, row r holds q-1 entries skipping the diagonal
            q + r * (q - 1) + if s > r { s - 1 } else { s }
        } else {
            let (a, b) = if r < s { (r, s) } else { (s, r) };
            // offset of row a among pairs with first index a
            q + a * (2 * q - a - 1) / 2 + (b - a - 1)
        };
        self.results.get(idx)
    }

    /// The `q` tests that involve community `r`: the within test followed by
    /// `(r, s)` for every `s != r`.
    pub fn tests_for(&self, r: usize) -> impl Iterator<Item = &EnrichmentResult> + '_ {
        (0..self.q).filter_map(move |s| self.get(r, s))
    }
}

fn within_from_counts(counts: &BlockCounts, r: usize) -> TestOutcome {
    let n_obs = counts.links(r, r);
    let population = counts.population();
    let params = if counts.directed {
        HypergeomParams::new(population, counts.in_degree[r], counts.out_degree[r])
    } else {
        HypergeomParams::new(population, counts.out_degree[r], counts.out_degree[r])
    }
    .expect("block degrees never exceed the population");
    finish(r, r, Direction::WithinOver, n_obs, params)
}

fn between_from_counts(counts: &BlockCounts, r: usize, s: usize) -> TestOutcome {
    let n_obs = counts.links(r, s);
    let population = counts.population();
    let params = if counts.directed {
        HypergeomParams::new(population, counts.in_degree[s], counts.out_degree[r])
    } else {
        HypergeomParams::new(population, counts.out_degree[s], counts.out_degree[r])
    }
    .expect("block degrees never exceed the population");
    finish(r, s, Direction::BetweenUnder, n_obs, params)
}

fn finish(r: usize, s: usize, direction: Direction, n_obs: u64, params: HypergeomParams) -> TestOutcome {
    let degenerate = params.draws == 0 || params.successes == 0;
    let raw_p = if degenerate {
        log::warn!("degenerate {} test for communities ({r}, {s}): zero degree", direction.as_str());
        DEGENERATE_P
    } else {
        match direction {
            Direction::WithinOver => upper_mid_p(n_obs, &params),
            Direction::BetweenUnder => lower_mid_p(n_obs, &params),
        }
    };
    TestOutcome {
        r,
        s,
        direction,
        n_obs,
        params,
        raw_p,
        degenerate,
    }
}

/// Over-enrichment test of the links inside community `r`.
pub fn test_within(graph: &Graph, partition: &Partition, r: usize) -> Result<TestOutcome> {
    check_community(partition, r)?;
    let counts = BlockCounts::tally(graph, partition)?;
    Ok(within_from_counts(&counts, r))
}

/// Under-enrichment test of links from community `r` to community `s`.
pub fn test_between(graph: &Graph, partition: &Partition, r: usize, s: usize) -> Result<TestOutcome> {
    check_community(partition, r)?;
    check_community(partition, s)?;
    if r == s {
        return Err(crate::Error::InvalidParameter(
            "between test needs two distinct communities".into(),
        ));
    }
    let counts = BlockCounts::tally(graph, partition)?;
    Ok(between_from_counts(&counts, r, s))
}

fn check_community(partition: &Partition, r: usize) -> Result<()> {
    if r >= partition.community_count() {
        return Err(crate::Error::InvalidParameter(format!(
            "community {r} out of range 0..{}",
            partition.community_count()
        )));
    }
    Ok(())
}

/// Runs every within and between test and applies BH across the family.
pub fn enrichment_matrix(graph: &Graph, partition: &Partition) -> Result<EnrichmentMatrix> {
    let counts = BlockCounts::tally(graph, partition)?;
    let q = counts.q;
    let directed = counts.directed;
    let mut specs: Vec<(usize, usize)> = (0..q).map(|r| (r, r)).collect();
    for r in 0..q {
        for s in 0..q {
            if (directed && r != s) || (!directed && r < s) {
                specs.push((r, s));
            }
        }
    }
    let tests: Vec<TestOutcome> = specs
        .par_iter()
        .map(|&(r, s)| {
            if r == s {
                within_from_counts(&counts, r)
            } else {
                between_from_counts(&counts, r, s)
            }
        })
        .collect();
    let raw: Vec<f64> = tests.iter().map(|t| t.raw_p).collect();
    let adjusted = bh_adjust(&raw);
    let results = tests
        .into_iter()
        .zip(adjusted)
        .map(|(t, a)| EnrichmentResult::adjusted(t, a))
        .collect();
    Ok(EnrichmentMatrix { results, q, directed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::read_edge_list;

    fn graph(text: &str, directed: bool) -> Graph {
        read_edge_list(text.as_bytes(), directed, "<test>").unwrap().0
    }

    fn two_triangles() -> (Graph, Partition) {
        let g = graph("a b\nb c\nc a\nd e\ne f\nf d", false);
        (g, Partition::new(vec![0, 0, 0, 1, 1, 1]).unwrap())
    }

    #[test]
    fn within_two_triangles() {
        let (g, p) = two_triangles();
        let t = test_within(&g, &p, 0).unwrap();
        assert_eq!(t.n_obs, 6);
        assert_eq!(t.params, HypergeomParams::new(12, 6, 6).unwrap());
        assert_eq!(t.raw_p, upper_mid_p(6, &t.params));
        assert!(t.raw_p < 0.01);
        assert!((t.mu0() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn between_two_triangles() {
        let (g, p) = two_triangles();
        let t = test_between(&g, &p, 0, 1).unwrap();
        assert_eq!(t.n_obs, 0);
        let pmf0 = crate::stats::hypergeom_pmf(0, &t.params);
        assert!((t.raw_p - 0.5 * pmf0).abs() < 1e-15);
    }

    #[test]
    fn single_community_on_complete_graph() {
        let g = graph("a b\na c\na d\nb c\nb d\nc d", false);
        let p = Partition::whole(4);
        let t = test_within(&g, &p, 0).unwrap();
        assert_eq!(t.n_obs, 12);
        // point mass at the support maximum: ½ · 1
        assert!((t.raw_p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn isolated_community_is_degenerate() {
        let (g, _) = Graph::from_edges(
            vec!["a".into(), "b".into(), "c".into()],
            [(0, 1)],
            false,
        )
        .unwrap();
        let p = Partition::new(vec![0, 0, 1]).unwrap();
        let t = test_within(&g, &p, 1).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.raw_p, DEGENERATE_P);
        assert!(test_between(&g, &p, 0, 1).unwrap().degenerate);
    }

    #[test]
    fn matrix_sizes_and_lookup() {
        let g = graph("a b\nb c\nc d\nd e\ne f\nf a\na d", false);
        let p = Partition::new(vec![0, 0, 1, 1, 2, 2]).unwrap();
        let m = enrichment_matrix(&g, &p).unwrap();
        assert_eq!(m.len(), 6);
        for r in 0..3 {
            for s in 0..3 {
                let t = m.get(r, s).unwrap();
                assert_eq!((t.r.min(t.s), t.r.max(t.s)), (r.min(s), r.max(s)));
            }
        }
        let raw: Vec<f64> = m.results.iter().map(|t| t.raw_p).collect();
        let adj: Vec<f64> = m.results.iter().map(|t| t.adj_p).collect();
        assert_eq!(adj, bh_adjust(&raw));

        let gd = graph("a b\nb c\nc d\nd e\ne f\nf a\na d", true);
        let md = enrichment_matrix(&gd, &p).unwrap();
        assert_eq!(md.len(), 9);
        for r in 0..3 {
            for s in 0..3 {
                let t = md.get(r, s).unwrap();
                assert_eq!((t.r, t.s), (r, s));
            }
        }
    }

    #[test]
    fn directed_params_use_out_and_in_degrees() {
        // a->b, a->c, b->c ; communities {a}, {b, c}
        let g = graph("a b\na c\nb c", true);
        let p = Partition::new(vec![0, 1, 1]).unwrap();
        let t = test_between(&g, &p, 0, 1).unwrap();
        assert_eq!(t.n_obs, 2);
        assert_eq!(t.params, HypergeomParams::new(3, 3, 2).unwrap());
        let w = test_within(&g, &p, 1).unwrap();
        assert_eq!(w.n_obs, 1);
        assert_eq!(w.params, HypergeomParams::new(3, 3, 1).unwrap());
    }

    #[test]
    fn single_edge_between_singletons() {
        let g = graph("a b", false);
        let p = Partition::singletons(2);
        let t = test_between(&g, &p, 0, 1).unwrap();
        assert!(t.raw_p >= 0.5);
    }

    #[test]
    fn complete_bipartite_between_sides_is_not_under_enriched() {
        let g = graph("a x\na y\na z\nb x\nb y\nb z\nc x\nc y\nc z", false);
        let p = Partition::new(vec![0, 1, 1, 1, 0, 0]).unwrap();
        // labels in order a x y z b c
        let t = test_between(&g, &p, 0, 1).unwrap();
        assert_eq!(t.n_obs, 9);
        assert_eq!(t.params.support().1, 9);
        assert!(t.raw_p > 0.99);
    }
}
