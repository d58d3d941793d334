//! Degree-corrected stochastic blockmodel for binary undirected graphs.
//!
//! An edge between `i < j` is drawn independently with probability
//! `min(w_i w_j theta[b_i][b_j], 1)`, where node weights are normalised so
//! that they sum to the block size inside every block.

use rand::seq::index;
use rand::Rng as _;
use rand_distr::{Distribution, Pareto, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::rng::seeded_rng;

/// Symmetric block-interaction matrix with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    q: usize,
    values: Vec<f64>,
}

impl ThetaMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let q = rows.len();
        let mut values = Vec::with_capacity(q * q);
        for row in &rows {
            if row.len() != q {
                return Err(Error::InvalidParameter("theta matrix must be square".into()));
            }
            values.extend_from_slice(row);
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("theta entry {bad} outside [0, 1]")));
        }
        for r in 0..q {
            for s in 0..r {
                if values[r * q + s] != values[s * q + r] {
                    return Err(Error::InvalidParameter(format!("theta not symmetric at ({r}, {s})")));
                }
            }
        }
        Ok(ThetaMatrix { q, values })
    }

    /// Diagonal `within`, constant `between` off the diagonal.
    pub fn planted(within: &[f64], between: f64) -> Result<Self> {
        let q = within.len();
        let rows = (0..q)
            .map(|r| (0..q).map(|s| if r == s { within[r] } else { between }).collect())
            .collect();
        ThetaMatrix::new(rows)
    }

    pub fn dim(&self) -> usize {
        self.q
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.values[r * self.q + s]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Every weight 1: a plain planted-partition model.
    #[default]
    Uniform,
    /// Pareto(scale 1, shape 3) draws, normalised per block.
    Pareto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcsbmConfig {
    pub blocks: Partition,
    pub theta: ThetaMatrix,
    pub weights: Vec<f64>,
    pub seed: u64,
}

impl DcsbmConfig {
    pub fn new(blocks: Partition, theta: ThetaMatrix, weights: Vec<f64>, seed: u64) -> Result<Self> {
        if theta.dim() != blocks.community_count() {
            return Err(Error::InvalidParameter(format!(
                "theta is {0}x{0} but there are {1} blocks",
                theta.dim(),
                blocks.community_count()
            )));
        }
        if weights.len() != blocks.node_count() {
            return Err(Error::InvalidParameter("one weight per node is required".into()));
        }
        if weights.iter().any(|&w| w.is_nan() || w <= 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be positive".into()));
        }
        let mut sums = vec![0.0; blocks.community_count()];
        for (node, &w) in weights.iter().enumerate() {
            sums[blocks.community_of(node)] += w;
        }
        for (r, (&sum, &size)) in sums.iter().zip(&blocks.sizes()).enumerate() {
            if (sum - size as f64).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "weights in block {r} sum to {sum}, expected {size}"
                )));
            }
        }
        Ok(DcsbmConfig {
            blocks,
            theta,
            weights,
            seed,
        })
    }

    /// Builds weights for `blocks` according to `mode`. Pareto draws use a
    /// stream derived from `seed` distinct from the edge stream.
    pub fn with_weight_mode(blocks: Partition, theta: ThetaMatrix, mode: WeightMode, seed: u64) -> Result<Self> {
        let weights = match mode {
            WeightMode::Uniform => vec![1.0; blocks.node_count()],
            WeightMode::Pareto => {
                let mut rng = seeded_rng(crate::rng::derive_seed(seed, &[0x5745_4947]));
                let dist = Pareto::new(1.0, 3.0).expect("valid Pareto parameters");
                let raw: Vec<f64> = (0..blocks.node_count()).map(|_| dist.sample(&mut rng)).collect();
                normalize_weights(&raw, &blocks)?
            }
        };
        DcsbmConfig::new(blocks, theta, weights, seed)
    }
}

/// Block sizes for `v` nodes in `p` near-equal blocks; the remainder goes one
/// node each to the first blocks.
pub fn equal_block_sizes(v: usize, p: usize) -> Vec<usize> {
    (0..p).map(|r| v / p + usize::from(r < v % p)).collect()
}

/// Contiguous block assignment for the given sizes.
pub fn blocks_from_sizes(sizes: &[usize]) -> Result<Partition> {
    let assignment = sizes
        .iter()
        .enumerate()
        .flat_map(|(r, &n)| std::iter::repeat_n(r, n))
        .collect();
    Partition::new(assignment)
}

/// Rescales weights inside each block so they sum to the block size.
pub fn normalize_weights(raw: &[f64], partition: &Partition) -> Result<Vec<f64>> {
    if raw.len() != partition.node_count() {
        return Err(Error::InvalidParameter("one weight per node is required".into()));
    }
    if let Some(bad) = raw.iter().find(|&&w| w.is_nan() || w <= 0.0 || !w.is_finite()) {
        return Err(Error::InvalidParameter(format!("weight {bad} is not positive")));
    }
    let mut sums = vec![0.0; partition.community_count()];
    for (node, &w) in raw.iter().enumerate() {
        sums[partition.community_of(node)] += w;
    }
    let sizes = partition.sizes();
    Ok(raw
        .iter()
        .enumerate()
        .map(|(node, &w)| {
            let r = partition.community_of(node);
            w * sizes[r] as f64 / sums[r]
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct DcsbmSample {
    pub graph: Graph,
    pub partition: Partition,
    /// Pairs whose `w_i w_j theta` exceeded 1 and was clamped.
    pub clamped_pairs: u64,
}

/// Labels for generated graphs: the node index in decimal.
pub fn node_labels(v: usize) -> Vec<String> {
    (0..v).map(|i| i.to_string()).collect()
}

pub fn sample_dcsbm(config: &DcsbmConfig) -> DcsbmSample {
    let mut rng = seeded_rng(config.seed);
    let v = config.blocks.node_count();
    let blocks = config.blocks.assignment();
    let w = &config.weights;
    let mut edges = Vec::new();
    let mut clamped_pairs = 0;
    for i in 0..v {
        for j in i + 1..v {
            let raw = w[i] * w[j] * config.theta.get(blocks[i], blocks[j]);
            if raw > 1.0 {
                clamped_pairs += 1;
            }
            if rng.random::<f64>() < raw.min(1.0) {
                edges.push((i, j));
            }
        }
    }
    if clamped_pairs > 0 {
        log::warn!("{clamped_pairs} node pair(s) had edge probability clamped to 1");
    }
    let (graph, _) = Graph::from_edges(node_labels(v), edges, false).expect("generated edges are valid");
    DcsbmSample {
        graph,
        partition: config.blocks.clone(),
        clamped_pairs,
    }
}

/// `q` independent uniform draws on `[mean - halfwidth, mean + halfwidth]`.
pub fn sample_theta_within(mean: f64, halfwidth: f64, q: usize, seed: u64) -> Result<Vec<f64>> {
    let (lo, hi) = (mean - halfwidth, mean + halfwidth);
    if halfwidth.is_nan() || halfwidth < 0.0 || lo < 0.0 || hi > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "theta interval [{lo}, {hi}] not inside [0, 1]"
        )));
    }
    if halfwidth == 0.0 {
        return Ok(vec![mean; q]);
    }
    let dist = Uniform::new_inclusive(lo, hi).expect("non-empty interval");
    let mut rng = seeded_rng(seed);
    Ok((0..q).map(|_| dist.sample(&mut rng)).collect())
}

/// Moves exactly `round(q_frac * |V|)` distinct nodes, chosen uniformly, each
/// to a community drawn uniformly from the other `q - 1`.
pub fn degrade_partition(partition: &Partition, q_frac: f64, seed: u64) -> Result<Partition> {
    if !(0.0..=1.0).contains(&q_frac) {
        return Err(Error::InvalidParameter(format!("degradation fraction {q_frac} outside [0, 1]")));
    }
    let n = partition.node_count();
    let q = partition.community_count();
    let moves = (q_frac * n as f64).round() as usize;
    if moves == 0 {
        return Ok(partition.clone());
    }
    if q < 2 {
        return Err(Error::InvalidParameter("degradation needs at least two communities".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut assignment = partition.assignment().to_vec();
    for node in index::sample(&mut rng, n, moves) {
        let current = assignment[node];
        let pick = rng.random_range(0..q - 1);
        assignment[node] = if pick >= current { pick + 1 } else { pick };
    }
    let mut sizes = vec![0usize; q];
    for &c in &assignment {
        sizes[c] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidPartition(format!("degradation emptied community {empty}")));
    }
    Partition::new(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_config(sizes: &[usize], theta: ThetaMatrix, seed: u64) -> DcsbmConfig {
        let blocks = blocks_from_sizes(sizes).unwrap();
        DcsbmConfig::with_weight_mode(blocks, theta, WeightMode::Uniform, seed).unwrap()
    }

    #[test]
    fn normalizes_per_block() {
        let one = Partition::whole(3);
        assert_eq!(normalize_weights(&[2.0, 1.0, 1.0], &one).unwrap(), vec![1.5, 0.75, 0.75]);
        assert_eq!(normalize_weights(&[4.0; 3], &one).unwrap(), vec![1.0; 3]);
        assert!(normalize_weights(&[1.0, 0.0, 1.0], &one).is_err());
        let two = Partition::new(vec![0, 0, 1]).unwrap();
        assert_eq!(normalize_weights(&[1.0, 3.0, 7.0], &two).unwrap(), vec![0.5, 1.5, 1.0]);
    }

    #[test]
    fn config_rejects_unnormalised_weights() {
        let blocks = Partition::whole(2);
        let theta = ThetaMatrix::planted(&[0.5], 0.0).unwrap();
        assert!(DcsbmConfig::new(blocks.clone(), theta.clone(), vec![1.0, 2.0], 1).is_err());
        assert!(DcsbmConfig::new(blocks, theta, vec![0.5, 1.5], 1).is_ok());
    }

    #[test]
    fn theta_validation() {
        assert!(ThetaMatrix::new(vec![vec![0.1, 0.2], vec![0.3, 0.1]]).is_err());
        assert!(ThetaMatrix::new(vec![vec![1.1]]).is_err());
        assert!(ThetaMatrix::new(vec![vec![0.1, 0.2]]).is_err());
    }

    #[test]
    fn full_theta_gives_complete_graph() {
        let cfg = uniform_config(&[5, 5], ThetaMatrix::planted(&[1.0, 1.0], 1.0).unwrap(), 3);
        let s = sample_dcsbm(&cfg);
        assert_eq!(s.graph.edge_count(), 45);
        assert_eq!(s.clamped_pairs, 0);
    }

    #[test]
    fn zero_theta_gives_empty_graph() {
        let cfg = uniform_config(&[5, 5], ThetaMatrix::planted(&[0.0, 0.0], 0.0).unwrap(), 3);
        assert_eq!(sample_dcsbm(&cfg).graph.edge_count(), 0);
    }

    #[test]
    fn large_weights_are_clamped() {
        // 1.9 * 1.9 * 1 = 3.61 before clamping; every other pair stays below 1
        let blocks = Partition::whole(4);
        let theta = ThetaMatrix::planted(&[1.0], 0.0).unwrap();
        let cfg = DcsbmConfig::new(blocks, theta, vec![1.9, 1.9, 0.1, 0.1], 1).unwrap();
        for seed in 0..5 {
            let s = sample_dcsbm(&DcsbmConfig { seed, ..cfg.clone() });
            assert_eq!(s.clamped_pairs, 1);
            assert!(s.graph.edges().contains(&(0, 1)));
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let theta = ThetaMatrix::planted(&[0.3; 4], 0.05).unwrap();
        let a = sample_dcsbm(&uniform_config(&[20; 4], theta.clone(), 11));
        let b = sample_dcsbm(&uniform_config(&[20; 4], theta.clone(), 11));
        assert_eq!(a.graph, b.graph);
        let counts: std::collections::HashSet<usize> = (0..10)
            .map(|seed| sample_dcsbm(&uniform_config(&[20; 4], theta.clone(), seed)).graph.edge_count())
            .collect();
        assert!(counts.len() > 1);
    }

    #[test]
    fn theta_draws() {
        let draws = sample_theta_within(0.3, 0.05, 1000, 5).unwrap();
        assert!(draws.iter().all(|&t| (0.25..=0.35).contains(&t)));
        assert_eq!(sample_theta_within(0.3, 0.0, 8, 5).unwrap(), vec![0.3; 8]);
        assert!(sample_theta_within(0.98, 0.05, 8, 5).is_err());
        let many = sample_theta_within(0.3, 0.05, 10_000, 9).unwrap();
        let mean = many.iter().sum::<f64>() / many.len() as f64;
        assert!((mean - 0.3).abs() < 0.005, "{mean}");
    }

    #[test]
    fn degradation_counts() {
        let p = blocks_from_sizes(&[250; 4]).unwrap();
        assert_eq!(degrade_partition(&p, 0.0, 1).unwrap(), p);
        let all = degrade_partition(&p, 1.0, 1).unwrap();
        assert!(p.assignment().iter().zip(all.assignment()).all(|(a, b)| a != b));
        let half = degrade_partition(&p, 0.5, 1).unwrap();
        let changed = p.assignment().iter().zip(half.assignment()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 500);
        assert_eq!(half.community_count(), 4);
        assert!(degrade_partition(&p, 1.2, 1).is_err());
        assert!(degrade_partition(&Partition::whole(10), 0.5, 1).is_err());
    }

    #[test]
    fn equal_blocks() {
        assert_eq!(equal_block_sizes(500, 8), vec![63, 63, 63, 63, 62, 62, 62, 62]);
        assert_eq!(equal_block_sizes(16, 8), vec![2; 8]);
    }
}
