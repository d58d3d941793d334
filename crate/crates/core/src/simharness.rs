//! Monte-Carlo studies of the validation indices on planted partitions.
//!
//! * `sim1`: indices of the true partition as network size and the
//!   between-block probability vary.
//! * `sim2`: indices of the reference blocks on graphs generated from
//!   progressively degraded blocks.
//! * `sim3`: indices of partitions found by clustering algorithms.
//!
//! Every (cell, replicate) gets its own seed derived from the base seed and
//! its coordinates, so results do not depend on scheduling.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::clustering::{fast_greedy, louvain, modularity};
use crate::dcsbm::{
    blocks_from_sizes, degrade_partition, equal_block_sizes, sample_dcsbm, sample_theta_within, DcsbmConfig,
    ThetaMatrix, WeightMode,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::indices::{csv_report, Alpha};
use crate::partition::{load_partition, Partition};
use crate::rng::derive_seed;

pub const SIM_SCHEMA_VERSION: u32 = 1;

const SIM1_TAG: u64 = 1;
const SIM2_TAG: u64 = 2;
const SIM3_TAG: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResultRow {
    pub sim_id: String,
    pub replicate: usize,
    pub v: usize,
    pub theta_between: f64,
    /// Modularity of the true (sim1, sim3) or reference (sim2) partition;
    /// `None` on an edgeless draw.
    pub modularity: Option<f64>,
    pub degradation_q: Option<f64>,
    pub algorithm: Option<String>,
    pub communities: usize,
    pub ucsv: f64,
    pub wcsv: f64,
    pub seed: u64,
}

/// `0, step, 2 step, ..., hi` computed from integer multiples.
pub fn linear_grid(hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![0.0];
    }
    let denom = (points - 1) as f64;
    (0..points).map(|i| hi * i as f64 / denom).collect()
}

/// Shared generator settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedModel {
    pub blocks: usize,
    pub theta_within_mean: f64,
    pub theta_within_halfwidth: f64,
    pub weight_mode: WeightMode,
    pub alpha: Alpha,
}

impl Default for PlantedModel {
    fn default() -> Self {
        PlantedModel {
            blocks: 8,
            theta_within_mean: 0.3,
            theta_within_halfwidth: 0.05,
            weight_mode: WeightMode::Uniform,
            alpha: Alpha::default(),
        }
    }
}

impl PlantedModel {
    fn draw(&self, blocks: &Partition, theta_between: f64, seed: u64) -> Result<Graph> {
        let within = sample_theta_within(
            self.theta_within_mean,
            self.theta_within_halfwidth,
            self.blocks,
            derive_seed(seed, &[0]),
        )?;
        let theta = ThetaMatrix::planted(&within, theta_between)?;
        let config = DcsbmConfig::with_weight_mode(blocks.clone(), theta, self.weight_mode, derive_seed(seed, &[1]))?;
        Ok(sample_dcsbm(&config).graph)
    }

    fn blocks(&self, v: usize) -> Result<Partition> {
        if self.blocks == 0 || v < self.blocks {
            return Err(Error::InvalidParameter(format!("cannot split {v} nodes into {} blocks", self.blocks)));
        }
        blocks_from_sizes(&equal_block_sizes(v, self.blocks))
    }
}

struct Scored {
    modularity: Option<f64>,
    communities: usize,
    ucsv: f64,
    wcsv: f64,
}

fn score(graph: &Graph, scored: &Partition, reference: &Partition, alpha: Alpha) -> Result<Scored> {
    let report = csv_report(graph, scored, alpha)?;
    let modularity = match modularity(graph, reference) {
        Ok(q) => Some(q),
        Err(Error::EdgelessGraph) => None,
        Err(e) => return Err(e),
    };
    Ok(Scored {
        modularity,
        communities: scored.community_count(),
        ucsv: report.ucsv,
        wcsv: report.wcsv,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sim1Config {
    pub v_list: Vec<usize>,
    pub theta_between: Vec<f64>,
    pub replicates: usize,
    pub model: PlantedModel,
    pub seed: u64,
}

impl Default for Sim1Config {
    fn default() -> Self {
        Sim1Config {
            v_list: vec![500],
            theta_between: linear_grid(0.3, 11),
            replicates: 20,
            model: PlantedModel::default(),
            seed: 0,
        }
    }
}

pub fn run_sim1(config: &Sim1Config) -> Result<Vec<SimResultRow>> {
    let cells: Vec<(usize, usize, usize)> = config
        .v_list
        .iter()
        .enumerate()
        .flat_map(|(vi, _)| {
            (0..config.theta_between.len()).flat_map(move |ti| (0..config.replicates).map(move |rep| (vi, ti, rep)))
        })
        .collect();
    let mut rows = cells
        .par_iter()
        .map(|&(vi, ti, rep)| {
            let v = config.v_list[vi];
            let theta_between = config.theta_between[ti];
            let seed = derive_seed(config.seed, &[SIM1_TAG, v as u64, ti as u64, rep as u64]);
            let blocks = config.model.blocks(v)?;
            let graph = config.model.draw(&blocks, theta_between, seed)?;
            let s = score(&graph, &blocks, &blocks, config.model.alpha)?;
            Ok(SimResultRow {
                sim_id: "sim1".into(),
                replicate: rep,
                v,
                theta_between,
                modularity: s.modularity,
                degradation_q: None,
                algorithm: None,
                communities: s.communities,
                ucsv: s.ucsv,
                wcsv: s.wcsv,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sim2Config {
    pub v: usize,
    pub theta_between: Vec<f64>,
    pub degradation: Vec<f64>,
    pub replicates: usize,
    pub model: PlantedModel,
    pub seed: u64,
}

/// Between-block levels shared by the degradation and algorithm studies.
pub fn default_theta_levels() -> Vec<f64> {
    vec![0.01, 0.03, 0.06, 0.1, 0.2, 0.3]
}

fn fixed_within() -> PlantedModel {
    PlantedModel {
        theta_within_halfwidth: 0.0,
        ..PlantedModel::default()
    }
}

impl Default for Sim2Config {
    fn default() -> Self {
        Sim2Config {
            v: 500,
            theta_between: default_theta_levels(),
            degradation: linear_grid(1.0, 21),
            replicates: 20,
            model: fixed_within(),
            seed: 0,
        }
    }
}

/// The reference communities are the planted blocks; each replicate draws a
/// graph whose blocks are a degraded copy of them and scores the reference.
pub fn run_sim2(config: &Sim2Config) -> Result<Vec<SimResultRow>> {
    let reference = config.model.blocks(config.v)?;
    let cells: Vec<(usize, usize, usize)> = (0..config.theta_between.len())
        .flat_map(|ti| {
            (0..config.degradation.len()).flat_map(move |qi| (0..config.replicates).map(move |rep| (ti, qi, rep)))
        })
        .collect();
    let mut rows = cells
        .par_iter()
        .map(|&(ti, qi, rep)| {
            let theta_between = config.theta_between[ti];
            let q = config.degradation[qi];
            let seed = derive_seed(config.seed, &[SIM2_TAG, ti as u64, qi as u64, rep as u64]);
            let degraded = degrade_partition(&reference, q, derive_seed(seed, &[2]))?;
            let graph = config.model.draw(&degraded, theta_between, seed)?;
            let s = score(&graph, &reference, &reference, config.model.alpha)?;
            Ok(SimResultRow {
                sim_id: "sim2".into(),
                replicate: rep,
                v: config.v,
                theta_between,
                modularity: s.modularity,
                degradation_q: Some(q),
                algorithm: None,
                communities: s.communities,
                ucsv: s.ucsv,
                wcsv: s.wcsv,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    Louvain,
    FastGreedy,
    /// Partitions computed elsewhere, read from
    /// `<dir>/sim3_l<level>_r<replicate>.tsv`.
    External(PathBuf),
}

impl Algorithm {
    pub fn name(&self) -> String {
        match self {
            Algorithm::Louvain => "louvain".into(),
            Algorithm::FastGreedy => "fast_greedy".into(),
            Algorithm::External(dir) => format!("external:{}", dir.display()),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "louvain" => Ok(Algorithm::Louvain),
            "fast_greedy" | "fast-greedy" => Ok(Algorithm::FastGreedy),
            _ => match s.strip_prefix("external:") {
                Some(dir) if !dir.is_empty() => Ok(Algorithm::External(PathBuf::from(dir))),
                _ => Err(Error::InvalidParameter(format!("unknown algorithm '{s}'"))),
            },
        }
    }
}

/// Base name shared by a dumped sim3 graph and its external partition.
pub fn sim3_stem(level: usize, replicate: usize) -> String {
    format!("sim3_l{level}_r{replicate}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sim3Config {
    pub v: usize,
    pub theta_between: Vec<f64>,
    pub replicates: usize,
    pub algorithms: Vec<Algorithm>,
    pub model: PlantedModel,
    pub seed: u64,
    /// When set, every generated graph is written here as
    /// `sim3_l<level>_r<replicate>.edges` plus a `.nodes` list for external
    /// clustering.
    pub dump_dir: Option<PathBuf>,
}

impl Default for Sim3Config {
    fn default() -> Self {
        Sim3Config {
            v: 500,
            theta_between: default_theta_levels(),
            replicates: 20,
            algorithms: vec![Algorithm::Louvain, Algorithm::FastGreedy],
            model: fixed_within(),
            seed: 0,
            dump_dir: None,
        }
    }
}

pub fn run_sim3(config: &Sim3Config) -> Result<Vec<SimResultRow>> {
    let truth = config.model.blocks(config.v)?;
    let cells: Vec<(usize, usize)> = (0..config.theta_between.len())
        .flat_map(|ti| (0..config.replicates).map(move |rep| (ti, rep)))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(ti, rep)| {
            let theta_between = config.theta_between[ti];
            let seed = derive_seed(config.seed, &[SIM3_TAG, ti as u64, rep as u64]);
            let graph = config.model.draw(&truth, theta_between, seed)?;
            if let Some(dir) = &config.dump_dir {
                dump_graph(dir, &sim3_stem(ti, rep), &graph)?;
            }
            config
                .algorithms
                .iter()
                .map(|alg| {
                    let found = match alg {
                        Algorithm::Louvain => louvain(&graph, derive_seed(seed, &[3]))?,
                        Algorithm::FastGreedy => fast_greedy(&graph)?,
                        Algorithm::External(dir) => {
                            load_partition(dir.join(format!("{}.tsv", sim3_stem(ti, rep))), &graph)?
                        }
                    };
                    let s = score(&graph, &found, &truth, config.model.alpha)?;
                    Ok(SimResultRow {
                        sim_id: "sim3".into(),
                        replicate: rep,
                        v: config.v,
                        theta_between,
                        modularity: s.modularity,
                        degradation_q: None,
                        algorithm: Some(alg.name()),
                        communities: s.communities,
                        ucsv: s.ucsv,
                        wcsv: s.wcsv,
                        seed,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<SimResultRow> = per_cell.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}

/// Writes `<stem>.edges` and `<stem>.nodes`; the node list carries the
/// isolated nodes an edge list cannot represent.
fn dump_graph(dir: &std::path::Path, stem: &str, graph: &Graph) -> Result<()> {
    let edges = dir.join(format!("{stem}.edges"));
    let mut buf = Vec::new();
    crate::graph::write_edge_list(graph, &mut buf).map_err(|e| Error::io(&edges, e))?;
    std::fs::write(&edges, buf).map_err(|e| Error::io(&edges, e))?;
    let nodes = dir.join(format!("{stem}.nodes"));
    let mut list = graph.labels().join("\n");
    list.push('\n');
    std::fs::write(&nodes, list).map_err(|e| Error::io(&nodes, e))
}

fn sort_rows(rows: &mut [SimResultRow]) {
    rows.sort_by(|a, b| {
        (&a.sim_id, a.v)
            .cmp(&(&b.sim_id, b.v))
            .then(a.theta_between.total_cmp(&b.theta_between))
            .then(a.degradation_q.unwrap_or(0.0).total_cmp(&b.degradation_q.unwrap_or(0.0)))
            .then(a.algorithm.cmp(&b.algorithm))
            .then(a.replicate.cmp(&b.replicate))
    });
}

pub const SIM_TSV_HEADER: &str =
    "sim_id\treplicate\tv\ttheta_between\tmodularity\tdegradation_q\talgorithm\tcommunities\tucsv\twcsv\tseed";

/// Tidy TSV with a schema comment line; missing fields are written as `NA`.
pub fn rows_to_tsv(rows: &[SimResultRow]) -> String {
    fn opt<T: std::fmt::Display>(x: &Option<T>) -> String {
        x.as_ref().map_or_else(|| "NA".to_owned(), T::to_string)
    }
    let mut out = format!("# schema_version={SIM_SCHEMA_VERSION}\n{SIM_TSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.sim_id,
            r.replicate,
            r.v,
            r.theta_between,
            opt(&r.modularity),
            opt(&r.degradation_q),
            opt(&r.algorithm),
            r.communities,
            r.ucsv,
            r.wcsv,
            r.seed
        );
    }
    out
}

/// Median of the finite values, `None` when there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}
