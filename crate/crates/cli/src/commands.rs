use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use csvnet::clustering::{
    complete_linkage, cut_dendrogram, fast_greedy, louvain, to_newick, write_labeled_matrix, DistanceMatrix,
};
use csvnet::compare::{compare_all, CompareOptions, IndexKind, PairDetail};
use csvnet::dcsbm::{blocks_from_sizes, equal_block_sizes, sample_dcsbm, DcsbmConfig, ThetaMatrix, WeightMode};
use csvnet::graph::{load_graph, write_edge_list};
use csvnet::indices::{csv_report, REPORT_SCHEMA_VERSION};
use csvnet::partition::{load_partition, write_partition};
use csvnet::simharness::{
    rows_to_tsv, run_sim1, run_sim2, run_sim3, Algorithm, PlantedModel, Sim1Config, Sim2Config, Sim3Config,
};
use csvnet::{Alpha, Error, Graph};

use super::{
    ClusterArgs, CompareArgs, Format, GenerateArgs, IndexArg, Method, SimKind, SimulateArgs, ValidateArgs, WeightArg,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad input files or parameters.
    Input(Error),
    /// Anything else, such as failing to write results.
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(e) => write!(f, "{e}"),
            CliError::Internal(msg) => f.write_str(msg),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Input(e)
    }
}

type CliResult = Result<(), CliError>;

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    std::fs::write(path, bytes).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult {
    match path {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::Internal(format!("cannot write to stdout: {e}"))),
    }
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn validate(args: ValidateArgs) -> CliResult {
    let (graph, _) = load_graph(&args.graph, args.directed)?;
    let partition = load_partition(&args.partition, &graph)?;
    let report = csv_report(&graph, &partition, args.alpha)?;
    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Tsv => report.to_tsv(),
    };
    emit(args.out.as_deref(), text.as_bytes())
}

/// File stems, with `_2`, `_3`, ... appended to repeated stems.
fn graph_names(paths: &[PathBuf]) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    paths
        .iter()
        .map(|p| {
            let stem = p
                .file_stem()
                .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            let count = seen.entry(stem.clone()).or_insert(0);
            *count += 1;
            if *count == 1 {
                stem
            } else {
                format!("{stem}_{count}")
            }
        })
        .collect()
}

#[derive(Serialize)]
struct CompareSummary<'a> {
    schema_version: u32,
    graphs: &'a [String],
    alpha: Alpha,
    min_size: usize,
    index: IndexKind,
    seed: u64,
    failed_pairs: usize,
    r: &'a [Vec<f64>],
    undefined: &'a [Vec<bool>],
    pairs: &'a [PairDetail],
}

fn matrix_tsv(labels: &[String], rows: &[Vec<f64>]) -> Vec<u8> {
    to_bytes(|buf| {
        writeln!(buf, "# schema_version={REPORT_SCHEMA_VERSION}")?;
        write_labeled_matrix(labels, rows, buf)
    })
}

pub fn compare(args: CompareArgs) -> CliResult {
    let names = graph_names(&args.graphs);
    let graphs = args
        .graphs
        .iter()
        .zip(&names)
        .map(|(path, name)| Ok((name.clone(), load_graph(path, false)?.0)))
        .collect::<Result<Vec<(String, Graph)>, Error>>()?;
    let options = CompareOptions {
        alpha: args.alpha,
        min_size: args.min_size,
        index: match args.index {
            IndexArg::Ucsv => IndexKind::Ucsv,
            IndexArg::Wcsv => IndexKind::Wcsv,
        },
    };
    let result = compare_all(&graphs, &options, args.seed)?;
    if result.failed_pairs() == result.pairs.len() {
        let first = result.pairs[0].error.clone().unwrap_or_default();
        return Err(CliError::Input(Error::InvalidParameter(format!(
            "every comparison failed (first: {first})"
        ))));
    }
    let dendrogram = result.dendrogram()?;

    let dir = &args.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))?;
    write_file(&dir.join("R.tsv"), &matrix_tsv(&result.names, &result.r))?;
    write_file(&dir.join("S.tsv"), &matrix_tsv(&result.names, &result.s))?;
    write_file(&dir.join("D.tsv"), &matrix_tsv(&result.names, &result.d))?;
    write_file(&dir.join("dendrogram.nwk"), format!("{}\n", to_newick(&dendrogram)).as_bytes())?;
    if let Some(k) = args.clusters {
        let ids = cut_dendrogram(&dendrogram, k)?;
        let text: String = result.names.iter().zip(&ids).map(|(n, c)| format!("{n}\t{c}\n")).collect();
        write_file(&dir.join("clusters.tsv"), text.as_bytes())?;
    }
    let summary = CompareSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        graphs: &result.names,
        alpha: options.alpha,
        min_size: options.min_size,
        index: options.index,
        seed: args.seed,
        failed_pairs: result.failed_pairs(),
        r: &result.r,
        undefined: &result.undefined,
        pairs: &result.pairs,
    };
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Internal(e.to_string()))?;
    json.push('\n');
    write_file(&dir.join("summary.json"), json.as_bytes())
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateConfig {
    v: Option<usize>,
    blocks: Option<usize>,
    theta_within: Option<OneOrMany>,
    theta_between: Option<f64>,
    weight_mode: Option<WeightMode>,
    seed: Option<u64>,
}

pub fn generate(args: GenerateArgs) -> CliResult {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            serde_json::from_str::<GenerateConfig>(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?
        }
        None => GenerateConfig::default(),
    };
    let v = args.v.or(file.v).unwrap_or(500);
    let p = args.blocks.or(file.blocks).unwrap_or(8);
    let within = match args.theta_within.map(OneOrMany::Many).or(file.theta_within) {
        None => vec![0.3; p],
        Some(OneOrMany::One(x)) => vec![x; p],
        Some(OneOrMany::Many(xs)) if xs.len() == 1 => vec![xs[0]; p],
        Some(OneOrMany::Many(xs)) => xs,
    };
    let between = args.theta_between.or(file.theta_between).unwrap_or(0.01);
    let mode = match args.weight_mode {
        Some(WeightArg::Uniform) => WeightMode::Uniform,
        Some(WeightArg::Pareto) => WeightMode::Pareto,
        None => file.weight_mode.unwrap_or_default(),
    };
    let seed = args.seed.or(file.seed).unwrap_or(0);
    if p == 0 || v < p {
        return Err(Error::InvalidParameter(format!("cannot split {v} nodes into {p} blocks")).into());
    }
    let blocks = blocks_from_sizes(&equal_block_sizes(v, p))?;
    let theta = ThetaMatrix::planted(&within, between)?;
    let sample = sample_dcsbm(&DcsbmConfig::with_weight_mode(blocks, theta, mode, seed)?);
    write_file(&args.out, &to_bytes(|buf| write_edge_list(&sample.graph, buf)))?;
    if let Some(path) = &args.partition_out {
        write_file(path, &to_bytes(|buf| write_partition(&sample.graph, &sample.partition, buf)))?;
    }
    Ok(())
}

pub fn simulate(args: SimulateArgs) -> CliResult {
    let mut model = match args.sim {
        SimKind::Sim1 => PlantedModel::default(),
        // degradation and algorithm studies fix theta_rr at the mean
        SimKind::Sim2 | SimKind::Sim3 => PlantedModel {
            theta_within_halfwidth: 0.0,
            ..PlantedModel::default()
        },
    };
    model.alpha = args.alpha;
    if let Some(b) = args.blocks {
        model.blocks = b;
    }
    let rows = match args.sim {
        SimKind::Sim1 => {
            let d = Sim1Config::default();
            run_sim1(&Sim1Config {
                v_list: args.v.unwrap_or(d.v_list),
                theta_between: args.grid.unwrap_or(d.theta_between),
                replicates: args.replicates.unwrap_or(d.replicates),
                model,
                seed: args.seed,
            })?
        }
        SimKind::Sim2 => {
            let d = Sim2Config::default();
            run_sim2(&Sim2Config {
                v: args.v.and_then(|v| v.first().copied()).unwrap_or(d.v),
                theta_between: args.grid.unwrap_or(d.theta_between),
                degradation: args.degradation.unwrap_or(d.degradation),
                replicates: args.replicates.unwrap_or(d.replicates),
                model,
                seed: args.seed,
            })?
        }
        SimKind::Sim3 => {
            let d = Sim3Config::default();
            let algorithms = match args.algorithms {
                Some(names) => names.iter().map(|n| n.parse()).collect::<Result<Vec<Algorithm>, Error>>()?,
                None => d.algorithms,
            };
            if let Some(dir) = &args.dump_dir {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))?;
            }
            run_sim3(&Sim3Config {
                v: args.v.and_then(|v| v.first().copied()).unwrap_or(d.v),
                theta_between: args.grid.unwrap_or(d.theta_between),
                replicates: args.replicates.unwrap_or(d.replicates),
                algorithms,
                model,
                seed: args.seed,
                dump_dir: args.dump_dir,
            })?
        }
    };
    emit(args.out.as_deref(), rows_to_tsv(&rows).as_bytes())
}

pub fn cluster(args: ClusterArgs) -> CliResult {
    match args.method {
        Method::Louvain | Method::FastGreedy => {
            let Some(path) = &args.graph else {
                return Err(Error::InvalidParameter("--graph is required for this method".into()).into());
            };
            let (graph, _) = load_graph(path, false)?;
            let partition = match args.method {
                Method::Louvain => louvain(&graph, args.seed)?,
                _ => fast_greedy(&graph)?,
            };
            emit(
                args.out.as_deref(),
                &to_bytes(|buf| write_partition(&graph, &partition, buf)),
            )
        }
        Method::CompleteLinkage => {
            let Some(path) = &args.distance else {
                return Err(Error::InvalidParameter("--distance is required for complete-linkage".into()).into());
            };
            let file = std::fs::File::open(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            let dist = DistanceMatrix::read_tsv(std::io::BufReader::new(file), path)?;
            let dendrogram = complete_linkage(&dist)?;
            let newick = format!("{}\n", to_newick(&dendrogram));
            if let Some(nwk) = &args.newick {
                write_file(nwk, newick.as_bytes())?;
            }
            match args.k {
                Some(k) => {
                    let ids = cut_dendrogram(&dendrogram, k)?;
                    let text: String = dist.labels().iter().zip(&ids).map(|(l, c)| format!("{l}\t{c}\n")).collect();
                    emit(args.out.as_deref(), text.as_bytes())
                }
                None if args.newick.is_none() => emit(args.out.as_deref(), newick.as_bytes()),
                None => Ok(()),
            }
        }
    }
}
