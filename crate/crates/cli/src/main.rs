use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csvnet::Alpha;

mod commands;

use commands::CliError;

/// Community structure validation for networks.
#[derive(Debug, Parser)]
#[command(name = "csvnet", version, about)]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true, env = "CSVNET_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a partition of a graph.
    Validate(ValidateArgs),
    /// Compare graphs through their communities and cluster them.
    Compare(CompareArgs),
    /// Sample a graph from a degree-corrected block model.
    Generate(GenerateArgs),
    /// Run one of the simulation studies.
    Simulate(SimulateArgs),
    /// Cluster a graph or a distance matrix.
    Cluster(ClusterArgs),
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Tsv,
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    let value: f64 = s.parse().map_err(|e| format!("{e}"))?;
    Alpha::new(value).map_err(|e| e.to_string())
}

fn parse_min_size(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("min size must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Edge list, one `u v` pair per line.
    #[arg(long)]
    graph: PathBuf,
    /// Partition file, one `label community` pair per line.
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    directed: bool,
    #[arg(long, default_value = "0.05", value_parser = parse_alpha)]
    alpha: Alpha,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum IndexArg {
    #[default]
    Ucsv,
    Wcsv,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Two or more undirected edge lists.
    #[arg(required = true, num_args = 2..)]
    graphs: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value = "0.05", value_parser = parse_alpha)]
    alpha: Alpha,
    /// Communities with at most this many nodes are dropped.
    #[arg(long, default_value_t = 5, value_parser = parse_min_size)]
    min_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Index used for the relative scores.
    #[arg(long, value_enum, default_value_t)]
    index: IndexArg,
    /// Also cut the dendrogram into this many clusters (clusters.tsv).
    #[arg(long)]
    clusters: Option<usize>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// JSON file with any of: v, blocks, theta_within, theta_between,
    /// weight_mode, seed. Flags given explicitly override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    v: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    /// One value for every block or a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    theta_within: Option<Vec<f64>>,
    #[arg(long)]
    theta_between: Option<f64>,
    #[arg(long, value_enum)]
    weight_mode: Option<WeightArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Edge list output.
    #[arg(long)]
    out: PathBuf,
    /// Planted blocks as a partition file.
    #[arg(long)]
    partition_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightArg {
    Uniform,
    Pareto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimKind {
    Sim1,
    Sim2,
    Sim3,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(value_enum)]
    sim: SimKind,
    /// Network sizes; sim2 and sim3 use the first value.
    #[arg(long, value_delimiter = ',')]
    v: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Between-block probabilities (sim1 grid or sim2/sim3 levels).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Degradation fractions for sim2.
    #[arg(long, value_delimiter = ',')]
    degradation: Option<Vec<f64>>,
    /// Algorithms for sim3: louvain, fast_greedy, external:<dir>.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long, default_value = "0.05", value_parser = parse_alpha)]
    alpha: Alpha,
    /// Write each sim3 graph here for external clustering.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Results TSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Louvain,
    FastGreedy,
    CompleteLinkage,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long, value_enum, default_value = "louvain")]
    method: Method,
    /// Edge list (louvain, fast-greedy).
    #[arg(long, required_unless_present = "distance")]
    graph: Option<PathBuf>,
    /// Labelled square distance matrix (complete-linkage).
    #[arg(long)]
    distance: Option<PathBuf>,
    /// Number of clusters to cut the dendrogram into.
    #[arg(long)]
    k: Option<usize>,
    /// Newick output for complete-linkage.
    #[arg(long)]
    newick: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Partition TSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Validate(args) => commands::validate(args),
        Command::Compare(args) => commands::compare(args),
        Command::Generate(args) => commands::generate(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Cluster(args) => commands::cluster(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Input(_) => ExitCode::from(2),
                CliError::Internal(_) => ExitCode::from(1),
            }
        }
    }
}
