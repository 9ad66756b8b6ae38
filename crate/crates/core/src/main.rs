use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hbdiff::experiment::{self, GraphSource, ScoreSource};
use hbdiff::io::{self, InputFormat};
use hbdiff::ranking::DEFAULT_TIE_EPS;
use hbdiff::{BiasFunction, BiasPair, Entity, Error, ExperimentSuite, GeneratorConfig, HbGraph, Result};

#[derive(Parser)]
#[command(name = "hbdiff", version, about = "Biased exchange-based diffusion on hyper-bag-graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random grouped hb-graphs (JSON plus a metadata sidecar).
    Gen(GenArgs),
    /// Run a bias suite and write matrices, rankings, curves and diagnostics.
    Run(RunArgs),
    /// Paired ranking table for two bias pairs on one graph.
    Curves(CurvesArgs),
    /// Validate an hb-graph file and optionally re-emit it as JSON.
    Ingest(IngestArgs),
}

#[derive(Args, Clone)]
struct GeneratorArgs {
    #[arg(long, default_value_t = 10_000)]
    n_pool: usize,
    /// Hb-edges per graph.
    #[arg(long, default_value_t = 200)]
    edges: usize,
    #[arg(long, default_value_t = 20.0)]
    max_mcard: f64,
    #[arg(long, default_value_t = 5)]
    groups: usize,
    #[arg(long, default_value_t = 10)]
    group_seed_size: usize,
    #[arg(long, default_value_t = 2)]
    seeds_per_edge: usize,
    #[arg(long, default_value_t = 20)]
    central: usize,
    #[arg(long, default_value_t = 1.0)]
    central_prob: f64,
    #[arg(long, default_value_t = 2)]
    multiplicity_max: u32,
    /// Same seed vertices in every hb-edge of a group.
    #[arg(long)]
    fixed_seed_pair: bool,
}

impl GeneratorArgs {
    fn config(&self) -> GeneratorConfig {
        GeneratorConfig {
            n_pool: self.n_pool,
            p: self.edges,
            max_mcard: self.max_mcard,
            n_groups: self.groups,
            group_seed_size: self.group_seed_size,
            seeds_per_edge: self.seeds_per_edge,
            n_central: self.central,
            central_prob: self.central_prob,
            multiplicity_max: self.multiplicity_max,
            fixed_seed_pair: self.fixed_seed_pair,
            rng_seed: 0,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    graphs: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Args)]
struct RunArgs {
    /// `paper15` or a JSON suite file.
    #[arg(long, default_value = "paper15")]
    suite: String,
    /// First generator seed; graphs use seed, seed+1, ...
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    graphs: usize,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    #[arg(long, default_value_t = DEFAULT_TIE_EPS)]
    tie_eps: f64,
    /// Compare this vertex bias (with --bias-e) against the identity reference
    /// instead of running a suite.
    #[arg(long)]
    bias_v: Option<BiasFunction>,
    #[arg(long)]
    bias_e: Option<BiasFunction>,
    /// Rank by the stationary distributions instead of the final iterate.
    #[arg(long)]
    stationary: bool,
    /// Input graph files (hb-graph JSON or co-occurrence CSV) instead of generated graphs.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum EntityArg {
    Vertices,
    Hbedges,
    Both,
}

#[derive(Args)]
struct CurvesArgs {
    /// Graph file; a graph is generated from --seed when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// First ranking's vertex and hb-edge bias.
    #[arg(long, default_value = "id")]
    ref_bias_v: BiasFunction,
    #[arg(long, default_value = "id")]
    ref_bias_e: BiasFunction,
    /// Second ranking's vertex and hb-edge bias.
    #[arg(long, default_value = "exp:2")]
    bias_v: BiasFunction,
    #[arg(long, default_value = "exp:2")]
    bias_e: BiasFunction,
    #[arg(long, value_enum, default_value = "both")]
    entity: EntityArg,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    #[arg(long, default_value_t = DEFAULT_TIE_EPS)]
    tie_eps: f64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Args)]
struct IngestArgs {
    path: PathBuf,
    /// `hbjson` or `cooc_csv`; guessed from the extension when absent.
    #[arg(long)]
    format: Option<InputFormat>,
    /// Write the validated graph as hb-graph JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Curves(a) => curves(a),
        Command::Ingest(a) => ingest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let cat = e.category();
            eprintln!("error [{}]: {e}", cat.name());
            ExitCode::from(cat.exit_code() as u8)
        }
    }
}

fn gen(a: GenArgs) -> Result<()> {
    fs::create_dir_all(&a.out)?;
    for g in hbdiff::batch(&a.generator.config(), a.graphs, a.seed)? {
        let seed = g.meta.rng_seed;
        io::write_graph_json(&g.graph, &a.out.join(format!("graph{seed}.json")))?;
        io::write_json(&g.meta, &a.out.join(format!("graph{seed}.meta.json")))?;
        println!(
            "graph{seed}: {} vertices, {} hb-edges, {} repairs",
            g.graph.n(),
            g.graph.p(),
            g.meta.repairs
        );
    }
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let (experiments, iterations) = match (a.bias_v, a.bias_e) {
        (None, None) if a.suite == "paper15" => (experiment::paper15(), a.iterations),
        (None, None) => {
            let file = experiment::read_suite_file(Path::new(&a.suite))?;
            (file.experiments, file.iterations.unwrap_or(a.iterations))
        }
        (v, e) => {
            let pair = BiasPair::new(v.unwrap_or(BiasFunction::Identity), e.unwrap_or(BiasFunction::Identity));
            (vec![BiasPair::new(BiasFunction::Identity, BiasFunction::Identity), pair], a.iterations)
        }
    };
    let graphs = if a.input.is_empty() {
        GraphSource::Generated {
            config: a.generator.config(),
            count: a.graphs,
            base_seed: a.seed,
        }
    } else {
        GraphSource::Files { paths: a.input.clone() }
    };
    let suite = ExperimentSuite {
        experiments,
        iterations,
        tie_eps: a.tie_eps,
        score_source: if a.stationary {
            ScoreSource::Stationary
        } else {
            ScoreSource::Iterate
        },
        graphs,
    };
    let report = experiment::run_suite(&suite)?;
    experiment::write_report(&suite, &report, &a.out)?;
    let d = &report.diagnostics;
    println!(
        "{} graphs × {} experiments in {:.2}s; max conservation residual {:e}; output in {}",
        d.graphs,
        d.experiments,
        d.runtime_seconds,
        d.max_conservation_residual,
        a.out.display()
    );
    Ok(())
}

fn curves(a: CurvesArgs) -> Result<()> {
    let graph: HbGraph = match &a.input {
        Some(p) => io::ingest(p, InputFormat::from_path(p))?,
        None => hbdiff::generate(&a.generator.config().with_seed(a.seed))?.graph,
    };
    let reference = BiasPair::new(a.ref_bias_v, a.ref_bias_e);
    let other = BiasPair::new(a.bias_v, a.bias_e);
    let entities: &[Entity] = match a.entity {
        EntityArg::Vertices => &[Entity::Vertices],
        EntityArg::Hbedges => &[Entity::HbEdges],
        EntityArg::Both => &[Entity::Vertices, Entity::HbEdges],
    };
    fs::create_dir_all(&a.out)?;
    for &entity in entities {
        let rows = experiment::rank_curves(&graph, reference, other, entity, a.iterations, a.tie_eps)?;
        let name = format!(
            "curves_{}_{}-{}_vs_{}-{}.csv",
            entity.name(),
            reference.vertex,
            reference.hbedge,
            other.vertex,
            other.hbedge
        )
        .replace(':', "");
        let path = a.out.join(name);
        experiment::write_curves_csv(&rows, &path)?;
        println!("{} rows -> {}", rows.len(), path.display());
    }
    Ok(())
}

fn ingest(a: IngestArgs) -> Result<()> {
    let format = a.format.unwrap_or_else(|| InputFormat::from_path(&a.path));
    let g = io::ingest(&a.path, format)?;
    let connected = g.is_connected();
    println!(
        "{}: {} vertices, {} hb-edges, {} incidences, connected: {connected}",
        a.path.display(),
        g.n(),
        g.p(),
        g.nnz()
    );
    if let Some(out) = a.out {
        io::write_graph_json(&g, &out)?;
    }
    if !connected {
        return Err(Error::Disconnected(format!(
            "{} components, {} isolated vertices",
            g.components().count,
            g.isolated_vertices().len()
        )));
    }
    Ok(())
}
