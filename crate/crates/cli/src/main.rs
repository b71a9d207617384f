use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use medop_core::generate::{GeneratorKind, GeneratorParams, STAR_HUB_WEIGHT};
use medop_core::io::format_edge_list;
use medop_core::run::{run, ConfigSpec, ModelRun, NetworkSource, RunSpec};
use medop_core::{
    consensus_predicate, extract_selection, fixed_point, generate, is_cohesive,
    limit_from_selection, max_cohesive_subset, Error, InfluenceNetwork, Model, PrejudiceConfig,
    SimOptions,
};
use serde_json::{json, Value};

type Result<T> = medop_core::Result<T>;

/// Weighted-median opinion dynamics with prejudice.
///
/// Agent indices in files, flags and output are 1-based.
#[derive(Parser)]
#[command(name = "medop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the dynamics and write traces and summaries.
    Simulate(SimArgs),
    /// Run both models on the same setup and print them side by side.
    Compare(SimArgs),
    /// Fixed point of a fully prejudiced system and its selection matrix.
    FixedPoint {
        #[command(flatten)]
        net: NetworkArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Cohesion of an agent set and its largest cohesive subset.
    Cohesive {
        #[command(flatten)]
        net: NetworkArgs,
        /// Agents to examine, e.g. `--agents 2,3`. Defaults to the
        /// unprejudiced agents of `--config`.
        #[arg(long, value_delimiter = ',')]
        agents: Option<Vec<usize>>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Whether a partially prejudiced system is guaranteed to reach consensus.
    ConsensusCheck {
        #[command(flatten)]
        net: NetworkArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Print a generated network as an edge list.
    Gen {
        kind: Kind,
        #[command(flatten)]
        params: GenParams,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Complete,
    Star,
    ReciprocalPair,
    #[value(alias = "uniform-neighbor-from-edgelist")]
    UniformNeighbor,
    #[value(alias = "random")]
    RandomRowStochastic,
}

impl From<Kind> for GeneratorKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Complete => GeneratorKind::Complete,
            Kind::Star => GeneratorKind::Star,
            Kind::ReciprocalPair => GeneratorKind::ReciprocalPair,
            Kind::UniformNeighbor => GeneratorKind::UniformNeighbor,
            Kind::RandomRowStochastic => GeneratorKind::RandomRowStochastic,
        }
    }
}

#[derive(Args)]
struct GenParams {
    /// Number of agents.
    #[arg(long)]
    n: Option<usize>,
    /// Adjacency edge list for uniform-neighbor.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Weight each star leaf places on the hub.
    #[arg(long, default_value_t = STAR_HUB_WEIGHT)]
    hub_weight: f64,
    /// Edge probability for random-row-stochastic.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Leave out self-loops in uniform-neighbor.
    #[arg(long)]
    no_self_loops: bool,
}

impl GenParams {
    fn resolve(&self, kind: GeneratorKind) -> Result<GeneratorParams> {
        if kind == GeneratorKind::UniformNeighbor {
            let path = self
                .edges
                .as_ref()
                .ok_or_else(|| Error::Input("uniform-neighbor needs --edges PATH".into()))?;
            return GeneratorParams::uniform_neighbor_from_file(path, !self.no_self_loops);
        }
        let n = self
            .n
            .ok_or_else(|| Error::Input(format!("{kind} needs --n N")))?;
        Ok(match kind {
            GeneratorKind::Complete => GeneratorParams::Complete { n },
            GeneratorKind::Star => GeneratorParams::Star { n, hub_weight: self.hub_weight },
            GeneratorKind::ReciprocalPair => GeneratorParams::ReciprocalPair { n },
            GeneratorKind::RandomRowStochastic => {
                GeneratorParams::RandomRowStochastic { n, density: self.density }
            }
            GeneratorKind::UniformNeighbor => unreachable!(),
        })
    }
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct Source {
    /// Edge-list file (`src dst weight`, 1-based, `#` comments).
    #[arg(long)]
    network: Option<PathBuf>,
    /// Generate the network instead of reading it.
    #[arg(long = "gen", value_name = "KIND")]
    generator: Option<Kind>,
}

#[derive(Args)]
struct NetworkArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    params: GenParams,
    /// Divide each row of the edge list by its sum.
    #[arg(long)]
    normalize: bool,
    /// Seed for every random choice (generated networks, lambda, x0).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl NetworkArgs {
    fn source(&self) -> Result<NetworkSource> {
        match (&self.source.network, self.source.generator) {
            (Some(path), _) => Ok(NetworkSource::File {
                path: path.clone(),
                normalize: self.normalize,
            }),
            (None, Some(kind)) => Ok(NetworkSource::Generated(self.params.resolve(kind.into())?)),
            (None, None) => Err(Error::Input("give --network PATH or --gen KIND".into())),
        }
    }
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration with lambda, unprejudiced, u and x0.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the initial state as the prejudice.
    #[arg(long)]
    u_from_x0: bool,
}

impl ConfigArgs {
    fn spec(&self) -> Result<ConfigSpec> {
        match &self.config {
            Some(path) => ConfigSpec::read(path),
            None => Ok(ConfigSpec::default()),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelChoice {
    Wm,
    Fj,
    Both,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long, value_enum, default_value = "wm")]
    model: ModelChoice,
    #[arg(long, default_value_t = SimOptions::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = SimOptions::default().max_steps)]
    max_steps: usize,
    #[arg(long, default_value_t = SimOptions::default().cycle_window)]
    cycle_window: usize,
    /// Record every k-th state in the trace.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Directory for trace_<model>.csv and summary_<model>.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SimArgs {
    fn run_spec(&self, models: Vec<Model>) -> Result<RunSpec> {
        let mut spec = RunSpec::new(self.net.source()?);
        spec.config = self.cfg.spec()?;
        spec.models = models;
        spec.tol = self.tol;
        spec.max_steps = self.max_steps;
        spec.cycle_window = self.cycle_window;
        spec.stride = self.stride;
        spec.seed = self.net.seed;
        spec.u_from_x0 = self.cfg.u_from_x0;
        spec.out_dir = self.out.clone();
        Ok(spec)
    }
}

fn models(choice: ModelChoice) -> Vec<Model> {
    match choice {
        ModelChoice::Wm => vec![Model::Wm],
        ModelChoice::Fj => vec![Model::Fj],
        ModelChoice::Both => vec![Model::Wm, Model::Fj],
    }
}

fn one_based(agents: &[usize]) -> Vec<usize> {
    agents.iter().map(|i| i + 1).collect()
}

fn zero_based(agents: &[usize], n: usize) -> Result<Vec<usize>> {
    agents
        .iter()
        .map(|&a| {
            if a == 0 || a > n {
                Err(Error::Input(format!("agent {a} outside 1..={n}")))
            } else {
                Ok(a - 1)
            }
        })
        .collect()
}

fn setup(net: &NetworkArgs, cfg: &ConfigArgs) -> Result<(InfluenceNetwork, PrejudiceConfig, Vec<f64>)> {
    let mut spec = RunSpec::new(net.source()?);
    spec.config = cfg.spec()?;
    spec.seed = net.seed;
    spec.u_from_x0 = cfg.u_from_x0;
    spec.materialize()
}

fn summaries(runs: &[ModelRun]) -> Value {
    Value::Array(runs.iter().map(|r| json!(r.summary)).collect())
}

fn compare_table(runs: &[ModelRun]) -> String {
    let mut out = format!("{:<6}{:<16}{:>10}{:>10}  final state\n", "model", "stop", "steps", "clusters");
    for r in runs {
        let s = &r.summary;
        let state: Vec<String> = r.trace.last().iter().map(|v| format!("{v:.6}")).collect();
        out += &format!(
            "{:<6}{:<16}{:>10}{:>10}  {}\n",
            s.model.as_str(),
            s.stop_reason.as_str(),
            s.steps,
            s.clusters,
            state.join(" ")
        );
    }
    out
}

fn execute(command: Command) -> Result<String> {
    match command {
        Command::Simulate(args) => {
            let runs = run(&args.run_spec(models(args.model))?)?;
            Ok(format!("{:#}\n", summaries(&runs)))
        }
        Command::Compare(args) => {
            let runs = run(&args.run_spec(vec![Model::Wm, Model::Fj])?)?;
            Ok(compare_table(&runs))
        }
        Command::FixedPoint { net, cfg, tol } => {
            let (net, cfg, _) = setup(&net, &cfg)?;
            let (xstar, iterations) = fixed_point(&net, &cfg, tol)?;
            let sel = extract_selection(&xstar, &net, &cfg)?;
            let solved = limit_from_selection(&sel, &cfg)?;
            let report = json!({
                "fixed_point": xstar.as_slice(),
                "iterations": iterations,
                "selection": one_based(&sel.k),
                "closed_form": solved.as_slice(),
                "closed_form_gap": solved.sup_distance(&xstar),
            });
            Ok(format!("{report:#}\n"))
        }
        Command::Cohesive { net, agents, cfg } => {
            let (net, cfg, _) = setup(&net, &cfg)?;
            let set = match agents {
                Some(a) => zero_based(&a, net.n())?,
                None => cfg.unprejudiced(),
            };
            let report = max_cohesive_subset(&set, &net)?;
            let peel: Vec<Value> = report
                .peel_order
                .iter()
                .map(|&(i, mass)| json!({"agent": i + 1, "inside_mass": mass}))
                .collect();
            let out = json!({
                "agents": one_based(&set),
                "cohesive": !set.is_empty() && is_cohesive(&set, &net)?,
                "maximal_subset": one_based(&report.maximal_subset),
                "peel_order": peel,
            });
            Ok(format!("{out:#}\n"))
        }
        Command::ConsensusCheck { net, cfg } => {
            let (net, cfg, _) = setup(&net, &cfg)?;
            let guaranteed = consensus_predicate(&net, &cfg)?;
            let blocking = max_cohesive_subset(&cfg.unprejudiced(), &net)?.maximal_subset;
            let out = json!({
                "consensus_guaranteed": guaranteed,
                "prejudiced": one_based(&cfg.prejudiced()),
                "unprejudiced": one_based(&cfg.unprejudiced()),
                "cohesive_unprejudiced": one_based(&blocking),
            });
            Ok(format!("{out:#}\n"))
        }
        Command::Gen { kind, params, seed, out } => {
            let net = generate(&params.resolve(kind.into())?, seed)?;
            let text = format_edge_list(&net);
            match out {
                Some(path) => {
                    fs::write(&path, text).map_err(|source| Error::Io { path, source })?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("medop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
