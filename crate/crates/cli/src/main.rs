//! `nsf`: reproduces the benchmark tables and plot data of the NSF
//! analysis, runs landscape censuses and Monte-Carlo searches, and runs the
//! randomised property suites.
//!
//! Every run writes its outputs and a JSON manifest of the resolved
//! settings to the output directory. Exit codes: 0 success, 1 property
//! violation, 2 configuration error, 3 resource or threshold error.

mod commands;
mod config;
mod output;
mod reference;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use nsf_core::analysis::AnalysisError;
use nsf_core::benchmarks::BenchError;
use nsf_core::empirical::EmpiricalError;
use nsf_core::model::ModelError;
use nsf_core::simulate::SimError;

use config::{Manifest, Settings};
use output::{Format, Output};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "NSF_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "nsf-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<EmpiricalError> for CliError {
    fn from(e: EmpiricalError) -> Self {
        match e {
            EmpiricalError::TooLarge { .. } => {
                CliError::Resource(format!("{e}; pass --samples N for a sampled census"))
            }
            EmpiricalError::NoPointsAtTarget { .. } | EmpiricalError::ConstructionFailed { .. } => {
                CliError::Resource(e.to_string())
            }
            EmpiricalError::Invalid(_) | EmpiricalError::Parse(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::NoStartAtLevel { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nsf", version, about = "Neighbourhood search feasibility: tables, censuses, simulations and property suites")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// `key = value` file (keys are the long flag names) or a previous run's
    /// manifest; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: $NSF_OUT_DIR, else ./nsf-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed [default: 1]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core; results do not depend on it [default: 0]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Table format: csv | json | dat [default: csv]
    #[arg(long, global = true)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthetic benchmark tables and plot data
    Bench {
        #[command(subcommand)]
        cmd: BenchCmd,
    },
    /// Counts-based problem classes
    Class {
        #[command(subcommand)]
        cmd: ClassCmd,
    },
    /// The analytic 2-SAT class
    Sat2(Sat2Args),
    /// Random TSP instances under 2-opt
    Tsp {
        #[command(subcommand)]
        cmd: TspCmd,
    },
    /// Monte-Carlo search on a class model
    Simulate {
        #[command(subcommand)]
        cmd: SimCmd,
    },
    /// Randomised property suites and the counter-example fixtures
    Verify(VerifyArgs),
    /// Grid search for NSF weights under which descent loses to blind search
    Falsify(FalsifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum BenchCmd {
    /// Improvement probabilities p^<(k) and pn^<(k) [defaults: k=50, b=1,5,10,50,200]
    Improve(BenchArgs),
    /// Expected descent steps steps(k) [defaults: k=50,30,10,2, b=1,5,10,50,200]
    Steps(BenchArgs),
    /// Blind-seeded descent blsteps(k) and the switch point [defaults: k=50,30,20,10,5, b=5]
    Seeded(BenchArgs),
    /// One-step expected improvement e_imp(k), en_imp(k) [defaults: k=50,30,20,10,2, b=1,5,10,50,200]
    Onestep(BenchArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct BenchArgs {
    /// uniform | linear | linear-table2 | steep-linear | exponential | exponential-table2 [default: uniform]
    #[arg(long)]
    pub class: Option<String>,
    /// Neighbour cost bound(s), comma-separated
    #[arg(long)]
    pub b: Option<String>,
    /// Cost level(s), comma-separated
    #[arg(long)]
    pub k: Option<String>,
    /// seeded: blind phase ends at cost below | at-most the threshold [default: at-most]
    #[arg(long)]
    pub threshold: Option<String>,
    /// seeded: largest threshold in the switch-point study [default: 50]
    #[arg(long)]
    pub switch_hi: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ClassCmd {
    /// steps(K) and feasibility for one or more weight vectors
    Steps(ClassArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct ClassArgs {
    /// table5 | table6 | table7a | table7b | table7c [default: table5 unless --counts is given]
    #[arg(long)]
    pub preset: Option<String>,
    /// Points per cost level from the optimum, comma-separated (odd count)
    #[arg(long)]
    pub counts: Option<String>,
    /// Points in the whole search space
    #[arg(long)]
    pub total: Option<u64>,
    /// Weight vectors r(_,1..K), comma-separated, several separated by ';' [default: the preset's]
    #[arg(long)]
    pub weights: Option<String>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Sat2Args {
    /// Variables [default: 50]
    #[arg(long)]
    pub n_vars: Option<usize>,
    /// Clauses [default: 100]
    #[arg(long)]
    pub clauses: Option<usize>,
    /// Literals per clause [default: 2]
    #[arg(long)]
    pub clause_len: Option<usize>,
    /// Occurrences of each variable [default: 4]
    #[arg(long)]
    pub occurrences: Option<usize>,
    /// Falsification probability of one flip: one-third | one-half [default: one-third]
    #[arg(long)]
    pub rule: Option<String>,
    /// Cost level of the per-distance table [default: 20]
    #[arg(long)]
    pub k: Option<usize>,
    /// Distances in the per-distance table [default: 4]
    #[arg(long)]
    pub deltas: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum TspCmd {
    /// Cost histogram, improvement probabilities and NSF summary
    Census(TspArgs),
    /// Per-(k, δ) NSF and normality verdicts
    Nsf(TspArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct TspArgs {
    /// Cities [default: 10]
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge lengths are drawn from 1..=max-edge [default: 20]
    #[arg(long)]
    pub max_edge: Option<u32>,
    /// Instances pooled into the class [default: 20]
    #[arg(long)]
    pub instances: Option<usize>,
    /// Sample count for a sampled census; exhaustive when absent
    #[arg(long)]
    pub samples: Option<u64>,
    /// Sampled census: cost whose neighbourhoods are surveyed, or `midpoint` [default: midpoint]
    #[arg(long)]
    pub target: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum SimCmd {
    /// Uniform sampling until the target cost
    Blind(SimArgs),
    /// Local descent from a point at cost k
    Descent(SimArgs),
    /// Blind sampling until cost k, then descent
    Seeded(SimArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct SimArgs {
    /// A benchmark name, sat2, a counts preset (table5, table6, table7a..c) or `counts` [default: table5]
    #[arg(long)]
    pub class: Option<String>,
    /// Benchmark neighbour bound [default: 5]
    #[arg(long)]
    pub b: Option<usize>,
    /// Counts classes: points per level (with --class counts)
    #[arg(long)]
    pub counts: Option<String>,
    /// Counts classes: total points (with --class counts)
    #[arg(long)]
    pub total: Option<u64>,
    /// Counts classes: weights r(_,1..K) [default: the preset's last row]
    #[arg(long)]
    pub weights: Option<String>,
    /// Start cost (descent) or threshold (seeded) [default: K for counts classes, 20 otherwise]
    #[arg(long)]
    pub k: Option<usize>,
    /// Stop at cost at most this [default: 0]
    #[arg(long)]
    pub target: Option<u64>,
    /// Independent runs [default: 1000]
    #[arg(long)]
    pub runs: Option<usize>,
    /// Trial cap per run [default: 1000000000]
    #[arg(long)]
    pub cap: Option<u64>,
    /// Descent acceptance: strict | plateau [default: strict]
    #[arg(long)]
    pub rule: Option<String>,
    /// seeded: below | at-most [default: at-most]
    #[arg(long)]
    pub threshold: Option<String>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct VerifyArgs {
    /// Models per property [default: 1000]
    #[arg(long)]
    pub models: Option<usize>,
    /// Comma-separated subset of properties [default: all]
    #[arg(long)]
    pub only: Option<String>,
    /// Also run the weight-grid falsifier on the Table 5 class
    #[arg(long)]
    pub falsify: bool,
    /// Falsifier grid step [default: 0.25]
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Falsifier: smallest weight, and margin above 1 for r(_,1) [default: 0.05]
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct FalsifyArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    /// Grid step [default: 0.25]
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Smallest weight, and margin above 1 for r(_,1) [default: 0.05]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Largest weight [default: 100]
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Share of each combined weight on the improving side; 1 is normal [default: 1]
    #[arg(long)]
    pub share: Option<f64>,
}

/// State shared by every command.
pub struct Ctx {
    pub settings: Settings,
    pub out: Output,
    pub seed: u64,
}

impl Ctx {
    /// Prints to stdout what also goes to a file.
    pub fn show(&self, title: &str, body: &str) {
        println!("== {title}");
        print!("{body}");
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Bench { cmd } => match cmd {
            BenchCmd::Improve(_) => "bench-improve",
            BenchCmd::Steps(_) => "bench-steps",
            BenchCmd::Seeded(_) => "bench-seeded",
            BenchCmd::Onestep(_) => "bench-onestep",
        },
        Command::Class { cmd: ClassCmd::Steps(_) } => "class-steps",
        Command::Sat2(_) => "sat2",
        Command::Tsp { cmd } => match cmd {
            TspCmd::Census(_) => "tsp-census",
            TspCmd::Nsf(_) => "tsp-nsf",
        },
        Command::Simulate { cmd } => match cmd {
            SimCmd::Blind(_) => "simulate-blind",
            SimCmd::Descent(_) => "simulate-descent",
            SimCmd::Seeded(_) => "simulate-seeded",
        },
        Command::Verify(_) => "verify",
        Command::Falsify(_) => "falsify",
    }
}

fn setup(g: &GlobalArgs) -> Result<Ctx, CliError> {
    let mut settings = Settings::load(g.config.as_deref())?;
    let seed = settings.get("seed", g.seed, 1u64)?;
    let format = settings.get("format", g.format, Format::Csv)?;
    let threads = settings.get("threads", g.threads, 0usize)?;
    let out_default = std::env::var(OUT_DIR_ENV).unwrap_or_else(|_| DEFAULT_OUT_DIR.to_string());
    let dir: String = match &g.out {
        Some(p) => p.display().to_string(),
        None => settings.opt::<String>("out", None)?.unwrap_or(out_default),
    };
    if threads > 0 {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let out = Output::new(PathBuf::from(dir), format)?;
    Ok(Ctx { settings, out, seed })
}

fn dispatch(ctx: &mut Ctx, command: Command) -> Result<(), CliError> {
    match command {
        Command::Bench { cmd } => commands::bench(ctx, cmd),
        Command::Class { cmd: ClassCmd::Steps(a) } => commands::class_steps(ctx, a),
        Command::Sat2(a) => commands::sat2(ctx, a),
        Command::Tsp { cmd } => commands::tsp(ctx, cmd),
        Command::Simulate { cmd } => commands::simulate(ctx, cmd),
        Command::Verify(a) => commands::verify(ctx, a),
        Command::Falsify(a) => commands::falsify(ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let mut ctx = match setup(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let result = dispatch(&mut ctx, cli.command);
    let code = result.as_ref().err().map_or(0, CliError::exit_code);
    let manifest = Manifest {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        seed: ctx.seed,
        config: ctx.settings.resolved(),
        outputs: &ctx.out.written.clone(),
        exit_code: code as i32,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    if let Err(e) = ctx.out.write(&format!("{name}.manifest.json"), &text) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    if let Err(e) = result {
        eprintln!("error: {e}");
    }
    ExitCode::from(code)
}
