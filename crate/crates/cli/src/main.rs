//! `affwords`: simulate a tabletop world, train the affordance-word network and the
//! gesture models, and query them.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use affordance_words::Error as CoreError;
use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "affwords", version, about = "Affordance-word models for interpreting observed actions")]
struct Cli {
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct EvidenceArgs {
    /// Hard evidence as Var=value pairs, comma separated or repeated.
    #[arg(short, long, value_delimiter = ',', value_name = "VAR=VALUE")]
    evidence: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample trials, descriptions and hand trajectories.
    Simulate,
    /// Learn the network structure and parameters from the simulated trials.
    TrainBn,
    /// Train one gesture model per action from the simulated trajectories.
    TrainHmm,
    /// Posterior of some variables, optionally fused with gesture evidence.
    Infer {
        #[command(flatten)]
        evidence: EvidenceArgs,
        /// Variables to infer.
        #[arg(short, long, value_delimiter = ',', required = true, value_name = "VAR")]
        infer: Vec<String>,
        /// Soft action evidence: an action label or label=weight pairs.
        #[arg(long)]
        soft: Option<String>,
        /// Trajectory CSV scored by the gesture models.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Action recognition and effect prediction over growing trajectory prefixes.
    Anticipate {
        /// Trajectory CSV to observe frame by frame.
        #[arg(long)]
        trajectory: PathBuf,
        #[command(flatten)]
        evidence: EvidenceArgs,
        /// Effect variable predicted at each prefix.
        #[arg(short, long, default_value = "ObjVel")]
        infer: String,
    },
    /// Best-scoring verbal descriptions for the evidence.
    Describe {
        #[command(flatten)]
        evidence: EvidenceArgs,
        /// Soft action evidence: an action label or label=weight pairs.
        #[arg(long)]
        soft: Option<String>,
        /// Trajectory CSV scored by the gesture models.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Sweep the gesture confidence on one action.
    Sweep {
        #[command(flatten)]
        evidence: EvidenceArgs,
        /// Action receiving confidence p.
        #[arg(short, long)]
        target: String,
        /// Variable to report; Action when omitted.
        #[arg(short, long)]
        infer: Option<String>,
    },
}

/// Malformed command-line input.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn category(err: &anyhow::Error) -> (u8, &'static str) {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return (2, "usage");
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::UnknownVariable(_)
                | CoreError::UnknownValue { .. }
                | CoreError::InferObservedOverlap(_)
                | CoreError::ActionObserved
                | CoreError::ImpossibleEvidence => (4, "evidence"),
                CoreError::Schema(_) | CoreError::Parse { .. } | CoreError::Format(_) => (5, "model"),
                _ => (1, "runtime"),
            };
        }
        if cause.downcast_ref::<toml::de::Error>().is_some() {
            return (6, "config");
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return (3, "file");
        }
    }
    (1, "runtime")
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.paths.out_dir = out;
    }
    match cli.command {
        Command::Simulate => commands::simulate(&config),
        Command::TrainBn => commands::train_bn(&config),
        Command::TrainHmm => commands::train_hmm(&config),
        Command::Infer { evidence, infer, soft, trajectory } => {
            commands::infer(&config, &evidence.evidence, &infer, soft.as_deref(), trajectory.as_deref())
        }
        Command::Anticipate { trajectory, evidence, infer } => {
            commands::anticipate(&config, &trajectory, &evidence.evidence, &infer)
        }
        Command::Describe { evidence, soft, trajectory } => {
            commands::describe(&config, &evidence.evidence, soft.as_deref(), trajectory.as_deref())
        }
        Command::Sweep { evidence, target, infer } => commands::sweep(&config, &evidence.evidence, &target, infer.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, what) = category(&err);
            eprintln!("error ({what}): {err:#}");
            ExitCode::from(code)
        }
    }
}
