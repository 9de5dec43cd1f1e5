//! `bass` command-line driver: phantom generation, sampling-pattern learning,
//! evaluation, optimizer comparison and map export.

pub mod commands;
pub mod error;
pub mod render;
pub mod spec;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_compare, cmd_evaluate, cmd_export_maps, cmd_learn, cmd_phantom, RunOptions,
};
pub use error::{CliError, CliResult};
pub use spec::ExperimentSpec;

const DEFAULT_OUT: &str = "bass-out";

#[derive(Debug, Parser)]
#[command(
    name = "bass",
    version,
    about = "Learn Cartesian k-space sampling patterns from training data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment spec (JSON, or TOML by extension).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Output directory; overrides the spec's `output`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed; overrides the spec's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "BASS_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Record wall-clock times in traces and reports (breaks byte-identical
    /// reruns).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multi-coil dataset.
    Phantom,
    /// Learn a sampling pattern on the training items.
    Learn,
    /// Evaluate a mask on the training and validation items.
    Evaluate {
        #[arg(long)]
        mask: PathBuf,
    },
    /// Run several optimizers under one reconstruction budget.
    Compare,
    /// Render the maps and mask of a `learn` run.
    ExportMaps {
        /// Directory holding `state.json`; defaults to `--out`.
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

pub fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Spec("--threads must be >= 1".into()));
        }
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let spec = match (&cli.command, &cli.spec) {
        (Command::ExportMaps { .. }, _) => None,
        (_, Some(path)) => Some(ExperimentSpec::load(path)?),
        (_, None) => return Err(CliError::Spec("--spec is required".into())),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| spec.as_ref().and_then(|s| s.output.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let opts = RunOptions {
        out,
        seed: cli.seed,
        quiet: cli.quiet,
        timing: cli.timing,
    };
    match &cli.command {
        Command::Phantom => cmd_phantom(spec.as_ref().expect("loaded"), &opts),
        Command::Learn => cmd_learn(spec.as_ref().expect("loaded"), &opts).map(drop),
        Command::Evaluate { mask } => {
            cmd_evaluate(spec.as_ref().expect("loaded"), mask, &opts).map(drop)
        }
        Command::Compare => cmd_compare(spec.as_ref().expect("loaded"), &opts).map(drop),
        Command::ExportMaps { state } => {
            let dir = state.clone().unwrap_or_else(|| opts.out.clone());
            cmd_export_maps(&dir, &opts)
        }
    }
}
