mod config;
mod manifest;
mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::verify::TheoremId;

/// Spectral contrastive learning experiments on finite positive-pair graphs.
#[derive(Debug, Parser)]
#[command(name = "sclab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON with a "version" field).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's output_dir or ./sclab-out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the training seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for data-parallel work.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Vertex count, components, cross mass and spectrum head.
    GraphInfo,
    /// Smallest eigenpairs as CSV.
    Spectrum,
    /// Train a representation and write the model and loss trace.
    Train,
    /// Train (or load) a model and fit a linear probe.
    Probe,
    /// Run a scripted theorem check.
    Verify { theorem: TheoremId },
    /// Separability table over r_list and the lambda grid.
    Br,
}

/// Exit status: 0 success, 1 failed verification or computation, 2 usage or config error.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = run::Context {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        jobs: cli.jobs,
    };
    let result = match cli.command {
        Command::GraphInfo => run::graph_info(&ctx),
        Command::Spectrum => run::spectrum(&ctx),
        Command::Train => run::train(&ctx),
        Command::Probe => run::probe(&ctx),
        Command::Verify { theorem } => verify::run(&ctx, theorem),
        Command::Br => run::br(&ctx),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
