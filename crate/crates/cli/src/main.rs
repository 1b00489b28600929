//! Command-line driver for the exploit-detection pipeline.
//!
//! Stages: `ingest` (raw dumps -> normalized corpus), `ground-truth`
//! (labels + coverage reports), `features` (feature-matrix export),
//! `experiment` (cross-validation or temporal evaluation), `coverage`
//! (coverage/intersection reports only). Every stage reads the same config
//! file; common fields can be overridden per flag.
//!
//! Exit codes: 0 success, 2 input/config error, 3 pipeline error.

mod commands;
mod config;
mod corpus;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Overrides};

#[derive(Debug)]
pub enum CliError {
    /// Bad input: missing paths, malformed config or source files.
    Input(anyhow::Error),
    /// A pipeline stage failed after inputs validated.
    Pipeline {
        stage: &'static str,
        source: anyhow::Error,
    },
}

impl CliError {
    pub fn input(source: anyhow::Error) -> Self {
        CliError::Input(source)
    }

    pub fn pipeline(stage: &'static str, source: anyhow::Error) -> Self {
        CliError::Pipeline { stage, source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Pipeline { .. } => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(e) => write!(f, "{e:#}"),
            CliError::Pipeline { stage, source } => write!(f, "stage {stage} failed: {source:#}"),
        }
    }
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Experiment configuration file (TOML).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Override the experiment seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the fold count.
    #[arg(long)]
    k: Option<usize>,
    /// Override the label column (RW or POC).
    #[arg(long)]
    label: Option<String>,
    /// Override the output directory.
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Override the experiment kind (CV, TEMPORAL, COVERAGE).
    #[arg(long)]
    experiment_kind: Option<String>,
    /// Override the temporal test year.
    #[arg(long)]
    test_year: Option<u16>,
    /// Override the temporal training years (comma-separated).
    #[arg(long, value_delimiter = ',')]
    train_years: Option<Vec<u16>>,
    /// Override the disclosure-year window as START-END.
    #[arg(long)]
    year_range: Option<String>,
}

impl CommonArgs {
    fn load_config(&self) -> Result<ExperimentConfig, CliError> {
        let year_range = match &self.year_range {
            None => None,
            Some(text) => {
                let parts: Vec<&str> = text.split('-').collect();
                let parse = |s: &str| s.trim().parse::<u16>();
                match parts.as_slice() {
                    [a, b] => match (parse(a), parse(b)) {
                        (Ok(start), Ok(end)) => Some([start, end]),
                        _ => {
                            return Err(CliError::input(anyhow::anyhow!(
                                "--year-range expects START-END, got {text:?}"
                            )))
                        }
                    },
                    _ => {
                        return Err(CliError::input(anyhow::anyhow!(
                            "--year-range expects START-END, got {text:?}"
                        )))
                    }
                }
            }
        };
        let overrides = Overrides {
            seed: self.seed,
            k: self.k,
            label: self.label.clone(),
            output_dir: self.output_dir.clone(),
            kind: self.experiment_kind.clone(),
            test_year: self.test_year,
            train_years: self.train_years.clone(),
            year_range,
        };
        ExperimentConfig::load(&self.config, &overrides).map_err(CliError::input)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "exploit-detect",
    about = "Classify disclosed vulnerabilities as exploited or not from tweet and database features",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse the raw dumps into the normalized corpus.
    Ingest(CommonArgs),
    /// Build labels and emit coverage/intersection reports.
    GroundTruth(CommonArgs),
    /// Assemble instances and export the feature matrix.
    Features(CommonArgs),
    /// Run the configured CV or temporal experiment.
    Experiment(CommonArgs),
    /// Emit the coverage/intersection reports only.
    Coverage(CommonArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Ingest(args) => commands::ingest::run(&args.load_config()?),
        Command::GroundTruth(args) => commands::ground_truth::run(&args.load_config()?),
        Command::Features(args) => commands::features::run(&args.load_config()?),
        Command::Experiment(args) => commands::experiment::run(&args.load_config()?),
        Command::Coverage(args) => commands::ground_truth::run_coverage(&args.load_config()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
