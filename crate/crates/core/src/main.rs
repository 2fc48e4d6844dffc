use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tpmab::harness::{self, ExperimentConfig, OutputFormat, SeedRange, SeedSpec};

/// Run bandit experiments with temporally-partitioned rewards.
#[derive(Debug, Parser)]
#[command(name = "tpmab", version)]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,

    /// Output file; overrides `output.path`. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format; overrides `output.format`.
    #[arg(long)]
    format: Option<OutputFormat>,

    /// Comma-separated policy names; overrides `policies`.
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<String>>,

    /// Number of seeds; keeps the configured base seed (0 for explicit lists).
    #[arg(long)]
    seeds: Option<usize>,
}

fn run(cli: Cli) -> Result<(), harness::HarnessError> {
    let mut config = ExperimentConfig::from_file(&cli.config)?;
    if let Some(p) = cli.policies {
        config.policies = p;
    }
    if let Some(count) = cli.seeds {
        let base = match &config.seeds {
            SeedSpec::Range(r) => r.base,
            SeedSpec::List(_) => 0,
        };
        config.seeds = SeedSpec::Range(SeedRange { count, base });
    }
    if let Some(f) = cli.format {
        config.output.format = Some(f);
    }
    if let Some(out) = cli.out {
        config.output.path = Some(out);
    }
    let experiment = config.validate()?;
    let output = harness::run_experiment(&experiment)?;
    for curve in output.bounds.iter().filter(|c| c.vacuous) {
        eprintln!(
            "warning: lower bound for the {} PMF is vacuous (optimal mean equals the global reward cap)",
            curve.pmf
        );
    }
    harness::emit(&output, experiment.format, experiment.path.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
