use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dql::config::ExperimentConfig;
use dql::presets::{preset, PRESETS};
use dql::{CliError, ConfigError, Mode};

/// Distributed Q-learning for networked LQR: run learners, benchmarks and
/// write CSV/JSON artifacts.
#[derive(Debug, Parser)]
#[command(name = "dql", version)]
struct Args {
    /// JSON experiment file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: scalar3, uav6 or bench.
    #[arg(long)]
    preset: Option<String>,
    /// distributed, centralized, both or bench.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-step states and inputs to trajectories.csv.
    #[arg(long)]
    trajectories: bool,
    /// Largest stacked dimension N(n+m) for which the centralized learner runs.
    #[arg(long)]
    max_central_dim: Option<usize>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

fn load(args: &Args) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name).ok_or_else(|| ConfigError {
            issues: vec![format!("preset: unknown preset {name:?} (available: {})", PRESETS.join(", "))],
        })?,
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if args.trajectories {
        cfg.trajectories = true;
    }
    if let Some(cap) = args.max_central_dim {
        cfg.bench.max_central_dim = cap;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).map_err(CliError::from).and_then(|cfg| {
        if args.print_config {
            println!("{}", cfg.to_json());
            return Ok(());
        }
        let (scenario, outcome) = dql::run(&cfg)?;
        print!("{}", dql::report(&outcome));
        println!("artifacts written to {}", scenario.config.out.display());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("error: {e}");
            if !e.to_string().ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
