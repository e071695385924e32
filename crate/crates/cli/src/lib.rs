//! Experiment runner for distributed Q-learning of networked LQR problems.
//!
//! [`config`] reads JSON experiment files, [`presets`] holds the built-in
//! scenarios, [`runner`] executes them on top of `dql-core` and [`output`]
//! writes the CSV and JSON artifacts. [`run`] strings those together.

pub mod config;
pub mod edgelist;
pub mod generate;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig, Mode, Scenario};
pub use generate::generate_system;
pub use output::emit_plot_data;
pub use runner::{execute, wall_time_comparison, CliError, Outcome, RunError};

/// Validates, executes and writes artifacts.
pub fn run(cfg: &ExperimentConfig) -> Result<(Scenario, Outcome), CliError> {
    let scenario = cfg.resolve()?;
    let outcome = execute(&scenario)?;
    output::write_artifacts(&scenario, &outcome)?;
    Ok((scenario, outcome))
}

/// Human-readable digest of an outcome, as printed by the binary.
pub fn report(outcome: &Outcome) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    for run in outcome.distributed.iter().chain(&outcome.centralized) {
        let _ = writeln!(
            s,
            "{}: N={} iterations={} converged={} max gain error={:.3e} spread={:.3e} rls_macs={} wall={:.3}s",
            output::engine_name(run.engine),
            run.num_agents,
            run.iterations.len(),
            run.converged,
            run.final_gain_error(),
            run.final_gain_spread(),
            run.rls_macs,
            run.wall_time_s,
        );
        for w in &run.warnings {
            let _ = writeln!(s, "  warning: {}", output::describe_warning(w));
        }
    }
    if !outcome.bench.is_empty() {
        s.push_str(&dql_core::bench::render_saving_table(&outcome.bench));
        for r in &outcome.wall_times {
            let _ = write!(
                s,
                "N={}: distributed {:.4}s over {} iterations",
                r.num_agents, r.distributed.total_s, r.distributed.iterations
            );
            if let Some(c) = &r.centralized {
                let _ = write!(s, ", centralized {:.4}s over {} iterations", c.total_s, c.iterations);
            }
            s.push('\n');
        }
    }
    for n in &outcome.notices {
        let _ = writeln!(s, "note: {n}");
    }
    s
}
