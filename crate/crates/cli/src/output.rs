//! Artifact files: per-iteration CSV, long-format plot data, trajectories,
//! bench reports and the JSON run summary.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use dql_core::bench::{render_saving_table, OpCountReport};
use dql_core::learner::{Engine, LearnRun, Warning};
use serde::Serialize;

use crate::config::{to_rows, Rows, Scenario};
use crate::runner::{Outcome, RunError, WallTimeReport};

pub const SUMMARY: &str = "summary.json";
pub const ITERATIONS: &str = "iterations.csv";
pub const PLOTDATA: &str = "plotdata.csv";
pub const TRAJECTORIES: &str = "trajectories.csv";
pub const BENCH: &str = "bench.csv";
pub const BENCH_TABLE: &str = "bench_table.txt";
pub const WALLTIME: &str = "walltime.csv";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Serialize)]
struct IterationRow {
    k: usize,
    agent: usize,
    gain_error: f64,
    gain_spread: f64,
    consensus_gap: f64,
    pe_alpha: f64,
    theta_delta: f64,
    updated: bool,
}

/// One row per `(k, agent)`. Wall time is left out so that identical
/// computations give identical files.
pub fn write_iterations(path: &Path, run: &LearnRun) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    for rec in &run.iterations {
        for (agent, a) in rec.agents.iter().enumerate() {
            w.serialize(IterationRow {
                k: rec.k,
                agent,
                gain_error: a.gain_error,
                gain_spread: rec.gain_spread,
                consensus_gap: rec.consensus_gap_mean,
                pe_alpha: a.pe.alpha,
                theta_delta: a.theta_delta,
                updated: a.updated,
            })?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Rewrites an iteration CSV as tidy `(k, agent, metric, value)` rows.
/// Per-agent metrics are `gain_error` and `pe_alpha`; the network-wide
/// `gain_spread` and `consensus_gap` appear once per round with an empty
/// agent field. Values are copied verbatim.
pub fn emit_plot_data(iterations_csv: &Path, out: &Path) -> Result<(), RunError> {
    if !iterations_csv.is_file() {
        return Err(RunError::MissingArtifact(iterations_csv.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(iterations_csv)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| RunError::MissingArtifact(iterations_csv.join(name)))
    };
    let (k, agent) = (col("k")?, col("agent")?);
    let per_agent = [("gain_error", col("gain_error")?), ("pe_alpha", col("pe_alpha")?)];
    let network = [("gain_spread", col("gain_spread")?), ("consensus_gap", col("consensus_gap")?)];

    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["k", "agent", "metric", "value"])?;
    let mut last_k = None;
    for row in r.records() {
        let row = row?;
        if last_k.as_deref() != Some(&row[k]) {
            for (name, c) in network {
                w.write_record([&row[k], "", name, &row[c]])?;
            }
            last_k = Some(row[k].to_string());
        }
        for (name, c) in per_agent {
            w.write_record([&row[k], &row[agent], name, &row[c]])?;
        }
    }
    w.flush().map_err(io_err(out))
}

pub fn write_trajectories(path: &Path, run: &LearnRun) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string(), "agent".to_string()];
    header.extend((0..run.state_dim).map(|i| format!("x{i}")));
    header.extend((0..run.input_dim).map(|i| format!("u{i}")));
    w.write_record(&header)?;
    for row in &run.trajectory {
        let mut rec = vec![row.t.to_string(), row.agent.to_string()];
        rec.extend(row.x.iter().chain(row.u.iter()).map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Serialize)]
struct BenchRow {
    #[serde(rename = "N")]
    num_agents: usize,
    n: usize,
    m: usize,
    q_central: usize,
    q_dist: usize,
    ops_central: u64,
    ops_dist: u64,
    saving_measured_pct: f64,
    saving_predicted_pct: f64,
}

pub fn write_bench(path: &Path, reports: &[OpCountReport]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        w.serialize(BenchRow {
            num_agents: r.num_agents,
            n: r.n,
            m: r.m,
            q_central: r.q_central,
            q_dist: r.q_dist,
            ops_central: r.centralized_ops,
            ops_dist: r.distributed_ops,
            saving_measured_pct: r.measured_saving_pct,
            saving_predicted_pct: r.predicted_saving_pct,
        })?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Serialize)]
struct WallTimeRow<'a> {
    #[serde(rename = "N")]
    num_agents: usize,
    engine: &'a str,
    iterations: usize,
    converged: bool,
    total_s: f64,
    per_iteration_s: f64,
    rls_macs: u64,
}

pub fn write_wall_times(path: &Path, reports: &[WallTimeReport]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        for t in std::iter::once(&r.distributed).chain(&r.centralized) {
            w.serialize(WallTimeRow {
                num_agents: r.num_agents,
                engine: engine_name(t.engine),
                iterations: t.iterations,
                converged: t.converged,
                total_s: t.total_s,
                per_iteration_s: t.per_iteration_s,
                rls_macs: t.rls_macs,
            })?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Centralized => "centralized",
        Engine::Distributed => "distributed",
    }
}

pub fn describe_warning(w: &Warning) -> String {
    match w {
        Warning::WeakExcitation { k, agent, alpha } => {
            format!("k={k} agent={agent}: weak excitation (alpha {alpha:e})")
        }
        Warning::SkippedUpdate {
            k,
            agent,
            min_eigenvalue,
        } => format!("k={k} agent={agent}: H22 not positive definite ({min_eigenvalue:e}), gain kept"),
        Warning::CovarianceReset { k, agent, t } => {
            format!("k={k} agent={agent} t={t}: covariance reset")
        }
    }
}

#[derive(Serialize)]
struct RunSummary {
    engine: &'static str,
    num_agents: usize,
    state_dim: usize,
    input_dim: usize,
    iterations: usize,
    converged: bool,
    reference_gain: Rows,
    final_gains: Vec<Rows>,
    /// Largest distance from any final gain to the oracle.
    final_gain_error: f64,
    final_gain_spread: f64,
    rls_macs: u64,
    steps: u64,
    wall_time_s: f64,
    warnings: Vec<String>,
}

impl RunSummary {
    fn new(run: &LearnRun) -> Self {
        Self {
            engine: engine_name(run.engine),
            num_agents: run.num_agents,
            state_dim: run.state_dim,
            input_dim: run.input_dim,
            iterations: run.iterations.len(),
            converged: run.converged,
            reference_gain: to_rows(&run.reference_gain),
            final_gains: run.final_gains().iter().map(to_rows).collect(),
            final_gain_error: run.final_gain_error(),
            final_gain_spread: run.final_gain_spread(),
            rls_macs: run.rls_macs,
            steps: run.steps,
            wall_time_s: run.wall_time_s,
            warnings: run.warnings.iter().map(describe_warning).collect(),
        }
    }
}

#[derive(Serialize)]
struct SystemEcho {
    a: Rows,
    b: Rows,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a crate::config::ExperimentConfig,
    system: SystemEcho,
    runs: Vec<RunSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    bench: Vec<BenchRow>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    notices: &'a [String],
}

/// File names for one engine's CSVs; the centralized run gets a suffix
/// when both engines share an output directory.
fn names(suffix: &str) -> [String; 3] {
    [ITERATIONS, PLOTDATA, TRAJECTORIES].map(|base| match base.strip_suffix(".csv") {
        Some(stem) if !suffix.is_empty() => format!("{stem}_{suffix}.csv"),
        _ => base.to_string(),
    })
}

fn write_run(dir: &Path, run: &LearnRun, suffix: &str, trajectories: bool) -> Result<(), RunError> {
    let [iterations, plot, traj] = names(suffix);
    let iterations = dir.join(iterations);
    write_iterations(&iterations, run)?;
    emit_plot_data(&iterations, &dir.join(plot))?;
    if trajectories {
        write_trajectories(&dir.join(traj), run)?;
    }
    Ok(())
}

/// Writes every artifact for `outcome` under the scenario's output
/// directory and returns the paths written.
pub fn write_artifacts(s: &Scenario, outcome: &Outcome) -> Result<Vec<PathBuf>, RunError> {
    let dir = &s.config.out;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let trajectories = s.config.trajectories;
    if let Some(run) = &outcome.distributed {
        write_run(dir, run, "", trajectories)?;
    }
    if let Some(run) = &outcome.centralized {
        let suffix = if outcome.distributed.is_some() { "centralized" } else { "" };
        write_run(dir, run, suffix, trajectories)?;
    }
    if !outcome.bench.is_empty() {
        write_bench(&dir.join(BENCH), &outcome.bench)?;
        let table = dir.join(BENCH_TABLE);
        fs::write(&table, render_saving_table(&outcome.bench)).map_err(io_err(&table))?;
        write_wall_times(&dir.join(WALLTIME), &outcome.wall_times)?;
    }

    let summary = Summary {
        config: &s.config,
        system: SystemEcho {
            a: to_rows(s.model.a()),
            b: to_rows(s.model.b()),
        },
        runs: outcome.distributed.iter().chain(&outcome.centralized).map(RunSummary::new).collect(),
        bench: outcome
            .bench
            .iter()
            .map(|r| BenchRow {
                num_agents: r.num_agents,
                n: r.n,
                m: r.m,
                q_central: r.q_central,
                q_dist: r.q_dist,
                ops_central: r.centralized_ops,
                ops_dist: r.distributed_ops,
                saving_measured_pct: r.measured_saving_pct,
                saving_predicted_pct: r.predicted_saving_pct,
            })
            .collect(),
        notices: &outcome.notices,
    };
    let path = dir.join(SUMMARY);
    let mut f = File::create(&path).map_err(io_err(&path))?;
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f).map_err(io_err(&path))?;

    let mut written: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    written.sort();
    Ok(written)
}
