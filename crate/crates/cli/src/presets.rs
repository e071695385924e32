//! Built-in scenarios.
//!
//! * `scalar3`: three scalar agents `x+ = 0.9x + u` on a path, `M = 30`.
//! * `uav6`: six agents with 5 states and 3 inputs on a path, `M = 50`,
//!   identity weights. The dynamics are a seeded synthetic stable pair of
//!   that size, not a physical vehicle model.
//! * `bench`: operation counts for `N ∈ {2, 3, 5, 8, 100}` at `n = 5`,
//!   `m = 3`, plus wall time where the stacked problem fits the cap.

use std::path::PathBuf;

use crate::config::{BenchSpec, ExperimentConfig, GraphSpec, LearnerSpec, Mode, SystemSpec, WeightSpec};

pub const PRESETS: [&str; 3] = ["scalar3", "uav6", "bench"];

/// Generator seed for the synthetic 5-state, 3-input dynamics.
pub const UAV6_SYSTEM_SEED: u64 = 6;

fn synthetic_5x3() -> SystemSpec {
    SystemSpec {
        n: 5,
        m: 3,
        a: None,
        b: None,
        generator_seed: Some(UAV6_SYSTEM_SEED),
        spectral_radius: Some(0.9),
    }
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "scalar3" => ExperimentConfig {
            system: SystemSpec {
                n: 1,
                m: 1,
                a: Some(vec![vec![0.9]]),
                b: Some(vec![vec![1.0]]),
                generator_seed: None,
                spectral_radius: None,
            },
            weights: WeightSpec::default(),
            graph: GraphSpec::Path { agents: 3 },
            learner: LearnerSpec {
                samples_per_iteration: Some(30),
                ..LearnerSpec::default()
            },
            mode: Mode::Distributed,
            seed: 1,
            out: PathBuf::from("runs/scalar3"),
            trajectories: false,
            bench: BenchSpec::default(),
        },
        "uav6" => ExperimentConfig {
            system: synthetic_5x3(),
            weights: WeightSpec::default(),
            graph: GraphSpec::Path { agents: 6 },
            learner: LearnerSpec {
                samples_per_iteration: Some(50),
                ..LearnerSpec::default()
            },
            mode: Mode::Distributed,
            seed: 1,
            out: PathBuf::from("runs/uav6"),
            trajectories: false,
            bench: BenchSpec::default(),
        },
        "bench" => ExperimentConfig {
            system: synthetic_5x3(),
            weights: WeightSpec::default(),
            graph: GraphSpec::Path { agents: 2 },
            learner: LearnerSpec {
                samples_per_iteration: Some(50),
                ..LearnerSpec::default()
            },
            mode: Mode::Bench,
            seed: 1,
            out: PathBuf::from("runs/bench"),
            trajectories: false,
            bench: BenchSpec {
                samples: vec![50; 5],
                ..BenchSpec::default()
            },
        },
        _ => return None,
    };
    Some(cfg)
}
