//! Experiment harness: configuration, episodes, replication, bounds, and
//! export.

pub mod bounds;
pub mod config;
pub mod episode;
pub mod experiment;
pub mod export;
pub mod figures;

pub use bounds::{bound_check, decomposition_check, BoundCheck, BoundKind};
pub use config::{BetaSetting, EnvSpec, ExperimentConfig, ExperimentSection, Family, PolicySpec};
pub use episode::{replay_k_armed, run_episode, Environment, Policy, RegretCurve};
pub use experiment::{run_experiment, ExperimentResult, PolicySummary};
pub use export::{render, to_csv, to_json, to_svg, write_all, Format};
