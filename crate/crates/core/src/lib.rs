//! Stochastic, linear-contextual, and Gaussian-process bandits with a
//! reproducible experiment harness.
//!
//! Policies live in [`mab`], [`linear`], and [`gp`]; environments in [`env`];
//! everything random draws from an [`RngStream`].

// `!(x >= 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod env;
pub mod error;
pub mod gp;
pub mod harness;
pub mod linalg;
pub mod linear;
pub mod mab;
pub mod policy;
pub mod rng;

pub use env::{ArmModel, ContinuumEnv, KArmedEnv, LinearEnv, LinearMode, Objective};
pub use error::{BanditError, Result};
pub use gp::{GpPosterior, GpTs, GpUcb, Kernel, KernelSpec};
pub use harness::{run_experiment, ExperimentConfig, ExperimentResult, PolicySpec, RegretCurve};
pub use linalg::{Cholesky, SpdMatrix};
pub use linear::{LinTs, LinUcb, LinUcbDisjoint, RidgeState};
pub use mab::{BetaTs, Etc, GaussianTs, MabState, Moss, Mots, Ucb};
pub use policy::{ArmPolicy, ContextualPolicy, GridPolicy};
pub use rng::{RngStream, StreamRole};
