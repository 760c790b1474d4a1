//! Experiment configuration and its TOML file format.
//!
//! ```toml
//! [experiment]
//! name = "demo"
//! horizon = 2000
//! replications = 100
//! seed = 7
//!
//! [environment]
//! kind = "k-armed"
//! arms = [
//!   { kind = "gaussian", mean = 0.5, sd = 1.0 },
//!   { kind = "gaussian", mean = 0.8, sd = 1.0 },
//! ]
//!
//! [[policy]]
//! name = "ucb"
//!
//! [[policy]]
//! name = "mots"
//! rho = 0.8
//! alpha = 1.5
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{ArmModel, ContinuumEnv, KArmedEnv, LinearEnv, LinearMode, Objective};
use crate::error::{config, BanditError, Result};
use crate::gp::{BetaSchedule, GpPosterior, GpTs, GpUcb, KernelSpec, OBSERVATION_JITTER};
use crate::linalg::GP_JITTER;
use crate::linear::{LinTs, LinUcb, LinUcbDisjoint, RadiusRule, RidgeGreedy};
use crate::mab::{BetaTs, Etc, GaussianTs, Moss, Mots, Ucb};
use crate::rng::{RngStream, StreamRole};

use super::episode::{Environment, Policy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub environment: EnvSpec,
    #[serde(rename = "policy")]
    pub policies: Vec<PolicySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub horizon: u64,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 means one per core. Never affects results.
    #[serde(default, skip_serializing)]
    pub jobs: usize,
    /// Keep every replication's action log.
    #[serde(default)]
    pub record_actions: bool,
}

fn default_replications() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvSpec {
    KArmed {
        arms: Vec<ArmModel>,
    },
    Linear {
        mode: LinearMode,
        arms: usize,
        dim: usize,
        noise_sd: f64,
        /// Explicit parameters; drawn from `U(0, 1)^d` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<Vec<Vec<f64>>>,
        /// Draw fresh parameters for every replication instead of once per
        /// experiment seed.
        #[serde(default)]
        resample_theta: bool,
    },
    Continuum {
        lo: f64,
        hi: f64,
        #[serde(default = "default_grid")]
        grid: usize,
        objective: Objective,
        noise_sd: f64,
        /// Uniformly drawn observations given to the policy before round 1.
        #[serde(default)]
        initial_points: usize,
    },
}

fn default_grid() -> usize {
    200
}

impl EnvSpec {
    /// Ground truth for one replication. Random parameters come from the
    /// setup stream, so they are shared across policies.
    pub fn instantiate(&self, seed: u64, replication: u64) -> Result<Environment> {
        match self {
            EnvSpec::KArmed { arms } => Ok(Environment::KArmed(KArmedEnv::new(arms.clone())?)),
            EnvSpec::Linear {
                mode,
                arms,
                dim,
                noise_sd,
                theta,
                resample_theta,
            } => {
                let env = match theta {
                    Some(t) => LinearEnv::new(*mode, *arms, t.clone(), *noise_sd)?,
                    None => {
                        let rep = if *resample_theta { replication } else { 0 };
                        let mut rng = RngStream::substream(seed, rep, StreamRole::Setup);
                        LinearEnv::with_uniform_theta(*mode, *arms, *dim, *noise_sd, &mut rng)?
                    }
                };
                if env.dim() != *dim {
                    return Err(BanditError::Dimension {
                        expected: *dim,
                        found: env.dim(),
                    });
                }
                Ok(Environment::Linear(env))
            }
            EnvSpec::Continuum {
                lo,
                hi,
                grid,
                objective,
                noise_sd,
                initial_points,
            } => {
                let mut rng = RngStream::substream(seed, 0, StreamRole::Setup);
                Ok(Environment::Continuum {
                    env: ContinuumEnv::new(
                        *lo,
                        *hi,
                        *grid,
                        objective.clone(),
                        *noise_sd,
                        &mut rng,
                    )?,
                    initial_points: *initial_points,
                })
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            EnvSpec::KArmed { .. } => Family::KArmed,
            EnvSpec::Linear { .. } => Family::Linear,
            EnvSpec::Continuum { .. } => Family::Continuum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    KArmed,
    Linear,
    Continuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AutoKeyword {
    Auto,
}

/// `beta = 2.0` or `beta = "auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSetting {
    Fixed(f64),
    Auto(AutoKeyword),
}

impl Default for BetaSetting {
    fn default() -> Self {
        BetaSetting::Auto(AutoKeyword::Auto)
    }
}

fn d_rho() -> f64 {
    Mots::DEFAULT_RHO
}
fn d_alpha() -> f64 {
    Mots::DEFAULT_ALPHA
}
fn d_one() -> f64 {
    1.0
}
fn d_delta() -> f64 {
    0.1
}
fn d_kernel() -> KernelSpec {
    KernelSpec::squared_exponential(1.0, 1.0)
}
fn d_gp_noise() -> f64 {
    GP_JITTER
}
fn d_gp_jitter() -> f64 {
    GP_JITTER
}
fn d_obs_jitter() -> f64 {
    OBSERVATION_JITTER
}

/// A policy and its parameters, keyed by `name` in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Etc {
        m: u64,
    },
    Ucb {
        /// Defaults to `1 / T^2`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
    Moss,
    TsGaussian,
    TsBeta,
    Mots {
        #[serde(default = "d_rho")]
        rho: f64,
        #[serde(default = "d_alpha")]
        alpha: f64,
    },
    LinucbDisjoint {
        #[serde(default = "d_one")]
        alpha: f64,
        #[serde(default = "d_one")]
        lambda: f64,
    },
    Linucb {
        #[serde(default = "d_one")]
        lambda: f64,
        /// Bound on the parameter term under the square root.
        #[serde(rename = "B", default = "d_one")]
        theta_bound: f64,
        /// Noise scale; defaults to the environment's noise sd.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
        #[serde(default = "d_delta")]
        delta: f64,
        /// Fixed radius overriding the self-normalized one.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
    Lints {
        #[serde(default = "d_one")]
        v: f64,
        #[serde(default = "d_one")]
        lambda: f64,
    },
    RidgeGreedy {
        #[serde(default = "d_one")]
        lambda: f64,
    },
    GpUcb {
        #[serde(default)]
        beta: BetaSetting,
        #[serde(default = "d_delta")]
        delta: f64,
        #[serde(default = "d_kernel")]
        kernel: KernelSpec,
        #[serde(default = "d_gp_noise")]
        noise_variance: f64,
        #[serde(default = "d_obs_jitter")]
        jitter: f64,
    },
    GpTs {
        #[serde(default = "d_kernel")]
        kernel: KernelSpec,
        #[serde(default = "d_gp_noise")]
        noise_variance: f64,
        #[serde(default = "d_obs_jitter")]
        jitter: f64,
        /// Diagonal jitter for the joint posterior draw.
        #[serde(default = "d_gp_jitter")]
        sample_jitter: f64,
    },
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Etc { .. } => "etc",
            PolicySpec::Ucb { .. } => "ucb",
            PolicySpec::Moss => "moss",
            PolicySpec::TsGaussian => "ts-gaussian",
            PolicySpec::TsBeta => "ts-beta",
            PolicySpec::Mots { .. } => "mots",
            PolicySpec::LinucbDisjoint { .. } => "linucb-disjoint",
            PolicySpec::Linucb { .. } => "linucb",
            PolicySpec::Lints { .. } => "lints",
            PolicySpec::RidgeGreedy { .. } => "ridge-greedy",
            PolicySpec::GpUcb { .. } => "gp-ucb",
            PolicySpec::GpTs { .. } => "gp-ts",
        }
    }

    pub fn family(&self) -> Family {
        match self {
            PolicySpec::Etc { .. }
            | PolicySpec::Ucb { .. }
            | PolicySpec::Moss
            | PolicySpec::TsGaussian
            | PolicySpec::TsBeta
            | PolicySpec::Mots { .. } => Family::KArmed,
            PolicySpec::LinucbDisjoint { .. }
            | PolicySpec::Linucb { .. }
            | PolicySpec::Lints { .. }
            | PolicySpec::RidgeGreedy { .. } => Family::Linear,
            PolicySpec::GpUcb { .. } | PolicySpec::GpTs { .. } => Family::Continuum,
        }
    }

    /// Whether the policy pulls every arm once before anything else.
    pub fn needs_sweep(&self) -> bool {
        matches!(
            self,
            PolicySpec::Ucb { .. }
                | PolicySpec::Moss
                | PolicySpec::TsGaussian
                | PolicySpec::Mots { .. }
        )
    }

    /// Fresh policy state for one episode.
    pub fn build(&self, env: &Environment, horizon: u64) -> Result<Policy> {
        let mismatch = || {
            config(format!(
                "policy `{}` cannot run on a {:?} environment",
                self.name(),
                env.family()
            ))
        };
        match (self, env) {
            (PolicySpec::Etc { m }, Environment::KArmed(e)) => {
                Ok(Policy::Arm(Box::new(Etc::new(e.num_arms(), *m, horizon)?)))
            }
            (PolicySpec::Ucb { delta }, Environment::KArmed(e)) => {
                Ok(Policy::Arm(Box::new(match delta {
                    Some(d) => Ucb::with_delta(e.num_arms(), *d)?,
                    None => Ucb::new(e.num_arms(), horizon)?,
                })))
            }
            (PolicySpec::Moss, Environment::KArmed(e)) => {
                Ok(Policy::Arm(Box::new(Moss::new(e.num_arms(), horizon)?)))
            }
            (PolicySpec::TsGaussian, Environment::KArmed(e)) => {
                Ok(Policy::Arm(Box::new(GaussianTs::new(e.num_arms())?)))
            }
            (PolicySpec::TsBeta, Environment::KArmed(e)) => {
                if !e.all_binary() {
                    return Err(config("ts-beta requires Bernoulli arms"));
                }
                Ok(Policy::Arm(Box::new(BetaTs::new(e.num_arms())?)))
            }
            (PolicySpec::Mots { rho, alpha }, Environment::KArmed(e)) => Ok(Policy::Arm(Box::new(
                Mots::new(e.num_arms(), horizon, *rho, *alpha)?,
            ))),
            (PolicySpec::LinucbDisjoint { alpha, lambda }, Environment::Linear(e)) => {
                Ok(Policy::Contextual(Box::new(LinUcbDisjoint::new(
                    e.num_arms(),
                    e.dim(),
                    *lambda,
                    *alpha,
                )?)))
            }
            (
                PolicySpec::Linucb {
                    lambda,
                    theta_bound,
                    sigma,
                    delta,
                    beta,
                },
                Environment::Linear(e),
            ) => {
                let rule = match beta {
                    Some(b) => RadiusRule::Fixed(*b),
                    None => RadiusRule::SelfNormalized {
                        theta_bound: *theta_bound,
                        sigma: sigma.unwrap_or(e.noise_sd()),
                        delta: *delta,
                        horizon,
                    },
                };
                Ok(Policy::Contextual(Box::new(LinUcb::new(
                    e.dim(),
                    *lambda,
                    rule,
                )?)))
            }
            (PolicySpec::Lints { v, lambda }, Environment::Linear(e)) => Ok(Policy::Contextual(
                Box::new(LinTs::new(e.dim(), *lambda, *v)?),
            )),
            (PolicySpec::RidgeGreedy { lambda }, Environment::Linear(e)) => Ok(Policy::Contextual(
                Box::new(RidgeGreedy::new(e.dim(), *lambda)?),
            )),
            (
                PolicySpec::GpUcb {
                    beta,
                    delta,
                    kernel,
                    noise_variance,
                    jitter,
                },
                Environment::Continuum { .. },
            ) => {
                let post = GpPosterior::with_jitter(kernel.build()?, *noise_variance, *jitter)?;
                let schedule = match beta {
                    BetaSetting::Fixed(b) => BetaSchedule::Fixed(*b),
                    BetaSetting::Auto(_) => BetaSchedule::Auto { delta: *delta },
                };
                Ok(Policy::Grid(Box::new(GpUcb::new(post, schedule)?)))
            }
            (
                PolicySpec::GpTs {
                    kernel,
                    noise_variance,
                    jitter,
                    sample_jitter,
                },
                Environment::Continuum { .. },
            ) => {
                if !(*sample_jitter >= 0.0) {
                    return Err(config("sample_jitter must be >= 0"));
                }
                let post = GpPosterior::with_jitter(kernel.build()?, *noise_variance, *jitter)?;
                Ok(Policy::Grid(Box::new(GpTs::with_jitter(
                    post,
                    *sample_jitter,
                ))))
            }
            _ => Err(mismatch()),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| BanditError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BanditError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| BanditError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let ex = &self.experiment;
        if ex.horizon == 0 {
            return Err(config("horizon must be positive"));
        }
        if ex.replications == 0 {
            return Err(config("replications must be >= 1"));
        }
        if self.policies.is_empty() {
            return Err(config("at least one [[policy]] is required"));
        }
        let mut seen = BTreeSet::new();
        for p in &self.policies {
            if !seen.insert(p.name()) {
                return Err(config(format!("policy `{}` listed twice", p.name())));
            }
            if p.family() != self.environment.family() {
                return Err(config(format!(
                    "policy `{}` does not match the {:?} environment",
                    p.name(),
                    self.environment.family()
                )));
            }
        }
        if let EnvSpec::KArmed { arms } = &self.environment {
            let k = arms.len() as u64;
            if let Some(p) = self.policies.iter().find(|p| p.needs_sweep()) {
                if ex.horizon < k {
                    return Err(config(format!(
                        "policy `{}` needs T >= K (T = {}, K = {k})",
                        p.name(),
                        ex.horizon
                    )));
                }
            }
        }
        // Build once against replication 0 to surface parameter errors early.
        let env = self.environment.instantiate(ex.seed, 0)?;
        for p in &self.policies {
            p.build(&env, ex.horizon)?;
        }
        Ok(())
    }
}
