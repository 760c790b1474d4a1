//! Built-in configurations for the three reference experiments.

use crate::env::{ArmModel, LinearMode, Objective};
use crate::gp::{KernelSpec, OBSERVATION_JITTER};
use crate::linalg::GP_JITTER;

use super::config::{BetaSetting, EnvSpec, ExperimentConfig, ExperimentSection, PolicySpec};

pub const DEFAULT_SEED: u64 = 0;

/// Overrides shared by every figure.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<u64>,
    pub horizon: Option<u64>,
    pub jobs: Option<usize>,
}

impl Overrides {
    fn section(&self, name: &str, horizon: u64, replications: u64) -> ExperimentSection {
        ExperimentSection {
            name: name.to_string(),
            horizon: self.horizon.unwrap_or(horizon),
            replications: self.replications.unwrap_or(replications),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            jobs: self.jobs.unwrap_or(0),
            record_actions: false,
        }
    }
}

/// Three Gaussian arms, five K-armed policies.
#[derive(Debug, Clone)]
pub struct Fig2Params {
    pub means: Vec<f64>,
    pub etc_m: u64,
    pub mots_rho: f64,
    pub mots_alpha: f64,
}

impl Default for Fig2Params {
    fn default() -> Self {
        Self {
            means: vec![0.5, 0.6, 0.8],
            etc_m: 210,
            mots_rho: 0.8,
            mots_alpha: 1.5,
        }
    }
}

pub fn fig2(o: &Overrides, p: &Fig2Params) -> ExperimentConfig {
    ExperimentConfig {
        experiment: o.section("fig2", 2000, 100),
        environment: EnvSpec::KArmed {
            arms: p
                .means
                .iter()
                .map(|&mean| ArmModel::Gaussian { mean, sd: 1.0 })
                .collect(),
        },
        policies: vec![
            PolicySpec::Etc { m: p.etc_m },
            PolicySpec::Ucb { delta: None },
            PolicySpec::Moss,
            PolicySpec::TsGaussian,
            PolicySpec::Mots {
                rho: p.mots_rho,
                alpha: p.mots_alpha,
            },
        ],
    }
}

/// Shared-parameter linear bandit with LinUCB and LinTS.
#[derive(Debug, Clone)]
pub struct Fig3Params {
    pub arms: usize,
    pub dim: usize,
    pub noise_variance: f64,
    pub lambda: f64,
    pub theta_bound: f64,
    pub delta: f64,
    pub v: f64,
    pub resample_theta: bool,
    /// Also run per-arm LinUCB with this `alpha`.
    pub disjoint_alpha: Option<f64>,
}

impl Default for Fig3Params {
    fn default() -> Self {
        Self {
            arms: 5,
            dim: 10,
            noise_variance: 0.1,
            lambda: 1.0,
            theta_bound: 1.0,
            delta: 0.1,
            v: 1.0,
            resample_theta: false,
            disjoint_alpha: None,
        }
    }
}

pub fn fig3(o: &Overrides, p: &Fig3Params) -> ExperimentConfig {
    let mut policies = vec![
        PolicySpec::Linucb {
            lambda: p.lambda,
            theta_bound: p.theta_bound,
            sigma: None,
            delta: p.delta,
            beta: None,
        },
        PolicySpec::Lints {
            v: p.v,
            lambda: p.lambda,
        },
    ];
    if let Some(alpha) = p.disjoint_alpha {
        policies.push(PolicySpec::LinucbDisjoint {
            alpha,
            lambda: p.lambda,
        });
    }
    ExperimentConfig {
        experiment: o.section("fig3", 2000, 50),
        environment: EnvSpec::Linear {
            mode: LinearMode::Shared,
            arms: p.arms,
            dim: p.dim,
            noise_sd: p.noise_variance.sqrt(),
            theta: None,
            resample_theta: p.resample_theta,
        },
        policies,
    }
}

/// GP-UCB and GP-TS on `sin(5x)(1 - tanh(x^2))` over `[-2, 2]`.
#[derive(Debug, Clone)]
pub struct Fig4Params {
    pub grid: usize,
    pub initial_points: usize,
    pub noise_variance: f64,
    pub lengthscale: f64,
    pub amplitude: f64,
    /// Noise variance assumed by the GP model.
    pub model_noise: f64,
    pub beta: BetaSetting,
}

impl Default for Fig4Params {
    fn default() -> Self {
        Self {
            grid: 200,
            initial_points: 5,
            noise_variance: 0.1,
            lengthscale: 1.0,
            amplitude: 1.0,
            model_noise: 1e-5,
            beta: BetaSetting::Fixed(2.0),
        }
    }
}

pub fn fig4(o: &Overrides, p: &Fig4Params) -> ExperimentConfig {
    let kernel = KernelSpec::squared_exponential(p.lengthscale, p.amplitude);
    ExperimentConfig {
        experiment: o.section("fig4", 50, 100),
        environment: EnvSpec::Continuum {
            lo: -2.0,
            hi: 2.0,
            grid: p.grid,
            objective: Objective::SinTanh,
            noise_sd: p.noise_variance.sqrt(),
            initial_points: p.initial_points,
        },
        policies: vec![
            PolicySpec::GpUcb {
                beta: p.beta,
                delta: 0.1,
                kernel,
                noise_variance: p.model_noise,
                jitter: OBSERVATION_JITTER,
            },
            PolicySpec::GpTs {
                kernel,
                noise_variance: p.model_noise,
                jitter: OBSERVATION_JITTER,
                sample_jitter: GP_JITTER,
            },
        ],
    }
}
