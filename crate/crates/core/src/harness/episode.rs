//! One policy against one environment for `T` rounds.

use serde::Serialize;

use crate::env::{ContinuumEnv, KArmedEnv, LinearEnv};
use crate::error::{BanditError, Result};
use crate::policy::{ArmPolicy, ContextualPolicy, GridPolicy};
use crate::rng::RngStream;

use super::config::Family;

/// A ready-to-run environment.
#[derive(Debug, Clone)]
pub enum Environment {
    KArmed(KArmedEnv),
    Linear(LinearEnv),
    Continuum {
        env: ContinuumEnv,
        initial_points: usize,
    },
}

impl Environment {
    pub fn family(&self) -> Family {
        match self {
            Environment::KArmed(_) => Family::KArmed,
            Environment::Linear(_) => Family::Linear,
            Environment::Continuum { .. } => Family::Continuum,
        }
    }
}

pub enum Policy {
    Arm(Box<dyn ArmPolicy>),
    Contextual(Box<dyn ContextualPolicy>),
    Grid(Box<dyn GridPolicy>),
}

impl Policy {
    pub fn name(&self) -> &str {
        match self {
            Policy::Arm(p) => p.name(),
            Policy::Contextual(p) => p.name(),
            Policy::Grid(p) => p.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretCurve {
    /// Cumulative pseudo-regret after rounds `1..=T`.
    pub cumulative: Vec<f64>,
    /// Pulls per arm, K-armed environments only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulls: Option<Vec<u64>>,
    /// Chosen action per round.
    pub actions: Vec<usize>,
}

impl RegretCurve {
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Runs one episode. Reward noise comes from `env_rng` and policy
/// randomization from `policy_rng`, so two policies given the same
/// `env_rng` seed face identical contexts and noise draws.
pub fn run_episode(
    env: &Environment,
    policy: &mut Policy,
    horizon: u64,
    env_rng: &mut RngStream,
    policy_rng: &mut RngStream,
) -> Result<RegretCurve> {
    let t_len = horizon as usize;
    let mut cumulative = Vec::with_capacity(t_len);
    let mut actions = Vec::with_capacity(t_len);
    let mut total = 0.0;
    match (env, policy) {
        (Environment::KArmed(e), Policy::Arm(p)) => {
            let mut pulls = vec![0u64; e.num_arms()];
            for _ in 0..horizon {
                let arm = p.select(policy_rng)?;
                let r = e.pull(arm, env_rng)?;
                p.update(arm, r)?;
                pulls[arm] += 1;
                total += e.pseudo_regret_increment(arm)?;
                cumulative.push(total);
                actions.push(arm);
            }
            Ok(RegretCurve {
                cumulative,
                pulls: Some(pulls),
                actions,
            })
        }
        (Environment::Linear(e), Policy::Contextual(p)) => {
            for _ in 0..horizon {
                let contexts = e.draw_contexts(env_rng);
                let arm = p.select(&contexts, policy_rng)?;
                let r = e.reward(&contexts, arm, env_rng)?;
                p.update(arm, &contexts[arm], r)?;
                total += e.pseudo_regret_increment(&contexts, arm)?;
                cumulative.push(total);
                actions.push(arm);
            }
            Ok(RegretCurve {
                cumulative,
                pulls: None,
                actions,
            })
        }
        (
            Environment::Continuum {
                env: e,
                initial_points,
            },
            Policy::Grid(p),
        ) => {
            for _ in 0..*initial_points {
                let (x, y) = e.random_observation(env_rng);
                p.observe(&[x], y)?;
            }
            for t in 1..=horizon {
                let i = p.select(e.grid(), t, policy_rng)?;
                let y = e.observe(i, env_rng)?;
                p.observe(&e.grid()[i], y)?;
                total += e.pseudo_regret_increment(i)?;
                cumulative.push(total);
                actions.push(i);
            }
            Ok(RegretCurve {
                cumulative,
                pulls: None,
                actions,
            })
        }
        (env, policy) => Err(BanditError::Config(format!(
            "policy `{}` cannot run on a {:?} environment",
            policy.name(),
            env.family()
        ))),
    }
}

/// Recomputes a K-armed regret curve from the action log alone.
pub fn replay_k_armed(env: &KArmedEnv, actions: &[usize]) -> Result<Vec<f64>> {
    let mut total = 0.0;
    actions
        .iter()
        .map(|&a| {
            total += env.pseudo_regret_increment(a)?;
            Ok(total)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mab::{FixedArm, Ucb};
    use crate::rng::StreamRole;

    fn streams(seed: u64) -> (RngStream, RngStream) {
        (
            RngStream::substream(seed, 0, StreamRole::Environment),
            RngStream::substream(seed, 0, StreamRole::Policy),
        )
    }

    #[test]
    fn fixed_arm_regret_is_linear() {
        let env = Environment::KArmed(KArmedEnv::gaussian(&[0.0, 1.0], 1.0).unwrap());
        let mut p = Policy::Arm(Box::new(FixedArm::new(2, 0).unwrap()));
        let (mut e, mut r) = streams(1);
        let c = run_episode(&env, &mut p, 100, &mut e, &mut r).unwrap();
        assert_eq!(c.cumulative.len(), 100);
        assert_eq!(c.total(), 100.0);
        assert_eq!(c.pulls, Some(vec![100, 0]));
    }

    #[test]
    fn replay_matches_recorded_curve() {
        let k = KArmedEnv::gaussian(&[0.5, 0.6, 0.8], 1.0).unwrap();
        let env = Environment::KArmed(k.clone());
        let mut p = Policy::Arm(Box::new(Ucb::new(3, 300).unwrap()));
        let (mut e, mut r) = streams(3);
        let c = run_episode(&env, &mut p, 300, &mut e, &mut r).unwrap();
        let replay = replay_k_armed(&k, &c.actions).unwrap();
        for (a, b) in replay.iter().zip(&c.cumulative) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mismatched_family_is_an_error() {
        let env = Environment::KArmed(KArmedEnv::gaussian(&[0.0, 1.0], 1.0).unwrap());
        let mut p = Policy::Contextual(Box::new(crate::linear::RidgeGreedy::new(2, 1.0).unwrap()));
        let (mut e, mut r) = streams(0);
        assert!(run_episode(&env, &mut p, 5, &mut e, &mut r).is_err());
    }
}
