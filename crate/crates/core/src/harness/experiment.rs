//! Replicated experiments and their aggregation.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{config, Result};
use crate::rng::{RngStream, StreamRole};

use super::bounds::decomposition_check;
use super::config::ExperimentConfig;
use super::episode::{run_episode, Environment, RegretCurve};

/// Aggregated results for one policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicySummary {
    pub name: String,
    /// Mean cumulative regret per round.
    pub mean_regret: Vec<f64>,
    /// Standard error of the mean per round (0 with one replication).
    pub stderr: Vec<f64>,
    /// Final cumulative regret of every replication, in replication order.
    pub final_regret: Vec<f64>,
    /// Mean pulls per arm (K-armed only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_pulls: Option<Vec<f64>>,
    /// Whether every replication satisfied the regret decomposition
    /// identity (K-armed only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_ok: Option<bool>,
    /// Per-replication action logs when `record_actions` is set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<Vec<usize>>>,
}

impl PolicySummary {
    pub fn final_mean(&self) -> f64 {
        self.mean_regret.last().copied().unwrap_or(0.0)
    }

    pub fn final_stderr(&self) -> f64 {
        self.stderr.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub policies: Vec<PolicySummary>,
}

impl ExperimentResult {
    pub fn policy(&self, name: &str) -> Option<&PolicySummary> {
        self.policies.iter().find(|p| p.name == name)
    }
}

/// One replication: every policy against the same environment draw.
fn run_replication(cfg: &ExperimentConfig, rep: u64) -> Result<Vec<(RegretCurve, Option<bool>)>> {
    let ex = &cfg.experiment;
    let env = cfg.environment.instantiate(ex.seed, rep)?;
    cfg.policies
        .iter()
        .enumerate()
        .map(|(idx, spec)| {
            let mut policy = spec.build(&env, ex.horizon)?;
            let mut env_rng = RngStream::substream(ex.seed, rep, StreamRole::Environment);
            let mut pol_rng = RngStream::substream(ex.seed, rep, StreamRole::Custom(idx as u16));
            let curve = run_episode(&env, &mut policy, ex.horizon, &mut env_rng, &mut pol_rng)?;
            let decomposition = match &env {
                Environment::KArmed(k) => Some(decomposition_check(&curve, k)?),
                _ => None,
            };
            Ok((curve, decomposition))
        })
        .collect()
}

/// Runs every replication and aggregates in replication order, so the
/// output depends only on the config and never on `jobs`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let ex = &cfg.experiment;
    let reps: Vec<u64> = (0..ex.replications).collect();
    let outcomes: Vec<Vec<(RegretCurve, Option<bool>)>> = if ex.jobs == 1 {
        reps.iter()
            .map(|&r| run_replication(cfg, r))
            .collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(ex.jobs)
            .build()
            .map_err(|e| config(format!("thread pool: {e}")))?;
        pool.install(|| {
            reps.par_iter()
                .map(|&r| run_replication(cfg, r))
                .collect::<Result<_>>()
        })?
    };

    let policies = cfg
        .policies
        .iter()
        .enumerate()
        .map(|(p, spec)| {
            let curves: Vec<&RegretCurve> = outcomes.iter().map(|o| &o[p].0).collect();
            let (mean_regret, stderr) = mean_and_stderr(&curves, ex.horizon as usize);
            let mean_pulls = curves[0].pulls.as_ref().map(|first| {
                let mut acc = vec![0.0; first.len()];
                for c in &curves {
                    for (a, &n) in acc.iter_mut().zip(c.pulls.as_ref().expect("pulls")) {
                        *a += n as f64;
                    }
                }
                acc.iter().map(|a| a / curves.len() as f64).collect()
            });
            let decomposition_ok = outcomes[0][p]
                .1
                .map(|_| outcomes.iter().all(|o| o[p].1 == Some(true)));
            PolicySummary {
                name: spec.name().to_string(),
                mean_regret,
                stderr,
                final_regret: curves.iter().map(|c| c.total()).collect(),
                mean_pulls,
                decomposition_ok,
                actions: ex
                    .record_actions
                    .then(|| curves.iter().map(|c| c.actions.clone()).collect()),
            }
        })
        .collect();
    Ok(ExperimentResult {
        config: cfg.clone(),
        policies,
    })
}

fn mean_and_stderr(curves: &[&RegretCurve], len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = curves.len() as f64;
    let mut mean = vec![0.0; len];
    for c in curves {
        for (m, v) in mean.iter_mut().zip(&c.cumulative) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    if curves.len() < 2 {
        return (mean, vec![0.0; len]);
    }
    let mut ss = vec![0.0; len];
    for c in curves {
        for ((s, v), m) in ss.iter_mut().zip(&c.cumulative).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let se = ss
        .iter()
        .map(|s| (s / (n - 1.0)).sqrt() / n.sqrt())
        .collect();
    (mean, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(values: &[f64]) -> RegretCurve {
        RegretCurve {
            cumulative: values.to_vec(),
            pulls: None,
            actions: vec![],
        }
    }

    #[test]
    fn aggregation_matches_hand_values() {
        let a = curve(&[1.0, 2.0]);
        let b = curve(&[3.0, 2.0]);
        let (m, se) = mean_and_stderr(&[&a, &b], 2);
        assert_eq!(m, vec![2.0, 2.0]);
        // sd of {1, 3} is sqrt(2); divided by sqrt(2) gives 1.
        assert!((se[0] - 1.0).abs() < 1e-15);
        assert_eq!(se[1], 0.0);
        let (_, se1) = mean_and_stderr(&[&a], 2);
        assert_eq!(se1, vec![0.0, 0.0]);
    }
}
