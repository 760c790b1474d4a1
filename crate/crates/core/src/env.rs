//! Reward generators with known ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{param, BanditError, Result};
use crate::gp::KernelSpec;
use crate::linalg::{self, dot, GP_JITTER};
use crate::policy::argmax;
use crate::rng::{GaussianMixture, RngStream};

/// Reward distribution of a single arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArmModel {
    Gaussian {
        mean: f64,
        sd: f64,
    },
    Bernoulli {
        p: f64,
    },
    GaussianMixture {
        weights: Vec<f64>,
        means: Vec<f64>,
        variances: Vec<f64>,
    },
}

impl ArmModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            ArmModel::Gaussian { mean, sd } => {
                if !mean.is_finite() || !(*sd >= 0.0) || !sd.is_finite() {
                    return Err(param(format!("invalid gaussian arm N({mean}, {sd}^2)")));
                }
            }
            ArmModel::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(param(format!("bernoulli p must lie in [0, 1], got {p}")));
                }
            }
            ArmModel::GaussianMixture {
                weights,
                means,
                variances,
            } => {
                GaussianMixture::new(weights.clone(), means.clone(), variances.clone())?;
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            ArmModel::Gaussian { mean, .. } => *mean,
            ArmModel::Bernoulli { p } => *p,
            ArmModel::GaussianMixture { weights, means, .. } => {
                weights.iter().zip(means).map(|(w, m)| w * m).sum()
            }
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, ArmModel::Bernoulli { .. })
    }

    /// Assumes [`ArmModel::validate`] passed.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            ArmModel::Gaussian { mean, sd } => {
                if *sd == 0.0 {
                    *mean
                } else {
                    mean + sd * rng.standard_normal()
                }
            }
            ArmModel::Bernoulli { p } => {
                if rng.unit() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            ArmModel::GaussianMixture {
                weights,
                means,
                variances,
            } => GaussianMixture::new(weights.clone(), means.clone(), variances.clone())
                .expect("validated")
                .sample(rng),
        }
    }
}

/// K independent arms.
#[derive(Debug, Clone, PartialEq)]
pub struct KArmedEnv {
    arms: Vec<ArmModel>,
    means: Vec<f64>,
    best: usize,
}

impl KArmedEnv {
    pub fn new(arms: Vec<ArmModel>) -> Result<Self> {
        if arms.is_empty() {
            return Err(param("a K-armed environment needs at least one arm"));
        }
        for a in &arms {
            a.validate()?;
        }
        let means: Vec<f64> = arms.iter().map(ArmModel::mean).collect();
        let best = argmax(&means);
        Ok(Self { arms, means, best })
    }

    /// Unit-variance Gaussian arms with the given means.
    pub fn gaussian(means: &[f64], sd: f64) -> Result<Self> {
        Self::new(
            means
                .iter()
                .map(|&mean| ArmModel::Gaussian { mean, sd })
                .collect(),
        )
    }

    pub fn bernoulli(ps: &[f64]) -> Result<Self> {
        Self::new(ps.iter().map(|&p| ArmModel::Bernoulli { p }).collect())
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Lowest index among the best arms.
    pub fn optimal_arm(&self) -> usize {
        self.best
    }

    pub fn optimal_mean(&self) -> f64 {
        self.means[self.best]
    }

    pub fn gap(&self, arm: usize) -> Result<f64> {
        self.check(arm)?;
        Ok(self.optimal_mean() - self.means[arm])
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.means.iter().map(|m| self.optimal_mean() - m).collect()
    }

    pub fn all_binary(&self) -> bool {
        self.arms.iter().all(ArmModel::is_binary)
    }

    fn check(&self, arm: usize) -> Result<()> {
        if arm < self.arms.len() {
            Ok(())
        } else {
            Err(BanditError::Index {
                index: arm,
                len: self.arms.len(),
            })
        }
    }

    /// One reward draw from `arm`.
    pub fn pull(&self, arm: usize, rng: &mut RngStream) -> Result<f64> {
        self.check(arm)?;
        Ok(self.arms[arm].sample(rng))
    }

    /// Gap of `arm`; no noise involved.
    pub fn pseudo_regret_increment(&self, arm: usize) -> Result<f64> {
        self.gap(arm)
    }
}

/// How arms share parameters in a linear environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearMode {
    /// One parameter vector per arm.
    Disjoint,
    /// One parameter vector shared by all arms.
    Shared,
}

/// Linear contextual environment with standard-normal features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEnv {
    mode: LinearMode,
    num_arms: usize,
    dim: usize,
    thetas: Vec<Vec<f64>>,
    noise_sd: f64,
}

impl LinearEnv {
    /// For `Shared`, `thetas` holds exactly one vector; for `Disjoint`, one
    /// per arm.
    pub fn new(
        mode: LinearMode,
        num_arms: usize,
        thetas: Vec<Vec<f64>>,
        noise_sd: f64,
    ) -> Result<Self> {
        if num_arms == 0 {
            return Err(param("linear environment needs at least one arm"));
        }
        let expected = match mode {
            LinearMode::Shared => 1,
            LinearMode::Disjoint => num_arms,
        };
        if thetas.len() != expected {
            return Err(BanditError::Dimension {
                expected,
                found: thetas.len(),
            });
        }
        let dim = thetas[0].len();
        if dim == 0 {
            return Err(param("feature dimension must be positive"));
        }
        if let Some(bad) = thetas.iter().find(|t| t.len() != dim) {
            return Err(BanditError::Dimension {
                expected: dim,
                found: bad.len(),
            });
        }
        if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
            return Err(param(format!("noise sd must be >= 0, got {noise_sd}")));
        }
        Ok(Self {
            mode,
            num_arms,
            dim,
            thetas,
            noise_sd,
        })
    }

    /// Parameters drawn coordinate-wise from `U(0, 1)`.
    pub fn with_uniform_theta(
        mode: LinearMode,
        num_arms: usize,
        dim: usize,
        noise_sd: f64,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let count = match mode {
            LinearMode::Shared => 1,
            LinearMode::Disjoint => num_arms,
        };
        let thetas = (0..count)
            .map(|_| (0..dim).map(|_| rng.unit()).collect())
            .collect();
        Self::new(mode, num_arms, thetas, noise_sd)
    }

    pub fn mode(&self) -> LinearMode {
        self.mode
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn theta(&self, arm: usize) -> &[f64] {
        match self.mode {
            LinearMode::Shared => &self.thetas[0],
            LinearMode::Disjoint => &self.thetas[arm],
        }
    }

    /// K feature vectors with i.i.d. `N(0, 1)` coordinates.
    pub fn draw_contexts(&self, rng: &mut RngStream) -> Vec<Vec<f64>> {
        (0..self.num_arms)
            .map(|_| (0..self.dim).map(|_| rng.standard_normal()).collect())
            .collect()
    }

    fn check(&self, contexts: &[Vec<f64>], arm: usize) -> Result<()> {
        if contexts.len() != self.num_arms {
            return Err(BanditError::Dimension {
                expected: self.num_arms,
                found: contexts.len(),
            });
        }
        if arm >= self.num_arms {
            return Err(BanditError::Index {
                index: arm,
                len: self.num_arms,
            });
        }
        Ok(())
    }

    pub fn expected_rewards(&self, contexts: &[Vec<f64>]) -> Vec<f64> {
        contexts
            .iter()
            .enumerate()
            .map(|(k, x)| dot(x, self.theta(k)))
            .collect()
    }

    /// The round's optimal arm (lowest index on ties).
    pub fn optimal_arm(&self, contexts: &[Vec<f64>]) -> usize {
        argmax(&self.expected_rewards(contexts))
    }

    pub fn reward(&self, contexts: &[Vec<f64>], arm: usize, rng: &mut RngStream) -> Result<f64> {
        self.check(contexts, arm)?;
        let mean = dot(&contexts[arm], self.theta(arm));
        Ok(if self.noise_sd == 0.0 {
            mean
        } else {
            mean + self.noise_sd * rng.standard_normal()
        })
    }

    pub fn pseudo_regret_increment(&self, contexts: &[Vec<f64>], arm: usize) -> Result<f64> {
        self.check(contexts, arm)?;
        let means = self.expected_rewards(contexts);
        let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((best - means[arm]).max(0.0))
    }
}

/// Where the continuum objective comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Objective {
    /// `f(x) = sin(5x) (1 - tanh(x^2))`.
    SinTanh,
    /// One draw from a zero-mean GP prior on the grid; off-grid points take
    /// the value of the nearest grid point.
    GpSample { kernel: KernelSpec },
}

impl Objective {
    pub fn closed_form(&self, x: f64) -> Option<f64> {
        match self {
            Objective::SinTanh => Some((5.0 * x).sin() * (1.0 - (x * x).tanh())),
            Objective::GpSample { .. } => None,
        }
    }
}

/// One-dimensional continuous domain discretized to a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumEnv {
    lo: f64,
    hi: f64,
    grid: Vec<Vec<f64>>,
    values: Vec<f64>,
    best: usize,
    objective: Objective,
    noise_sd: f64,
}

impl ContinuumEnv {
    /// `rng` is only consumed by [`Objective::GpSample`].
    pub fn new(
        lo: f64,
        hi: f64,
        grid_size: usize,
        objective: Objective,
        noise_sd: f64,
        rng: &mut RngStream,
    ) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(param(format!("invalid domain [{lo}, {hi}]")));
        }
        if grid_size == 0 {
            return Err(param("grid size must be positive"));
        }
        if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
            return Err(param(format!("noise sd must be >= 0, got {noise_sd}")));
        }
        let grid: Vec<Vec<f64>> = if grid_size == 1 {
            vec![vec![0.5 * (lo + hi)]]
        } else {
            (0..grid_size)
                .map(|i| vec![lo + (hi - lo) * i as f64 / (grid_size - 1) as f64])
                .collect()
        };
        let values = match &objective {
            Objective::SinTanh => grid
                .iter()
                .map(|x| objective.closed_form(x[0]).expect("closed form"))
                .collect(),
            Objective::GpSample { kernel } => {
                let k = kernel.build()?;
                let f = linalg::cholesky(&k.gram(&grid), GP_JITTER)?;
                let z: Vec<f64> = (0..grid.len()).map(|_| rng.standard_normal()).collect();
                f.lower_mul(&z)?
            }
        };
        let best = argmax(&values);
        Ok(Self {
            lo,
            hi,
            grid,
            values,
            best,
            objective,
            noise_sd,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn grid(&self) -> &[Vec<f64>] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn optimal_index(&self) -> usize {
        self.best
    }

    pub fn optimal_value(&self) -> f64 {
        self.values[self.best]
    }

    /// Noise-free objective at an arbitrary domain point.
    pub fn value_at(&self, x: f64) -> f64 {
        match self.objective.closed_form(x) {
            Some(v) => v,
            None => {
                let n = self.grid.len();
                let pos = if n == 1 {
                    0
                } else {
                    (((x - self.lo) / (self.hi - self.lo)) * (n - 1) as f64)
                        .round()
                        .clamp(0.0, (n - 1) as f64) as usize
                };
                self.values[pos]
            }
        }
    }

    /// A uniformly random domain point and its noisy observation.
    pub fn random_observation(&self, rng: &mut RngStream) -> (f64, f64) {
        let x = rng.uniform(self.lo, self.hi);
        let y = self.value_at(x) + self.noise(rng);
        (x, y)
    }

    fn noise(&self, rng: &mut RngStream) -> f64 {
        if self.noise_sd == 0.0 {
            0.0
        } else {
            self.noise_sd * rng.standard_normal()
        }
    }

    pub fn observe(&self, index: usize, rng: &mut RngStream) -> Result<f64> {
        if index >= self.grid.len() {
            return Err(BanditError::Index {
                index,
                len: self.grid.len(),
            });
        }
        Ok(self.values[index] + self.noise(rng))
    }

    pub fn pseudo_regret_increment(&self, index: usize) -> Result<f64> {
        if index >= self.grid.len() {
            return Err(BanditError::Index {
                index,
                len: self.grid.len(),
            });
        }
        Ok(self.optimal_value() - self.values[index])
    }
}
