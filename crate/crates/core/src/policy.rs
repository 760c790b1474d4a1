//! The three policy interfaces, one per environment family.

use crate::error::Result;
use crate::rng::RngStream;

/// A K-armed policy: pick an arm, then learn from its reward.
pub trait ArmPolicy: Send {
    fn name(&self) -> &str;
    fn num_arms(&self) -> usize;
    fn select(&mut self, rng: &mut RngStream) -> Result<usize>;
    fn update(&mut self, arm: usize, reward: f64) -> Result<()>;
}

/// A linear contextual policy: one feature vector per arm each round.
pub trait ContextualPolicy: Send {
    fn name(&self) -> &str;
    fn select(&mut self, contexts: &[Vec<f64>], rng: &mut RngStream) -> Result<usize>;
    fn update(&mut self, arm: usize, context: &[f64], reward: f64) -> Result<()>;
}

/// A policy over a finite grid of points in a continuous domain.
pub trait GridPolicy: Send {
    fn name(&self) -> &str;
    /// Feed an observation, either a warm-start point or the reward of the
    /// previous selection.
    fn observe(&mut self, x: &[f64], y: f64) -> Result<()>;
    /// `round` is 1-based.
    fn select(&mut self, grid: &[Vec<f64>], round: u64, rng: &mut RngStream) -> Result<usize>;
}

/// Index of the largest value; ties and NaNs resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}
