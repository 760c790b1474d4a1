//! K-armed policies: explore-then-commit, UCB, MOSS, Gaussian and Beta
//! Thompson sampling, and minimax-optimal Thompson sampling (MOTS).
//!
//! Arms are zero-based. All argmax decisions break ties toward the lowest
//! index. Policies that need the horizon take it at construction.

use crate::error::{config, BanditError, Result};
use crate::policy::{argmax, ArmPolicy};
use crate::rng::{beta_sample, truncated_gaussian_sample, RngStream};

/// Sufficient statistics shared by every K-armed policy.
#[derive(Debug, Clone, PartialEq)]
pub struct MabState {
    pulls: Vec<u64>,
    means: Vec<f64>,
    successes: Vec<u64>,
    failures: Vec<u64>,
    round: u64,
}

impl MabState {
    pub fn new(num_arms: usize) -> Self {
        Self {
            pulls: vec![0; num_arms],
            means: vec![0.0; num_arms],
            successes: vec![0; num_arms],
            failures: vec![0; num_arms],
            round: 0,
        }
    }

    pub fn num_arms(&self) -> usize {
        self.pulls.len()
    }

    /// Completed rounds.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    pub fn failures(&self) -> &[u64] {
        &self.failures
    }

    /// Record a reward. Exact 0/1 rewards are also tallied as failures and
    /// successes; anything else leaves those counters alone.
    pub fn record(&mut self, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.pulls.len() {
            return Err(BanditError::Index {
                index: arm,
                len: self.pulls.len(),
            });
        }
        if !reward.is_finite() {
            return Err(BanditError::Contract(format!("non-finite reward {reward}")));
        }
        let s = self.pulls[arm] as f64;
        self.means[arm] = (s * self.means[arm] + reward) / (s + 1.0);
        self.pulls[arm] += 1;
        if reward == 1.0 {
            self.successes[arm] += 1;
        } else if reward == 0.0 {
            self.failures[arm] += 1;
        }
        self.round += 1;
        Ok(())
    }

    /// Lowest-index arm not yet pulled.
    pub fn first_unpulled(&self) -> Option<usize> {
        self.pulls.iter().position(|&s| s == 0)
    }
}

fn check_arms(k: usize) -> Result<()> {
    if k == 0 {
        Err(config("need at least one arm"))
    } else {
        Ok(())
    }
}

fn log_plus(x: f64) -> f64 {
    x.max(1.0).ln()
}

/// Explore-then-commit arm for the upcoming round (1-based `t = round + 1`):
/// round-robin `t mod K` while `t <= mK`, otherwise `committed` or, if none
/// is given, the current empirical leader.
pub fn etc_select(
    state: &MabState,
    m: u64,
    horizon: u64,
    committed: Option<usize>,
) -> Result<usize> {
    let k = state.num_arms() as u64;
    if m < 1 || m.saturating_mul(k) >= horizon {
        return Err(config(format!(
            "ETC needs 1 <= m < T/K; got m = {m}, K = {k}, T = {horizon}"
        )));
    }
    let t = state.round() + 1;
    if t <= m * k {
        Ok((t % k) as usize)
    } else {
        Ok(committed.unwrap_or_else(|| argmax(state.means())))
    }
}

/// `max(1, ceil((4 / gap^2) log(T gap^2 / 4)))`.
pub fn etc_optimal_m(gap: f64, horizon: u64) -> Result<u64> {
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(BanditError::Parameter(format!(
            "gap must be > 0, got {gap}"
        )));
    }
    let g2 = gap * gap;
    let raw = (4.0 / g2 * (horizon as f64 * g2 / 4.0).ln()).ceil();
    Ok(if raw >= 1.0 { raw as u64 } else { 1 })
}

#[derive(Debug, Clone)]
pub struct Etc {
    state: MabState,
    m: u64,
    horizon: u64,
    committed: Option<usize>,
}

impl Etc {
    pub fn new(num_arms: usize, m: u64, horizon: u64) -> Result<Self> {
        check_arms(num_arms)?;
        let state = MabState::new(num_arms);
        etc_select(&state, m, horizon, None)?;
        Ok(Self {
            state,
            m,
            horizon,
            committed: None,
        })
    }

    pub fn state(&self) -> &MabState {
        &self.state
    }

    pub fn committed(&self) -> Option<usize> {
        self.committed
    }
}

impl ArmPolicy for Etc {
    fn name(&self) -> &str {
        "etc"
    }

    fn num_arms(&self) -> usize {
        self.state.num_arms()
    }

    fn select(&mut self, _rng: &mut RngStream) -> Result<usize> {
        let arm = etc_select(&self.state, self.m, self.horizon, self.committed)?;
        if self.committed.is_none() && self.state.round() >= self.m * self.state.num_arms() as u64 {
            self.committed = Some(arm);
        }
        Ok(arm)
    }

    fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.record(arm, reward)
    }
}

/// `+inf` for an unpulled arm, else `mean + sqrt(2 log(1/delta) / pulls)`.
pub fn ucb_index(mean_hat: f64, pulls: u64, delta: f64) -> f64 {
    if pulls == 0 {
        f64::INFINITY
    } else {
        mean_hat + (2.0 * (1.0 / delta).ln() / pulls as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Ucb {
    state: MabState,
    delta: f64,
}

impl Ucb {
    /// Uses `delta = 1 / T^2`.
    pub fn new(num_arms: usize, horizon: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(config("horizon must be positive"));
        }
        let t = horizon as f64;
        Self::with_delta(num_arms, 1.0 / (t * t))
    }

    pub fn with_delta(num_arms: usize, delta: f64) -> Result<Self> {
        check_arms(num_arms)?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(config(format!("UCB delta must lie in (0, 1), got {delta}")));
        }
        Ok(Self {
            state: MabState::new(num_arms),
            delta,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn state(&self) -> &MabState {
        &self.state
    }

    pub fn indices(&self) -> Vec<f64> {
        self.state
            .means()
            .iter()
            .zip(self.state.pulls())
            .map(|(&m, &s)| ucb_index(m, s, self.delta))
            .collect()
    }
}

impl ArmPolicy for Ucb {
    fn name(&self) -> &str {
        "ucb"
    }

    fn num_arms(&self) -> usize {
        self.state.num_arms()
    }

    fn select(&mut self, _rng: &mut RngStream) -> Result<usize> {
        Ok(argmax(&self.indices()))
    }

    fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.record(arm, reward)
    }
}

/// `mean + sqrt((4 / pulls) log+(T / (K pulls)))`.
pub fn moss_index(mean_hat: f64, pulls: u64, horizon: u64, num_arms: usize) -> f64 {
    debug_assert!(pulls >= 1);
    let s = pulls as f64;
    mean_hat + (4.0 / s * log_plus(horizon as f64 / (num_arms as f64 * s))).sqrt()
}

#[derive(Debug, Clone)]
pub struct Moss {
    state: MabState,
    horizon: u64,
}

impl Moss {
    pub fn new(num_arms: usize, horizon: u64) -> Result<Self> {
        check_arms(num_arms)?;
        Ok(Self {
            state: MabState::new(num_arms),
            horizon,
        })
    }

    pub fn state(&self) -> &MabState {
        &self.state
    }
}

impl ArmPolicy for Moss {
    fn name(&self) -> &str {
        "moss"
    }

    fn num_arms(&self) -> usize {
        self.state.num_arms()
    }

    fn select(&mut self, _rng: &mut RngStream) -> Result<usize> {
        if let Some(arm) = self.state.first_unpulled() {
            return Ok(arm);
        }
        let k = self.state.num_arms();
        let idx: Vec<f64> = self
            .state
            .means()
            .iter()
            .zip(self.state.pulls())
            .map(|(&m, &s)| moss_index(m, s, self.horizon, k))
            .collect();
        Ok(argmax(&idx))
    }

    fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.record(arm, reward)
    }
}

/// Mean and variance of the conjugate posterior for `arm` under a `N(0, 1)`
/// prior and unit-variance Gaussian likelihood.
pub fn gaussian_posterior(state: &MabState, arm: usize) -> (f64, f64) {
    let s = state.pulls()[arm] as f64;
    (s * state.means()[arm] / (s + 1.0), 1.0 / (s + 1.0))
}

/// One draw from the Gaussian-TS posterior of `arm`.
pub fn gaussian_ts_sample(state: &MabState, arm: usize, rng: &mut RngStream) -> f64 {
    let (m, v) = gaussian_posterior(state, arm);
    m + v.sqrt() * rng.standard_normal()
}

#[derive(Debug, Clone)]
pub struct GaussianTs {
    state: MabState,
}

impl GaussianTs {
    pub fn new(num_arms: usize) -> Result<Self> {
        check_arms(num_arms)?;
        Ok(Self {
            state: MabState::new(num_arms),
        })
    }

    pub fn state(&self) -> &MabState {
        &self.state
    }
}

impl ArmPolicy for GaussianTs {
    fn name(&self) -> &str {
        "ts-gaussian"
    }

    fn num_arms(&self) -> usize {
        self.state.num_arms()
    }

    fn select(&mut self, rng: &mut RngStream) -> Result<usize> {
        if let Some(arm) = self.state.first_unpulled() {
            return Ok(arm);
        }
        let draws: Vec<f64> = (0..self.state.num_arms())
            .map(|k| gaussian_ts_sample(&self.state, k, rng))
            .collect();
        Ok(argmax(&draws))
    }

    fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.record(arm, reward)
    }
}

/// `Beta(1 + s1, 1 + s0)` draw.
pub fn beta_ts_sample(s1: u64, s0: u64, rng: &mut RngStream) -> f64 {
    beta_sample(1.0 + s1 as f64, 1.0 + s0 as f64, rng).expect("shapes are >= 1")
}

#[derive(Debug, Clone)]
pub struct BetaTs {
    state: MabState,
}

impl BetaTs {
    pub fn new(num_arms: usize) -> Result<Self> {
        check_arms(num_arms)?;
        Ok(Self {
            state: MabState::new(num_arms),
        })
    }

    pub fn state(&self) -> &MabState {
        &self.state
    }
}

impl ArmPolicy for BetaTs {
    fn name(&self) -> &str {
        "ts-beta"
    }

    fn num_arms(&self) -> usize {
        self.state.num_arms()
    }

    fn select(&mut self, rng: &mut RngStream) -> Result<usize> {
        let draws: Vec<f64> = (0..self.state.num_arms())
            .map(|k| beta_ts_sample(self.state.successes()[k], self.state.failures()[k], rng))
            .collect();
        Ok(argmax(&draws))
    }

    fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        if reward != 0.0 && reward != 1.0 {
            return Err(BanditError::Contract(format!(
                "Beta-TS needs rewards in {{0, 1}}, got {reward}"
            )));
        }
        self.state.record(arm, reward)
    }
}

/// Clipping level `tau = mean + sqrt((alpha / pulls) log+(T / (K pulls)))`.
pub fn mots_threshold(mean_hat: f64, pulls: u64, horizon: u64, num_arms: usize, alpha: f64) -> f64 {
    let s = pulls as f64;
    mean_hat + (alpha / s * log_plus(horizon as f64 / (num_arms as f64 * s))).sqrt()
}

fn check_mots(rho: f64, alpha: f64) -> Result<()> {
    if !(rho > 0.5 && rho < 1.0) {
        return Err(config(format!("MOTS rho must lie in (1/2, 1), got {rho}")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(config(format!("MOTS alpha must be > 0, got {alpha}")));
    }
    Ok(())
}

/// `min(g, tau)` with `g ~ N(mean, 1 / (rho pulls))`.
pub fn mots_sample(
    mean_hat: f64,
    pulls: u64,
    horizon: u64,
    num_arms: usize,
    rho: f64,
    alpha: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    check_mots(rho, alpha)?;
    if pulls == 0 {
        return Err(BanditError::Parameter(
            "MOTS samples need at least one pull".into(),
        ));
    }
    let tau = mots_threshold(mean_hat, pulls, horizon, num_arms, alpha);
    truncated_gaussian_sample(mean_hat, 1.0 / (rho * pulls as f64), tau, rng)
}

#[derive(Debug, Clone)]
pub struct Mots {
    state: MabState,
    horizon: u64,
    rho: f64,
    alpha: f64,
}

impl Mots {
    pub const DEFAULT_RHO: f64 = 0.8;
    pub const DEFAULT_ALPHA: f64 = 1.5;

    pub fn new(num_arms: usize, horizon: u64, rho: f64, alpha: f64) -> Result<Self> {
        check_arms(num_arms)?;
        check_mots(rho, alpha)?;
        Ok(Self {
            state: MabState::new(num_arms),
            horizon,
            rho,
            alpha,
        })
    }

    pub fn state(&self) -> &MabState {
        &self.state
    }
}

impl ArmPolicy for Mots {
    fn name(&self) -> &str {
        "mots"
    }

    fn num_arms(&self) -> usize {
        self.state.num_arms()
    }

    fn select(&mut self, rng: &mut RngStream) -> Result<usize> {
        if let Some(arm) = self.state.first_unpulled() {
            return Ok(arm);
        }
        let k = self.state.num_arms();
        let mut draws = Vec::with_capacity(k);
        for arm in 0..k {
            draws.push(mots_sample(
                self.state.means()[arm],
                self.state.pulls()[arm],
                self.horizon,
                k,
                self.rho,
                self.alpha,
                rng,
            )?);
        }
        Ok(argmax(&draws))
    }

    fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.state.record(arm, reward)
    }
}

/// Always plays the same arm. Useful as a baseline and in tests.
#[derive(Debug, Clone)]
pub struct FixedArm {
    arm: usize,
    num_arms: usize,
}

impl FixedArm {
    pub fn new(num_arms: usize, arm: usize) -> Result<Self> {
        if arm >= num_arms {
            return Err(BanditError::Index {
                index: arm,
                len: num_arms,
            });
        }
        Ok(Self { arm, num_arms })
    }
}

impl ArmPolicy for FixedArm {
    fn name(&self) -> &str {
        "fixed"
    }

    fn num_arms(&self) -> usize {
        self.num_arms
    }

    fn select(&mut self, _rng: &mut RngStream) -> Result<usize> {
        Ok(self.arm)
    }

    fn update(&mut self, _arm: usize, _reward: f64) -> Result<()> {
        Ok(())
    }
}
