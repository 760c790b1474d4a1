//! Linear contextual bandits: disjoint LinUCB, shared-parameter LinUCB with a
//! self-normalized confidence radius, and linear Thompson sampling.

use crate::error::{config, BanditError, Result};
use crate::linalg::{self, dot, sherman_morrison_in_place, SpdMatrix, CONTEXTUAL_JITTER};
use crate::policy::{argmax, ContextualPolicy};
use crate::rng::RngStream;

/// Ridge-regression sufficient statistics with an incrementally maintained
/// inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeState {
    lambda: f64,
    gram: SpdMatrix,
    gram_inv: SpdMatrix,
    b: Vec<f64>,
    theta_hat: Vec<f64>,
    updates: u64,
}

impl RidgeState {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if dim == 0 {
            return Err(config("feature dimension must be positive"));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(config(format!("ridge lambda must be > 0, got {lambda}")));
        }
        Ok(Self {
            lambda,
            gram: SpdMatrix::scaled_identity(dim, lambda),
            gram_inv: SpdMatrix::scaled_identity(dim, 1.0 / lambda),
            b: vec![0.0; dim],
            theta_hat: vec![0.0; dim],
            updates: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `lambda I + sum x x^T`.
    pub fn gram(&self) -> &SpdMatrix {
        &self.gram
    }

    pub fn gram_inv(&self) -> &SpdMatrix {
        &self.gram_inv
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn theta_hat(&self) -> &[f64] {
        &self.theta_hat
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Add `(x, r)`; the inverse moves by a Sherman–Morrison step.
    pub fn update(&mut self, x: &[f64], r: f64) -> Result<()> {
        if x.len() != self.dim() {
            return Err(BanditError::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        self.gram.add_outer(x)?;
        sherman_morrison_in_place(&mut self.gram_inv, x)?;
        for (bi, xi) in self.b.iter_mut().zip(x) {
            *bi += r * xi;
        }
        self.theta_hat = self.gram_inv.mul_vec(&self.b)?;
        self.updates += 1;
        Ok(())
    }

    /// `theta_hat` recomputed by a Cholesky solve of the accumulated Gram
    /// matrix, independent of the incremental inverse.
    pub fn theta_direct(&self) -> Result<Vec<f64>> {
        linalg::cholesky(&self.gram, 0.0)?.solve(&self.b)
    }

    /// `sqrt(x^T Sigma^{-1} x)`.
    pub fn width(&self, x: &[f64]) -> Result<f64> {
        Ok(self.gram_inv.quad_form(x)?.max(0.0).sqrt())
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(BanditError::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(dot(x, &self.theta_hat))
    }
}

/// Functional form of [`RidgeState::update`].
pub fn ridge_update(state: &RidgeState, x: &[f64], r: f64) -> Result<RidgeState> {
    let mut next = state.clone();
    next.update(x, r)?;
    Ok(next)
}

/// `x^T theta_hat + alpha sqrt(x^T Sigma^{-1} x)` for one arm's model.
pub fn linucb_disjoint_score(x: &[f64], state: &RidgeState, alpha: f64) -> Result<f64> {
    Ok(state.predict(x)? + alpha * state.width(x)?)
}

/// Confidence radius
/// `sqrt(lambda B) + sigma sqrt(2 log(1/delta) + d log(1 + T B'^2 / (d lambda)))`.
#[allow(clippy::too_many_arguments)]
pub fn linucb_general_beta(
    lambda: f64,
    theta_bound: f64,
    context_bound: f64,
    sigma: f64,
    dim: usize,
    horizon: u64,
    delta: f64,
) -> Result<f64> {
    if !(lambda > 0.0) || !(theta_bound >= 0.0) || !(context_bound >= 0.0) || !(sigma >= 0.0) {
        return Err(BanditError::Parameter(
            "lambda must be > 0 and B, B', sigma must be >= 0".into(),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BanditError::Parameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let d = dim as f64;
    let inner = 2.0 * (1.0 / delta).ln()
        + d * (1.0 + horizon as f64 * context_bound * context_bound / (d * lambda)).ln();
    Ok((lambda * theta_bound).sqrt() + sigma * inner.sqrt())
}

/// `argmax_k x_k^T theta_hat + beta sqrt(x_k^T Sigma^{-1} x_k)`.
pub fn linucb_general_select(
    contexts: &[Vec<f64>],
    state: &RidgeState,
    beta: f64,
) -> Result<usize> {
    if contexts.is_empty() {
        return Err(BanditError::Parameter("no contexts to choose from".into()));
    }
    let scores = contexts
        .iter()
        .map(|x| Ok(state.predict(x)? + beta * state.width(x)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(argmax(&scores))
}

/// `theta_hat + v C z` with `C C^T = Sigma^{-1}` and `z ~ N(0, I)`.
pub fn lints_sample_theta(state: &RidgeState, v: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(BanditError::Parameter(format!("v must be >= 0, got {v}")));
    }
    if v == 0.0 {
        return Ok(state.theta_hat.clone());
    }
    let f = linalg::cholesky(state.gram_inv(), CONTEXTUAL_JITTER)?;
    let z: Vec<f64> = (0..state.dim()).map(|_| rng.standard_normal()).collect();
    let cz = f.lower_mul(&z)?;
    Ok(state
        .theta_hat
        .iter()
        .zip(&cz)
        .map(|(t, c)| t + v * c)
        .collect())
}

fn check_arm(arm: usize, k: usize) -> Result<()> {
    if arm < k {
        Ok(())
    } else {
        Err(BanditError::Index { index: arm, len: k })
    }
}

/// LinUCB with one ridge model per arm.
#[derive(Debug, Clone)]
pub struct LinUcbDisjoint {
    arms: Vec<RidgeState>,
    alpha: f64,
}

impl LinUcbDisjoint {
    pub fn new(num_arms: usize, dim: usize, lambda: f64, alpha: f64) -> Result<Self> {
        if num_arms == 0 {
            return Err(config("need at least one arm"));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(config(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(Self {
            arms: vec![RidgeState::new(dim, lambda)?; num_arms],
            alpha,
        })
    }

    pub fn arm_state(&self, arm: usize) -> &RidgeState {
        &self.arms[arm]
    }
}

impl ContextualPolicy for LinUcbDisjoint {
    fn name(&self) -> &str {
        "linucb-disjoint"
    }

    fn select(&mut self, contexts: &[Vec<f64>], _rng: &mut RngStream) -> Result<usize> {
        if contexts.len() != self.arms.len() {
            return Err(BanditError::Dimension {
                expected: self.arms.len(),
                found: contexts.len(),
            });
        }
        let scores = contexts
            .iter()
            .zip(&self.arms)
            .map(|(x, s)| linucb_disjoint_score(x, s, self.alpha))
            .collect::<Result<Vec<f64>>>()?;
        Ok(argmax(&scores))
    }

    fn update(&mut self, arm: usize, context: &[f64], reward: f64) -> Result<()> {
        check_arm(arm, self.arms.len())?;
        self.arms[arm].update(context, reward)
    }
}

/// How shared-parameter LinUCB sets its radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusRule {
    /// [`linucb_general_beta`] with `B'` tracked as the largest context norm
    /// seen so far.
    SelfNormalized {
        theta_bound: f64,
        sigma: f64,
        delta: f64,
        horizon: u64,
    },
    Fixed(f64),
}

/// LinUCB with a single parameter vector shared by all arms.
#[derive(Debug, Clone)]
pub struct LinUcb {
    state: RidgeState,
    rule: RadiusRule,
    max_norm: f64,
}

impl LinUcb {
    pub fn new(dim: usize, lambda: f64, rule: RadiusRule) -> Result<Self> {
        match rule {
            RadiusRule::Fixed(b) if !(b >= 0.0) => {
                return Err(config(format!("beta must be >= 0, got {b}")))
            }
            RadiusRule::SelfNormalized {
                theta_bound,
                sigma,
                delta,
                ..
            } => {
                linucb_general_beta(lambda, theta_bound, 0.0, sigma, dim, 1, delta)?;
            }
            _ => {}
        }
        Ok(Self {
            state: RidgeState::new(dim, lambda)?,
            rule,
            max_norm: 0.0,
        })
    }

    pub fn state(&self) -> &RidgeState {
        &self.state
    }

    /// Radius that would be used given the contexts seen so far.
    pub fn beta(&self) -> f64 {
        match self.rule {
            RadiusRule::Fixed(b) => b,
            RadiusRule::SelfNormalized {
                theta_bound,
                sigma,
                delta,
                horizon,
            } => linucb_general_beta(
                self.state.lambda(),
                theta_bound,
                self.max_norm,
                sigma,
                self.state.dim(),
                horizon,
                delta,
            )
            .expect("validated at construction"),
        }
    }
}

impl ContextualPolicy for LinUcb {
    fn name(&self) -> &str {
        "linucb"
    }

    fn select(&mut self, contexts: &[Vec<f64>], _rng: &mut RngStream) -> Result<usize> {
        for x in contexts {
            self.max_norm = self.max_norm.max(dot(x, x).sqrt());
        }
        linucb_general_select(contexts, &self.state, self.beta())
    }

    fn update(&mut self, _arm: usize, context: &[f64], reward: f64) -> Result<()> {
        self.state.update(context, reward)
    }
}

/// Linear Thompson sampling with posterior `N(theta_hat, v^2 Sigma^{-1})`.
#[derive(Debug, Clone)]
pub struct LinTs {
    state: RidgeState,
    v: f64,
}

impl LinTs {
    pub fn new(dim: usize, lambda: f64, v: f64) -> Result<Self> {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(config(format!("LinTS v must be >= 0, got {v}")));
        }
        Ok(Self {
            state: RidgeState::new(dim, lambda)?,
            v,
        })
    }

    pub fn state(&self) -> &RidgeState {
        &self.state
    }
}

impl ContextualPolicy for LinTs {
    fn name(&self) -> &str {
        "lints"
    }

    fn select(&mut self, contexts: &[Vec<f64>], rng: &mut RngStream) -> Result<usize> {
        if contexts.is_empty() {
            return Err(BanditError::Parameter("no contexts to choose from".into()));
        }
        let theta = lints_sample_theta(&self.state, self.v, rng)?;
        let scores: Vec<f64> = contexts.iter().map(|x| dot(x, &theta)).collect();
        Ok(argmax(&scores))
    }

    fn update(&mut self, _arm: usize, context: &[f64], reward: f64) -> Result<()> {
        self.state.update(context, reward)
    }
}

/// Greedy ridge regression: plays `argmax x^T theta_hat`.
#[derive(Debug, Clone)]
pub struct RidgeGreedy {
    state: RidgeState,
}

impl RidgeGreedy {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        Ok(Self {
            state: RidgeState::new(dim, lambda)?,
        })
    }
}

impl ContextualPolicy for RidgeGreedy {
    fn name(&self) -> &str {
        "ridge-greedy"
    }

    fn select(&mut self, contexts: &[Vec<f64>], _rng: &mut RngStream) -> Result<usize> {
        linucb_general_select(contexts, &self.state, 0.0)
    }

    fn update(&mut self, _arm: usize, context: &[f64], reward: f64) -> Result<()> {
        self.state.update(context, reward)
    }
}
