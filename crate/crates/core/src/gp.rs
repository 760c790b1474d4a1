//! Gaussian-process regression on a finite grid, information gain, and the
//! GP-UCB / GP-TS acquisition rules.

use serde::{Deserialize, Serialize};

use crate::error::{config, BanditError, Result};
use crate::linalg::{self, dot, Cholesky, SpdMatrix, GP_JITTER};
use crate::policy::{argmax, GridPolicy};
use crate::rng::RngStream;

/// Diagonal floor for the observation Gram matrix when the modelled noise is
/// zero; small enough that noiseless interpolation stays exact to `1e-8`.
pub const OBSERVATION_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Linear,
    SquaredExponential,
    Matern,
}

/// Kernel family plus hyperparameters, as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub kind: KernelKind,
    #[serde(default = "one")]
    pub lengthscale: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Matérn smoothness; only 0.5, 1.5 and 2.5 are supported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl KernelSpec {
    pub fn squared_exponential(lengthscale: f64, amplitude: f64) -> Self {
        Self {
            kind: KernelKind::SquaredExponential,
            lengthscale,
            amplitude,
            nu: None,
        }
    }

    pub fn matern(nu: f64, lengthscale: f64, amplitude: f64) -> Self {
        Self {
            kind: KernelKind::Matern,
            lengthscale,
            amplitude,
            nu: Some(nu),
        }
    }

    pub fn linear(amplitude: f64) -> Self {
        Self {
            kind: KernelKind::Linear,
            lengthscale: 1.0,
            amplitude,
            nu: None,
        }
    }

    /// Validates the spec into an evaluable kernel.
    pub fn build(&self) -> Result<Kernel> {
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(config(format!(
                "kernel amplitude must be > 0, got {}",
                self.amplitude
            )));
        }
        if !(self.lengthscale > 0.0) || !self.lengthscale.is_finite() {
            return Err(config(format!(
                "kernel lengthscale must be > 0, got {}",
                self.lengthscale
            )));
        }
        let form = match self.kind {
            KernelKind::Linear => Form::Linear,
            KernelKind::SquaredExponential => Form::SquaredExponential,
            KernelKind::Matern => match self.nu {
                Some(0.5) => Form::Matern12,
                Some(1.5) => Form::Matern32,
                Some(2.5) => Form::Matern52,
                Some(nu) => {
                    return Err(config(format!(
                        "unsupported Matérn smoothness {nu}; use 0.5, 1.5 or 2.5"
                    )))
                }
                None => return Err(config("Matérn kernel requires `nu`")),
            },
        };
        Ok(Kernel {
            form,
            lengthscale: self.lengthscale,
            amplitude: self.amplitude,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    Linear,
    SquaredExponential,
    Matern12,
    Matern32,
    Matern52,
}

/// A validated kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    form: Form,
    lengthscale: f64,
    amplitude: f64,
}

impl Kernel {
    /// Caller guarantees equal lengths.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let a = self.amplitude;
        let l = self.lengthscale;
        match self.form {
            Form::Linear => a * dot(x, y),
            Form::SquaredExponential => a * (-sq_dist(x, y) / (2.0 * l * l)).exp(),
            Form::Matern12 => {
                let r = sq_dist(x, y).sqrt() / l;
                a * (-r).exp()
            }
            Form::Matern32 => {
                let r = 3f64.sqrt() * sq_dist(x, y).sqrt() / l;
                a * (1.0 + r) * (-r).exp()
            }
            Form::Matern52 => {
                let r = 5f64.sqrt() * sq_dist(x, y).sqrt() / l;
                a * (1.0 + r + r * r / 3.0) * (-r).exp()
            }
        }
    }

    pub fn gram(&self, points: &[Vec<f64>]) -> SpdMatrix {
        SpdMatrix::from_fn(points.len(), |i, j| self.eval(&points[i], &points[j]))
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Evaluate `k(x, x2)` for a kernel spec.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], x2: &[f64]) -> Result<f64> {
    if x.len() != x2.len() {
        return Err(BanditError::Dimension {
            expected: x.len(),
            found: x2.len(),
        });
    }
    Ok(spec.build()?.eval(x, x2))
}

/// GP posterior given noisy observations `y_i = f(x_i) + eps_i`,
/// `eps_i ~ N(0, noise_variance)`, under a zero-mean prior.
#[derive(Debug, Clone)]
pub struct GpPosterior {
    kernel: Kernel,
    noise_variance: f64,
    jitter: f64,
    points: Vec<Vec<f64>>,
    y: Vec<f64>,
    factor: Option<Cholesky>,
    // (K + s^2 I)^{-1} y
    weights: Vec<f64>,
}

impl GpPosterior {
    pub fn new(kernel: Kernel, noise_variance: f64) -> Result<Self> {
        Self::with_jitter(kernel, noise_variance, OBSERVATION_JITTER)
    }

    /// `jitter` is added to the diagonal of the observation Gram matrix on
    /// top of `noise_variance`.
    pub fn with_jitter(kernel: Kernel, noise_variance: f64, jitter: f64) -> Result<Self> {
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(config(format!(
                "noise variance must be >= 0, got {noise_variance}"
            )));
        }
        if !(jitter >= 0.0) {
            return Err(config(format!("jitter must be >= 0, got {jitter}")));
        }
        Ok(Self {
            kernel,
            noise_variance,
            jitter,
            points: Vec::new(),
            y: Vec::new(),
            factor: None,
            weights: Vec::new(),
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn observations(&self) -> &[f64] {
        &self.y
    }

    /// Append an observation and refactorize.
    pub fn push(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        if let Some(first) = self.points.first() {
            if first.len() != x.len() {
                return Err(BanditError::Dimension {
                    expected: first.len(),
                    found: x.len(),
                });
            }
        }
        self.points.push(x);
        self.y.push(y);
        self.refactor()
    }

    /// Snapshot-style update: a new posterior with `(x, y)` appended.
    pub fn updated(&self, x: Vec<f64>, y: f64) -> Result<Self> {
        let mut next = self.clone();
        next.push(x, y)?;
        Ok(next)
    }

    fn refactor(&mut self) -> Result<()> {
        let gram = self.kernel.gram(&self.points);
        let f = linalg::cholesky(&gram, self.noise_variance + self.jitter)?;
        self.weights = f.solve(&self.y)?;
        self.factor = Some(f);
        Ok(())
    }

    fn cross(&self, q: &[f64]) -> Vec<f64> {
        self.points.iter().map(|p| self.kernel.eval(p, q)).collect()
    }

    /// Posterior mean and variance at each query point.
    pub fn posterior_at(&self, queries: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut means = Vec::with_capacity(queries.len());
        let mut vars = Vec::with_capacity(queries.len());
        for q in queries {
            let prior = self.kernel.eval(q, q);
            match &self.factor {
                None => {
                    means.push(0.0);
                    vars.push(prior);
                }
                Some(f) => {
                    let k = self.cross(q);
                    let v = f.forward_solve(&k)?;
                    means.push(dot(&k, &self.weights));
                    vars.push((prior - dot(&v, &v)).max(0.0));
                }
            }
        }
        Ok((means, vars))
    }

    /// Joint posterior mean and covariance over `queries`.
    pub fn joint_posterior(&self, queries: &[Vec<f64>]) -> Result<(Vec<f64>, SpdMatrix)> {
        let n = queries.len();
        match &self.factor {
            None => Ok((vec![0.0; n], self.kernel.gram(queries))),
            Some(f) => {
                let mut means = Vec::with_capacity(n);
                let mut vs = Vec::with_capacity(n);
                for q in queries {
                    let k = self.cross(q);
                    means.push(dot(&k, &self.weights));
                    vs.push(f.forward_solve(&k)?);
                }
                let cov = SpdMatrix::from_fn(n, |i, j| {
                    self.kernel.eval(&queries[i], &queries[j]) - dot(&vs[i], &vs[j])
                });
                Ok((means, cov))
            }
        }
    }
}

/// `mu_t` and `sigma_t^2` at each query point.
pub fn gp_posterior_at(post: &GpPosterior, queries: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    post.posterior_at(queries)
}

/// Posterior after observing `(x, y)`.
pub fn gp_update(post: &GpPosterior, x: Vec<f64>, y: f64) -> Result<GpPosterior> {
    post.updated(x, y)
}

/// `max(0, 2 log(|D| t^2 pi^2 / (6 delta)))`.
pub fn gpucb_beta(domain_size: usize, t: u64, delta: f64) -> Result<f64> {
    if domain_size == 0 || t == 0 {
        return Err(BanditError::Parameter(
            "domain size and round must be positive".into(),
        ));
    }
    if !(delta > 0.0) {
        return Err(BanditError::Parameter(format!(
            "delta must be > 0, got {delta}"
        )));
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let arg = domain_size as f64 * (t as f64) * (t as f64) * pi2 / (6.0 * delta);
    Ok((2.0 * arg.ln()).max(0.0))
}

/// GP-UCB acquisition `mu + sqrt(beta) sigma` over the grid.
pub fn gpucb_scores(post: &GpPosterior, grid: &[Vec<f64>], beta: f64) -> Result<Vec<f64>> {
    if !(beta >= 0.0) {
        return Err(BanditError::Parameter(format!(
            "beta must be >= 0, got {beta}"
        )));
    }
    let (mu, var) = post.posterior_at(grid)?;
    let root = beta.sqrt();
    Ok(mu
        .iter()
        .zip(&var)
        .map(|(m, v)| m + root * v.sqrt())
        .collect())
}

/// Grid index maximizing the GP-UCB acquisition; ties go to the lowest index.
pub fn gpucb_select(post: &GpPosterior, grid: &[Vec<f64>], beta: f64) -> Result<usize> {
    if grid.is_empty() {
        return Err(BanditError::Parameter("grid is empty".into()));
    }
    Ok(argmax(&gpucb_scores(post, grid, beta)?))
}

/// One joint draw of the posterior over the grid, with `jitter` added to
/// the covariance diagonal.
pub fn gp_joint_sample(
    post: &GpPosterior,
    grid: &[Vec<f64>],
    jitter: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let (mean, cov) = post.joint_posterior(grid)?;
    let f = linalg::cholesky(&cov, jitter)?;
    let z: Vec<f64> = (0..grid.len()).map(|_| rng.standard_normal()).collect();
    let lz = f.lower_mul(&z)?;
    Ok(mean.iter().zip(&lz).map(|(m, e)| m + e).collect())
}

/// GP-TS: argmax of one posterior sample path over the grid.
pub fn gpts_select(
    post: &GpPosterior,
    grid: &[Vec<f64>],
    jitter: f64,
    rng: &mut RngStream,
) -> Result<usize> {
    if grid.is_empty() {
        return Err(BanditError::Parameter("grid is empty".into()));
    }
    Ok(argmax(&gp_joint_sample(post, grid, jitter, rng)?))
}

/// `0.5 log det(I + K / noise_variance)`.
pub fn info_gain(gram: &SpdMatrix, noise_variance: f64) -> Result<f64> {
    if !(noise_variance > 0.0) {
        return Err(BanditError::Parameter(format!(
            "noise variance must be > 0, got {noise_variance}"
        )));
    }
    let n = gram.dim();
    if n == 0 {
        return Ok(0.0);
    }
    let scaled = SpdMatrix::from_fn(n, |i, j| {
        gram.get(i, j) / noise_variance + if i == j { 1.0 } else { 0.0 }
    });
    Ok(0.5 * linalg::cholesky(&scaled, 0.0)?.log_det())
}

/// Greedy lower bound on the maximum information gain `gamma_T` over a
/// finite domain: repeatedly add the point with the largest posterior
/// variance. Submodularity makes this within `1 - 1/e` of the maximum.
pub fn greedy_max_info_gain(
    kernel: &Kernel,
    domain: &[Vec<f64>],
    rounds: usize,
    noise_variance: f64,
) -> Result<f64> {
    let mut post = GpPosterior::new(*kernel, noise_variance)?;
    let mut gain = 0.0;
    for _ in 0..rounds {
        let (_, var) = post.posterior_at(domain)?;
        let i = argmax(&var);
        gain += 0.5 * (1.0 + var[i] / noise_variance).ln();
        post.push(domain[i].clone(), 0.0)?;
    }
    Ok(gain)
}

/// How GP-UCB picks its exploration weight each round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule {
    Fixed(f64),
    /// `gpucb_beta(|D|, t, delta)`.
    Auto {
        delta: f64,
    },
}

#[derive(Debug, Clone)]
pub struct GpUcb {
    post: GpPosterior,
    schedule: BetaSchedule,
}

impl GpUcb {
    pub fn new(post: GpPosterior, schedule: BetaSchedule) -> Result<Self> {
        match schedule {
            BetaSchedule::Fixed(b) if !(b >= 0.0) => {
                return Err(config(format!("beta must be >= 0, got {b}")))
            }
            BetaSchedule::Auto { delta } if !(delta > 0.0 && delta < 1.0) => {
                return Err(config(format!("delta must lie in (0, 1), got {delta}")))
            }
            _ => {}
        }
        Ok(Self { post, schedule })
    }

    pub fn posterior(&self) -> &GpPosterior {
        &self.post
    }
}

impl GridPolicy for GpUcb {
    fn name(&self) -> &str {
        "gp-ucb"
    }

    fn observe(&mut self, x: &[f64], y: f64) -> Result<()> {
        self.post.push(x.to_vec(), y)
    }

    fn select(&mut self, grid: &[Vec<f64>], round: u64, _rng: &mut RngStream) -> Result<usize> {
        let beta = match self.schedule {
            BetaSchedule::Fixed(b) => b,
            BetaSchedule::Auto { delta } => gpucb_beta(grid.len(), round, delta)?,
        };
        gpucb_select(&self.post, grid, beta)
    }
}

#[derive(Debug, Clone)]
pub struct GpTs {
    post: GpPosterior,
    jitter: f64,
}

impl GpTs {
    pub fn new(post: GpPosterior) -> Self {
        Self::with_jitter(post, GP_JITTER)
    }

    pub fn with_jitter(post: GpPosterior, jitter: f64) -> Self {
        Self { post, jitter }
    }
}

impl GridPolicy for GpTs {
    fn name(&self) -> &str {
        "gp-ts"
    }

    fn observe(&mut self, x: &[f64], y: f64) -> Result<()> {
        self.post.push(x.to_vec(), y)
    }

    fn select(&mut self, grid: &[Vec<f64>], _round: u64, rng: &mut RngStream) -> Result<usize> {
        gpts_select(&self.post, grid, self.jitter, rng)
    }
}
