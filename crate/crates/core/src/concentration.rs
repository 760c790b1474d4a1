//! Non-asymptotic confidence intervals and tail bounds.
//!
//! Every calculator uses natural logarithms. Tail bounds are clamped to
//! `[0, 1]` so they can be used directly as probabilities.

use crate::env::ArmModel;
use crate::error::{param, Result};
use crate::rng::RngStream;

fn check_n(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(param("sample size must be positive"));
    }
    Ok(n as f64)
}

fn check_level(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(param(format!("{name} must lie in (0, 1), got {p}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(param(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// Hoeffding half-width for the mean of `n` i.i.d. variables supported on an
/// interval of width `range`: `(range / sqrt 2) * sqrt(log(2/delta) / n)`.
pub fn hoeffding_halfwidth(n: u64, range: f64, delta: f64) -> Result<f64> {
    let n = check_n(n)?;
    check_positive("range", range)?;
    check_level("delta", delta)?;
    Ok(range / 2f64.sqrt() * ((2.0 / delta).ln() / n).sqrt())
}

/// Half-width `sigma * sqrt(2 log(2/alpha) / n)` of the `1 - alpha` interval
/// for the mean of `n` i.i.d. sub-Gaussian variables with variance proxy
/// `sigma^2`.
pub fn subgaussian_halfwidth(n: u64, sigma: f64, alpha: f64) -> Result<f64> {
    let n = check_n(n)?;
    check_positive("sigma", sigma)?;
    check_level("alpha", alpha)?;
    Ok(sigma * (2.0 * (2.0 / alpha).ln() / n).sqrt())
}

/// Half-width for the difference of two group means with `n / 2` units per
/// group: twice the single-mean sub-Gaussian half-width.
pub fn treatment_effect_halfwidth(n: u64, sigma: f64, alpha: f64) -> Result<f64> {
    if n % 2 == 1 {
        return Err(param(format!(
            "treatment-effect sample size must be even, got {n}"
        )));
    }
    Ok(2.0 * subgaussian_halfwidth(n, sigma, alpha)?)
}

/// Tail bound for a sum of `n` sub-exponential variables with parameters
/// `(lambda_bar, alpha_param)`:
/// `min(1, 2 exp(-0.5 * min(n t^2 / lambda_bar^2, n t / alpha_param)))`.
pub fn subexp_tail(n: u64, lambda_bar: f64, alpha_param: f64, t: f64) -> Result<f64> {
    let n = check_n(n)?;
    check_positive("lambda_bar", lambda_bar)?;
    check_positive("alpha", alpha_param)?;
    if !(t >= 0.0) {
        return Err(param(format!("deviation must be >= 0, got {t}")));
    }
    let quad = n * t * t / (lambda_bar * lambda_bar);
    let lin = n * t / alpha_param;
    Ok((2.0 * (-0.5 * quad.min(lin)).exp()).min(1.0))
}

/// DKW band half-width `sqrt(log(2/delta) / (2n))`.
pub fn dkw_epsilon(n: u64, delta: f64) -> Result<f64> {
    let n = check_n(n)?;
    check_level("delta", delta)?;
    Ok(((2.0 / delta).ln() / (2.0 * n)).sqrt())
}

/// Refined Mill bound `P(|X| >= x) <= exp(-x^2 / (2 sigma^2))` for
/// `X ~ N(0, sigma^2)`.
pub fn mills_tail(sigma: f64, x: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    if !(x >= 0.0) {
        return Err(param(format!("x must be >= 0, got {x}")));
    }
    Ok((-x * x / (2.0 * sigma * sigma)).exp())
}

/// Markov bound `E[phi(X)] / phi(a)` for nonnegative nondecreasing `phi`.
pub fn markov_tail(expected_phi: f64, phi_at_a: f64) -> Result<f64> {
    if !(expected_phi >= 0.0) {
        return Err(param("E[phi(X)] must be >= 0"));
    }
    check_positive("phi(a)", phi_at_a)?;
    Ok((expected_phi / phi_at_a).min(1.0))
}

/// Chebyshev bound `Var X / a^2` on `P(|X - EX| >= a)`.
pub fn chebyshev_tail(variance: f64, a: f64) -> Result<f64> {
    if !(variance >= 0.0) {
        return Err(param("variance must be >= 0"));
    }
    check_positive("a", a)?;
    Ok((variance / (a * a)).min(1.0))
}

/// One-sided Chernoff bound for `X ~ subG(sigma^2)`: `exp(-t^2 / (2 sigma^2))`.
pub fn chernoff_subgaussian_tail(sigma: f64, t: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    if !(t >= 0.0) {
        return Err(param(format!("t must be >= 0, got {t}")));
    }
    Ok((-t * t / (2.0 * sigma * sigma)).exp())
}

/// Which half-width a coverage experiment uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalRule {
    Hoeffding { range: f64 },
    SubGaussian { sigma: f64 },
}

impl IntervalRule {
    pub fn halfwidth(&self, n: u64, delta: f64) -> Result<f64> {
        match *self {
            IntervalRule::Hoeffding { range } => hoeffding_halfwidth(n, range, delta),
            IntervalRule::SubGaussian { sigma } => subgaussian_halfwidth(n, sigma, delta),
        }
    }
}

/// Fraction of `reps` simulated samples of size `n` whose interval
/// `[mean_hat +- halfwidth]` contains `true_mean`.
pub fn empirical_coverage(
    sampler: &ArmModel,
    true_mean: f64,
    n: u64,
    rule: IntervalRule,
    delta: f64,
    reps: u64,
    rng: &mut RngStream,
) -> Result<f64> {
    if reps == 0 {
        return Err(param("reps must be positive"));
    }
    let hw = rule.halfwidth(n, delta)?;
    let mut covered = 0u64;
    for _ in 0..reps {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sampler.sample(rng);
        }
        let mean = sum / n as f64;
        if (mean - true_mean).abs() <= hw {
            covered += 1;
        }
    }
    Ok(covered as f64 / reps as f64)
}

/// Coverage of the treatment-effect interval: two Gaussian groups of `n / 2`
/// units with standard deviation `sigma` and means `mu_treated`, `mu_control`.
pub fn treatment_effect_coverage(
    n: u64,
    sigma: f64,
    alpha: f64,
    mu_treated: f64,
    mu_control: f64,
    reps: u64,
    rng: &mut RngStream,
) -> Result<f64> {
    if reps == 0 {
        return Err(param("reps must be positive"));
    }
    let hw = treatment_effect_halfwidth(n, sigma, alpha)?;
    let half = n / 2;
    let tau = mu_treated - mu_control;
    let mut covered = 0u64;
    for _ in 0..reps {
        let mut t = 0.0;
        let mut c = 0.0;
        for _ in 0..half {
            t += mu_treated + sigma * rng.standard_normal();
            c += mu_control + sigma * rng.standard_normal();
        }
        let tau_hat = (t - c) / half as f64;
        if (tau_hat - tau).abs() <= hw {
            covered += 1;
        }
    }
    Ok(covered as f64 / reps as f64)
}

/// Kolmogorov distance `sup |F_n - F|` between the empirical CDF of `sample`
/// and the Uniform(0, 1) CDF.
pub fn uniform_ks_distance(sample: &mut [f64]) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let above = (i as f64 + 1.0) / n - u;
            let below = u - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Fraction of `reps` uniform samples of size `n` whose empirical CDF leaves
/// the DKW band of half-width [`dkw_epsilon`].
pub fn dkw_violation_rate(n: u64, delta: f64, reps: u64, rng: &mut RngStream) -> Result<f64> {
    if reps == 0 {
        return Err(param("reps must be positive"));
    }
    let eps = dkw_epsilon(n, delta)?;
    let mut buf = vec![0.0; n as usize];
    let mut violations = 0u64;
    for _ in 0..reps {
        for u in buf.iter_mut() {
            *u = rng.unit();
        }
        if uniform_ks_distance(&mut buf) > eps {
            violations += 1;
        }
    }
    Ok(violations as f64 / reps as f64)
}
