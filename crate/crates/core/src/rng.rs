//! Seeded random streams and the samplers every environment and randomized
//! policy draws from.
//!
//! All randomness flows through [`RngStream`], a thin wrapper around the
//! ChaCha8 counter-mode generator. ChaCha output is specified bit-for-bit, so a
//! given `(seed, replication, role)` triple produces the same sequence on
//! every platform. Independent substreams are obtained by giving each
//! `(replication, role)` pair its own ChaCha stream id under a key derived
//! from the seed; distinct ids never overlap.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{param, Result};

/// What a substream is used for. Each role of a replication gets its own
/// stream so that, e.g., adding a policy draw never shifts the rewards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    /// Reward noise and context draws.
    Environment,
    /// Randomized action selection.
    Policy,
    /// Experiment-level setup such as drawing a parameter vector.
    Setup,
    /// Per-arm or caller-defined streams.
    Custom(u16),
}

impl StreamRole {
    fn id(self) -> u64 {
        match self {
            StreamRole::Environment => 0,
            StreamRole::Policy => 1,
            StreamRole::Setup => 2,
            StreamRole::Custom(k) => 16 + u64::from(k),
        }
    }
}

const ROLE_BITS: u32 = 20;

/// A deterministic random stream. Not `Sync`; each replication owns its own.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Root stream for a seed (replication 0, environment role).
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0, StreamRole::Environment)
    }

    /// Substream for `(seed, replication, role)`. Pure function of its inputs,
    /// so it can be created from any thread.
    pub fn substream(seed: u64, replication: u64, role: StreamRole) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        assert!(
            replication < (1u64 << (64 - ROLE_BITS)),
            "replication index too large"
        );
        inner.set_stream((replication << ROLE_BITS) | role.id());
        Self { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform draw on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    /// Uniform draw on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(param(format!("{name} must be finite, got {v}")))
    }
}

/// One draw from `N(mean, sd^2)`. `sd == 0` returns `mean` exactly.
pub fn gaussian_sample(mean: f64, sd: f64, rng: &mut RngStream) -> Result<f64> {
    finite("mean", mean)?;
    finite("sd", sd)?;
    if sd < 0.0 {
        return Err(param(format!("sd must be >= 0, got {sd}")));
    }
    if sd == 0.0 {
        return Ok(mean);
    }
    Ok(mean + sd * rng.standard_normal())
}

/// `min(g, upper)` with `g ~ N(mean, variance)`: a Gaussian whose mass above
/// `upper` is collapsed onto a point mass at `upper`.
pub fn truncated_gaussian_sample(
    mean: f64,
    variance: f64,
    upper: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    finite("mean", mean)?;
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(param(format!(
            "variance must be finite and > 0, got {variance}"
        )));
    }
    if upper.is_nan() {
        return Err(param("upper must not be NaN"));
    }
    let g = mean + variance.sqrt() * rng.standard_normal();
    Ok(g.min(upper))
}

/// One `Beta(a, b)` draw, kept strictly inside `(0, 1)`.
pub fn beta_sample(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(param(format!(
            "beta shapes must be finite and > 0, got ({a}, {b})"
        )));
    }
    let dist = Beta::new(a, b).map_err(|e| param(e.to_string()))?;
    let x: f64 = dist.sample(rng);
    Ok(x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}

/// Validated finite Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<f64>,
    variances: Vec<f64>,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(param("mixture needs at least one component"));
        }
        if weights.len() != means.len() || weights.len() != variances.len() {
            return Err(param(format!(
                "mixture vectors differ in length: {} weights, {} means, {} variances",
                weights.len(),
                means.len(),
                variances.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(param("mixture weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(param(format!("mixture weights sum to {total}, expected 1")));
        }
        for (&m, &v) in means.iter().zip(&variances) {
            finite("component mean", m)?;
            finite("component variance", v)?;
            if v < 0.0 {
                return Err(param(format!("component variance must be >= 0, got {v}")));
            }
        }
        Ok(Self {
            weights,
            means,
            variances,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.means)
            .map(|(w, m)| w * m)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.variances)
            .map(|((w, m), v)| w * (v + (m - mu) * (m - mu)))
            .sum()
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let u = rng.unit();
        let mut acc = 0.0;
        let mut pick = self.weights.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = i;
                break;
            }
        }
        let sd = self.variances[pick].sqrt();
        if sd == 0.0 {
            self.means[pick]
        } else {
            self.means[pick] + sd * rng.standard_normal()
        }
    }
}

/// Pick a component with probability `weights[i]`, then draw from
/// `N(means[i], vars[i])`.
pub fn mixture_gaussian_sample(
    weights: &[f64],
    means: &[f64],
    vars: &[f64],
    rng: &mut RngStream,
) -> Result<f64> {
    let mix = GaussianMixture::new(weights.to_vec(), means.to_vec(), vars.to_vec())?;
    Ok(mix.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn degenerate_gaussian_returns_mean() {
        let mut rng = RngStream::new(3);
        assert_eq!(gaussian_sample(0.8, 0.0, &mut rng).unwrap(), 0.8);
    }

    #[test]
    fn same_seed_same_draws() {
        let a = gaussian_sample(0.0, 1.0, &mut RngStream::new(42)).unwrap();
        let b = gaussian_sample(0.0, 1.0, &mut RngStream::new(42)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn substreams_differ_by_role_and_replication() {
        let mut a = RngStream::substream(9, 0, StreamRole::Environment);
        let mut b = RngStream::substream(9, 0, StreamRole::Policy);
        let mut c = RngStream::substream(9, 1, StreamRole::Environment);
        let xa: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        assert_ne!(xa, xb);
        assert_ne!(xa, xc);
        assert_ne!(xb, xc);
    }

    #[test]
    fn gaussian_law_of_large_numbers() {
        let mut rng = RngStream::new(1);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| gaussian_sample(0.0, 1.0, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = RngStream::new(0);
        assert!(gaussian_sample(f64::NAN, 1.0, &mut rng).is_err());
        assert!(gaussian_sample(0.0, -1.0, &mut rng).is_err());
        assert!(gaussian_sample(0.0, f64::INFINITY, &mut rng).is_err());
        assert!(truncated_gaussian_sample(0.0, 0.0, 1.0, &mut rng).is_err());
        assert!(beta_sample(0.0, 1.0, &mut rng).is_err());
        assert!(beta_sample(1.0, -2.0, &mut rng).is_err());
        assert!(mixture_gaussian_sample(&[0.5, 0.4], &[0.0, 1.0], &[1.0, 1.0], &mut rng).is_err());
        assert!(mixture_gaussian_sample(&[1.0], &[0.0, 1.0], &[1.0], &mut rng).is_err());
        assert!(mixture_gaussian_sample(&[1.5, -0.5], &[0.0, 1.0], &[1.0, 1.0], &mut rng).is_err());
    }

    #[test]
    fn truncation_without_cutoff_is_gaussian() {
        let mut rng = RngStream::new(5);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| truncated_gaussian_sample(0.0, 1.0, f64::INFINITY, &mut rng).unwrap())
            .collect();
        let (m, v) = moments(&xs);
        let se = (1.0f64 / 1e5).sqrt();
        assert!(m.abs() < 4.0 * se);
        // Var of sample variance for N(0,1) is 2/(n-1).
        assert!((v - 1.0).abs() < 4.0 * (2.0f64 / 1e5).sqrt());
    }

    #[test]
    fn truncation_collapses_mass_above_cutoff() {
        let mut rng = RngStream::new(5);
        let x = truncated_gaussian_sample(5.0, 1e-12, 1.0, &mut rng).unwrap();
        assert!((x - 1.0).abs() < 1e-5);
    }

    #[test]
    fn point_mass_at_cutoff_matches_normal_cdf() {
        // P(g >= 0) = 1 - Phi(0) = 0.5
        let mut rng = RngStream::new(11);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| truncated_gaussian_sample(0.0, 1.0, 0.0, &mut rng).unwrap() == 0.0)
            .count();
        let p = hits as f64 / n as f64;
        assert!((p - 0.5).abs() < 0.01, "p {p}");
    }

    #[test]
    fn beta_uniform_and_shifted_means() {
        let mut rng = RngStream::new(2);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| beta_sample(1.0, 1.0, &mut rng).unwrap())
            .collect();
        assert!(xs.iter().all(|x| *x > 0.0 && *x < 1.0));
        assert!((moments(&xs).0 - 0.5).abs() < 0.01);
        let ys: Vec<f64> = (0..100_000)
            .map(|_| beta_sample(3.0, 1.0, &mut rng).unwrap())
            .collect();
        assert!(ys.iter().all(|x| *x > 0.0 && *x < 1.0));
        assert!((moments(&ys).0 - 0.75).abs() < 0.01);
    }

    #[test]
    fn mixture_moments() {
        let mut rng = RngStream::new(8);
        let n = 100_000;
        let single: Vec<f64> = (0..n)
            .map(|_| mixture_gaussian_sample(&[1.0], &[0.0], &[1.0], &mut rng).unwrap())
            .collect();
        assert!(moments(&single).0.abs() < 4.0 / (n as f64).sqrt());

        let sym: Vec<f64> = (0..n)
            .map(|_| {
                mixture_gaussian_sample(&[0.5, 0.5], &[-1.0, 1.0], &[0.0, 0.0], &mut rng).unwrap()
            })
            .collect();
        assert!(sym.iter().all(|x| *x == -1.0 || *x == 1.0));
        assert!(moments(&sym).0.abs() < 0.01);

        let mix = GaussianMixture::new(vec![0.3, 0.7], vec![0.0, 10.0], vec![1.0, 1.0]).unwrap();
        assert!((mix.mean() - 7.0).abs() < 1e-12);
        let xs: Vec<f64> = (0..n).map(|_| mix.sample(&mut rng)).collect();
        let (m, v) = moments(&xs);
        assert!((m - 7.0).abs() < 0.05, "mean {m}");
        // 1 + 0.3*0.7*100 = 22
        assert!((mix.variance() - 22.0).abs() < 1e-12);
        assert!((v - 22.0).abs() < 0.5, "var {v}");
    }
}
