//! Extreme-value limit laws for minima and a Type III maximum-likelihood fit.
//!
//! Minima of i.i.d. nonnegative channel powers, normalised as
//! `(beta_N - b_N) / a_N`, can only converge to one of three families `mu`:
//!
//! ```text
//! Type I    mu(x) = 1 - exp(-exp(x))
//! Type II   mu(x) = 1 - exp(-(-x)^-gamma)   for x < 0, 1 otherwise
//! Type III  mu(x) = 1 - exp(-x^gamma)       for x >= 0, 0 otherwise
//! ```
//!
//! Channel powers have lower endpoint zero, so `b_N = 0` and the Type III
//! fit reduces to a two-parameter Weibull fit with shape `gamma` and scale
//! `a_N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::ks_statistic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvtFamily {
    TypeI,
    TypeII,
    TypeIII,
}

impl EvtFamily {
    /// Limit CDF `mu(x)`; `shape` is ignored for Type I.
    pub fn cdf(self, shape: f64, x: f64) -> f64 {
        match self {
            EvtFamily::TypeI => -(-x.exp()).exp_m1(),
            EvtFamily::TypeII => {
                if x < 0.0 {
                    -(-(-x).powf(-shape)).exp_m1()
                } else {
                    1.0
                }
            }
            EvtFamily::TypeIII => {
                if x >= 0.0 {
                    -(-x.powf(shape)).exp_m1()
                } else {
                    0.0
                }
            }
        }
    }

    /// `mu^-1(p)` for `p` in `(0, 1)`.
    pub fn quantile(self, shape: f64, p: f64) -> f64 {
        let e = -(-p).ln_1p();
        match self {
            EvtFamily::TypeI => e.ln(),
            EvtFamily::TypeII => -e.powf(-1.0 / shape),
            EvtFamily::TypeIII => e.powf(1.0 / shape),
        }
    }
}

/// Normalised extreme-value law `beta ≈ a_N Theta + b_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvtFit {
    pub family: EvtFamily,
    pub shape: f64,
    pub a_n: f64,
    pub b_n: f64,
    /// KS distance between the fitted law and the sample it was fitted to.
    pub ks_distance: f64,
}

impl EvtFit {
    /// Exact law of the minimum of `n` unit-mean exponentials: Type III with
    /// shape 1 and scale `1/n`.
    pub fn exponential_minimum(n: usize) -> Self {
        Self {
            family: EvtFamily::TypeIII,
            shape: 1.0,
            a_n: 1.0 / n as f64,
            b_n: 0.0,
            ks_distance: 0.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.family.cdf(self.shape, (x - self.b_n) / self.a_n)
    }

    /// `a_N mu^-1(p) + b_N`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(self.a_n * self.family.quantile(self.shape, p) + self.b_n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullMle {
    pub shape: f64,
    pub scale: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 200;
const SHAPE_TOL: f64 = 1e-12;

/// Two-parameter Weibull maximum-likelihood fit.
///
/// Solves the profile score equation
///
/// ```text
/// g(k) = 1/k + mean(ln x) - sum(x^k ln x) / sum(x^k) = 0
/// ```
///
/// for the shape `k` (strictly decreasing in `k`) by safeguarded Newton
/// iteration inside a bisection bracket, then sets the scale to
/// `(mean(x^k))^(1/k)`. Data are rescaled by their maximum first so that
/// `x^k` cannot overflow.
///
/// Returns `None` for fewer than two samples, non-positive or non-finite
/// samples, all-equal samples, or no convergence.
pub fn fit_weibull(samples: &[f64]) -> Option<WeibullMle> {
    if samples.len() < 2 || samples.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return None;
    }
    let top = samples.iter().copied().fold(0.0, f64::max);
    let logs: Vec<f64> = samples.iter().map(|x| (x / top).ln()).collect();
    if logs.iter().all(|&l| l == logs[0]) {
        return None;
    }
    let n = logs.len() as f64;
    let mean_log = logs.iter().sum::<f64>() / n;

    // returns (g, g')
    let score = |k: f64| {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &l in &logs {
            let t = (k * l).exp();
            s0 += t;
            s1 += t * l;
            s2 += t * l * l;
        }
        let g = 1.0 / k + mean_log - s1 / s0;
        let dg = -1.0 / (k * k) - (s2 * s0 - s1 * s1) / (s0 * s0);
        (g, dg)
    };

    let (mut lo, mut hi) = (1e-3, 1.0);
    while score(hi).0 > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return None;
        }
    }
    let mut k = 0.5 * (lo + hi);
    for it in 1..=MAX_ITER {
        let (g, dg) = score(k);
        if g > 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let newton = k - g / dg;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - k).abs() <= SHAPE_TOL * k {
            let mean_pow = logs.iter().map(|l| (next * l).exp()).sum::<f64>() / n;
            return Some(WeibullMle {
                shape: next,
                scale: top * mean_pow.powf(1.0 / next),
                iterations: it,
            });
        }
        k = next;
    }
    None
}

/// Fits the Type III law with `b_N = 0` and reports the KS distance of the
/// fit against its own sample.
pub fn fit_type_iii(samples: &[f64]) -> Option<EvtFit> {
    let mle = fit_weibull(samples)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut fit = EvtFit {
        family: EvtFamily::TypeIII,
        shape: mle.shape,
        a_n: mle.scale,
        b_n: 0.0,
        ks_distance: 0.0,
    };
    fit.ks_distance = ks_statistic(&sorted, |x| fit.cdf(x));
    Some(fit)
}
