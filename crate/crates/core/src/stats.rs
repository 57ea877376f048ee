//! Empirical distributions and summary statistics.

use serde::Serialize;

use crate::error::{Error, Result};

/// Right-continuous step CDF of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// NaNs are dropped.
    pub fn new(samples: &[f64]) -> Result<Self> {
        let mut sorted: Vec<f64> = samples.iter().copied().filter(|x| !x.is_nan()).collect();
        if sorted.is_empty() {
            return Err(Error::EmptySamples);
        }
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// `P(X < x)`.
    pub fn cdf_below(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s < x) as f64 / self.len() as f64
    }

    /// Generalized inverse: the smallest sample `x` with `cdf(x) >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let rank = (p * n as f64).ceil() as usize;
        self.sorted[rank.clamp(1, n) - 1]
    }

    /// Largest gap between this CDF and a continuous reference CDF.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, reference: F) -> f64 {
        ks_statistic(&self.sorted, reference)
    }
}

/// Kolmogorov-Smirnov statistic of sorted samples against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance, computed on data shifted by the first sample so
/// that identical samples give exactly zero.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let shift = xs[0];
    let n = xs.len() as f64;
    let (s, ss) = xs.iter().fold((0.0, 0.0), |(s, ss), &x| {
        let d = x - shift;
        (s + d, ss + d * d)
    });
    ((ss - s * s / n) / (n - 1.0)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_err: f64,
    pub min: f64,
    pub q01: f64,
    pub q10: f64,
    pub q50: f64,
    pub max: f64,
}

impl SampleStats {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let cdf = EmpiricalCdf::new(xs)?;
        let kept = cdf.sorted();
        let var = variance(kept);
        Ok(Self {
            count: kept.len(),
            mean: mean(kept),
            variance: var,
            std_err: (var / kept.len() as f64).sqrt(),
            min: cdf.min(),
            q01: cdf.quantile(0.01),
            q10: cdf.quantile(0.10),
            q50: cdf.quantile(0.50),
            max: cdf.max(),
        })
    }
}

/// Fraction of samples strictly below a threshold, with its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub estimate: f64,
    pub count: usize,
    /// Half-width of the one-sigma Wilson score interval.
    pub std_err: f64,
    /// 95% Wilson score interval.
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl Proportion {
    pub fn new(hits: usize, count: usize) -> Self {
        let p = hits as f64 / count as f64;
        let (_, half) = wilson(p, count as f64, 1.0);
        let (center, half95) = wilson(p, count as f64, 1.959_963_984_540_054);
        Self {
            estimate: p,
            count,
            std_err: half,
            wilson_low: (center - half95).max(0.0),
            wilson_high: (center + half95).min(1.0),
        }
    }
}

fn wilson(p: f64, n: f64, z: f64) -> (f64, f64) {
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (center, half)
}
