//! Power-bandwidth tradeoff in the wideband regime.
//!
//! `Eb/N0 = snr / I(snr)` with `I` in bits, so with rates in nats
//!
//! ```text
//! (Eb/N0)_min = lim_{snr->0} ln 2 / I'(snr)
//! S0          = lim_{snr->0} 2 I'(snr)^2 / -I''(snr)     [b/s/Hz/(3 dB)]
//! ```
//!
//! Both limits are available in closed form, from the per-hop channel powers
//! `beta_n = (1/W) sum_w |H_{n,w}|^2`, and numerically, by finite differences
//! of the end-to-end rate of a frozen realization.
//!
//! Near `snr = 0` each hop behaves like `I_n ≈ G beta_n snr` with
//! `G = N^(p-1) K / D^p`, and interference enters only at second order.
//! Hence:
//!
//! * fixed rate: `I ≈ (G/K) min_n beta_n snr`, so
//!   `(Eb/N0)_min = ln 2 D^p / (N^(p-1) min_n beta_n)`;
//! * rate adaptive: `I ≈ G snr / sum_k (1/min_m beta_{k,m})`, so
//!   `(Eb/N0)_min = (D^p / (N^(p-1) K)) sum_k ln 2 / min_m beta_{k,m}`.
//!
//! The wideband slope `2/K` holds exactly for flat fading without
//! interference. With several tones or intra-route interference the numeric
//! slope picks up a tone-dispersion factor and an interference term, so both
//! values are reported side by side.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::ToneGrid;
use crate::error::{Error, Result};
use crate::evt::EvtFit;
use crate::linkmath::{self, LinkRates};
use crate::stats::EmpiricalCdf;
use crate::topology::{NetworkConfig, ReusePlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Equal time-sharing, open-loop fixed rate.
    FixedRate,
    /// Optimal time-sharing with per-draw rate adaptation.
    RateAdaptive,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::FixedRate, Strategy::RateAdaptive];
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `D^p / N^(p-1)`.
fn distance_scale(cfg: &NetworkConfig) -> f64 {
    cfg.distance.powf(cfg.pathloss_exp) / (cfg.n_hops as f64).powf(cfg.pathloss_exp - 1.0)
}

/// Fixed-rate `(Eb/N0)_min` from per-hop channel powers. Infinite when the
/// weakest hop has zero power.
pub fn ebn0_min_fixed_closed(cfg: &NetworkConfig, hop_powers: &[f64]) -> f64 {
    let weakest = hop_powers.iter().copied().fold(f64::INFINITY, f64::min);
    if weakest <= 0.0 {
        return f64::INFINITY;
    }
    LN_2 * distance_scale(cfg) / weakest
}

/// Rate-adaptive `(Eb/N0)_min` from per-phase bottleneck powers
/// `min_m beta_{k,m}`. Infinite when any bottleneck is zero.
pub fn ebn0_min_adaptive_closed(cfg: &NetworkConfig, bottleneck_powers: &[f64]) -> f64 {
    if bottleneck_powers.iter().any(|&b| b <= 0.0) {
        return f64::INFINITY;
    }
    let sum: f64 = bottleneck_powers.iter().map(|b| LN_2 / b).sum();
    distance_scale(cfg) / cfg.reuse_sep as f64 * sum
}

/// `min_m beta_{(m-1)K+k}` for each phase `k`.
pub fn phase_bottleneck_powers(hop_powers: &[f64], reuse_sep: usize) -> Vec<f64> {
    linkmath::phase_bottlenecks(&linkmath::group_by_phase(hop_powers, reuse_sep))
}

pub fn s0_closed(reuse_sep: usize) -> f64 {
    2.0 / reuse_sep as f64
}

/// Finite-difference probe for the low-SNR limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub snr: f64,
    pub step: f64,
}

impl Default for Probe {
    /// `snr = 1e-8`, `step = snr / 2`: the linear-term bias of `I'` is of
    /// order `G beta snr` while the differences stay well above rounding.
    fn default() -> Self {
        Self::at(1e-8)
    }
}

impl Probe {
    pub fn at(snr: f64) -> Self {
        Self {
            snr,
            step: snr / 2.0,
        }
    }

    fn samples<F: Fn(f64) -> f64>(&self, rate: &F) -> [f64; 3] {
        [
            rate(self.snr - self.step),
            rate(self.snr),
            rate(self.snr + self.step),
        ]
    }

    fn first(&self, s: &[f64; 3]) -> f64 {
        (s[2] - s[0]) / (2.0 * self.step)
    }

    fn second(&self, s: &[f64; 3]) -> f64 {
        (s[2] - 2.0 * s[1] + s[0]) / (self.step * self.step)
    }
}

/// `ln 2 / I'(probe)` by central difference.
pub fn ebn0_min_numeric<F: Fn(f64) -> f64>(rate: F, probe: Probe) -> Result<f64> {
    let s = probe.samples(&rate);
    let slope = probe.first(&s);
    if !(slope.is_finite() && slope > 0.0) {
        return Err(Error::NumericLimit {
            probe: probe.snr,
            reason: "first derivative is not finite and positive",
            samples: s.to_vec(),
        });
    }
    Ok(LN_2 / slope)
}

/// `2 I'^2 / -I''` at the probe, both derivatives by central differences.
pub fn s0_numeric<F: Fn(f64) -> f64>(rate: F, probe: Probe) -> Result<f64> {
    let s = probe.samples(&rate);
    let d1 = probe.first(&s);
    let d2 = probe.second(&s);
    if !(d1.is_finite() && d2.is_finite()) {
        return Err(Error::NumericLimit {
            probe: probe.snr,
            reason: "derivatives are not finite",
            samples: s.to_vec(),
        });
    }
    if d2 >= 0.0 {
        return Err(Error::NumericLimit {
            probe: probe.snr,
            reason: "second derivative estimate is not negative",
            samples: s.to_vec(),
        });
    }
    Ok(2.0 * d1 * d1 / -d2)
}

/// A realization with its tones frozen, evaluated as a function of `snr`.
#[derive(Debug, Clone, Copy)]
pub struct FrozenLink<'a> {
    cfg: &'a NetworkConfig,
    plan: &'a ReusePlan,
    tones: &'a ToneGrid,
}

impl<'a> FrozenLink<'a> {
    pub fn new(cfg: &'a NetworkConfig, plan: &'a ReusePlan, tones: &'a ToneGrid) -> Self {
        Self { cfg, plan, tones }
    }

    pub fn rates(&self, snr: f64) -> LinkRates {
        linkmath::link_rates(self.cfg, self.plan, self.tones, snr)
    }

    pub fn mutual_info(&self, strategy: Strategy, snr: f64) -> f64 {
        let rates = self.rates(snr);
        match strategy {
            Strategy::FixedRate => rates.e2e_fixed,
            Strategy::RateAdaptive => rates.e2e_adaptive,
        }
    }

    fn hop_mi(&self, hop: usize, snr: f64) -> f64 {
        linkmath::single_hop_mi(self.cfg, self.plan, self.tones, hop, snr)
    }

    /// Hops that bind as `snr -> 0`: the weakest hop overall for the fixed
    /// rate, the weakest slot of every phase for the adaptive rate.
    pub fn low_snr_bottlenecks(&self, strategy: Strategy) -> Vec<usize> {
        let powers = &self.tones.hop_power;
        let argmin = |hops: &mut dyn Iterator<Item = usize>| {
            hops.min_by(|&a, &b| powers[a - 1].total_cmp(&powers[b - 1]))
                .unwrap()
        };
        match strategy {
            Strategy::FixedRate => vec![argmin(&mut (1..=self.cfg.n_hops))],
            Strategy::RateAdaptive => self
                .plan
                .phases()
                .map(|hops| argmin(&mut hops.iter().copied()))
                .collect(),
        }
    }

    /// End-to-end rate with the bottleneck hops held at their low-SNR
    /// choice, so finite differences never straddle a switch of the minimum.
    pub fn pinned_mutual_info(&self, strategy: Strategy, snr: f64) -> f64 {
        let hops = self.low_snr_bottlenecks(strategy);
        match strategy {
            Strategy::FixedRate => self.hop_mi(hops[0], snr) / self.cfg.reuse_sep as f64,
            Strategy::RateAdaptive => {
                let b: Vec<f64> = hops.iter().map(|&n| self.hop_mi(n, snr)).collect();
                linkmath::harmonic_time_sharing(&b).value
            }
        }
    }

    /// Whether the pinned bottlenecks are still the minimisers at `snr`.
    pub fn bottlenecks_hold_at(&self, strategy: Strategy, snr: f64) -> bool {
        let rates = self.rates(snr);
        let pinned = self.pinned_mutual_info(strategy, snr);
        let full = match strategy {
            Strategy::FixedRate => rates.e2e_fixed,
            Strategy::RateAdaptive => rates.e2e_adaptive,
        };
        pinned == full
    }

    pub fn ebn0_min_closed(&self, strategy: Strategy) -> f64 {
        let powers = &self.tones.hop_power;
        match strategy {
            Strategy::FixedRate => ebn0_min_fixed_closed(self.cfg, powers),
            Strategy::RateAdaptive => ebn0_min_adaptive_closed(
                self.cfg,
                &phase_bottleneck_powers(powers, self.cfg.reuse_sep),
            ),
        }
    }

    pub fn ebn0_min_numeric(&self, strategy: Strategy, probe: Probe) -> Result<f64> {
        ebn0_min_numeric(|s| self.pinned_mutual_info(strategy, s), probe)
    }

    pub fn s0_numeric(&self, strategy: Strategy, probe: Probe) -> Result<f64> {
        s0_numeric(|s| self.pinned_mutual_info(strategy, s), probe)
    }

    /// `(I in bits, Eb/N0)` along `snrs`, using the unpinned rate.
    pub fn ebn0_curve(&self, strategy: Strategy, snrs: &[f64]) -> Vec<(f64, f64)> {
        snrs.iter()
            .map(|&s| {
                let nats = self.mutual_info(strategy, s);
                (nats / LN_2, s * LN_2 / nats)
            })
            .collect()
    }

    pub fn metrics(
        &self,
        strategy: Strategy,
        probe: Probe,
        curve_snrs: &[f64],
    ) -> Result<WidebandMetrics> {
        let ebn0_min = self.ebn0_min_closed(strategy);
        Ok(WidebandMetrics {
            strategy,
            ebn0_min,
            ebn0_min_db: to_db(ebn0_min),
            ebn0_min_numeric: self.ebn0_min_numeric(strategy, probe)?,
            s0_closed: s0_closed(self.cfg.reuse_sep),
            s0_numeric: self.s0_numeric(strategy, probe)?,
            ebn0_of_i: self.ebn0_curve(strategy, curve_snrs),
            method: MethodTag::ClosedForm,
            bottlenecks_hold_at_probe: self.bottlenecks_hold_at(strategy, probe.snr),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodTag {
    ClosedForm,
    NumericLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidebandMetrics {
    pub strategy: Strategy,
    /// Linear `(Eb/N0)_min`, from the source named by `method`.
    pub ebn0_min: f64,
    pub ebn0_min_db: f64,
    pub ebn0_min_numeric: f64,
    pub s0_closed: f64,
    pub s0_numeric: f64,
    /// `(spectral efficiency in b/s/Hz, Eb/N0)` pairs.
    pub ebn0_of_i: Vec<(f64, f64)>,
    pub method: MethodTag,
    /// False when the minimising hops at the probe differ from the `snr -> 0`
    /// choice used by the numeric limits.
    pub bottlenecks_hold_at_probe: bool,
}

/// Where the outage quantile of `beta_N = min_n beta_n` comes from.
#[derive(Debug, Clone, Copy)]
pub enum QuantileSource<'a> {
    /// `a_N mu^-1(p) + b_N` from a fitted or analytic extreme-value law.
    Evt(&'a EvtFit),
    /// Empirical quantile of sampled `beta_N`.
    Empirical(&'a EmpiricalCdf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileMode {
    Evt,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageEbN0 {
    /// Linear `(Eb/N0)_min,out`; infinite when the quantile is not positive.
    pub value: f64,
    pub quantile: f64,
    pub mode: QuantileMode,
}

/// Eb/N0-min that the fixed-rate route achieves with probability
/// `1 - p_out`: the closed form evaluated at the `p_out` quantile of the
/// weakest-hop power.
pub fn ebn0_min_outage(
    source: QuantileSource<'_>,
    p_out: f64,
    cfg: &NetworkConfig,
) -> Result<OutageEbN0> {
    if !(p_out > 0.0 && p_out < 1.0) {
        return Err(Error::InvalidProbability(p_out));
    }
    let (quantile, mode) = match source {
        QuantileSource::Evt(fit) => (fit.quantile(p_out)?, QuantileMode::Evt),
        QuantileSource::Empirical(cdf) => (cdf.quantile(p_out), QuantileMode::Empirical),
    };
    Ok(OutageEbN0 {
        value: ebn0_min_fixed_closed(cfg, &[quantile]),
        quantile,
        mode,
    })
}
