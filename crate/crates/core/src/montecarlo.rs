//! Seeded trial ensembles.
//!
//! Trial `t` draws from its own ChaCha stream of `seed`, and per-trial
//! results are collected in trial order before any reduction. Summaries are
//! therefore bit-identical for any worker count.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{self, tone_response, trial_rng, FadingSpec, TapDistribution};
use crate::error::{invalid, Error, Result};
use crate::evt::{fit_type_iii, EvtFit};
use crate::linkmath;
use crate::stats::{self, EmpiricalCdf, Proportion, SampleStats};
use crate::topology::{build_reuse_plan, NetworkConfig, ReusePlan};
use crate::wideband::{
    self, ebn0_min_adaptive_closed, ebn0_min_fixed_closed, phase_bottleneck_powers,
};

/// Grid on which ensemble CDFs are tabulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdfGrid {
    /// `points` evenly spaced values from 0 to the largest sample.
    Auto {
        points: usize,
    },
    Points(Vec<f64>),
}

impl Default for CdfGrid {
    fn default() -> Self {
        CdfGrid::Auto { points: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
    /// Target rate `R` in nats/s/Hz for outage.
    pub target_rate: f64,
    pub cdf_grid: CdfGrid,
}

impl McConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            target_rate: 0.5,
            cdf_grid: CdfGrid::default(),
        }
    }

    pub fn with_target_rate(mut self, rate: f64) -> Self {
        self.target_rate = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if !(self.target_rate.is_finite() && self.target_rate >= 0.0) {
            return Err(invalid("target_rate", "must be finite and nonnegative"));
        }
        match &self.cdf_grid {
            CdfGrid::Auto { points } if *points < 2 => {
                Err(invalid("cdf_grid", "needs at least 2 points"))
            }
            CdfGrid::Points(p)
                if p.is_empty()
                    || p.windows(2)
                        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) =>
            {
                Err(invalid(
                    "cdf_grid",
                    "must be nonempty and strictly increasing",
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Random stream `index` of an experiment `domain` under `seed`.
pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    // splitmix64 finaliser keeps neighbouring domains far apart
    let mut z = seed ^ domain.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    let mut rng = ChaCha8Rng::seed_from_u64(z);
    rng.set_stream(index);
    rng
}

const DOMAIN_CHI: u64 = 1;
const DOMAIN_EVT: u64 = 2;
const DOMAIN_CHI_CONVERGENCE: u64 = 3;

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::WorkerPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Per-trial results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub fixed: f64,
    pub adaptive: f64,
    /// `beta_N = min_n (1/W) sum_w |H_{n,w}|^2`.
    pub beta_min: f64,
    pub ebn0_min_fixed: f64,
    pub ebn0_min_adaptive: f64,
    /// `(1/K) sum_k 1 / min_m beta_{k,m}`.
    pub mean_inv_bottleneck: f64,
    pub degenerate: bool,
}

pub fn simulate_trial<D: TapDistribution + ?Sized>(
    cfg: &NetworkConfig,
    plan: &ReusePlan,
    dist: &D,
    seed: u64,
    trial: u64,
) -> TrialOutcome {
    let mut rng = trial_rng(seed, trial);
    let real = channel::draw_realization_with(cfg, plan, dist, &mut rng);
    let tones = channel::tones_from_taps(&real, cfg.n_tones).expect("validated V <= W");
    let rates = linkmath::link_rates(cfg, plan, &tones, cfg.snr);
    let bottlenecks = phase_bottleneck_powers(&tones.hop_power, cfg.reuse_sep);
    TrialOutcome {
        trial,
        fixed: rates.e2e_fixed,
        adaptive: rates.e2e_adaptive,
        beta_min: tones
            .hop_power
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min),
        ebn0_min_fixed: ebn0_min_fixed_closed(cfg, &tones.hop_power),
        ebn0_min_adaptive: ebn0_min_adaptive_closed(cfg, &bottlenecks),
        mean_inv_bottleneck: stats::mean(
            &bottlenecks.iter().map(|b| b.recip()).collect::<Vec<_>>(),
        ),
        degenerate: rates.degenerate,
    }
}

pub fn run_trials<D: TapDistribution + ?Sized>(
    cfg: &NetworkConfig,
    mc: &McConfig,
    dist: &D,
    workers: Option<usize>,
) -> Result<Vec<TrialOutcome>> {
    let plan = build_reuse_plan(cfg)?;
    mc.validate()?;
    with_workers(workers, || {
        (0..mc.trials as u64)
            .into_par_iter()
            .map(|t| simulate_trial(cfg, &plan, dist, mc.seed, t))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfTable {
    pub grid: Vec<f64>,
    pub fixed: Vec<f64>,
    pub adaptive: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateStats {
    #[serde(flatten)]
    pub stats: SampleStats,
    /// `P(I < R)`.
    pub p_out: Proportion,
}

/// Integrability of `chi = E[1 / min_m beta_m]`.
///
/// With `V` nonzero-power taps the channel power has density `~ x^(V-1)`
/// near zero, and the minimum of `M` powers keeps that exponent. `E[1/beta]`
/// is finite iff `V >= 2`, and `E[1/beta^2]` iff `V >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiWarning {
    /// `chi` is infinite; the estimate grows with the sample size.
    Divergent,
    /// `chi` is finite but its estimator has infinite variance.
    InfiniteVariance,
}

impl ChiWarning {
    pub fn from_taps(effective_taps: usize) -> Option<Self> {
        match effective_taps {
            0 | 1 => Some(ChiWarning::Divergent),
            2 => Some(ChiWarning::InfiniteVariance),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiEstimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: usize,
    pub warning: Option<ChiWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McMetadata {
    pub network: NetworkConfig,
    pub mc: McConfig,
    pub channel_power: String,
    pub snr_reference: String,
}

impl McMetadata {
    pub fn new(cfg: &NetworkConfig, mc: &McConfig) -> Self {
        Self {
            network: cfg.clone(),
            mc: mc.clone(),
            channel_power: format!(
                "tap v carries pdp[v] of the per-tap power |mean|^2 + variance = {}; total average link power equals it for any V",
                cfg.fading.mean_power()
            ),
            snr_reference: format!(
                "snr = P/(N0 B) = {} over the full source-destination distance D = {}",
                cfg.snr, cfg.distance
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub trials: usize,
    pub cdf: CdfTable,
    pub fixed: RateStats,
    pub adaptive: RateStats,
    /// Fixed-rate outage probability at the target rate.
    pub p_out: f64,
    pub ebn0_min_fixed: SampleStats,
    pub ebn0_min_adaptive: SampleStats,
    pub chi: ChiEstimate,
    /// Type III fit of the weakest-hop power; `None` if the fit failed.
    pub evt: Option<EvtFit>,
    pub beta_min: SampleStats,
    /// Trials where some phase had zero rate.
    pub flagged_trials: usize,
    /// Trials where the fixed rate exceeded the adaptive rate (always 0).
    pub dominance_violations: usize,
    pub metadata: McMetadata,
}

pub fn run_ensemble(cfg: &NetworkConfig, mc: &McConfig) -> Result<McSummary> {
    run_ensemble_with(cfg, mc, &cfg.fading, None)
}

pub fn run_ensemble_with<D: TapDistribution + ?Sized>(
    cfg: &NetworkConfig,
    mc: &McConfig,
    dist: &D,
    workers: Option<usize>,
) -> Result<McSummary> {
    let outcomes = run_trials(cfg, mc, dist, workers)?;
    summarize(cfg, mc, &outcomes)
}

pub fn summarize(
    cfg: &NetworkConfig,
    mc: &McConfig,
    outcomes: &[TrialOutcome],
) -> Result<McSummary> {
    let column = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f).collect::<Vec<f64>>();
    let fixed = column(|o| o.fixed);
    let adaptive = column(|o| o.adaptive);
    let fixed_cdf = EmpiricalCdf::new(&fixed)?;
    let adaptive_cdf = EmpiricalCdf::new(&adaptive)?;

    let grid = match &mc.cdf_grid {
        CdfGrid::Points(p) => p.clone(),
        CdfGrid::Auto { points } => {
            let top = fixed_cdf.max().max(adaptive_cdf.max());
            (0..*points)
                .map(|i| top * i as f64 / (*points - 1) as f64)
                .collect()
        }
    };
    let cdf = CdfTable {
        fixed: grid.iter().map(|&x| fixed_cdf.cdf(x)).collect(),
        adaptive: grid.iter().map(|&x| adaptive_cdf.cdf(x)).collect(),
        grid,
    };

    let rate_stats = |xs: &[f64]| -> Result<RateStats> {
        Ok(RateStats {
            stats: SampleStats::from_samples(xs)?,
            p_out: outage_probability(xs, mc.target_rate)?,
        })
    };
    let fixed_stats = rate_stats(&fixed)?;

    let beta = column(|o| o.beta_min);
    let inv = column(|o| o.mean_inv_bottleneck);
    let inv_var = stats::variance(&inv);

    Ok(McSummary {
        trials: outcomes.len(),
        p_out: fixed_stats.p_out.estimate,
        fixed: fixed_stats,
        adaptive: rate_stats(&adaptive)?,
        ebn0_min_fixed: SampleStats::from_samples(&column(|o| o.ebn0_min_fixed))?,
        ebn0_min_adaptive: SampleStats::from_samples(&column(|o| o.ebn0_min_adaptive))?,
        chi: ChiEstimate {
            value: stats::mean(&inv),
            std_err: (inv_var / inv.len() as f64).sqrt(),
            samples: inv.len() * cfg.reuse_sep,
            warning: ChiWarning::from_taps(cfg.effective_taps()),
        },
        evt: fit_type_iii(&beta),
        beta_min: SampleStats::from_samples(&beta)?,
        flagged_trials: outcomes.iter().filter(|o| o.degenerate).count(),
        dominance_violations: outcomes.iter().filter(|o| o.fixed > o.adaptive).count(),
        cdf,
        metadata: McMetadata::new(cfg, mc),
    })
}

/// Fraction of samples strictly below `rate`.
pub fn outage_probability(samples: &[f64], rate: f64) -> Result<Proportion> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let hits = samples.iter().filter(|&&x| x < rate).count();
    Ok(Proportion::new(hits, samples.len()))
}

/// Source of i.i.d. per-hop channel powers `(1/W) sum_w |H_w|^2`.
pub trait PowerSampler: Sync {
    fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;

    /// Exponent `V` of the small-power CDF `F(x) ~ c x^V`, if known.
    fn small_power_exponent(&self) -> Option<usize>;
}

/// Channel power of one hop drawn from taps and tones.
#[derive(Debug, Clone, PartialEq)]
pub struct HopPowerSampler<D = FadingSpec> {
    pub pdp: Vec<f64>,
    pub n_tones: usize,
    pub dist: D,
}

impl HopPowerSampler<FadingSpec> {
    pub fn from_config(cfg: &NetworkConfig) -> Self {
        Self {
            pdp: cfg.pdp.clone(),
            n_tones: cfg.n_tones,
            dist: cfg.fading,
        }
    }
}

impl<D: TapDistribution> PowerSampler for HopPowerSampler<D> {
    fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let taps: Vec<Complex64> = self
            .pdp
            .iter()
            .map(|&w| self.dist.sample_tap(w, rng))
            .collect();
        channel::mean_power(&tone_response(&taps, self.n_tones))
    }

    fn small_power_exponent(&self) -> Option<usize> {
        Some(self.pdp.iter().filter(|&&w| w > 0.0).count())
    }
}

/// `|H|^2 ~ Exp(mean)`: one flat Rayleigh tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialPower {
    pub mean: f64,
}

impl PowerSampler for ExponentialPower {
    fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = Exp1.sample(rng);
        self.mean * e
    }

    fn small_power_exponent(&self) -> Option<usize> {
        Some(1)
    }
}

/// Every hop has the same power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPower(pub f64);

impl PowerSampler for ConstantPower {
    fn sample_power<R: Rng + ?Sized>(&self, _rng: &mut R) -> f64 {
        self.0
    }

    fn small_power_exponent(&self) -> Option<usize> {
        None
    }
}

fn min_power<S: PowerSampler + ?Sized, R: Rng + ?Sized>(
    sampler: &S,
    count: usize,
    rng: &mut R,
) -> f64 {
    (0..count)
        .map(|_| sampler.sample_power(rng))
        .fold(f64::INFINITY, f64::min)
}

/// `chi = E[1 / min_{m<=M} beta_m]` for the channel model of `cfg`.
pub fn estimate_chi(
    cfg: &NetworkConfig,
    samples: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<ChiEstimate> {
    cfg.validate()?;
    estimate_chi_with(
        &HopPowerSampler::from_config(cfg),
        cfg.slots(),
        samples,
        seed,
        workers,
    )
}

pub fn estimate_chi_with<S: PowerSampler + ?Sized>(
    sampler: &S,
    slots: usize,
    samples: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<ChiEstimate> {
    if samples == 0 {
        return Err(Error::EmptySamples);
    }
    if slots == 0 {
        return Err(invalid("slots", "must be at least 1"));
    }
    let inv: Vec<f64> = with_workers(workers, || {
        (0..samples as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, DOMAIN_CHI, i);
                min_power(sampler, slots, &mut rng).recip()
            })
            .collect()
    })?;
    Ok(ChiEstimate {
        value: stats::mean(&inv),
        std_err: (stats::variance(&inv) / samples as f64).sqrt(),
        samples,
        warning: sampler
            .small_power_exponent()
            .and_then(ChiWarning::from_taps),
    })
}

/// Analytic `chi` for one slot of `V` equal-power Rayleigh taps with total
/// variance `variance`: the power is Gamma(V, variance/V), whose inverse
/// mean is `V / ((V - 1) variance)`. `None` when infinite.
pub fn rayleigh_chi_single_slot(n_taps: usize, variance: f64) -> Option<f64> {
    (n_taps >= 2).then(|| n_taps as f64 / ((n_taps as f64 - 1.0) * variance))
}

/// Weakest-hop powers `beta_N` for one `N`.
pub fn minimum_powers<S: PowerSampler + ?Sized>(
    sampler: &S,
    n_hops: usize,
    samples: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<f64>> {
    with_workers(workers, || {
        (0..samples as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, DOMAIN_EVT ^ ((n_hops as u64) << 8), i);
                min_power(sampler, n_hops, &mut rng)
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvtRow {
    pub n_hops: usize,
    /// `None` when the fit did not converge; `quantiles` still apply.
    pub fit: Option<EvtFit>,
    /// Raw 10%, 50% and 90% quantiles of `beta_N`.
    pub quantiles: [f64; 3],
    #[serde(skip)]
    pub samples: EmpiricalCdf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvtReport {
    pub rows: Vec<EvtRow>,
    /// KS distances of successive fits never rise by more than the 95%
    /// one-sample KS critical value.
    pub ks_nonincreasing: bool,
}

/// Fits the Type III law to `beta_N` for each `N` in `n_list`.
pub fn evt_diagnostics<S: PowerSampler + ?Sized>(
    sampler: &S,
    n_list: &[usize],
    samples: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<EvtReport> {
    if n_list.contains(&0) {
        return Err(invalid("n_list", "hop counts must be positive"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let beta = minimum_powers(sampler, n, samples, seed, workers)?;
        let cdf = EmpiricalCdf::new(&beta)?;
        rows.push(EvtRow {
            n_hops: n,
            fit: fit_type_iii(&beta),
            quantiles: [cdf.quantile(0.1), cdf.quantile(0.5), cdf.quantile(0.9)],
            samples: cdf,
        });
    }
    let noise = 1.36 / (samples as f64).sqrt();
    let ks: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.fit.map(|f| f.ks_distance))
        .collect();
    let ks_nonincreasing = ks.windows(2).all(|w| w[1] <= w[0] + noise);
    Ok(EvtReport {
        rows,
        ks_nonincreasing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiConvergenceRow {
    pub n_hops: usize,
    pub reuse_sep: usize,
    pub trials: usize,
    /// Mean of `r_N = (Eb/N0)_min N^(p-1) / (D^p ln 2 chi_ref)`.
    pub mean_ratio: f64,
    /// Sample standard deviation of `r_N`.
    pub spread: f64,
}

/// Tracks the rate-adaptive `(Eb/N0)_min`, normalised by its large-`N`
/// limit, as `N` grows with `M = slots` fixed.
#[allow(clippy::too_many_arguments)]
pub fn chi_convergence_check<S: PowerSampler + ?Sized>(
    base: &NetworkConfig,
    sampler: &S,
    n_list: &[usize],
    slots: usize,
    trials: usize,
    chi_ref: f64,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<ChiConvergenceRow>> {
    if trials == 0 {
        return Err(Error::EmptySamples);
    }
    n_list
        .iter()
        .map(|&n| {
            if slots == 0 || n % slots != 0 {
                return Err(invalid(
                    "n_list",
                    format!("N = {n} is not a multiple of M = {slots}"),
                ));
            }
            let mut cfg = base.clone();
            cfg.n_hops = n;
            cfg.reuse_sep = n / slots;
            cfg.validate()?;
            let norm = (n as f64).powf(cfg.pathloss_exp - 1.0)
                / (cfg.distance.powf(cfg.pathloss_exp) * LN_2 * chi_ref);
            let ratios: Vec<f64> = with_workers(workers, || {
                (0..trials as u64)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng =
                            stream_rng(seed, DOMAIN_CHI_CONVERGENCE ^ ((n as u64) << 8), t);
                        let powers: Vec<f64> =
                            (0..n).map(|_| sampler.sample_power(&mut rng)).collect();
                        let bottlenecks = wideband::phase_bottleneck_powers(&powers, cfg.reuse_sep);
                        ebn0_min_adaptive_closed(&cfg, &bottlenecks) * norm
                    })
                    .collect()
            })?;
            Ok(ChiConvergenceRow {
                n_hops: n,
                reuse_sep: cfg.reuse_sep,
                trials,
                mean_ratio: stats::mean(&ratios),
                spread: stats::variance(&ratios).sqrt(),
            })
        })
        .collect()
}
