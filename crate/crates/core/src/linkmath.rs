//! Per-tone SINR, per-hop mutual information and end-to-end rates.
//!
//! Rates are in nats/s/Hz. Every receiver decodes its own transmitter and
//! treats the rest of its phase as noise.

use crate::channel::ToneGrid;
use crate::error::{Error, Result};
use crate::topology::{NetworkConfig, ReusePlan};

/// Rates of one frozen realization at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRates {
    /// `sinr[n-1][w-1]`.
    pub sinr: Vec<Vec<f64>>,
    /// Interference-to-noise ratio `zeta[n-1][w-1]`.
    pub zeta: Vec<Vec<f64>>,
    /// `hop_mi[k-1][m-1] = I_{k,m}`, hop `n = (m-1)K + k`.
    pub hop_mi: Vec<Vec<f64>>,
    /// Optimal time-sharing fractions `lambda_k`.
    pub ts_weights: Vec<f64>,
    /// Equal time-sharing, fixed-rate relaying.
    pub e2e_fixed: f64,
    /// Optimal time-sharing, rate-adaptive relaying.
    pub e2e_adaptive: f64,
    /// Some phase bottleneck was zero; `ts_weights` are then uniform.
    pub degenerate: bool,
}

impl LinkRates {
    /// Per-hop rates in hop order.
    pub fn by_hop(&self) -> Vec<f64> {
        let k = self.hop_mi.len();
        let m = self.hop_mi.first().map_or(0, Vec::len);
        (0..k * m).map(|i| self.hop_mi[i % k][i / k]).collect()
    }
}

/// Interference-to-noise ratio per hop and tone.
///
/// Every one of the `M` simultaneous transmitters spends `P / (M W)` per
/// tone, and noise per tone is `N0 B / W`. Interferer `l` reaches `T_{n+1}`
/// attenuated by `f_{n,l}^-p`, so
///
/// ```text
/// zeta_{n,w} = (snr / M) sum_{l in L_n} f_{n,l}^-p |G_{n,l,w}|^2
///            = (snr K / N) sum_{l in L_n} f_{n,l}^-p |G_{n,l,w}|^2
/// ```
///
/// which is linear in `snr` and vanishes with it.
pub fn interference_load(
    cfg: &NetworkConfig,
    plan: &ReusePlan,
    tones: &ToneGrid,
    snr: f64,
) -> Vec<Vec<f64>> {
    let w_count = tones.n_tones();
    (1..=cfg.n_hops)
        .map(|n| hop_interference(cfg, plan, tones, n, snr, w_count))
        .collect()
}

fn hop_interference(
    cfg: &NetworkConfig,
    plan: &ReusePlan,
    tones: &ToneGrid,
    hop: usize,
    snr: f64,
    w_count: usize,
) -> Vec<f64> {
    let scale = snr * cfg.reuse_sep as f64 / cfg.n_hops as f64;
    let mut zeta = vec![0.0; w_count];
    for (i, interferer) in plan.interferers(hop).iter().enumerate() {
        let atten = interferer.distance.powf(-cfg.pathloss_exp);
        for (z, g) in zeta.iter_mut().zip(&tones.interference_tones[hop - 1][i]) {
            *z += atten * g.norm_sqr();
        }
    }
    zeta.iter_mut().for_each(|z| *z *= scale);
    zeta
}

/// `SINR_{n,w} = N^(p-1) K |H_{n,w}|^2 snr / D^p / (1 + zeta_{n,w})`.
pub fn sinr_grid(
    cfg: &NetworkConfig,
    tones: &ToneGrid,
    zeta: &[Vec<f64>],
    snr: f64,
) -> Vec<Vec<f64>> {
    let gain = cfg.link_gain() * snr;
    tones
        .signal_tones
        .iter()
        .zip(zeta)
        .map(|(h, z)| hop_sinr(gain, h, z))
        .collect()
}

fn hop_sinr(gain: f64, tones: &[num_complex::Complex64], zeta: &[f64]) -> Vec<f64> {
    tones
        .iter()
        .zip(zeta)
        .map(|(h, z)| gain * h.norm_sqr() / (1.0 + z))
        .collect()
}

/// `(1/W) sum_w ln(1 + SINR_w)`.
pub fn hop_mutual_info(sinr: &[f64]) -> f64 {
    sinr.iter().map(|s| s.ln_1p()).sum::<f64>() / sinr.len() as f64
}

/// Rate of hop `n` (1-based) at `snr`, without building the full grid.
pub fn single_hop_mi(
    cfg: &NetworkConfig,
    plan: &ReusePlan,
    tones: &ToneGrid,
    hop: usize,
    snr: f64,
) -> f64 {
    let zeta = hop_interference(cfg, plan, tones, hop, snr, tones.n_tones());
    hop_mutual_info(&hop_sinr(
        cfg.link_gain() * snr,
        &tones.signal_tones[hop - 1],
        &zeta,
    ))
}

/// Equal time-sharing over `K` phases at a common fixed rate: the weakest
/// hop sets the rate, and each phase is active a `1/K` fraction of the time.
pub fn e2e_fixed_rate(hop_mi: &[f64], reuse_sep: usize) -> f64 {
    hop_mi.iter().copied().fold(f64::INFINITY, f64::min) / reuse_sep as f64
}

/// Groups per-hop rates (hop order) into `[phase][slot]`.
pub fn group_by_phase(hop_mi: &[f64], reuse_sep: usize) -> Vec<Vec<f64>> {
    (0..reuse_sep)
        .map(|k| hop_mi.iter().skip(k).step_by(reuse_sep).copied().collect())
        .collect()
}

/// `min_m I_{k,m}` for each phase.
pub fn phase_bottlenecks(grouped: &[Vec<f64>]) -> Vec<f64> {
    grouped
        .iter()
        .map(|slots| slots.iter().copied().fold(f64::INFINITY, f64::min))
        .collect()
}

/// Outcome of optimising the time-sharing fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSharing {
    pub value: f64,
    pub weights: Vec<f64>,
    pub degenerate: bool,
}

/// Rate-adaptive end-to-end rate from rates grouped `[phase][slot]`.
pub fn e2e_rate_adaptive(grouped: &[Vec<f64>]) -> TimeSharing {
    harmonic_time_sharing(&phase_bottlenecks(grouped))
}

/// Maximises `min_k lambda_k b_k` over the simplex.
///
/// The optimum equalises `lambda_k b_k`, giving `lambda_k ∝ 1/b_k` and the
/// value `(sum_k 1/b_k)^-1`. A zero bottleneck forces the value to zero; the
/// weights are then reported uniform and flagged.
pub fn harmonic_time_sharing(bottlenecks: &[f64]) -> TimeSharing {
    let k = bottlenecks.len();
    if bottlenecks.iter().any(|&b| b <= 0.0) {
        return TimeSharing {
            value: 0.0,
            weights: vec![1.0 / k as f64; k],
            degenerate: true,
        };
    }
    if k == 1 {
        return TimeSharing {
            value: bottlenecks[0],
            weights: vec![1.0],
            degenerate: false,
        };
    }
    let total: f64 = bottlenecks.iter().map(|b| b.recip()).sum();
    TimeSharing {
        value: total.recip(),
        weights: bottlenecks.iter().map(|b| b.recip() / total).collect(),
        degenerate: false,
    }
}

/// Brute-force reference for [`harmonic_time_sharing`].
///
/// Evaluates `min_k lambda_k b_k` on a grid of the simplex with spacing
/// `step`. For three phases a coarse pass locates the optimum and a fine
/// pass at `step` resolves it; the objective is concave, so the coarse cell
/// holding the maximum brackets the global optimum.
pub fn e2e_maxmin_oracle(bottlenecks: &[f64], step: f64) -> Result<f64> {
    let objective = |l: &[f64]| {
        l.iter()
            .zip(bottlenecks)
            .map(|(l, b)| l * b)
            .fold(f64::INFINITY, f64::min)
    };
    match bottlenecks.len() {
        1 => Ok(bottlenecks[0]),
        2 => {
            let steps = (1.0 / step).round() as usize;
            Ok((0..=steps)
                .map(|i| {
                    let l = i as f64 / steps as f64;
                    objective(&[l, 1.0 - l])
                })
                .fold(0.0, f64::max))
        }
        3 => {
            let scan = |lo: [f64; 2], span: f64, h: f64| {
                let count = (span / h).round() as i64;
                let mut best = (f64::NEG_INFINITY, lo);
                for i in 0..=count {
                    let a = lo[0] + i as f64 * h;
                    for j in 0..=count {
                        let b = lo[1] + j as f64 * h;
                        let c = 1.0 - a - b;
                        if a < 0.0 || b < 0.0 || c < -1e-12 {
                            continue;
                        }
                        let v = objective(&[a, b, c.max(0.0)]);
                        if v > best.0 {
                            best = (v, [a, b]);
                        }
                    }
                }
                best
            };
            let coarse = 1e-2_f64.max(step);
            let (_, at) = scan([0.0, 0.0], 1.0, coarse);
            let lo = [
                (at[0] - 2.0 * coarse).max(0.0),
                (at[1] - 2.0 * coarse).max(0.0),
            ];
            Ok(scan(lo, 4.0 * coarse, step).0)
        }
        k => Err(Error::OracleTooLarge(k)),
    }
}

/// All rates of a frozen realization at `snr`.
pub fn link_rates(cfg: &NetworkConfig, plan: &ReusePlan, tones: &ToneGrid, snr: f64) -> LinkRates {
    let zeta = interference_load(cfg, plan, tones, snr);
    let sinr = sinr_grid(cfg, tones, &zeta, snr);
    let per_hop: Vec<f64> = sinr.iter().map(|s| hop_mutual_info(s)).collect();
    let e2e_fixed = e2e_fixed_rate(&per_hop, cfg.reuse_sep);
    let hop_mi = group_by_phase(&per_hop, cfg.reuse_sep);
    let ts = e2e_rate_adaptive(&hop_mi);
    LinkRates {
        sinr,
        zeta,
        hop_mi,
        ts_weights: ts.weights,
        e2e_fixed,
        e2e_adaptive: ts.value,
        degenerate: ts.degenerate,
    }
}
