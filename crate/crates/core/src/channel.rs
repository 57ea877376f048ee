//! Quasi-static frequency-selective fading and OFDM tone responses.
//!
//! Each hop `n` has `V` signal taps `h_{n,v}`, and each (hop, interferer)
//! pair in `L_n` has its own `V` interference taps `g_{n,l,v}`. All taps are
//! drawn independently. Tap `v` has average power `pdp[v]` times the
//! per-tap power of the fading law, so the total average channel power of a
//! link equals `|mean|^2 + variance` whatever the tap count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::topology::{NetworkConfig, ReusePlan};

/// Complex Gaussian tap law before power-delay-profile scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingSpec {
    /// Ricean line-of-sight component; zero gives Rayleigh taps.
    pub tap_mean: Complex64,
    /// Variance of the scattered component, `E|h - mean|^2`.
    pub tap_variance: f64,
}

impl Default for FadingSpec {
    /// Mean `1/sqrt(2)` and variance `1/2`: unit average power, Ricean
    /// factor one.
    fn default() -> Self {
        Self::ricean(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0), 0.5)
    }
}

impl FadingSpec {
    pub fn ricean(tap_mean: Complex64, tap_variance: f64) -> Self {
        Self {
            tap_mean,
            tap_variance,
        }
    }

    pub fn rayleigh(tap_variance: f64) -> Self {
        Self::ricean(Complex64::new(0.0, 0.0), tap_variance)
    }

    /// Average power of an unscaled tap.
    pub fn mean_power(&self) -> f64 {
        self.tap_mean.norm_sqr() + self.tap_variance
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tap_variance.is_finite() && self.tap_variance > 0.0) {
            return Err(invalid(
                "fading.variance",
                "must be a positive finite number",
            ));
        }
        if !(self.tap_mean.re.is_finite() && self.tap_mean.im.is_finite()) {
            return Err(invalid("fading.mean", "must be finite"));
        }
        Ok(())
    }
}

/// A per-tap fading law.
///
/// `weight` is the power-delay-profile entry of the tap; implementations
/// scale the tap's average power by it.
pub trait TapDistribution: Sync {
    fn sample_tap<R: Rng + ?Sized>(&self, weight: f64, rng: &mut R) -> Complex64;
}

impl TapDistribution for FadingSpec {
    fn sample_tap<R: Rng + ?Sized>(&self, weight: f64, rng: &mut R) -> Complex64 {
        let sd = (0.5 * self.tap_variance * weight).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        self.tap_mean * weight.sqrt() + Complex64::new(re * sd, im * sd)
    }
}

/// Deterministic taps `value * sqrt(weight)`; consumes no randomness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedTaps(pub Complex64);

impl TapDistribution for FixedTaps {
    fn sample_tap<R: Rng + ?Sized>(&self, weight: f64, _rng: &mut R) -> Complex64 {
        self.0 * weight.sqrt()
    }
}

/// One quasi-static draw of every tap on the route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    /// `signal_taps[n-1][v] = h_{n,v}`.
    pub signal_taps: Vec<Vec<Complex64>>,
    /// `interference_taps[n-1][i][v] = g_{n,l,v}` for the `i`-th entry `l`
    /// of `L_n`.
    pub interference_taps: Vec<Vec<Vec<Complex64>>>,
}

/// Random stream of trial `trial` under `seed`.
///
/// ChaCha streams are counter based, so the stream of a trial does not depend
/// on which worker runs it or in what order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn draw_realization<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    plan: &ReusePlan,
    rng: &mut R,
) -> ChannelRealization {
    draw_realization_with(cfg, plan, &cfg.fading, rng)
}

/// Draws all signal taps hop by hop, then all interference taps hop by hop
/// and interferer by interferer.
pub fn draw_realization_with<D, R>(
    cfg: &NetworkConfig,
    plan: &ReusePlan,
    dist: &D,
    rng: &mut R,
) -> ChannelRealization
where
    D: TapDistribution + ?Sized,
    R: Rng + ?Sized,
{
    let draw_link = |rng: &mut R| -> Vec<Complex64> {
        cfg.pdp.iter().map(|&w| dist.sample_tap(w, rng)).collect()
    };
    let signal_taps = (0..cfg.n_hops).map(|_| draw_link(rng)).collect();
    let interference_taps = (1..=cfg.n_hops)
        .map(|n| plan.interferers(n).iter().map(|_| draw_link(rng)).collect())
        .collect();
    ChannelRealization {
        signal_taps,
        interference_taps,
    }
}

/// Per-tone responses of a realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneGrid {
    /// `signal_tones[n-1][w-1] = H_{n,w}`.
    pub signal_tones: Vec<Vec<Complex64>>,
    /// `interference_tones[n-1][i][w-1] = G_{n,l,w}`.
    pub interference_tones: Vec<Vec<Vec<Complex64>>>,
    /// `(1/W) sum_w |H_{n,w}|^2` per hop.
    pub hop_power: Vec<f64>,
}

impl ToneGrid {
    pub fn n_tones(&self) -> usize {
        self.signal_tones.first().map_or(0, Vec::len)
    }
}

/// `H_w = sum_v h_v exp(-j 2 pi v w / W)` for tones `w = 1..=W`.
pub fn tone_response(taps: &[Complex64], n_tones: usize) -> Vec<Complex64> {
    let twiddles = twiddle_table(n_tones);
    tone_response_with(taps, &twiddles)
}

fn twiddle_table(n_tones: usize) -> Vec<Complex64> {
    (0..n_tones)
        .map(|r| Complex64::from_polar(1.0, -2.0 * PI * r as f64 / n_tones as f64))
        .collect()
}

fn tone_response_with(taps: &[Complex64], twiddles: &[Complex64]) -> Vec<Complex64> {
    let w_count = twiddles.len();
    (1..=w_count)
        .map(|w| {
            taps.iter()
                .enumerate()
                .map(|(v, h)| h * twiddles[(v * w) % w_count])
                .sum()
        })
        .collect()
}

pub fn mean_power(tones: &[Complex64]) -> f64 {
    tones.iter().map(Complex64::norm_sqr).sum::<f64>() / tones.len() as f64
}

pub fn tones_from_taps(real: &ChannelRealization, n_tones: usize) -> Result<ToneGrid> {
    let taps = real
        .signal_taps
        .iter()
        .chain(real.interference_taps.iter().flatten())
        .map(Vec::len)
        .max()
        .unwrap_or(0);
    if taps > n_tones {
        return Err(Error::TapsExceedTones {
            taps,
            tones: n_tones,
        });
    }
    if n_tones == 0 {
        return Err(invalid("n_tones", "must be at least 1"));
    }
    let twiddles = twiddle_table(n_tones);
    let signal_tones: Vec<Vec<Complex64>> = real
        .signal_taps
        .iter()
        .map(|h| tone_response_with(h, &twiddles))
        .collect();
    let interference_tones = real
        .interference_taps
        .iter()
        .map(|hop| {
            hop.iter()
                .map(|g| tone_response_with(g, &twiddles))
                .collect()
        })
        .collect();
    let hop_power = signal_tones.iter().map(|h| mean_power(h)).collect();
    Ok(ToneGrid {
        signal_tones,
        interference_tones,
        hop_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_channel_is_constant_across_tones() {
        let h = [Complex64::new(1.0, 0.0)];
        for w in [1, 4, 7] {
            for t in tone_response(&h, w) {
                assert_eq!(t, Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn delayed_tap_rotates_phase() {
        let h = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let tones = tone_response(&h, 4);
        for (i, t) in tones.iter().enumerate() {
            let w = (i + 1) as f64;
            let expect = Complex64::from_polar(1.0, -2.0 * PI * w / 4.0);
            assert_relative_eq!(t.re, expect.re, epsilon = 1e-15);
            assert_relative_eq!(t.im, expect.im, epsilon = 1e-15);
            assert_relative_eq!(t.norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn parseval_on_brute_force_sum() {
        let mut rng = trial_rng(7, 0);
        let fading = FadingSpec::rayleigh(1.0);
        for _ in 0..200 {
            let taps: Vec<Complex64> = (0..3)
                .map(|_| fading.sample_tap(1.0 / 3.0, &mut rng))
                .collect();
            // direct DFT sum without the twiddle table
            let brute: f64 = (1..=5)
                .map(|w| {
                    taps.iter()
                        .enumerate()
                        .map(|(v, h)| {
                            h * Complex64::from_polar(1.0, -2.0 * PI * (v * w) as f64 / 5.0)
                        })
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum::<f64>()
                / 5.0;
            let energy: f64 = taps.iter().map(Complex64::norm_sqr).sum();
            assert_relative_eq!(brute, energy, max_relative = 1e-12);
            assert_relative_eq!(
                mean_power(&tone_response(&taps, 5)),
                energy,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn rejects_more_taps_than_tones() {
        let real = ChannelRealization {
            signal_taps: vec![vec![Complex64::new(1.0, 0.0); 4]],
            interference_taps: vec![vec![]],
        };
        assert_eq!(
            tones_from_taps(&real, 2),
            Err(Error::TapsExceedTones { taps: 4, tones: 2 })
        );
    }

    #[test]
    fn default_fading_has_unit_power() {
        assert_relative_eq!(FadingSpec::default().mean_power(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn realization_shape_follows_plan() {
        let cfg = NetworkConfig::new(8).with_reuse(4).with_ofdm(4, 2);
        let plan = crate::topology::build_reuse_plan(&cfg).unwrap();
        let real = draw_realization(&cfg, &plan, &mut trial_rng(1, 3));
        assert_eq!(real.signal_taps.len(), 8);
        assert!(real.signal_taps.iter().all(|h| h.len() == 2));
        assert!(real
            .interference_taps
            .iter()
            .all(|hop| hop.len() == 1 && hop[0].len() == 2));
        assert_eq!(real, draw_realization(&cfg, &plan, &mut trial_rng(1, 3)));
        assert_ne!(real, draw_realization(&cfg, &plan, &mut trial_rng(1, 4)));
    }

    #[test]
    fn fixed_taps_consume_nothing() {
        let mut rng = trial_rng(0, 0);
        let before = rng.clone();
        let t = FixedTaps(Complex64::new(2.0, 0.0)).sample_tap(0.25, &mut rng);
        assert_eq!(t, Complex64::new(1.0, 0.0));
        assert_eq!(rng, before);
    }
}
