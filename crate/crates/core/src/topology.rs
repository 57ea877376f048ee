//! Linear route geometry and the spatial-reuse phase structure.
//!
//! Terminals `T_1 .. T_{N+1}` sit equidistantly on a segment of length `D`;
//! hop `n` carries traffic from `T_n` to `T_{n+1}`. With reuse separation `K`
//! the `N` hops are split into `K` phases, phase `k` activating the
//! `M = N / K` transmitters `T_k, T_{k+K}, ..., T_{k+(M-1)K}`. Every receiver
//! treats the other transmitters of its phase as noise.
//!
//! Hops, phases and slots are 1-based in the public API.

use serde::{Deserialize, Serialize};

use crate::channel::FadingSpec;
use crate::error::{invalid, Error, Result};

/// Tolerance on the power delay profile summing to one.
pub const PDP_SUM_TOL: f64 = 1e-12;

/// Static description of one route scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Number of hops `N`.
    pub n_hops: usize,
    /// Reuse separation `K`; `K = N` disables spatial reuse.
    pub reuse_sep: usize,
    /// Source-destination distance `D` in meters.
    pub distance: f64,
    /// Path-loss exponent `p >= 2`.
    pub pathloss_exp: f64,
    /// OFDM tone count `W`.
    pub n_tones: usize,
    /// Channel tap count `V <= W`.
    pub n_taps: usize,
    /// Power delay profile, one weight per tap, summing to one.
    pub pdp: Vec<f64>,
    pub fading: FadingSpec,
    /// Linear `P / (N0 B)`.
    pub snr: f64,
}

impl NetworkConfig {
    /// Flat single-tone route without reuse: unit distance, fourth-power path
    /// loss, 0 dB SNR and the default Ricean taps.
    pub fn new(n_hops: usize) -> Self {
        Self {
            n_hops,
            reuse_sep: n_hops,
            distance: 1.0,
            pathloss_exp: 4.0,
            n_tones: 1,
            n_taps: 1,
            pdp: vec![1.0],
            fading: FadingSpec::default(),
            snr: 1.0,
        }
    }

    pub fn with_reuse(mut self, reuse_sep: usize) -> Self {
        self.reuse_sep = reuse_sep;
        self
    }

    /// Sets `W` tones and `V` taps with an equal-power delay profile.
    pub fn with_ofdm(mut self, n_tones: usize, n_taps: usize) -> Self {
        self.n_tones = n_tones;
        self.n_taps = n_taps;
        self.pdp = equal_pdp(n_taps);
        self
    }

    pub fn with_pdp(mut self, pdp: Vec<f64>) -> Self {
        self.pdp = pdp;
        self
    }

    pub fn with_fading(mut self, fading: FadingSpec) -> Self {
        self.fading = fading;
        self
    }

    pub fn with_snr(mut self, snr: f64) -> Self {
        self.snr = snr;
        self
    }

    pub fn with_distance(mut self, distance: f64) -> Self {
        self.distance = distance;
        self
    }

    pub fn with_pathloss(mut self, pathloss_exp: f64) -> Self {
        self.pathloss_exp = pathloss_exp;
        self
    }

    /// Simultaneous transmissions per phase, `M = N / K`.
    pub fn slots(&self) -> usize {
        self.n_hops / self.reuse_sep
    }

    /// Per-hop distance `d_n = D / N`.
    pub fn hop_distance(&self) -> f64 {
        self.distance / self.n_hops as f64
    }

    /// Per-tone SNR gain of a hop over `snr`: `N^(p-1) K / D^p`.
    ///
    /// The hop spans `D/N`, so path loss contributes `(N/D)^p`, and each of
    /// the `M` simultaneous transmitters gets `P/(M W)` per tone against noise
    /// `N0 B / W`.
    pub fn link_gain(&self) -> f64 {
        let n = self.n_hops as f64;
        n.powf(self.pathloss_exp - 1.0) * self.reuse_sep as f64
            / self.distance.powf(self.pathloss_exp)
    }

    /// Number of taps carrying nonzero average power.
    pub fn effective_taps(&self) -> usize {
        self.pdp.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn validate(&self) -> Result<()> {
        validate_reuse(self.n_hops, self.reuse_sep)?;
        if !(self.distance.is_finite() && self.distance > 0.0) {
            return Err(invalid("distance", "must be a positive finite number"));
        }
        if !(self.pathloss_exp.is_finite() && self.pathloss_exp >= 2.0) {
            return Err(invalid("pathloss_exp", "must be finite and >= 2"));
        }
        if self.n_tones == 0 {
            return Err(invalid("n_tones", "must be at least 1"));
        }
        if self.n_taps == 0 {
            return Err(invalid("n_taps", "must be at least 1"));
        }
        if self.n_taps > self.n_tones {
            return Err(invalid(
                "n_taps",
                format!(
                    "V <= W required (cyclic prefix), got V = {} > W = {}",
                    self.n_taps, self.n_tones
                ),
            ));
        }
        if self.pdp.len() != self.n_taps {
            return Err(invalid(
                "pdp",
                format!("needs {} entries, got {}", self.n_taps, self.pdp.len()),
            ));
        }
        if self.pdp.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("pdp", "entries must be finite and nonnegative"));
        }
        let total: f64 = self.pdp.iter().sum();
        if (total - 1.0).abs() > PDP_SUM_TOL {
            return Err(invalid(
                "pdp",
                format!("entries must sum to 1, got {total}"),
            ));
        }
        self.fading.validate()?;
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(invalid("snr", "must be a positive finite number"));
        }
        Ok(())
    }
}

pub fn equal_pdp(n_taps: usize) -> Vec<f64> {
    vec![1.0 / n_taps as f64; n_taps]
}

fn validate_reuse(n_hops: usize, reuse_sep: usize) -> Result<()> {
    if n_hops == 0 {
        return Err(invalid("n_hops", "must be at least 1"));
    }
    if reuse_sep == 0 || reuse_sep > n_hops {
        return Err(invalid(
            "reuse_sep",
            format!("must satisfy 1 <= K <= N = {n_hops}, got {reuse_sep}"),
        ));
    }
    if !n_hops.is_multiple_of(reuse_sep) {
        return Err(invalid(
            "reuse_sep",
            format!("K must divide N, got N = {n_hops}, K = {reuse_sep}"),
        ));
    }
    if reuse_sep == 1 && n_hops > 1 {
        // T_2 would have to receive from T_1 while transmitting to T_3.
        return Err(invalid(
            "reuse_sep",
            "K = 1 with N > 1 violates half-duplex operation",
        ));
    }
    Ok(())
}

/// One simultaneously active transmitter as seen by a receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interferer {
    /// Terminal index `l` of the interfering transmitter `T_l`.
    pub terminal: usize,
    /// Distance `f_{n,l}` from `T_l` to the receiver `T_{n+1}`.
    pub distance: f64,
}

/// Phase partition and interference sets of a route. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReusePlan {
    n_hops: usize,
    reuse_sep: usize,
    distance: f64,
    // phases[k-1] holds the hop indices of phase k in slot order
    phases: Vec<Vec<usize>>,
    // interferers[n-1] is L_n
    interferers: Vec<Vec<Interferer>>,
}

pub fn build_reuse_plan(cfg: &NetworkConfig) -> Result<ReusePlan> {
    cfg.validate()?;
    ReusePlan::new(cfg.n_hops, cfg.reuse_sep, cfg.distance)
}

impl ReusePlan {
    /// Builds the plan from `N`, `K` and `D` alone.
    pub fn new(n_hops: usize, reuse_sep: usize, distance: f64) -> Result<Self> {
        validate_reuse(n_hops, reuse_sep)?;
        if !(distance.is_finite() && distance > 0.0) {
            return Err(invalid("distance", "must be a positive finite number"));
        }
        let slots = n_hops / reuse_sep;
        let phases: Vec<Vec<usize>> = (1..=reuse_sep)
            .map(|k| (1..=slots).map(|m| (m - 1) * reuse_sep + k).collect())
            .collect();

        let interferers = (1..=n_hops)
            .map(|n| {
                let k = (n - 1) % reuse_sep;
                phases[k]
                    .iter()
                    .filter(|&&l| l != n)
                    .map(|&l| {
                        // receiver T_{n+1} sits at index n+1, so the gap is |l - (n+1)|
                        let gap = l.abs_diff(n + 1);
                        Interferer {
                            terminal: l,
                            distance: gap as f64 * distance / n_hops as f64,
                        }
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            n_hops,
            reuse_sep,
            distance,
            phases,
            interferers,
        })
    }

    pub fn n_hops(&self) -> usize {
        self.n_hops
    }

    pub fn reuse_sep(&self) -> usize {
        self.reuse_sep
    }

    pub fn slots(&self) -> usize {
        self.n_hops / self.reuse_sep
    }

    pub fn hop_distance(&self) -> f64 {
        self.distance / self.n_hops as f64
    }

    /// Position of terminal `T_j` on the line, `(j - 1) D / N`.
    pub fn terminal_position(&self, terminal: usize) -> f64 {
        (terminal - 1) as f64 * self.distance / self.n_hops as f64
    }

    /// Transmitting hops of phase `k` (1-based), ordered by slot.
    pub fn phase(&self, k: usize) -> &[usize] {
        &self.phases[k - 1]
    }

    pub fn phases(&self) -> impl Iterator<Item = &[usize]> {
        self.phases.iter().map(Vec::as_slice)
    }

    /// Interference set `L_n` of hop `n` (1-based).
    pub fn interferers(&self, hop: usize) -> &[Interferer] {
        &self.interferers[hop - 1]
    }

    /// `(k, m)` with `n = (m - 1) K + k`.
    pub fn phase_of_hop(&self, hop: usize) -> Result<(usize, usize)> {
        if hop == 0 || hop > self.n_hops {
            return Err(Error::HopOutOfRange {
                hop,
                n_hops: self.n_hops,
            });
        }
        Ok((
            (hop - 1) % self.reuse_sep + 1,
            (hop - 1) / self.reuse_sep + 1,
        ))
    }

    /// Inverse of [`phase_of_hop`](Self::phase_of_hop).
    pub fn hop_index(&self, phase: usize, slot: usize) -> usize {
        (slot - 1) * self.reuse_sep + phase
    }
}
