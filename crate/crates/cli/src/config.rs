//! JSON run configuration.

use std::path::Path;

use anyhow::{Context, Result};
use multihop::channel::FadingSpec;
use multihop::montecarlo::McConfig;
use multihop::topology::{equal_pdp, NetworkConfig};
use multihop::Complex64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_TARGET_RATE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingFile {
    pub mean_re: f64,
    pub mean_im: f64,
    pub variance: f64,
}

impl From<FadingSpec> for FadingFile {
    fn from(f: FadingSpec) -> Self {
        Self {
            mean_re: f.tap_mean.re,
            mean_im: f.tap_mean.im,
            variance: f.tap_variance,
        }
    }
}

impl From<FadingFile> for FadingSpec {
    fn from(f: FadingFile) -> Self {
        FadingSpec::ricean(Complex64::new(f.mean_re, f.mean_im), f.variance)
    }
}

/// Configuration as written by the user; absent keys take defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_hops: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reuse_sep: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pathloss_exp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_tones: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_taps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pdp: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fading: Option<FadingFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_rate: Option<f64>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid configuration JSON")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Keys set in `other` replace those in `self`.
    pub fn merge(self, other: ConfigFile) -> Self {
        Self {
            n_hops: other.n_hops.or(self.n_hops),
            reuse_sep: other.reuse_sep.or(self.reuse_sep),
            distance: other.distance.or(self.distance),
            pathloss_exp: other.pathloss_exp.or(self.pathloss_exp),
            n_tones: other.n_tones.or(self.n_tones),
            n_taps: other.n_taps.or(self.n_taps),
            pdp: other.pdp.or(self.pdp),
            fading: other.fading.or(self.fading),
            snr: other.snr.or(self.snr),
            trials: other.trials.or(self.trials),
            seed: other.seed.or(self.seed),
            target_rate: other.target_rate.or(self.target_rate),
        }
    }

    /// Validated configs. `seed` must already be set.
    pub fn resolve(&self) -> Result<Resolved> {
        let n_hops = self.n_hops.unwrap_or(1);
        let n_taps = self.n_taps.unwrap_or(1);
        let network = NetworkConfig {
            n_hops,
            reuse_sep: self.reuse_sep.unwrap_or(n_hops),
            distance: self.distance.unwrap_or(1.0),
            pathloss_exp: self.pathloss_exp.unwrap_or(4.0),
            n_tones: self.n_tones.unwrap_or(1),
            n_taps,
            pdp: self.pdp.clone().unwrap_or_else(|| equal_pdp(n_taps)),
            fading: self.fading.map(FadingSpec::from).unwrap_or_default(),
            snr: self.snr.unwrap_or(1.0),
        };
        network.validate()?;
        let mut mc = McConfig::new(
            self.trials.unwrap_or(DEFAULT_TRIALS),
            self.seed.context("seed is not set")?,
        );
        mc.target_rate = self.target_rate.unwrap_or(DEFAULT_TARGET_RATE);
        mc.validate()?;
        Ok(Resolved { network, mc })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub network: NetworkConfig,
    pub mc: McConfig,
}

impl Resolved {
    /// Every key spelled out, so the file reproduces the run on its own.
    pub fn to_file(&self) -> ConfigFile {
        let n = &self.network;
        ConfigFile {
            n_hops: Some(n.n_hops),
            reuse_sep: Some(n.reuse_sep),
            distance: Some(n.distance),
            pathloss_exp: Some(n.pathloss_exp),
            n_tones: Some(n.n_tones),
            n_taps: Some(n.n_taps),
            pdp: Some(n.pdp.clone()),
            fading: Some(n.fading.into()),
            snr: Some(n.snr),
            trials: Some(self.mc.trials),
            seed: Some(self.mc.seed),
            target_rate: Some(self.mc.target_rate),
        }
    }
}
