//! Run manifests: everything needed to recreate a run.

use std::path::Path;

use anyhow::{Context, Result};
use multihop::montecarlo::McMetadata;
use multihop::ChannelRealization;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ConfigFile, Resolved};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Explicit,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Single,
    Fig3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerModel {
    /// Per-hop channel power drawn from the configured taps and tones.
    Config,
    /// Unit-mean exponential power (flat Rayleigh).
    Exponential,
    /// Every hop has unit power.
    Degenerate,
}

/// Log-spaced SNR grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl SnrGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.log10(), self.hi.log10());
        let last = self.points - 1;
        (0..self.points)
            .map(|i| match i {
                0 => self.lo,
                i if i == last => self.hi,
                i => 10f64.powf(a + (b - a) * i as f64 / last as f64),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CommandSpec {
    Tradeoff {
        snr_grid: SnrGrid,
        /// Channel used instead of a seeded draw.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        channel: Option<ChannelRealization>,
    },
    Cdf {
        scenario: Scenario,
        verify: bool,
    },
    Convergence {
        n_list: Vec<usize>,
        /// Fixed slot count `M` for the rate-adaptive study; `None` runs the
        /// fixed-rate extreme-value study with `K = N`.
        m_fixed: Option<usize>,
        power_model: PowerModel,
        chi_ref: Option<f64>,
    },
    Evt {
        n_list: Vec<usize>,
        power_model: PowerModel,
        p_out: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub channel_power: String,
    pub snr_reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: CommandSpec,
    pub config: ConfigFile,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub normalization: Normalization,
    /// Excluded from the hash.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: CommandSpec, resolved: &Resolved, seed_source: SeedSource) -> Self {
        let meta = McMetadata::new(&resolved.network, &resolved.mc);
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config: resolved.to_file(),
            seed: resolved.mc.seed,
            seed_source,
            normalization: Normalization {
                channel_power: meta.channel_power,
                snr_reference: meta.snr_reference,
            },
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    /// SHA-256 of the manifest JSON with the timestamp blanked.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.timestamp.clear();
        let json = serde_json::to_vec(&canonical).expect("manifest serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn resolve(&self) -> Result<Resolved> {
        self.config.resolve()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid manifest {}", path.display()))
    }
}
