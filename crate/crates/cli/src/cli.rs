//! Argument parsing and manifest assembly.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args as ClapArgs, Parser, Subcommand, ValueEnum};

use crate::commands;
use crate::config::ConfigFile;
use crate::manifest::{CommandSpec, PowerModel, RunManifest, Scenario, SeedSource, SnrGrid};

#[derive(Debug, Parser)]
#[command(
    name = "multihop",
    version,
    about = "Wideband multihop relaying experiments"
)]
pub struct Args {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, ClapArgs)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// JSON object whose keys override the configuration file.
    #[arg(long, global = true)]
    pub inline: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Target rate R in nats/s/Hz for outage.
    #[arg(long, global = true)]
    pub rate: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioArg {
    Single,
    Fig3,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PowerModelArg {
    Config,
    Exponential,
    Degenerate,
}

impl From<PowerModelArg> for PowerModel {
    fn from(p: PowerModelArg) -> Self {
        match p {
            PowerModelArg::Config => PowerModel::Config,
            PowerModelArg::Exponential => PowerModel::Exponential,
            PowerModelArg::Degenerate => PowerModel::Degenerate,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mutual information and Eb/N0 versus SNR for one frozen channel.
    Tradeoff {
        /// Log-spaced linear SNR grid `lo:hi:points`.
        #[arg(long, default_value = "1e-8:1:81", value_parser = parse_snr_grid)]
        snr_grid: SnrGrid,
        /// JSON channel realization used instead of a seeded draw.
        #[arg(long)]
        channel: Option<PathBuf>,
    },
    /// Empirical CDFs of end-to-end mutual information.
    Cdf {
        #[arg(long, value_enum, default_value = "single")]
        scenario: ScenarioArg,
        /// Fail unless every CDF is valid and adaptive dominates fixed rate.
        #[arg(long)]
        verify: bool,
    },
    /// Large-N behaviour of the weakest hop or of the rate-adaptive Eb/N0-min.
    Convergence {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        /// Fixed slot count M; runs the rate-adaptive study with K = N/M.
        #[arg(long)]
        m_fixed: Option<usize>,
        #[arg(long, value_enum, default_value = "config")]
        power_model: PowerModelArg,
        #[arg(long)]
        chi_ref: Option<f64>,
    },
    /// Extreme-value fits of the weakest-hop power and outage Eb/N0-min.
    Evt {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value = "config")]
        power_model: PowerModelArg,
        #[arg(long, default_value_t = 0.1)]
        p_out: f64,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

pub fn parse_snr_grid(s: &str) -> Result<SnrGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, points] = parts[..] else {
        return Err("expected lo:hi:points".into());
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
    let grid = SnrGrid {
        lo: num(lo)?,
        hi: num(hi)?,
        points: points
            .trim()
            .parse()
            .map_err(|e| format!("{points}: {e}"))?,
    };
    if !(grid.lo > 0.0 && grid.hi >= grid.lo && grid.points >= 1) {
        return Err("need 0 < lo <= hi and points >= 1".into());
    }
    Ok(grid)
}

/// Merges the configuration file, inline overrides and flags, drawing a
/// seed if none was given.
pub fn build_manifest(common: &Common, command: CommandSpec) -> Result<RunManifest> {
    let mut file = match &common.config {
        Some(path) => ConfigFile::from_path(path)?,
        None => ConfigFile::default(),
    };
    if let Some(inline) = &common.inline {
        file = file.merge(ConfigFile::from_json(inline).context("in --inline")?);
    }
    file = file.merge(ConfigFile {
        seed: common.seed,
        trials: common.trials,
        target_rate: common.rate,
        ..Default::default()
    });
    let source = if file.seed.is_some() {
        SeedSource::Explicit
    } else {
        file.seed = Some(rand::random());
        SeedSource::Auto
    };
    let resolved = file.resolve()?;
    Ok(RunManifest::new(command, &resolved, source))
}

fn command_spec(command: Command) -> Result<CommandSpec> {
    Ok(match command {
        Command::Tradeoff { snr_grid, channel } => CommandSpec::Tradeoff {
            snr_grid,
            channel: channel.map(|p| read_channel(&p)).transpose()?,
        },
        Command::Cdf { scenario, verify } => CommandSpec::Cdf {
            scenario: match scenario {
                ScenarioArg::Single => Scenario::Single,
                ScenarioArg::Fig3 => Scenario::Fig3,
            },
            verify,
        },
        Command::Convergence {
            n_list,
            m_fixed,
            power_model,
            chi_ref,
        } => CommandSpec::Convergence {
            n_list,
            m_fixed,
            power_model: power_model.into(),
            chi_ref,
        },
        Command::Evt {
            n_list,
            power_model,
            p_out,
        } => CommandSpec::Evt {
            n_list,
            power_model: power_model.into(),
            p_out,
        },
        Command::Replay { .. } => bail!("replay has no command spec"),
    })
}

fn read_channel(path: &Path) -> Result<multihop::ChannelRealization> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid channel file {}", path.display()))
}

pub fn run(args: Args) -> Result<Vec<PathBuf>> {
    let manifest = match args.command {
        Command::Replay { manifest } => RunManifest::read(&manifest)?,
        command => build_manifest(&args.common, command_spec(command)?)?,
    };
    commands::execute(&manifest, &args.common.out, args.common.workers)
}
