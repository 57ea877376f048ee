//! Experiment drivers. Each writes its tables into an output directory
//! together with `manifest.json`.

use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use multihop::channel::{self, trial_rng};
use multihop::evt::EvtFit;
use multihop::montecarlo::{
    chi_convergence_check, estimate_chi_with, evt_diagnostics, rayleigh_chi_single_slot,
    run_ensemble_with, ConstantPower, ExponentialPower, HopPowerSampler, McSummary,
};
use multihop::topology::{build_reuse_plan, equal_pdp, NetworkConfig};
use multihop::wideband::{ebn0_min_outage, to_db, FrozenLink, Probe, QuantileSource, Strategy};
use serde::Serialize;

use crate::config::Resolved;
use crate::manifest::{CommandSpec, PowerModel, RunManifest, Scenario, SnrGrid};
use crate::output::{write_json, Csv};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Samples used to estimate `chi` when no reference value is given.
const CHI_REF_SAMPLES: usize = 100_000;

/// Runs the command recorded in `manifest` and returns the files written.
pub fn execute(manifest: &RunManifest, out: &Path, workers: Option<usize>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let resolved = manifest.resolve()?;
    let hash = manifest.hash();
    let ctx = Run {
        manifest,
        resolved: &resolved,
        hash: &hash,
        out,
        workers,
    };
    let mut files = match &manifest.command {
        CommandSpec::Tradeoff { snr_grid, channel } => tradeoff(&ctx, snr_grid, channel.as_ref())?,
        CommandSpec::Cdf { scenario, verify } => cdf(&ctx, *scenario, *verify)?,
        CommandSpec::Convergence {
            n_list,
            m_fixed,
            power_model,
            chi_ref,
        } => convergence(&ctx, n_list, *m_fixed, *power_model, *chi_ref)?,
        CommandSpec::Evt {
            n_list,
            power_model,
            p_out,
        } => evt(&ctx, n_list, *power_model, *p_out)?,
    };
    let path = out.join(MANIFEST_FILE);
    write_json(&path, manifest)?;
    files.push(path);
    Ok(files)
}

struct Run<'a> {
    manifest: &'a RunManifest,
    resolved: &'a Resolved,
    hash: &'a str,
    out: &'a Path,
    workers: Option<usize>,
}

fn tradeoff(
    ctx: &Run,
    grid: &SnrGrid,
    channel: Option<&multihop::ChannelRealization>,
) -> Result<Vec<PathBuf>> {
    ensure!(
        grid.points >= 1 && grid.lo > 0.0 && grid.hi >= grid.lo,
        "snr grid needs 0 < lo <= hi and points >= 1"
    );
    let cfg = &ctx.resolved.network;
    let plan = build_reuse_plan(cfg)?;
    let real = match channel {
        Some(c) => {
            ensure!(
                c.signal_taps.len() == cfg.n_hops && c.interference_taps.len() == cfg.n_hops,
                "channel override must have {} hops",
                cfg.n_hops
            );
            for n in 1..=cfg.n_hops {
                ensure!(
                    c.interference_taps[n - 1].len() == plan.interferers(n).len(),
                    "channel override hop {n} needs {} interferers",
                    plan.interferers(n).len()
                );
            }
            c.clone()
        }
        None => channel::draw_realization(cfg, &plan, &mut trial_rng(ctx.resolved.mc.seed, 0)),
    };
    let tones = channel::tones_from_taps(&real, cfg.n_tones)?;
    let link = FrozenLink::new(cfg, &plan, &tones);

    let mut csv = Csv::new(
        ctx.hash,
        &[
            "snr",
            "i_fixed",
            "i_adaptive",
            "ebn0_fixed_db",
            "ebn0_adaptive_db",
        ],
    );
    for snr in grid.values() {
        let rates = link.rates(snr);
        let ebn0 = |i: f64| to_db(snr * LN_2 / i);
        csv.row(&[
            snr,
            rates.e2e_fixed,
            rates.e2e_adaptive,
            ebn0(rates.e2e_fixed),
            ebn0(rates.e2e_adaptive),
        ]);
    }
    for strategy in Strategy::ALL {
        let tag = match strategy {
            Strategy::FixedRate => "fixed",
            Strategy::RateAdaptive => "adaptive",
        };
        let closed = link.ebn0_min_closed(strategy);
        csv.footer(&format!("ebn0_min_{tag}"), closed);
        csv.footer(&format!("ebn0_min_{tag}_db"), to_db(closed));
        let numeric = link
            .ebn0_min_numeric(strategy, Probe::default())
            .unwrap_or(f64::NAN);
        csv.footer(&format!("ebn0_min_numeric_{tag}"), numeric);
        let s0 = link
            .s0_numeric(strategy, Probe::default())
            .unwrap_or(f64::NAN);
        csv.footer(&format!("s0_numeric_{tag}"), s0);
        let holds = link.bottlenecks_hold_at(strategy, Probe::default().snr);
        csv.note(
            &format!("bottlenecks_hold_at_probe_{tag}"),
            &holds.to_string(),
        );
    }
    csv.footer("s0_closed", multihop::wideband::s0_closed(cfg.reuse_sep));
    let path = ctx.out.join("tradeoff.csv");
    csv.write(&path)?;
    Ok(vec![path])
}

/// `N = 1` and `N = 8` with `K = 8, 4`, each in flat (`V = W = 1`) and
/// selective (`V = 2, W = 4`) fading.
pub fn fig3_scenarios(base: &NetworkConfig) -> Vec<(String, NetworkConfig)> {
    let mut list = Vec::new();
    for (mode, w, v) in [("flat", 1, 1), ("selective", 4, 2)] {
        for (n, k) in [(1, 1), (8, 8), (8, 4)] {
            let cfg = NetworkConfig {
                n_hops: n,
                reuse_sep: k,
                n_tones: w,
                n_taps: v,
                pdp: equal_pdp(v),
                ..base.clone()
            };
            list.push((format!("n{n}_k{k}_{mode}"), cfg));
        }
    }
    list
}

#[derive(Serialize)]
struct CdfReport<'a> {
    manifest_sha256: &'a str,
    manifest: &'a RunManifest,
    scenario: &'a str,
    summary: &'a McSummary,
}

fn cdf(ctx: &Run, scenario: Scenario, verify: bool) -> Result<Vec<PathBuf>> {
    let runs = match scenario {
        Scenario::Single => vec![("single".to_string(), ctx.resolved.network.clone())],
        Scenario::Fig3 => fig3_scenarios(&ctx.resolved.network),
    };
    let mut files = Vec::new();
    for (name, cfg) in runs {
        let summary = run_ensemble_with(&cfg, &ctx.resolved.mc, &cfg.fading, ctx.workers)?;
        if verify {
            verify_cdf(&summary).with_context(|| format!("scenario {name}"))?;
        }
        let mut csv = Csv::new(ctx.hash, &["value", "cdf_fixed", "cdf_adaptive"]);
        csv.note("scenario", &name);
        let t = &summary.cdf;
        for i in 0..t.grid.len() {
            csv.row(&[t.grid[i], t.fixed[i], t.adaptive[i]]);
        }
        let (csv_path, json_path) = match scenario {
            Scenario::Single => (ctx.out.join("cdf.csv"), ctx.out.join("summary.json")),
            Scenario::Fig3 => (
                ctx.out.join(format!("cdf_{name}.csv")),
                ctx.out.join(format!("summary_{name}.json")),
            ),
        };
        csv.write(&csv_path)?;
        let report = CdfReport {
            manifest_sha256: ctx.hash,
            manifest: ctx.manifest,
            scenario: &name,
            summary: &summary,
        };
        write_json(&json_path, &report)?;
        files.push(csv_path);
        files.push(json_path);
    }
    Ok(files)
}

/// Checks that both CDF columns are valid and the adaptive one never lies
/// above the fixed-rate one.
pub fn verify_cdf(summary: &McSummary) -> Result<()> {
    let t = &summary.cdf;
    for (label, col) in [("fixed", &t.fixed), ("adaptive", &t.adaptive)] {
        ensure!(
            col.windows(2).all(|w| w[0] <= w[1]),
            "{label} CDF decreases"
        );
        ensure!(col.last() == Some(&1.0), "{label} CDF does not end at 1");
    }
    if let Some(i) = (0..t.grid.len()).find(|&i| t.adaptive[i] > t.fixed[i]) {
        bail!("adaptive CDF exceeds fixed-rate CDF at {}", t.grid[i]);
    }
    ensure!(
        summary.dominance_violations == 0,
        "fixed rate exceeded adaptive rate in some draw"
    );
    Ok(())
}

enum Sampler {
    Config(HopPowerSampler),
    Exponential(ExponentialPower),
    Degenerate(ConstantPower),
}

impl Sampler {
    fn new(model: PowerModel, cfg: &NetworkConfig) -> Self {
        match model {
            PowerModel::Config => Sampler::Config(HopPowerSampler::from_config(cfg)),
            PowerModel::Exponential => Sampler::Exponential(ExponentialPower { mean: 1.0 }),
            PowerModel::Degenerate => Sampler::Degenerate(ConstantPower(1.0)),
        }
    }
}

macro_rules! with_sampler {
    ($s:expr, $p:ident => $body:expr) => {
        match $s {
            Sampler::Config($p) => $body,
            Sampler::Exponential($p) => $body,
            Sampler::Degenerate($p) => $body,
        }
    };
}

/// Reference `chi` and where it came from.
fn reference_chi(ctx: &Run, sampler: &Sampler, slots: usize) -> Result<(f64, &'static str)> {
    let cfg = &ctx.resolved.network;
    match sampler {
        Sampler::Degenerate(ConstantPower(c)) => return Ok((1.0 / c, "analytic")),
        Sampler::Exponential(_) => {
            bail!("chi is infinite for exponential channel power; pass --chi-ref")
        }
        Sampler::Config(_) => {
            let rayleigh = cfg.fading.tap_mean.norm_sqr() == 0.0;
            if rayleigh && slots == 1 && cfg.pdp == equal_pdp(cfg.n_taps) {
                if let Some(chi) = rayleigh_chi_single_slot(cfg.n_taps, cfg.fading.tap_variance) {
                    return Ok((chi, "analytic"));
                }
            }
        }
    }
    let est = with_sampler!(sampler, s => estimate_chi_with(s, slots, CHI_REF_SAMPLES, ctx.resolved.mc.seed, ctx.workers))?;
    Ok((est.value, "estimated"))
}

fn convergence(
    ctx: &Run,
    n_list: &[usize],
    m_fixed: Option<usize>,
    model: PowerModel,
    chi_ref: Option<f64>,
) -> Result<Vec<PathBuf>> {
    ensure!(!n_list.is_empty(), "--n-list is empty");
    let cfg = &ctx.resolved.network;
    let sampler = Sampler::new(model, cfg);
    let trials = ctx.resolved.mc.trials;
    let seed = ctx.resolved.mc.seed;
    let csv = match m_fixed {
        Some(m) => {
            let (chi, source) = match chi_ref {
                Some(c) => (c, "given"),
                None => reference_chi(ctx, &sampler, m)?,
            };
            let rows = with_sampler!(&sampler, s => chi_convergence_check(cfg, s, n_list, m, trials, chi, seed, ctx.workers))?;
            let mut csv = Csv::new(
                ctx.hash,
                &["n_hops", "reuse_sep", "trials", "mean_ratio", "spread"],
            );
            for r in rows {
                csv.row(&[
                    r.n_hops as f64,
                    r.reuse_sep as f64,
                    r.trials as f64,
                    r.mean_ratio,
                    r.spread,
                ]);
            }
            csv.footer("chi_ref", chi);
            csv.note("chi_ref_source", source);
            csv
        }
        None => {
            let report = with_sampler!(&sampler, s => evt_diagnostics(s, n_list, trials, seed, ctx.workers))?;
            let mut csv = Csv::new(
                ctx.hash,
                &[
                    "n_hops",
                    "shape",
                    "a_n",
                    "b_n",
                    "ks_distance",
                    "fit_converged",
                    "q10",
                    "q50",
                    "q90",
                ],
            );
            for r in &report.rows {
                let (shape, a, b, ks, ok) = fit_columns(r.fit.as_ref());
                csv.row(&[
                    r.n_hops as f64,
                    shape,
                    a,
                    b,
                    ks,
                    ok,
                    r.quantiles[0],
                    r.quantiles[1],
                    r.quantiles[2],
                ]);
            }
            csv.note("ks_nonincreasing", &report.ks_nonincreasing.to_string());
            csv
        }
    };
    let path = ctx.out.join("convergence.csv");
    csv.write(&path)?;
    Ok(vec![path])
}

fn fit_columns(fit: Option<&EvtFit>) -> (f64, f64, f64, f64, f64) {
    match fit {
        Some(f) => (f.shape, f.a_n, f.b_n, f.ks_distance, 1.0),
        None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, 0.0),
    }
}

fn evt(ctx: &Run, n_list: &[usize], model: PowerModel, p_out: f64) -> Result<Vec<PathBuf>> {
    ensure!(!n_list.is_empty(), "--n-list is empty");
    let base = &ctx.resolved.network;
    let sampler = Sampler::new(model, base);
    let report = with_sampler!(&sampler, s => evt_diagnostics(s, n_list, ctx.resolved.mc.trials, ctx.resolved.mc.seed, ctx.workers))?;
    let mut csv = Csv::new(
        ctx.hash,
        &[
            "n_hops",
            "shape",
            "a_n",
            "b_n",
            "ks_distance",
            "fit_converged",
            "q10",
            "q50",
            "q90",
            "ebn0_out_evt_db",
            "ebn0_out_empirical_db",
        ],
    );
    for r in &report.rows {
        let cfg = NetworkConfig {
            n_hops: r.n_hops,
            reuse_sep: r.n_hops,
            ..base.clone()
        };
        let (shape, a, b, ks, ok) = fit_columns(r.fit.as_ref());
        let out_evt = match &r.fit {
            Some(fit) => to_db(ebn0_min_outage(QuantileSource::Evt(fit), p_out, &cfg)?.value),
            None => f64::NAN,
        };
        let out_emp =
            to_db(ebn0_min_outage(QuantileSource::Empirical(&r.samples), p_out, &cfg)?.value);
        csv.row(&[
            r.n_hops as f64,
            shape,
            a,
            b,
            ks,
            ok,
            r.quantiles[0],
            r.quantiles[1],
            r.quantiles[2],
            out_evt,
            out_emp,
        ]);
    }
    csv.footer("p_out", p_out);
    csv.note("ks_nonincreasing", &report.ks_nonincreasing.to_string());
    let path = ctx.out.join("evt.csv");
    csv.write(&path)?;
    Ok(vec![path])
}
