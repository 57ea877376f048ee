use multihop::channel::{FadingSpec, FixedTaps};
use multihop::montecarlo::{
    estimate_chi_with, evt_diagnostics, outage_probability, rayleigh_chi_single_slot, run_ensemble,
    run_ensemble_with, run_trials, ChiWarning, ConstantPower, ExponentialPower, HopPowerSampler,
    McConfig,
};
use multihop::stats::{self, EmpiricalCdf};
use multihop::topology::{equal_pdp, NetworkConfig};
use multihop::Complex64;

fn rayleigh_sampler(taps: usize) -> HopPowerSampler {
    HopPowerSampler {
        pdp: equal_pdp(taps),
        n_tones: 4,
        dist: FadingSpec::rayleigh(1.0),
    }
}

#[test]
fn injected_unit_channel_gives_awgn_rate() {
    let snr = 2.5;
    let cfg = NetworkConfig::new(1).with_snr(snr);
    let summary = run_ensemble_with(
        &cfg,
        &McConfig::new(1, 0),
        &FixedTaps(Complex64::new(1.0, 0.0)),
        None,
    )
    .unwrap();
    assert_eq!(summary.fixed.stats.mean, snr.ln_1p());
    assert_eq!(summary.adaptive.stats.mean, snr.ln_1p());
    assert_eq!(summary.flagged_trials, 0);
}

#[test]
fn more_hops_sharpen_the_distribution() {
    let mc = McConfig::new(20_000, 8);
    for (w, v) in [(1, 1), (4, 2)] {
        let one = run_ensemble(&NetworkConfig::new(1).with_ofdm(w, v), &mc).unwrap();
        let eight = run_ensemble(&NetworkConfig::new(8).with_ofdm(w, v), &mc).unwrap();
        assert!(eight.adaptive.stats.variance < one.adaptive.stats.variance);
    }
}

#[test]
fn summary_is_worker_independent() {
    let cfg = NetworkConfig::new(4).with_reuse(2).with_ofdm(4, 2);
    let mc = McConfig::new(3000, 77);
    let one = run_ensemble_with(&cfg, &mc, &cfg.fading, Some(1)).unwrap();
    let eight = run_ensemble_with(&cfg, &mc, &cfg.fading, Some(8)).unwrap();
    assert_eq!(one, eight);
}

#[test]
fn summary_cdfs_are_valid_and_ordered() {
    let cfg = NetworkConfig::new(8).with_reuse(4).with_ofdm(4, 2);
    let mc = McConfig::new(5000, 4).with_target_rate(0.8);
    let s = run_ensemble(&cfg, &mc).unwrap();
    for col in [&s.cdf.fixed, &s.cdf.adaptive] {
        assert!(col.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*col.last().unwrap(), 1.0);
    }
    assert!(s.cdf.adaptive.iter().zip(&s.cdf.fixed).all(|(a, f)| a <= f));
    assert_eq!(s.dominance_violations, 0);

    let outcomes = run_trials(&cfg, &mc, &cfg.fading, None).unwrap();
    let fixed: Vec<f64> = outcomes.iter().map(|o| o.fixed).collect();
    assert_eq!(
        s.p_out,
        EmpiricalCdf::new(&fixed).unwrap().cdf_below(mc.target_rate)
    );
}

#[test]
fn outage_limits() {
    let cfg = NetworkConfig::new(2);
    let outcomes = run_trials(&cfg, &McConfig::new(500, 1), &cfg.fading, None).unwrap();
    let rates: Vec<f64> = outcomes.iter().map(|o| o.fixed).collect();
    let top = rates.iter().copied().fold(0.0, f64::max);
    assert_eq!(outage_probability(&rates, 0.0).unwrap().estimate, 0.0);
    assert_eq!(
        outage_probability(&rates, top * 1.01).unwrap().estimate,
        1.0
    );
}

#[test]
fn chi_matches_gamma_inverse_moment() {
    for (taps, expected) in [(2, 2.0), (3, 1.5)] {
        assert_eq!(rayleigh_chi_single_slot(taps, 1.0), Some(expected));
        let est = estimate_chi_with(&rayleigh_sampler(taps), 1, 200_000, 13, None).unwrap();
        let tol = if taps == 2 { 0.05 } else { 0.02 };
        assert!(
            (est.value - expected).abs() / expected < tol,
            "V={taps}: {est:?}"
        );
    }
    let est = estimate_chi_with(&rayleigh_sampler(2), 1, 100, 13, None).unwrap();
    assert_eq!(est.warning, Some(ChiWarning::InfiniteVariance));
    let est = estimate_chi_with(&ExponentialPower { mean: 1.0 }, 1, 100, 13, None).unwrap();
    assert_eq!(est.warning, Some(ChiWarning::Divergent));
    let est = estimate_chi_with(&ConstantPower(0.4), 3, 100, 13, None).unwrap();
    assert_eq!(est.value, 2.5);
}

#[test]
fn chi_standard_error_halves_with_four_times_the_samples() {
    let sampler = rayleigh_sampler(4);
    let small = estimate_chi_with(&sampler, 2, 20_000, 3, None).unwrap();
    let large = estimate_chi_with(&sampler, 2, 80_000, 3, None).unwrap();
    let ratio = small.std_err / large.std_err;
    assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
    let doubled = estimate_chi_with(&sampler, 2, 40_000, 3, None).unwrap();
    let ratio = small.std_err / doubled.std_err;
    let expected = 2f64.sqrt();
    assert!((ratio - expected).abs() <= 0.2 * expected, "ratio {ratio}");
}

#[test]
fn exponential_minimum_is_recovered() {
    let report = evt_diagnostics(
        &ExponentialPower { mean: 1.0 },
        &[4, 16, 64],
        10_000,
        1,
        None,
    )
    .unwrap();
    assert!(report.ks_nonincreasing);
    for row in &report.rows {
        let fit = row.fit.unwrap();
        let n = row.n_hops as f64;
        assert!((fit.shape - 1.0).abs() < 0.05);
        assert!((fit.a_n * n - 1.0).abs() < 0.05);
        assert_eq!(fit.b_n, 0.0);
        assert!(row.quantiles[0] <= row.quantiles[1] && row.quantiles[1] <= row.quantiles[2]);
    }
}

#[test]
fn two_tap_minimum_has_weibull_shape_two() {
    // F(x) = 1 - exp(-2x)(1 + 2x) for Gamma(2, 1/2); its log-slope at 0 is 2
    let cdf = |x: f64| -(-2.0 * x).exp_m1() - 2.0 * x * (-2.0 * x).exp();
    let slope = (cdf(2e-4).ln() - cdf(1e-4).ln()) / 2f64.ln();
    assert!((slope - 2.0).abs() < 1e-3);

    let report = evt_diagnostics(&rayleigh_sampler(2), &[64], 10_000, 2, None).unwrap();
    let fit = report.rows[0].fit.unwrap();
    assert!((fit.shape - 2.0).abs() < 0.15, "shape {}", fit.shape);

    // exact law of the minimum of 64 such powers
    let exact = |x: f64| 1.0 - (1.0 - cdf(x)).powi(64);
    let ks = report.rows[0].samples.ks_distance(exact);
    assert!(ks < 0.02, "ks {ks}");
}

#[test]
fn sample_statistics_are_consistent() {
    let cfg = NetworkConfig::new(4).with_ofdm(4, 2);
    let s = run_ensemble(&cfg, &McConfig::new(2000, 6)).unwrap();
    let st = &s.adaptive.stats;
    assert!(st.min <= st.q01 && st.q01 <= st.q10 && st.q10 <= st.q50 && st.q50 <= st.max);
    assert!((st.std_err - (st.variance / st.count as f64).sqrt()).abs() < 1e-15);
    assert!(s.chi.value > 0.0 && s.chi.std_err > 0.0);
    assert!(s.evt.is_some());
    assert!(s.ebn0_min_adaptive.mean <= s.ebn0_min_fixed.mean);
    assert_eq!(stats::variance(&[3.0; 10]), 0.0);
}
