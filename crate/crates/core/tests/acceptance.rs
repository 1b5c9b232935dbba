//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured numbers (run with `--nocapture` to see them all).
//!
//! The real-recording checks (criterion 10) need user-supplied data; point
//! `GRIDFREQ_RTE_2017` at comma-separated CSV paths (and optionally set
//! `GRIDFREQ_RTE_2017_FORMAT` to `csv-iso`/`csv-epoch`) to enable them.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gridfreq::profiles::{partition_trading_windows, violation_profile};
use gridfreq::stats::{
    autocorrelation, fit_decay_rate, fit_stable, summary_stats, tail_excess_ratio,
};
use gridfreq::swing::{
    bulk_velocity, sample_stable, simulate, standard_normal, AggregateNoise, BulkModel, GridModel,
    NoiseSpec, SimParams,
};
use gridfreq::synth::{synth_trace, SynthKind, SynthSpec};
use gridfreq::theory::{predict_scale_stable, predict_std_gaussian};
use gridfreq::timeseries::{load_trace, select_complete_days, CsvFormat, FrequencyTrace};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[acceptance] {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn sample_std(xs: &[f64]) -> f64 {
    summary_stats(xs).unwrap().std
}

#[test]
fn criterion_1_stationary_std_gaussian() {
    // single node, M = 1, gamma = 1, sigma = 1: stationary std 1/sqrt(2)
    let started = Instant::now();
    let grid = GridModel::single_node(1.0, 0.0, 1.0).unwrap();
    let noise = NoiseSpec::gaussian(vec![1.0]).unwrap();
    let params = SimParams::new(1e-3, 10_000_000, 20_260_101);
    let sim = simulate(&grid, &noise, &params).unwrap();
    let measured = sample_std(&sim.omega[0]);
    let predicted = 1.0 / std::f64::consts::SQRT_2;
    let rel = (measured - predicted).abs() / predicted;
    let pass = rel < 0.02;
    report(
        "criterion 1 (stationary std, Gaussian noise)",
        pass,
        &format!(
            "std {measured:.6} vs {predicted:.6}, rel {:.3}% (tol 2%), {:.1} s",
            rel * 100.0,
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "relative error {rel}");
}

#[test]
fn criterion_2_stationary_scale_stable() {
    let started = Instant::now();
    let alpha: f64 = 1.7;
    let grid = GridModel::single_node(1.0, 0.0, 1.0).unwrap();
    let noise = NoiseSpec::stable(alpha, vec![1.0]).unwrap();
    let predicted = predict_scale_stable(&grid, &noise).unwrap();
    let params = SimParams::new(5e-3, 20_000_000, 20_260_102).with_stride(20);
    let sim = simulate(&grid, &noise, &params).unwrap();
    let fit = fit_stable(&sim.omega[0]).unwrap();
    let alpha_err = (fit.alpha - alpha).abs();
    let scale_rel = (fit.sigma - predicted).abs() / predicted;
    let pass = alpha_err < 0.05 && scale_rel < 0.10;
    report(
        "criterion 2 (stationary scale, stable noise)",
        pass,
        &format!(
            "alpha {:.4} vs {alpha} (tol 0.05), scale {:.5} vs {predicted:.5}, rel {:.2}% (tol 10%), {:.1} s",
            fit.alpha,
            fit.sigma,
            scale_rel * 100.0,
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "alpha err {alpha_err}, scale rel {scale_rel}");
}

#[test]
fn criterion_3_stable_gaussian_reduction_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let gamma: f64 = 0.05 + 4.95 * rng.random::<f64>();
        let inertia: Vec<f64> = (0..n).map(|_| 0.1 + 9.9 * rng.random::<f64>()).collect();
        let damping: Vec<f64> = inertia.iter().map(|&m| gamma * m).collect();
        let amplitudes: Vec<f64> = (0..n).map(|_| 3.0 * rng.random::<f64>()).collect();
        let grid = GridModel::new(inertia, vec![0.0; n], damping, vec![0.0; n * n]).unwrap();
        let gaussian = NoiseSpec::gaussian(amplitudes.clone()).unwrap();
        let stable = NoiseSpec::stable(2.0, amplitudes).unwrap();
        let std = predict_std_gaussian(&grid, &gaussian).unwrap();
        let scale = predict_scale_stable(&grid, &stable).unwrap();
        let rel = ((std::f64::consts::SQRT_2 * scale - std) / std.max(1e-300)).abs();
        worst = worst.max(rel);
    }
    let pass = worst < 1e-12;
    report(
        "criterion 3 (alpha=2 reduction identity, 100 random grids)",
        pass,
        &format!("worst relative deviation {worst:.2e} (tol 1e-12)"),
    );
    assert!(pass, "worst {worst}");
}

#[test]
fn criterion_4_autocorrelation_decay_recovery() {
    let started = Instant::now();
    // (gamma, dt, record stride, steps, max fit lag): long trajectories so
    // the estimator variance sits well inside the 5% tolerance
    let cases: [(f64, f64, usize, usize, f64); 3] = [
        (0.2, 0.01, 10, 50_000_000, 12.0),
        (1.0, 0.01, 5, 20_000_000, 3.0),
        (5.0, 0.005, 2, 20_000_000, 0.8),
    ];
    let mut all_pass = true;
    let mut details = Vec::new();
    for (i, &(gamma, dt, stride, steps, max_lag_s)) in cases.iter().enumerate() {
        let model = BulkModel {
            gamma,
            total_inertia: 1.0,
            noise: AggregateNoise::Gaussian { sigma: 1.0 },
        };
        let params = SimParams::new(dt, steps, 20_260_400 + i as u64).with_stride(stride);
        let samples = gridfreq::swing::simulate_bulk(&model, &params, 0.0).unwrap();
        let sample_dt = dt * stride as f64;
        let mut acf = autocorrelation(&samples, sample_dt, max_lag_s).unwrap();
        let gamma_hat = fit_decay_rate(&mut acf, 0.1).unwrap();
        let rel = (gamma_hat - gamma).abs() / gamma;
        all_pass &= rel < 0.05;
        details.push(format!(
            "gamma {gamma}: {gamma_hat:.4} ({:.2}%)",
            rel * 100.0
        ));
    }
    report(
        "criterion 4 (autocorrelation decay-rate recovery)",
        all_pass,
        &format!(
            "{} (tol 5%), {:.1} s",
            details.join(", "),
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(all_pass, "{details:?}");
}

#[test]
fn criterion_5_estimator_calibration() {
    let started = Instant::now();
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_500);
    let gauss: Vec<f64> = (0..n)
        .map(|_| standard_normal::<f64, _>(&mut rng))
        .collect();
    let kurt_gauss = summary_stats(&gauss).unwrap().kurtosis;

    let laplace: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() - 0.5;
            -u.signum() * (1.0 - 2.0 * u.abs()).max(1e-300).ln()
        })
        .collect();
    let kurt_laplace = summary_stats(&laplace).unwrap().kurtosis;

    let mut alpha_errs = Vec::new();
    for &alpha in &[1.0f64, 1.5, 1.9, 2.0] {
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_stable(alpha, 0.0, 1.0, &mut rng))
            .collect();
        let fit = fit_stable(&draws).unwrap();
        alpha_errs.push((alpha, fit.alpha, (fit.alpha - alpha).abs()));
    }

    let pass = (kurt_gauss - 3.0).abs() < 0.05
        && (kurt_laplace - 6.0).abs() < 0.2
        && alpha_errs.iter().all(|&(_, _, e)| e < 0.05);
    let alpha_detail: Vec<String> = alpha_errs
        .iter()
        .map(|(want, got, _)| format!("alpha {want}: {got:.4}"))
        .collect();
    report(
        "criterion 5 (estimator calibration)",
        pass,
        &format!(
            "kurtosis N(0,1) {kurt_gauss:.4} (3+/-0.05), Laplace {kurt_laplace:.3} (6+/-0.2), {} (+/-0.05), {:.1} s",
            alpha_detail.join(", "),
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_two_node_fixed_point() {
    let grid = GridModel::from_edges(
        vec![1.0, 1.0],
        vec![0.5, -0.5],
        vec![1.0, 1.0],
        &[(0, 1, 1.0)],
    )
    .unwrap();
    let params = SimParams::new(1e-3, 100_000, 0).with_burn_in(0.0);
    let sim = simulate(&grid, &NoiseSpec::none(2), &params).unwrap();
    let last = sim.n_recorded() - 1;
    let diff = sim.theta[0][last] - sim.theta[1][last];
    let want = 0.5f64.asin();
    let err = (diff - want).abs();
    let pass = err < 1e-6;
    report(
        "criterion 6 (deterministic two-node fixed point)",
        pass,
        &format!("phase difference {diff:.9} vs arcsin(1/2) = {want:.9}, err {err:.2e} (tol 1e-6)"),
    );
    assert!(pass);
}

#[test]
fn criterion_7_pipeline_discriminates_trading_windows() {
    let started = Instant::now();
    // jumps injected right after each trading mark
    let spec = SynthSpec::new(
        SynthKind::HourlyJumps {
            sigma_hz: 0.05,
            jump_hz: 0.08,
            decay_s: 90.0,
        },
        20,
        1000,
        20_260_700,
    );
    let trace = synth_trace::<f64>(&spec).unwrap();
    let (kurt_t, kurt_n, std_rel) = window_stats(&trace);
    let jumps_pass = kurt_t > kurt_n && std_rel < 0.10;

    // null hypothesis: plain Gaussian noise, both kurtoses at 3
    let null_spec = SynthSpec::new(SynthKind::Gaussian { sigma_hz: 0.05 }, 20, 1000, 20_260_701);
    let null_trace = synth_trace::<f64>(&null_spec).unwrap();
    let (null_t, null_n, _) = window_stats(&null_trace);
    let null_pass = (null_t - 3.0).abs() < 0.1 && (null_n - 3.0).abs() < 0.1;

    let pass = jumps_pass && null_pass;
    report(
        "criterion 7 (trading-window discrimination)",
        pass,
        &format!(
            "jumps: kurtosis {kurt_t:.3} vs {kurt_n:.3}, std rel diff {:.2}% (<10%); null: {null_t:.3}/{null_n:.3} (3+/-0.1), {:.1} s",
            std_rel * 100.0,
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(
        pass,
        "jumps ({kurt_t}, {kurt_n}, {std_rel}), null ({null_t}, {null_n})"
    );
}

fn window_stats(trace: &FrequencyTrace<f64>) -> (f64, f64, f64) {
    let partition = partition_trading_windows(trace, &[0, 15, 30, 45], 150.0).unwrap();
    let t = summary_stats(&partition.trading_samples).unwrap();
    let n = summary_stats(&partition.nontrading_samples).unwrap();
    (t.kurtosis, n.kurtosis, (t.std - n.std).abs() / n.std)
}

#[test]
fn criterion_8_partition_exactness() {
    let spec = SynthSpec::new(SynthKind::Gaussian { sigma_hz: 0.02 }, 2, 10_000, 8);
    let trace = synth_trace::<f64>(&spec).unwrap();
    let partition = partition_trading_windows(&trace, &[0, 15, 30, 45], 150.0).unwrap();
    let total = trace.len();
    let fraction = partition.trading_fraction();
    let err = (fraction - 1.0 / 3.0).abs();
    let one_sample = 1.0 / total as f64;
    let pass = err <= one_sample
        && partition.trading_samples.len() + partition.nontrading_samples.len() == total;
    report(
        "criterion 8 (trading fraction exactness)",
        pass,
        &format!(
            "fraction {fraction:.8} vs 1/3, deviation {err:.2e} <= one sample {one_sample:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_violation_profile_exact_counting() {
    // day with |deviation| = 0.25 Hz (binary representable, so the strict
    // comparison is exact) during the six 10 s samples of minute 3 of every
    // hour
    const DAY0: i64 = 1_483_228_800_000;
    let dt_ms = 10_000i64;
    let spd = (86_400_000 / dt_ms) as usize;
    let values: Vec<f64> = (0..spd)
        .map(|k| {
            let minute = (k as i64 * dt_ms % 3_600_000) / 60_000;
            if minute == 3 {
                50.25
            } else {
                50.0
            }
        })
        .collect();
    let trace = FrequencyTrace::from_days(dt_ms, 50.0, vec![(DAY0, values)]).unwrap();
    let p = violation_profile(&trace, 0.1).unwrap();
    let exact_spike = p.per_minute[3] == 60.0;
    let rest_zero = p
        .per_minute
        .iter()
        .enumerate()
        .all(|(m, &v)| m == 3 || v == 0.0);
    // strict exceedance: a deviation exactly at the threshold counts as zero
    let boundary = violation_profile(&trace, 0.25).unwrap();
    let boundary_zero = boundary.per_minute.iter().all(|&v| v == 0.0);
    // constant trace: all zeros
    let constant = FrequencyTrace::from_days(dt_ms, 50.0, vec![(DAY0, vec![50.0; spd])]).unwrap();
    let constant_zero = violation_profile(&constant, 0.1)
        .unwrap()
        .per_minute
        .iter()
        .all(|&v| v == 0.0);
    let pass = exact_spike && rest_zero && boundary_zero && constant_zero;
    report(
        "criterion 9 (violation-profile exact counting)",
        pass,
        &format!(
            "minute 3 = {} s/hour (want 60), others zero: {rest_zero}, strict boundary: {boundary_zero}, constant: {constant_zero}",
            p.per_minute[3]
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_real_2017_data_if_supplied() {
    let Some(paths) = std::env::var_os("GRIDFREQ_RTE_2017") else {
        report(
            "criterion 10 (real 2017 recordings)",
            true,
            "SKIPPED - set GRIDFREQ_RTE_2017 to comma-separated CSV paths to enable",
        );
        return;
    };
    let format = match std::env::var("GRIDFREQ_RTE_2017_FORMAT").as_deref() {
        Ok("csv-epoch") => CsvFormat::Epoch,
        _ => CsvFormat::Iso,
    };
    let mut traces = Vec::new();
    let mut reports = Vec::new();
    for path in paths.to_string_lossy().split(',') {
        let (trace, rep) =
            load_trace::<f64>(std::path::Path::new(path.trim()), format, 50.0).unwrap();
        traces.push(trace);
        reports.push(rep);
    }
    let raw = FrequencyTrace::merge(traces).unwrap();
    let report_merged = gridfreq::timeseries::ValidationReport::merge(reports);
    let trace = select_complete_days(&raw, &report_merged).unwrap();

    let full = trace.deviations();
    let stats_full = summary_stats(&full).unwrap();
    let partition = partition_trading_windows(&trace, &[0, 15, 30, 45], 150.0).unwrap();
    let kurt_t = summary_stats(&partition.trading_samples).unwrap().kurtosis;
    let kurt_n = summary_stats(&partition.nontrading_samples)
        .unwrap()
        .kurtosis;
    let stable = fit_stable(&full).unwrap();
    let gaussian = gridfreq::stats::fit_gaussian(&full).unwrap();
    let tail = tail_excess_ratio(&full, 0.1, &gaussian).unwrap();

    let pass = (stats_full.kurtosis - 4.2).abs() < 0.3
        && (kurt_t - 4.8).abs() < 0.3
        && (kurt_n - 3.8).abs() < 0.3
        && (stable.alpha - 1.9).abs() < 0.05
        && tail.ratio > 80.0
        && tail.ratio < 320.0;
    report(
        "criterion 10 (real 2017 recordings)",
        pass,
        &format!(
            "kurtosis {:.2} (4.2+/-0.3), trading {kurt_t:.2} (4.8+/-0.3), non-trading {kurt_n:.2} (3.8+/-0.3), alpha {:.3} (1.9+/-0.05), tail ratio {:.0} (160 within factor 2)",
            stats_full.kurtosis, stable.alpha, tail.ratio
        ),
    );
    assert!(pass);
}

/// Cross-module invariant: the simulated stationary scale tracks the
/// closed-form prediction across the stability range.
#[test]
fn invariant_monte_carlo_scale_agreement_across_alpha() {
    let started = Instant::now();
    let mut all_pass = true;
    let mut details = Vec::new();
    for (i, &alpha) in [1.5f64, 1.9].iter().enumerate() {
        let grid = GridModel::single_node(1.0, 0.0, 1.0).unwrap();
        let noise = NoiseSpec::stable(alpha, vec![1.0]).unwrap();
        let predicted = predict_scale_stable(&grid, &noise).unwrap();
        let params = SimParams::new(5e-3, 10_000_000, 20_267_000 + i as u64).with_stride(10);
        let sim = simulate(&grid, &noise, &params).unwrap();
        let bulk = bulk_velocity(&sim, &grid);
        let fit = fit_stable(&bulk.values).unwrap();
        let rel = (fit.sigma - predicted).abs() / predicted;
        all_pass &= rel < 0.10;
        details.push(format!("alpha {alpha}: scale rel {:.2}%", rel * 100.0));
    }
    report(
        "invariant (Monte Carlo scale agreement, alpha in {1.5, 1.9})",
        all_pass,
        &format!(
            "{} (tol 10%), {:.1} s",
            details.join(", "),
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(all_pass, "{details:?}");
}
