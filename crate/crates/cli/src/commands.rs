use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;

use gridfreq::profiles::{
    daily_mean_profile, hourly_mean_profile, partition_trading_windows, violation_profile,
};
use gridfreq::stats::{autocorrelation, fit_decay_rate, fit_stable, histogram, summary_stats};
use gridfreq::swing::{bulk_velocity, derive_seed, simulate as run_simulation, NoiseKind};
use gridfreq::synth::{synth_trace, SynthKind, SynthSpec};
use gridfreq::theory;
use gridfreq::timeseries::{load_trace, select_complete_days, FrequencyTrace, ValidationReport};

use crate::config::SimConfig;
use crate::report::{
    stats_block, Comparison, InputMeta, PipelineParams, PipelineReport, Populations,
};
use crate::{domain, usage, CliError, Format, SynthKindArg};

/// Load every input file, merge them into one recording, and keep the
/// complete days.
fn load_merged(
    paths: &[PathBuf],
    format: Format,
    f_ref_hz: f64,
) -> Result<(FrequencyTrace<f64>, ValidationReport), CliError> {
    let mut traces = Vec::with_capacity(paths.len());
    let mut reports = Vec::with_capacity(paths.len());
    for path in paths {
        let (trace, report) = load_trace::<f64>(path, format.as_core(), f_ref_hz).map_err(usage)?;
        traces.push(trace);
        reports.push(report);
    }
    let trace = FrequencyTrace::merge(traces).map_err(usage)?;
    let report = ValidationReport::merge(reports);
    Ok((trace, report))
}

fn open_out(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .with_context(|| format!("cannot write {}", path.display()))
        .map(BufWriter::new)
        .map_err(usage)
}

fn write_json_stdout<T: Serialize>(value: &T) -> Result<(), CliError> {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
    Ok(())
}

pub fn validate(paths: &[PathBuf], format: Format, f_ref_hz: f64) -> Result<(), CliError> {
    let (_, report) = load_merged(paths, format, f_ref_hz)?;
    write_json_stdout(&report)?;
    if report.complete_days.is_empty() {
        return Err(domain(anyhow!("no complete days")));
    }
    Ok(())
}

pub fn profile(
    paths: &[PathBuf],
    daily: bool,
    out: Option<&Path>,
    format: Format,
    f_ref_hz: f64,
) -> Result<(), CliError> {
    let (raw, report) = load_merged(paths, format, f_ref_hz)?;
    let trace = select_complete_days(&raw, &report).map_err(domain)?;
    let mut buf = Vec::new();
    if daily {
        let p = daily_mean_profile(&trace).map_err(domain)?;
        p.write_csv(&mut buf).map_err(usage)?;
    } else {
        let p = hourly_mean_profile(&trace).map_err(domain)?;
        p.write_csv(&mut buf).map_err(usage)?;
    }
    emit(out, &buf)
}

pub fn violations(
    paths: &[PathBuf],
    threshold_mhz: f64,
    out: Option<&Path>,
    format: Format,
    f_ref_hz: f64,
) -> Result<(), CliError> {
    let (raw, report) = load_merged(paths, format, f_ref_hz)?;
    let trace = select_complete_days(&raw, &report).map_err(domain)?;
    let p = violation_profile(&trace, threshold_mhz / 1000.0).map_err(domain)?;
    let mut buf = Vec::new();
    p.write_csv(&mut buf).map_err(usage)?;
    emit(out, &buf)
}

fn emit(out: Option<&Path>, buf: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut w = open_out(path)?;
            w.write_all(buf).map_err(usage)?;
            w.flush().map_err(usage)
        }
        None => {
            std::io::stdout().write_all(buf).map_err(usage)?;
            Ok(())
        }
    }
}

pub struct PipelineArgs {
    pub paths: Vec<PathBuf>,
    pub marks: Vec<u32>,
    pub half_width_s: f64,
    pub threshold_mhz: f64,
    pub out_dir: PathBuf,
    pub format: Format,
    pub f_ref_hz: f64,
    pub hist_bins: usize,
    pub acf_cutoff: f64,
}

pub fn pipeline(args: &PipelineArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))
        .map_err(usage)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = run_pipeline(args, &mut written);
    if result.is_err() {
        // no partial outputs on failure
        for path in written {
            std::fs::remove_file(path).ok();
        }
    }
    result
}

fn run_pipeline(args: &PipelineArgs, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let threshold_hz = args.threshold_mhz / 1000.0;
    let (raw, report) = load_merged(&args.paths, args.format, args.f_ref_hz)?;
    let trace = select_complete_days(&raw, &report).map_err(domain)?;

    let partition =
        partition_trading_windows(&trace, &args.marks, args.half_width_s).map_err(domain)?;
    let full: Vec<f64> = trace.deviations();
    let trading: Vec<f64> = partition
        .trading_samples
        .iter()
        .map(|v| v - args.f_ref_hz)
        .collect();
    let nontrading: Vec<f64> = partition
        .nontrading_samples
        .iter()
        .map(|v| v - args.f_ref_hz)
        .collect();

    // decay rate from the full series only; the window populations have no
    // contiguous time axis
    let dt_s = trace.dt_s();
    let max_lag_s = (600.0f64).min(full.len() as f64 * dt_s / 10.0);
    let acf = autocorrelation(&full, dt_s, max_lag_s).ok().map(|mut acf| {
        let _ = fit_decay_rate(&mut acf, args.acf_cutoff);
        acf
    });

    let full_block = stats_block(&full, threshold_hz, acf.as_ref()).map_err(domain)?;
    let trading_block = stats_block(&trading, threshold_hz, None).map_err(domain)?;
    let nontrading_block = stats_block(&nontrading, threshold_hz, None).map_err(domain)?;

    let violations = violation_profile(&trace, threshold_hz).map_err(domain)?;
    let hourly = hourly_mean_profile(&trace).map_err(domain)?;

    let comparison = Comparison {
        kurtosis_delta: trading_block.kurtosis - nontrading_block.kurtosis,
        std_rel_diff: (trading_block.std - nontrading_block.std).abs() / nontrading_block.std,
    };

    // shared symmetric histogram range around zero deviation
    let span = 4.0 * full_block.std;
    let range = (-span, span);
    for (name, samples) in [
        ("hist_full.csv", &full),
        ("hist_trading.csv", &trading),
        ("hist_nontrading.csv", &nontrading),
    ] {
        let h = histogram(samples, args.hist_bins, range).map_err(domain)?;
        let path = args.out_dir.join(name);
        let mut w = open_out(&path)?;
        written.push(path);
        h.write_csv(&mut w).map_err(usage)?;
        w.flush().map_err(usage)?;
    }
    {
        let path = args.out_dir.join("profile_hourly.csv");
        let mut w = open_out(&path)?;
        written.push(path);
        hourly.write_csv(&mut w).map_err(usage)?;
        w.flush().map_err(usage)?;
    }
    {
        let path = args.out_dir.join("violations.csv");
        let mut w = open_out(&path)?;
        written.push(path);
        violations.write_csv(&mut w).map_err(usage)?;
        w.flush().map_err(usage)?;
    }

    let report = PipelineReport {
        inputs: InputMeta {
            files: args.paths.iter().map(|p| p.display().to_string()).collect(),
            f_ref_hz: args.f_ref_hz,
            dt_s,
            n_days_total: report.n_days_total,
            complete_days: report.complete_days,
        },
        params: PipelineParams {
            marks: partition.marks.clone(),
            half_width_s: args.half_width_s,
            threshold_hz,
            hist_bins: args.hist_bins,
            acf_cutoff: args.acf_cutoff,
        },
        populations: Populations {
            full: full_block,
            trading: trading_block,
            nontrading: nontrading_block,
        },
        violations,
        comparison,
    };
    let path = args.out_dir.join("report.json");
    let mut w = open_out(&path)?;
    written.push(path);
    serde_json::to_writer_pretty(&mut w, &report)
        .context("cannot serialize report")
        .map_err(usage)?;
    w.flush().map_err(usage)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SimulateOutput {
    n_nodes: usize,
    seed: u64,
    dt_s: f64,
    sample_dt_s: f64,
    n_recorded: usize,
    bulk: BulkStats,
    per_node_std: Vec<f64>,
    theory: Option<theory::TheoryPrediction<f64>>,
}

#[derive(Debug, Serialize)]
struct BulkStats {
    mean: f64,
    std: f64,
    kurtosis: Option<f64>,
    stable: Option<crate::report::StableBlock>,
}

pub fn simulate(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let config = SimConfig::load(config_path)?;
    let (grid, noise, params) = config.build()?;
    let sim = run_simulation(&grid, &noise, &params).map_err(domain)?;
    let bulk = bulk_velocity(&sim, &grid);

    if let Some(path) = out {
        let mut w = open_out(path)?;
        write!(w, "t_s").map_err(usage)?;
        for i in 0..sim.n_nodes() {
            write!(w, ",theta_{i}").map_err(usage)?;
        }
        for i in 0..sim.n_nodes() {
            write!(w, ",omega_{i}").map_err(usage)?;
        }
        writeln!(w).map_err(usage)?;
        let sample_dt = sim.sample_dt_s();
        for k in 0..sim.n_recorded() {
            write!(w, "{}", (k + 1) as f64 * sample_dt).map_err(usage)?;
            for i in 0..sim.n_nodes() {
                write!(w, ",{}", sim.theta[i][k]).map_err(usage)?;
            }
            for i in 0..sim.n_nodes() {
                write!(w, ",{}", sim.omega[i][k]).map_err(usage)?;
            }
            writeln!(w).map_err(usage)?;
        }
        w.flush().map_err(usage)?;
    }

    let summary = summary_stats(&bulk.values);
    let (mean, std, kurtosis) = match &summary {
        Ok(s) => (s.mean, s.std, Some(s.kurtosis)),
        Err(_) => {
            let n = bulk.values.len() as f64;
            let mean = bulk.values.iter().sum::<f64>() / n;
            (mean, 0.0, None)
        }
    };
    let stable = match noise.kind {
        NoiseKind::Stable { .. } if bulk.values.len() >= 1000 => {
            fit_stable(&bulk.values).ok().map(Into::into)
        }
        _ => None,
    };
    let per_node_std: Vec<f64> = sim
        .omega
        .iter()
        .map(|w| summary_stats(w).map(|s| s.std).unwrap_or(0.0))
        .collect();
    let output = SimulateOutput {
        n_nodes: sim.n_nodes(),
        seed: sim.seed,
        dt_s: sim.dt_s,
        sample_dt_s: sim.sample_dt_s(),
        n_recorded: sim.n_recorded(),
        bulk: BulkStats {
            mean,
            std,
            kurtosis,
            stable,
        },
        per_node_std,
        theory: theory::predict(&grid, &noise).ok(),
    };
    write_json_stdout(&output)
}

#[derive(Debug, Serialize)]
struct TheoryComparison {
    noise_kind: String,
    alpha: Option<f64>,
    gamma: f64,
    total_inertia: f64,
    trials: u32,
    n_samples: usize,
    prediction: f64,
    measured: f64,
    rel_error: f64,
    tolerance: f64,
    pass: bool,
    fitted_alpha: Option<f64>,
}

const GAUSSIAN_TOLERANCE: f64 = 0.02;
const STABLE_TOLERANCE: f64 = 0.10;

pub fn validate_theory(
    config_path: &Path,
    trials: u32,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    if trials == 0 {
        return Err(usage(anyhow!("trials must be >= 1")));
    }
    let config = SimConfig::load(config_path)?;
    let (grid, noise, mut params) = config.build()?;
    let base_seed = seed_override.unwrap_or(params.seed);

    let mut samples: Vec<f64> = Vec::new();
    for trial in 0..trials {
        params.seed = derive_seed(base_seed, trial as u64);
        let sim = run_simulation(&grid, &noise, &params).map_err(domain)?;
        samples.extend(bulk_velocity(&sim, &grid).values);
    }

    let (prediction, measured, tolerance, alpha, fitted_alpha) = match noise.kind {
        NoiseKind::Gaussian => {
            let prediction = theory::predict_std_gaussian(&grid, &noise).map_err(domain)?;
            let measured = summary_stats(&samples).map_err(domain)?.std;
            (prediction, measured, GAUSSIAN_TOLERANCE, None, None)
        }
        NoiseKind::Stable { alpha } => {
            let prediction = theory::predict_scale_stable(&grid, &noise).map_err(domain)?;
            let fit = fit_stable(&samples).map_err(domain)?;
            (
                prediction,
                fit.sigma,
                STABLE_TOLERANCE,
                Some(alpha),
                Some(fit.alpha),
            )
        }
    };
    let rel_error = (measured - prediction).abs() / prediction;
    let pass = rel_error <= tolerance;
    let gamma = grid.homogeneous_gamma().expect("checked by prediction");
    write_json_stdout(&TheoryComparison {
        noise_kind: match noise.kind {
            NoiseKind::Gaussian => "gaussian".into(),
            NoiseKind::Stable { .. } => "stable".into(),
        },
        alpha,
        gamma,
        total_inertia: grid.total_inertia(),
        trials,
        n_samples: samples.len(),
        prediction,
        measured,
        rel_error,
        tolerance,
        pass,
        fitted_alpha,
    })?;
    if !pass {
        return Err(domain(anyhow!(
            "measured {measured} deviates from prediction {prediction} by {:.2}% (tolerance {:.0}%)",
            rel_error * 100.0,
            tolerance * 100.0
        )));
    }
    Ok(())
}

pub struct SynthArgs {
    pub kind: SynthKindArg,
    pub days: u32,
    pub dt: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub f_ref_hz: f64,
    pub sigma: f64,
    pub jump: f64,
    pub decay_s: f64,
    pub alpha: f64,
    pub scale: f64,
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let kind = match args.kind {
        SynthKindArg::Gaussian => SynthKind::Gaussian {
            sigma_hz: args.sigma,
        },
        SynthKindArg::HourlyJumps => SynthKind::HourlyJumps {
            sigma_hz: args.sigma,
            jump_hz: args.jump,
            decay_s: args.decay_s,
        },
        SynthKindArg::Stable => SynthKind::Stable {
            alpha: args.alpha,
            scale_hz: args.scale,
        },
    };
    let dt_ms = (args.dt * 1000.0).round() as i64;
    let spec = SynthSpec {
        kind,
        days: args.days,
        dt_ms,
        seed: args.seed,
        f_ref_hz: args.f_ref_hz,
        start_ms: gridfreq::synth::DEFAULT_START_MS,
    };
    let trace = synth_trace::<f64>(&spec).map_err(usage)?;
    let mut w = open_out(&args.out)?;
    trace
        .write_csv(&mut w, args.format.as_core())
        .map_err(usage)?;
    w.flush().map_err(usage)
}
