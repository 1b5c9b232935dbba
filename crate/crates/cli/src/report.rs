//! JSON report blocks shared by the pipeline and simulation commands.
//! Statistics are computed on deviations from the reference frequency.

use serde::Serialize;

use gridfreq::stats::{
    self, fit_gaussian, fit_stable, summary_stats, tail_excess_ratio, AutocorrEstimate, StableFit,
    STABLE_FIT_MIN_SAMPLES,
};

/// Per-population statistics: `{n, mean, std, kurtosis, gaussian, stable,
/// tail_ratio, gamma_hat}`. `stable` is null below the estimator's sample
/// floor; `tail_ratio` is null when the Gaussian tail underflows;
/// `gamma_hat` is null for populations without a contiguous time axis.
#[derive(Debug, Serialize)]
pub struct StatsBlock {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub kurtosis: f64,
    pub gaussian: GaussianBlock,
    pub stable: Option<StableBlock>,
    pub tail_ratio: Option<f64>,
    pub gamma_hat: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct GaussianBlock {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Serialize)]
pub struct StableBlock {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub delta: f64,
    pub converged: bool,
}

impl From<StableFit<f64>> for StableBlock {
    fn from(f: StableFit<f64>) -> Self {
        StableBlock {
            alpha: f.alpha,
            beta: f.beta,
            sigma: f.sigma,
            delta: f.delta,
            converged: f.converged,
        }
    }
}

/// Build the stats block for one population of deviation samples.
/// `acf` supplies the decay-rate estimate when the population is a
/// contiguous series.
pub fn stats_block(
    samples: &[f64],
    threshold_hz: f64,
    acf: Option<&AutocorrEstimate<f64>>,
) -> Result<StatsBlock, stats::StatsError> {
    let summary = summary_stats(samples)?;
    let gaussian = fit_gaussian(samples)?;
    let tail = tail_excess_ratio(samples, threshold_hz, &gaussian)?;
    let stable = if samples.len() >= STABLE_FIT_MIN_SAMPLES {
        fit_stable(samples).ok().map(StableBlock::from)
    } else {
        None
    };
    Ok(StatsBlock {
        n: summary.n,
        mean: summary.mean,
        std: summary.std,
        kurtosis: summary.kurtosis,
        gaussian: GaussianBlock {
            mu: gaussian.mu,
            sigma: gaussian.sigma,
        },
        stable,
        tail_ratio: tail.ratio.is_finite().then_some(tail.ratio),
        gamma_hat: acf.and_then(|a| a.gamma_hat),
    })
}

#[derive(Debug, Serialize)]
pub struct PipelineReport {
    pub inputs: InputMeta,
    pub params: PipelineParams,
    pub populations: Populations,
    pub violations: gridfreq::ViolationProfile,
    pub comparison: Comparison,
}

#[derive(Debug, Serialize)]
pub struct InputMeta {
    pub files: Vec<String>,
    pub f_ref_hz: f64,
    pub dt_s: f64,
    pub n_days_total: usize,
    pub complete_days: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct PipelineParams {
    pub marks: Vec<u32>,
    pub half_width_s: f64,
    pub threshold_hz: f64,
    pub hist_bins: usize,
    pub acf_cutoff: f64,
}

#[derive(Debug, Serialize)]
pub struct Populations {
    pub full: StatsBlock,
    pub trading: StatsBlock,
    pub nontrading: StatsBlock,
}

/// Trading-vs-non-trading contrast: kurtosis difference and relative width
/// difference |std_t - std_n| / std_n.
#[derive(Debug, Serialize)]
pub struct Comparison {
    pub kurtosis_delta: f64,
    pub std_rel_diff: f64,
}
