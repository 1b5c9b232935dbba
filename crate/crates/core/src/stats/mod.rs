//! Descriptive statistics, distribution fits and autocorrelation tooling.
//!
//! Conventions used throughout:
//! - standard deviation is the sample estimate (denominator n-1),
//! - kurtosis is the plain Pearson moment ratio m4/m2^2 with denominator-n
//!   central moments, so a Gaussian scores 3,
//! - the Gaussian fit is the maximum-likelihood one (denominator n).

mod erf;
mod stable;

pub use erf::{erfc, normal_two_sided_tail, normal_upper_tail};
pub use stable::{fit_stable, quantile_initial_estimate, StableFit, STABLE_FIT_MIN_SAMPLES};

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },
    #[error("kurtosis undefined for constant input")]
    ConstantInput,
    #[error("threshold must be positive")]
    NonPositiveThreshold,
    #[error("max_lag {max_lag_s} s exceeds one tenth of the series duration")]
    LagTooLong { max_lag_s: f64 },
    #[error("fewer than 3 usable lags above the autocorrelation cutoff")]
    TooFewLags,
    #[error("histogram needs at least 2 bins")]
    TooFewBins,
    #[error("histogram range is degenerate or not finite")]
    BadRange,
    #[error("samples must be finite")]
    NonFiniteSample,
}

/// Moments of a sample: mean, sample std (n-1) and Pearson kurtosis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SummaryStats<F> {
    pub n: usize,
    pub mean: F,
    pub std: F,
    pub kurtosis: F,
}

/// Maximum-likelihood Gaussian fit (sigma uses denominator n).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GaussianFit<F> {
    pub mu: F,
    pub sigma: F,
}

/// Empirical-vs-Gaussian tail comparison at a fixed deviation threshold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailExcess<F> {
    /// Empirical tail fraction divided by the fitted Gaussian tail probability.
    /// Infinite when the Gaussian probability underflows to zero.
    pub ratio: F,
    pub empirical_fraction: F,
    pub gaussian_probability: F,
    pub n_exceedances: usize,
}

/// Normalized sample autocorrelation at lags 0..=L plus an optional
/// exponential-decay fit.
#[derive(Debug, Clone, Serialize)]
pub struct AutocorrEstimate<F> {
    pub dt_s: F,
    pub c: Vec<F>,
    pub gamma_hat: Option<F>,
    /// Lag index range `[lo, hi)` used by the decay fit.
    pub fit_window: Option<(usize, usize)>,
}

/// Uniform-width histogram with explicit out-of-range counters.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram<F> {
    pub lo: F,
    pub hi: F,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

pub fn summary_stats<F: Real>(samples: &[F]) -> Result<SummaryStats<F>, StatsError> {
    let n = samples.len();
    if n < 4 {
        return Err(StatsError::TooFewSamples { n, min: 4 });
    }
    let nf = F::from(n).unwrap();
    let mean = samples.iter().copied().sum::<F>() / nf;
    let mut m2 = F::zero();
    let mut m4 = F::zero();
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    let sum_sq = m2;
    m2 /= nf;
    m4 /= nf;
    if m2 <= F::zero() {
        return Err(StatsError::ConstantInput);
    }
    Ok(SummaryStats {
        n,
        mean,
        std: (sum_sq / (nf - F::one())).sqrt(),
        kurtosis: m4 / (m2 * m2),
    })
}

pub fn fit_gaussian<F: Real>(samples: &[F]) -> Result<GaussianFit<F>, StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { n, min: 2 });
    }
    let nf = F::from(n).unwrap();
    let mu = samples.iter().copied().sum::<F>() / nf;
    let ss = samples.iter().map(|&x| (x - mu) * (x - mu)).sum::<F>();
    if ss <= F::zero() {
        return Err(StatsError::ConstantInput);
    }
    Ok(GaussianFit {
        mu,
        sigma: (ss / nf).sqrt(),
    })
}

/// Fraction of samples with |x - mu| > threshold relative to the same event's
/// probability under the fitted Gaussian.
pub fn tail_excess_ratio<F: Real>(
    samples: &[F],
    threshold: F,
    fit: &GaussianFit<F>,
) -> Result<TailExcess<F>, StatsError> {
    if threshold <= F::zero() {
        return Err(StatsError::NonPositiveThreshold);
    }
    if samples.is_empty() {
        return Err(StatsError::TooFewSamples { n: 0, min: 1 });
    }
    let n_exceed = samples
        .iter()
        .filter(|&&x| (x - fit.mu).abs() > threshold)
        .count();
    let empirical = F::from(n_exceed).unwrap() / F::from(samples.len()).unwrap();
    let z = (threshold / fit.sigma).to_f64().unwrap();
    let gauss = F::from_f64_lossy(normal_two_sided_tail(z));
    let ratio = if n_exceed == 0 {
        F::zero()
    } else if gauss <= F::zero() {
        F::infinity()
    } else {
        empirical / gauss
    };
    Ok(TailExcess {
        ratio,
        empirical_fraction: empirical,
        gaussian_probability: gauss,
        n_exceedances: n_exceed,
    })
}

/// Biased (1/n) normalized autocorrelation of the mean-removed series.
pub fn autocorrelation<F: Real>(
    samples: &[F],
    dt_s: F,
    max_lag_s: F,
) -> Result<AutocorrEstimate<F>, StatsError> {
    let n = samples.len();
    if n < 4 {
        return Err(StatsError::TooFewSamples { n, min: 4 });
    }
    let duration = F::from(n).unwrap() * dt_s;
    if max_lag_s > duration / F::from(10.0).unwrap() {
        return Err(StatsError::LagTooLong {
            max_lag_s: max_lag_s.to_f64().unwrap(),
        });
    }
    let max_lag = (max_lag_s / dt_s).to_f64().unwrap().floor() as usize;
    let mean = samples.iter().copied().sum::<F>() / F::from(n).unwrap();
    let dev: Vec<F> = samples.iter().map(|&x| x - mean).collect();
    let var0 = dev.iter().map(|&d| d * d).sum::<F>();
    if var0 <= F::zero() {
        return Err(StatsError::ConstantInput);
    }
    let mut c = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let mut acc = F::zero();
        for i in 0..n - k {
            acc += dev[i] * dev[i + k];
        }
        c.push(acc / var0);
    }
    Ok(AutocorrEstimate {
        dt_s,
        c,
        gamma_hat: None,
        fit_window: None,
    })
}

/// Default autocorrelation cutoff below which lags are excluded from the
/// exponential-decay fit.
pub const ACF_FIT_CUTOFF: f64 = 0.1;

/// Least-squares fit of ln c(dt k) over the initial run of lags with
/// c > cutoff; returns the decay rate (1/s) and records the window used.
pub fn fit_decay_rate<F: Real>(acf: &mut AutocorrEstimate<F>, cutoff: F) -> Result<F, StatsError> {
    let mut hi = 0;
    while hi < acf.c.len() && acf.c[hi] > cutoff {
        hi += 1;
    }
    if hi < 3 {
        return Err(StatsError::TooFewLags);
    }
    // simple linear regression of ln c on lag time, slope = -gamma
    let m = F::from(hi).unwrap();
    let mut sx = F::zero();
    let mut sy = F::zero();
    let mut sxx = F::zero();
    let mut sxy = F::zero();
    for k in 0..hi {
        let x = F::from(k).unwrap() * acf.dt_s;
        let y = acf.c[k].ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = m * sxx - sx * sx;
    if denom <= F::zero() {
        return Err(StatsError::TooFewLags);
    }
    let slope = (m * sxy - sx * sy) / denom;
    let gamma = -slope;
    if gamma.is_nan() || gamma <= F::zero() {
        return Err(StatsError::TooFewLags);
    }
    acf.gamma_hat = Some(gamma);
    acf.fit_window = Some((0, hi));
    Ok(gamma)
}

/// Bin samples into `n_bins` uniform bins over `[lo, hi]`; bins are
/// right-open except the last, which includes `hi`. Out-of-range samples go
/// to the under/overflow counters.
pub fn histogram<F: Real>(
    samples: &[F],
    n_bins: usize,
    range: (F, F),
) -> Result<Histogram<F>, StatsError> {
    let (lo, hi) = range;
    if n_bins < 2 {
        return Err(StatsError::TooFewBins);
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(StatsError::BadRange);
    }
    let mut counts = vec![0u64; n_bins];
    let mut underflow = 0u64;
    let mut overflow = 0u64;
    let width = (hi - lo) / F::from(n_bins).unwrap();
    for &x in samples {
        if !x.is_finite() {
            return Err(StatsError::NonFiniteSample);
        }
        if x < lo {
            underflow += 1;
        } else if x > hi {
            overflow += 1;
        } else {
            let mut idx = ((x - lo) / width).to_f64().unwrap().floor() as usize;
            if idx >= n_bins {
                idx = n_bins - 1; // x == hi lands in the closed last bin
            }
            counts[idx] += 1;
        }
    }
    Ok(Histogram {
        lo,
        hi,
        counts,
        underflow,
        overflow,
    })
}

impl<F: Real> Histogram<F> {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> F {
        (self.hi - self.lo) / F::from(self.counts.len()).unwrap()
    }

    /// Left edge of bin i.
    pub fn bin_left(&self, i: usize) -> F {
        self.lo + F::from(i).unwrap() * self.bin_width()
    }

    /// Total number of samples seen, including out-of-range ones.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// Probability densities normalized by the total sample count.
    pub fn densities(&self) -> Vec<F> {
        let norm = F::from(self.total().max(1)).unwrap() * self.bin_width();
        self.counts
            .iter()
            .map(|&c| F::from(c).unwrap() / norm)
            .collect()
    }

    /// CSV rows `bin_left,bin_right,count,density` with a header line.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_left,bin_right,count,density")?;
        let dens = self.densities();
        for (i, density) in dens.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                self.bin_left(i),
                self.bin_left(i + 1),
                self.counts[i],
                density
            )?;
        }
        Ok(())
    }
}
