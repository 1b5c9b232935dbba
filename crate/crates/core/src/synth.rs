//! Deterministic synthetic frequency recordings for tests and pipeline
//! dry-runs: plain Gaussian noise, Gaussian noise plus decaying jumps at the
//! quarter-hour marks, and heavy-tailed stable noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Real;
use crate::swing::{sample_stable, standard_normal};
use crate::timeseries::{FrequencyTrace, TraceError, DAY_MS, HOUR_MS};

/// 2017-01-01T00:00:00Z, the default first day of synthetic traces.
pub const DEFAULT_START_MS: i64 = 1_483_228_800_000;

const MARK_PERIOD_MS: i64 = 15 * 60_000;
/// Relative jump amplitude per quarter-hour mark (0, 15, 30, 45 min):
/// signs alternate so the populations stay balanced, the full-hour jump is
/// the strongest and the half-hour one weaker.
const MARK_AMPLITUDES: [f64; 4] = [1.0, -1.0, 0.75, -0.75];

#[derive(Debug, Clone, Copy)]
pub enum SynthKind {
    /// White Gaussian deviations with standard deviation `sigma_hz`.
    Gaussian { sigma_hz: f64 },
    /// Gaussian background plus a deterministic exponential pulse of
    /// amplitude `jump_hz` at every quarter-hour mark, decayed to ~5% after
    /// `decay_s` seconds.
    HourlyJumps {
        sigma_hz: f64,
        jump_hz: f64,
        decay_s: f64,
    },
    /// Independent symmetric stable deviations.
    Stable { alpha: f64, scale_hz: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub days: u32,
    pub dt_ms: i64,
    pub seed: u64,
    pub f_ref_hz: f64,
    pub start_ms: i64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("days must be >= 1")]
    NoDays,
    #[error("sample interval {dt_ms} ms does not divide a day")]
    BadDt { dt_ms: i64 },
    #[error("start must fall on a UTC midnight")]
    MisalignedStart,
    #[error("bad parameter: {0}")]
    BadParam(&'static str),
}

impl SynthSpec {
    pub fn new(kind: SynthKind, days: u32, dt_ms: i64, seed: u64) -> Self {
        Self {
            kind,
            days,
            dt_ms,
            seed,
            f_ref_hz: crate::timeseries::DEFAULT_F_REF_HZ,
            start_ms: DEFAULT_START_MS,
        }
    }
}

/// Generate a complete-day trace; identical inputs give identical samples.
pub fn synth_trace<F: Real>(spec: &SynthSpec) -> Result<FrequencyTrace<F>, SynthError> {
    if spec.days == 0 {
        return Err(SynthError::NoDays);
    }
    if spec.dt_ms <= 0 || DAY_MS % spec.dt_ms != 0 {
        return Err(SynthError::BadDt { dt_ms: spec.dt_ms });
    }
    if spec.start_ms % DAY_MS != 0 {
        return Err(SynthError::MisalignedStart);
    }
    match spec.kind {
        SynthKind::Gaussian { sigma_hz } => {
            if !(sigma_hz >= 0.0 && sigma_hz.is_finite()) {
                return Err(SynthError::BadParam("sigma must be >= 0"));
            }
        }
        SynthKind::HourlyJumps {
            sigma_hz,
            jump_hz,
            decay_s,
        } => {
            if !(sigma_hz >= 0.0 && jump_hz.is_finite() && decay_s > 0.0) {
                return Err(SynthError::BadParam(
                    "need sigma >= 0, finite jump and decay > 0",
                ));
            }
        }
        SynthKind::Stable { alpha, scale_hz } => {
            if !(alpha > 0.0 && alpha <= 2.0 && scale_hz > 0.0) {
                return Err(SynthError::BadParam("need alpha in (0, 2] and scale > 0"));
            }
        }
    }

    let spd = (DAY_MS / spec.dt_ms) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut days = Vec::with_capacity(spec.days as usize);
    for d in 0..spec.days {
        let start = spec.start_ms + d as i64 * DAY_MS;
        let mut values = Vec::with_capacity(spd);
        for k in 0..spd {
            let deviation = match spec.kind {
                SynthKind::Gaussian { sigma_hz } => sigma_hz * standard_normal::<f64, _>(&mut rng),
                SynthKind::HourlyJumps {
                    sigma_hz,
                    jump_hz,
                    decay_s,
                } => {
                    let noise = sigma_hz * standard_normal::<f64, _>(&mut rng);
                    noise + jump_pulse(k as i64 * spec.dt_ms, jump_hz, decay_s)
                }
                SynthKind::Stable { alpha, scale_hz } => {
                    sample_stable(alpha, 0.0, scale_hz, &mut rng)
                }
            };
            // stay inside the plausibility band so the trace reloads as
            // complete days
            let v = (spec.f_ref_hz + deviation).clamp(
                crate::timeseries::PLAUSIBLE_MIN_HZ,
                crate::timeseries::PLAUSIBLE_MAX_HZ,
            );
            values.push(F::from_f64_lossy(v));
        }
        days.push((start, values));
    }
    FrequencyTrace::from_days(spec.dt_ms, F::from_f64_lossy(spec.f_ref_hz), days).map_err(
        |e: TraceError| match e {
            TraceError::BadDt { dt_ms } => SynthError::BadDt { dt_ms },
            _ => SynthError::MisalignedStart,
        },
    )
}

/// Deterministic pulse: onset exactly at the most recent quarter-hour mark,
/// amplitude +/- jump_hz by mark, exponential decay with time constant
/// decay_s / 3.
fn jump_pulse(tod_ms: i64, jump_hz: f64, decay_s: f64) -> f64 {
    let toh_ms = tod_ms % HOUR_MS;
    let mark_idx = (toh_ms / MARK_PERIOD_MS) as usize;
    let since_s = (toh_ms - mark_idx as i64 * MARK_PERIOD_MS) as f64 / 1000.0;
    let tau = decay_s / 3.0;
    MARK_AMPLITUDES[mark_idx] * jump_hz * (-since_s / tau).exp()
}
