//! Time-of-day aggregation of frequency recordings: daily and hourly mean
//! profiles, minute-resolved threshold violations, and the trading-window
//! split used to isolate market effects.
//!
//! All operations require a trace made of complete days (see
//! [`crate::timeseries::select_complete_days`]).

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;
use crate::timeseries::{FrequencyTrace, HOUR_MS};

const MINUTE_MS: i64 = 60_000;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("empty trace")]
    EmptyTrace,
    #[error("trace contains incomplete days; select complete days first")]
    NotAnalysisReady,
    #[error("sample interval {dt_ms} ms does not divide an hour")]
    DtNotHourDivisor { dt_ms: i64 },
    #[error("sample interval {dt_ms} ms does not divide a minute")]
    DtNotMinuteDivisor { dt_ms: i64 },
    #[error("threshold must be positive")]
    NonPositiveThreshold,
    #[error("marks must be non-empty")]
    EmptyMarks,
    #[error("mark {mark} is not a minute of the hour (0..60)")]
    BadMark { mark: u32 },
    #[error("duplicate mark {mark}")]
    DuplicateMark { mark: u32 },
    #[error("half-width {half_width_s} s makes windows overlap (smallest mark gap {gap_s} s)")]
    OverlappingWindows { half_width_s: f64, gap_s: f64 },
    #[error("half-width must be non-negative")]
    NegativeHalfWidth,
}

fn check_ready<F: Real>(trace: &FrequencyTrace<F>) -> Result<(), ProfileError> {
    if trace.n_days() == 0 {
        return Err(ProfileError::EmptyTrace);
    }
    if !trace.is_analysis_ready() {
        return Err(ProfileError::NotAnalysisReady);
    }
    Ok(())
}

/// Mean frequency per time-of-day bin, averaged over days.
#[derive(Debug, Clone, Serialize)]
pub struct DailyProfile<F> {
    pub dt_s: f64,
    pub means: Vec<F>,
    pub counts: Vec<u32>,
}

/// Mean frequency per offset-into-the-hour bin, averaged over hour blocks.
#[derive(Debug, Clone, Serialize)]
pub struct HourlyProfile<F> {
    pub dt_s: f64,
    pub means: Vec<F>,
    pub counts: Vec<u32>,
}

/// Mean exceedance-seconds per minute of the hour: how long, within an
/// average hour, |f - f_ref| exceeded the threshold during each minute.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationProfile<F> {
    pub threshold_hz: F,
    pub per_minute: Vec<F>,
    pub n_hours: u32,
}

/// Samples split into the trading-window and remaining populations.
#[derive(Debug, Clone)]
pub struct WindowPartition<F> {
    pub marks: Vec<u32>,
    pub half_width_s: f64,
    pub trading_samples: Vec<F>,
    pub nontrading_samples: Vec<F>,
}

impl<F> WindowPartition<F> {
    pub fn trading_fraction(&self) -> f64 {
        let total = self.trading_samples.len() + self.nontrading_samples.len();
        self.trading_samples.len() as f64 / total as f64
    }
}

pub fn daily_mean_profile<F: Real>(
    trace: &FrequencyTrace<F>,
) -> Result<DailyProfile<F>, ProfileError> {
    check_ready(trace)?;
    let spd = trace.samples_per_day();
    let mut sums = vec![F::zero(); spd];
    let mut counts = vec![0u32; spd];
    for day in trace.days() {
        for (slot, &v) in day.slots().iter().zip(day.values()) {
            sums[*slot as usize] += v;
            counts[*slot as usize] += 1;
        }
    }
    let means = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| s / F::from(c).unwrap())
        .collect();
    Ok(DailyProfile {
        dt_s: trace.dt_s(),
        means,
        counts,
    })
}

pub fn hourly_mean_profile<F: Real>(
    trace: &FrequencyTrace<F>,
) -> Result<HourlyProfile<F>, ProfileError> {
    check_ready(trace)?;
    let dt_ms = trace.dt_ms();
    if HOUR_MS % dt_ms != 0 {
        return Err(ProfileError::DtNotHourDivisor { dt_ms });
    }
    let sph = (HOUR_MS / dt_ms) as usize;
    let mut sums = vec![F::zero(); sph];
    let mut counts = vec![0u32; sph];
    for day in trace.days() {
        for (slot, &v) in day.slots().iter().zip(day.values()) {
            let bin = *slot as usize % sph;
            sums[bin] += v;
            counts[bin] += 1;
        }
    }
    let means = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| s / F::from(c).unwrap())
        .collect();
    Ok(HourlyProfile {
        dt_s: trace.dt_s(),
        means,
        counts,
    })
}

/// Count threshold exceedances (strict `>`) minute-by-minute within the
/// hour, normalized to exceedance-seconds per hour block.
pub fn violation_profile<F: Real>(
    trace: &FrequencyTrace<F>,
    threshold_hz: F,
) -> Result<ViolationProfile<F>, ProfileError> {
    check_ready(trace)?;
    if threshold_hz.is_nan() || threshold_hz <= F::zero() {
        return Err(ProfileError::NonPositiveThreshold);
    }
    // the per-minute bound (at most 60 exceedance-seconds per hour) relies
    // on whole sample intervals fitting into each minute
    let dt_ms = trace.dt_ms();
    if dt_ms > MINUTE_MS || MINUTE_MS % dt_ms != 0 {
        return Err(ProfileError::DtNotMinuteDivisor { dt_ms });
    }
    let f_ref = trace.f_ref();
    let mut counts = [0u64; 60];
    for day in trace.days() {
        for (slot, &v) in day.slots().iter().zip(day.values()) {
            if (v - f_ref).abs() > threshold_hz {
                let tod_ms = *slot as i64 * dt_ms;
                let minute = ((tod_ms % HOUR_MS) / MINUTE_MS) as usize;
                counts[minute] += 1;
            }
        }
    }
    let n_hours = trace.n_days() as u32 * 24;
    let dt_s = F::from_f64_lossy(trace.dt_s());
    let per_minute = counts
        .iter()
        .map(|&c| F::from(c).unwrap() * dt_s / F::from(n_hours).unwrap())
        .collect();
    Ok(ViolationProfile {
        threshold_hz,
        per_minute,
        n_hours,
    })
}

/// Classify every sample as trading or non-trading. A sample at
/// time-of-hour t is trading iff t lies in [mark - hw, mark + hw) for some
/// mark, with wrap-around at the hour boundary.
pub fn partition_trading_windows<F: Real>(
    trace: &FrequencyTrace<F>,
    marks: &[u32],
    half_width_s: f64,
) -> Result<WindowPartition<F>, ProfileError> {
    check_ready(trace)?;
    if marks.is_empty() {
        return Err(ProfileError::EmptyMarks);
    }
    if half_width_s < 0.0 {
        return Err(ProfileError::NegativeHalfWidth);
    }
    let mut sorted = marks.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(ProfileError::DuplicateMark { mark: w[0] });
        }
    }
    for &m in &sorted {
        if m >= 60 {
            return Err(ProfileError::BadMark { mark: m });
        }
    }
    // smallest cyclic gap between consecutive marks
    let gap_ms = {
        let mut min_gap = i64::MAX;
        for i in 0..sorted.len() {
            let cur = sorted[i] as i64 * MINUTE_MS;
            let next = if i + 1 < sorted.len() {
                sorted[i + 1] as i64 * MINUTE_MS
            } else {
                sorted[0] as i64 * MINUTE_MS + HOUR_MS
            };
            min_gap = min_gap.min(next - cur);
        }
        min_gap
    };
    let hw_ms = (half_width_s * 1000.0).round() as i64;
    if 2 * hw_ms >= gap_ms {
        return Err(ProfileError::OverlappingWindows {
            half_width_s,
            gap_s: gap_ms as f64 / 1000.0,
        });
    }

    let dt_ms = trace.dt_ms();
    let mark_ms: Vec<i64> = sorted.iter().map(|&m| m as i64 * MINUTE_MS).collect();
    let mut trading = Vec::new();
    let mut nontrading = Vec::new();
    for day in trace.days() {
        for (slot, &v) in day.slots().iter().zip(day.values()) {
            let toh = (*slot as i64 * dt_ms) % HOUR_MS;
            let is_trading = mark_ms.iter().any(|&m| {
                let d = (toh - m).rem_euclid(HOUR_MS);
                d < hw_ms || d >= HOUR_MS - hw_ms
            });
            if is_trading {
                trading.push(v);
            } else {
                nontrading.push(v);
            }
        }
    }
    Ok(WindowPartition {
        marks: sorted,
        half_width_s,
        trading_samples: trading,
        nontrading_samples: nontrading,
    })
}

impl<F: Real> DailyProfile<F> {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_start_s,mean_hz,count")?;
        for (b, (m, c)) in self.means.iter().zip(&self.counts).enumerate() {
            writeln!(w, "{},{},{}", b as f64 * self.dt_s, m, c)?;
        }
        Ok(())
    }
}

impl<F: Real> HourlyProfile<F> {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_start_s,mean_hz,count")?;
        for (b, (m, c)) in self.means.iter().zip(&self.counts).enumerate() {
            writeln!(w, "{},{},{}", b as f64 * self.dt_s, m, c)?;
        }
        Ok(())
    }
}

impl<F: Real> ViolationProfile<F> {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "minute,exceedance_s_per_hour")?;
        for (minute, v) in self.per_minute.iter().enumerate() {
            writeln!(w, "{minute},{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{FrequencyTrace, DAY_MS};

    const DAY0: i64 = 1_483_228_800_000;

    fn trace_from(dt_ms: i64, days: Vec<Vec<f64>>) -> FrequencyTrace<f64> {
        let days = days
            .into_iter()
            .enumerate()
            .map(|(i, vals)| (DAY0 + i as i64 * DAY_MS, vals))
            .collect();
        FrequencyTrace::from_days(dt_ms, 50.0, days).unwrap()
    }

    fn constant_day(dt_ms: i64, value: f64) -> Vec<f64> {
        vec![value; (DAY_MS / dt_ms) as usize]
    }

    #[test]
    fn daily_profile_of_constant_trace() {
        let trace = trace_from(10_000, vec![constant_day(10_000, 50.0); 2]);
        let p = daily_mean_profile(&trace).unwrap();
        assert_eq!(p.means.len(), 8640);
        assert!(p.means.iter().all(|&m| m == 50.0));
        assert!(p.counts.iter().all(|&c| c == 2));
    }

    #[test]
    fn daily_profile_averages_two_days() {
        let trace = trace_from(
            10_000,
            vec![constant_day(10_000, 50.01), constant_day(10_000, 49.99)],
        );
        let p = daily_mean_profile(&trace).unwrap();
        for &m in &p.means {
            assert!((m - 50.0).abs() < 1e-12);
        }
    }

    #[test]
    fn daily_profile_of_single_day_is_the_day() {
        let spd = (DAY_MS / 10_000) as usize;
        let vals: Vec<f64> = (0..spd).map(|k| 50.0 + 0.001 * (k % 5) as f64).collect();
        let trace = trace_from(10_000, vec![vals.clone()]);
        let p = daily_mean_profile(&trace).unwrap();
        assert_eq!(p.means, vals);
    }

    #[test]
    fn hourly_profile_sees_first_minute_pulse() {
        // 50 Hz everywhere, +0.05 Hz during the first minute of every hour
        let dt = 10_000i64;
        let spd = (DAY_MS / dt) as usize;
        let sph = (HOUR_MS / dt) as usize;
        let vals: Vec<f64> = (0..spd)
            .map(|k| {
                let tod_ms = k as i64 * dt;
                if tod_ms % HOUR_MS < 60_000 {
                    50.05
                } else {
                    50.0
                }
            })
            .collect();
        let trace = trace_from(dt, vec![vals]);
        let p = hourly_mean_profile(&trace).unwrap();
        assert_eq!(p.means.len(), sph);
        for (b, &m) in p.means.iter().enumerate() {
            if b < 6 {
                assert!((m - 50.05).abs() < 1e-9, "bin {b}: {m}");
            } else {
                assert!((m - 50.0).abs() < 1e-9, "bin {b}: {m}");
            }
        }
        // one complete day: every bin aggregates 24 hour blocks
        assert!(p.counts.iter().all(|&c| c == 24));
    }

    #[test]
    fn hourly_profile_constant() {
        let trace = trace_from(10_000, vec![constant_day(10_000, 50.002)]);
        let p = hourly_mean_profile(&trace).unwrap();
        assert!(p.means.iter().all(|&m| (m - 50.002).abs() < 1e-12));
    }

    #[test]
    fn violation_profile_counts_constructed_exceedances() {
        // 50.2 Hz during the six dt=10s samples of minute 3 of every hour
        let dt = 10_000i64;
        let spd = (DAY_MS / dt) as usize;
        let vals: Vec<f64> = (0..spd)
            .map(|k| {
                let tod = k as i64 * dt;
                let minute = (tod % HOUR_MS) / 60_000;
                if minute == 3 {
                    50.2
                } else {
                    50.0
                }
            })
            .collect();
        let trace = trace_from(dt, vec![vals]);
        let p = violation_profile(&trace, 0.1).unwrap();
        // 6 samples * 10 s per hour block
        assert_eq!(p.per_minute[3], 60.0);
        for (m, &v) in p.per_minute.iter().enumerate() {
            if m != 3 {
                assert_eq!(v, 0.0, "minute {m}");
            }
        }
    }

    #[test]
    fn violation_profile_constant_trace_is_zero() {
        let trace = trace_from(10_000, vec![constant_day(10_000, 50.0)]);
        let p = violation_profile(&trace, 0.1).unwrap();
        assert!(p.per_minute.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exceedance_is_strict() {
        // exactly at the threshold is not counted (both values are binary
        // representable, so the comparison is exact)
        let trace = trace_from(10_000, vec![constant_day(10_000, 50.25)]);
        let p = violation_profile(&trace, 0.25).unwrap();
        assert!(p.per_minute.iter().all(|&v| v == 0.0));
        // just above the threshold is counted in full
        let p = violation_profile(&trace, 0.2).unwrap();
        assert!(p.per_minute.iter().all(|&v| (v - 60.0).abs() < 1e-9));
    }

    #[test]
    fn partition_fraction_is_one_third() {
        let trace = trace_from(10_000, vec![constant_day(10_000, 50.0)]);
        let p = partition_trading_windows(&trace, &[0, 15, 30, 45], 150.0).unwrap();
        assert_eq!(p.trading_fraction(), 1.0 / 3.0);
        assert_eq!(
            p.trading_samples.len() + p.nontrading_samples.len(),
            trace.len()
        );
    }

    #[test]
    fn partition_membership_cases() {
        // one synthetic day marking each sample with its time of day
        let dt = 1_000i64;
        let spd = (DAY_MS / dt) as usize;
        let vals: Vec<f64> = (0..spd)
            .map(|k| {
                let toh_s = (k as i64 * dt % HOUR_MS) / 1000;
                // encode time-of-hour (s) into a distinguishable value
                50.0 + toh_s as f64 * 1e-4 / 36.0
            })
            .collect();
        let trace = trace_from(dt, vec![vals]);
        let p = partition_trading_windows(&trace, &[0, 15, 30, 45], 150.0).unwrap();
        let decode = |v: f64| ((v - 50.0) * 36.0 / 1e-4).round() as i64;
        // 7.5 min = 450 s is the midpoint between windows: non-trading
        assert!(p.nontrading_samples.iter().any(|&v| decode(v) == 450));
        assert!(!p.trading_samples.iter().any(|&v| decode(v) == 450));
        // 14 min 58 s = 898 s lies inside [12.5, 17.5) min
        assert!(p.trading_samples.iter().any(|&v| decode(v) == 898));
        // hour-boundary wrap: 57.5 min onward is trading
        assert!(p.trading_samples.iter().any(|&v| decode(v) == 3450));
        assert!(p.nontrading_samples.iter().any(|&v| decode(v) == 3449));
    }

    #[test]
    fn overlapping_windows_are_rejected() {
        let trace = trace_from(10_000, vec![constant_day(10_000, 50.0)]);
        let err = partition_trading_windows(&trace, &[0, 15, 30, 45], 450.0).unwrap_err();
        assert!(matches!(err, ProfileError::OverlappingWindows { .. }));
        let err = partition_trading_windows(&trace, &[], 150.0).unwrap_err();
        assert_eq!(err, ProfileError::EmptyMarks);
    }

    #[test]
    fn violation_profile_rejects_non_minute_divisor_dt() {
        // 40 s divides a day but not a minute; the per-minute bound would
        // not hold
        let trace = trace_from(40_000, vec![constant_day(40_000, 50.0)]);
        assert_eq!(
            violation_profile(&trace, 0.1).unwrap_err(),
            ProfileError::DtNotMinuteDivisor { dt_ms: 40_000 }
        );
    }

    #[test]
    fn empty_trace_is_rejected() {
        let trace = FrequencyTrace::<f64>::from_days(10_000, 50.0, vec![]).unwrap();
        assert_eq!(
            daily_mean_profile(&trace).unwrap_err(),
            ProfileError::EmptyTrace
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn noisy_trace(seed: u64, dt_ms: i64) -> FrequencyTrace<f64> {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let spd = (DAY_MS / dt_ms) as usize;
            let vals = (0..spd)
                .map(|_| 50.0 + 0.1 * (rng.random::<f64>() - 0.5))
                .collect();
            trace_from(dt_ms, vec![vals])
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn partition_is_exhaustive_and_exclusive(
                seed in 0u64..8,
                marks in prop::collection::btree_set(0u32..60, 1..6),
                hw_steps in 1u32..20,
            ) {
                let marks: Vec<u32> = marks.into_iter().collect();
                let trace = noisy_trace(seed, 60_000);
                // keep the half-width below half of the smallest gap
                let mut sorted = marks.clone();
                sorted.sort_unstable();
                let mut gap = u32::MAX;
                for i in 0..sorted.len() {
                    let next = if i + 1 < sorted.len() { sorted[i + 1] } else { sorted[0] + 60 };
                    gap = gap.min(next - sorted[i]);
                }
                let hw_s = (gap * 60) as f64 / 2.0 * (hw_steps as f64 / 20.0) * 0.95;
                let p = partition_trading_windows(&trace, &marks, hw_s).unwrap();
                prop_assert_eq!(
                    p.trading_samples.len() + p.nontrading_samples.len(),
                    trace.len()
                );
            }

            #[test]
            fn profiles_commute_with_constant_shift(seed in 0u64..8, c in -0.3f64..0.3) {
                let trace = noisy_trace(seed, 60_000);
                let shifted_days: Vec<(i64, Vec<f64>)> = trace
                    .days()
                    .iter()
                    .map(|d| (d.start_ms(), d.values().iter().map(|v| v + c).collect()))
                    .collect();
                let shifted = FrequencyTrace::from_days(60_000, 50.0, shifted_days).unwrap();
                let p0 = hourly_mean_profile(&trace).unwrap();
                let p1 = hourly_mean_profile(&shifted).unwrap();
                for (a, b) in p0.means.iter().zip(&p1.means) {
                    prop_assert!((b - a - c).abs() < 1e-9);
                }
                let d0 = daily_mean_profile(&trace).unwrap();
                let d1 = daily_mean_profile(&shifted).unwrap();
                for (a, b) in d0.means.iter().zip(&d1.means) {
                    prop_assert!((b - a - c).abs() < 1e-9);
                }
            }

            #[test]
            fn violations_decrease_in_threshold(seed in 0u64..8) {
                let trace = noisy_trace(seed, 10_000);
                let lo = violation_profile(&trace, 0.02).unwrap();
                let hi = violation_profile(&trace, 0.04).unwrap();
                for (a, b) in lo.per_minute.iter().zip(&hi.per_minute) {
                    prop_assert!(b <= a);
                    prop_assert!((0.0..=60.0).contains(a));
                }
            }
        }
    }
}
