//! Ingestion and validation of grid-frequency recordings.
//!
//! Input is two-column CSV (`timestamp,frequency_hz`), ISO-8601 UTC or epoch
//! seconds. The sample interval is inferred from the first two rows and
//! enforced for the whole file. Any calendar day containing a defect (gap,
//! duplicate timestamp, out-of-range value) is excluded wholesale; nothing
//! is ever interpolated. Analysis operates on the concatenation of the
//! complete days.
//!
//! Timestamps are held as integer milliseconds so that decimal-second
//! recordings stay exact.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;

pub const DAY_MS: i64 = 86_400_000;
pub const HOUR_MS: i64 = 3_600_000;

/// Plausibility bounds on frequency samples, Hz.
pub const PLAUSIBLE_MIN_HZ: f64 = 45.0;
pub const PLAUSIBLE_MAX_HZ: f64 = 55.0;

/// Nominal Continental-European grid frequency, Hz.
pub const DEFAULT_F_REF_HZ: f64 = 50.0;

/// Wire format of the timestamp column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvFormat {
    /// ISO-8601 / RFC 3339 UTC, e.g. `2017-01-01T00:00:10Z`.
    Iso,
    /// Epoch seconds, integer or decimal (millisecond resolution).
    Epoch,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: timestamps are not monotone")]
    NonMonotone { line: usize },
    #[error("line {line}: timestamp is off the inferred {dt_ms} ms grid (mixed resolution)")]
    MixedResolution { line: usize, dt_ms: i64 },
    #[error("need at least two rows to infer the sample interval")]
    TooFewRows,
    #[error("sample interval {dt_ms} ms does not divide a day")]
    DtNotDayDivisor { dt_ms: i64 },
    #[error("first timestamp is not aligned to the {dt_ms} ms sample grid")]
    MisalignedStart { dt_ms: i64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum SelectError {
    #[error("no complete days")]
    NoCompleteDays,
    #[error("validation report does not match this trace")]
    InconsistentReport,
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("trace contains incomplete days; select complete days first")]
    NotAnalysisReady,
    #[error("empty trace")]
    Empty,
    #[error("day starting at {start_ms} ms is malformed")]
    BadDay { start_ms: i64 },
    #[error("sample interval {dt_ms} ms does not divide a day")]
    BadDt { dt_ms: i64 },
    #[error("traces disagree on sample interval or reference frequency")]
    Mismatch,
    #[error("day {date} appears in more than one input")]
    OverlappingDays { date: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectKind {
    Gap,
    OutOfRange,
    DuplicateTimestamp,
}

impl fmt::Display for DefectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DefectKind::Gap => write!(f, "gap"),
            DefectKind::OutOfRange => write!(f, "out-of-range"),
            DefectKind::DuplicateTimestamp => write!(f, "duplicate-timestamp"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Defect {
    pub date: String,
    pub kind: DefectKind,
    pub detail: String,
}

/// Per-day classification of a loaded recording.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n_days_total: usize,
    pub complete_days: Vec<String>,
    pub defects: Vec<Defect>,
}

impl ValidationReport {
    pub fn merge(reports: Vec<ValidationReport>) -> ValidationReport {
        let mut complete: Vec<String> = Vec::new();
        let mut defects = Vec::new();
        let mut n = 0;
        for r in reports {
            n += r.n_days_total;
            complete.extend(r.complete_days);
            defects.extend(r.defects);
        }
        complete.sort();
        defects.sort_by(|a, b| a.date.cmp(&b.date));
        ValidationReport {
            n_days_total: n,
            complete_days: complete,
            defects,
        }
    }
}

/// One calendar day of samples. `slots` are in-day sample indices; a
/// complete day is dense (slot k at offset k*dt) with all values inside the
/// plausibility band.
#[derive(Debug, Clone)]
pub struct Day<F> {
    start_ms: i64,
    slots: Vec<u32>,
    values: Vec<F>,
    complete: bool,
}

impl<F: Real> Day<F> {
    pub fn start_ms(&self) -> i64 {
        self.start_ms
    }

    pub fn date(&self) -> String {
        format_date(self.start_ms)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn slots(&self) -> &[u32] {
        &self.slots
    }
}

fn format_date(day_start_ms: i64) -> String {
    Utc.timestamp_millis_opt(day_start_ms)
        .unwrap()
        .format("%Y-%m-%d")
        .to_string()
}

fn in_plausible_band(v: f64) -> bool {
    v.is_finite() && (PLAUSIBLE_MIN_HZ..=PLAUSIBLE_MAX_HZ).contains(&v)
}

/// Uniformly sampled frequency recording, organized by calendar day.
#[derive(Debug, Clone)]
pub struct FrequencyTrace<F> {
    dt_ms: i64,
    f_ref: F,
    days: Vec<Day<F>>,
}

impl<F: Real> FrequencyTrace<F> {
    /// Assemble a trace from per-day dense sample vectors. Each day is
    /// marked complete when it has exactly one in-band sample per slot.
    pub fn from_days(dt_ms: i64, f_ref: F, days: Vec<(i64, Vec<F>)>) -> Result<Self, TraceError> {
        if dt_ms <= 0 || DAY_MS % dt_ms != 0 {
            return Err(TraceError::BadDt { dt_ms });
        }
        let spd = (DAY_MS / dt_ms) as usize;
        let mut out = Vec::with_capacity(days.len());
        let mut prev_start = i64::MIN;
        for (start_ms, values) in days {
            if start_ms % DAY_MS != 0 || start_ms <= prev_start || values.len() != spd {
                return Err(TraceError::BadDay { start_ms });
            }
            prev_start = start_ms;
            let complete = values
                .iter()
                .all(|v| in_plausible_band(v.to_f64().unwrap_or(f64::NAN)));
            out.push(Day {
                start_ms,
                slots: (0..spd as u32).collect(),
                values,
                complete,
            });
        }
        Ok(Self {
            dt_ms,
            f_ref,
            days: out,
        })
    }

    pub fn dt_ms(&self) -> i64 {
        self.dt_ms
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_ms as f64 / 1000.0
    }

    pub fn f_ref(&self) -> F {
        self.f_ref
    }

    pub fn days(&self) -> &[Day<F>] {
        &self.days
    }

    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn len(&self) -> usize {
        self.days.iter().map(Day::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Samples per complete day.
    pub fn samples_per_day(&self) -> usize {
        (DAY_MS / self.dt_ms) as usize
    }

    /// True when every day is complete, i.e. the trace is ready for
    /// profile/statistics operations.
    pub fn is_analysis_ready(&self) -> bool {
        !self.days.is_empty() && self.days.iter().all(Day::is_complete)
    }

    pub fn iter_values(&self) -> impl Iterator<Item = F> + '_ {
        self.days.iter().flat_map(|d| d.values.iter().copied())
    }

    /// Deviations from the reference frequency, flattened chronologically.
    pub fn deviations(&self) -> Vec<F> {
        self.iter_values().map(|v| v - self.f_ref).collect()
    }

    /// Combine recordings (e.g. monthly files) into one trace.
    pub fn merge(traces: Vec<FrequencyTrace<F>>) -> Result<FrequencyTrace<F>, TraceError> {
        let mut iter = traces.into_iter();
        let first = iter.next().ok_or(TraceError::Empty)?;
        let (dt_ms, f_ref) = (first.dt_ms, first.f_ref);
        let mut by_start: BTreeMap<i64, Day<F>> = BTreeMap::new();
        for day in first.days {
            by_start.insert(day.start_ms, day);
        }
        for trace in iter {
            if trace.dt_ms != dt_ms || trace.f_ref != f_ref {
                return Err(TraceError::Mismatch);
            }
            for day in trace.days {
                if by_start.contains_key(&day.start_ms) {
                    return Err(TraceError::OverlappingDays { date: day.date() });
                }
                by_start.insert(day.start_ms, day);
            }
        }
        Ok(FrequencyTrace {
            dt_ms,
            f_ref,
            days: by_start.into_values().collect(),
        })
    }

    /// Write the trace back out as `timestamp,frequency_hz` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W, format: CsvFormat) -> std::io::Result<()> {
        writeln!(w, "timestamp,frequency_hz")?;
        for day in &self.days {
            for (k, &v) in day.slots.iter().zip(day.values.iter()) {
                let t_ms = day.start_ms + *k as i64 * self.dt_ms;
                match format {
                    CsvFormat::Iso => {
                        let ts = Utc.timestamp_millis_opt(t_ms).unwrap();
                        if t_ms % 1000 == 0 {
                            writeln!(w, "{},{}", ts.format("%Y-%m-%dT%H:%M:%SZ"), v)?;
                        } else {
                            writeln!(w, "{},{}", ts.format("%Y-%m-%dT%H:%M:%S%.3fZ"), v)?;
                        }
                    }
                    CsvFormat::Epoch => {
                        if t_ms % 1000 == 0 {
                            writeln!(w, "{},{}", t_ms / 1000, v)?;
                        } else {
                            let sign = if t_ms < 0 { "-" } else { "" };
                            let a = t_ms.unsigned_abs();
                            writeln!(w, "{sign}{}.{:03},{}", a / 1000, a % 1000, v)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Angular-velocity counterpart of a validated trace, omega = 2 pi (f - f_ref).
#[derive(Debug, Clone)]
pub struct AngularVelocityTrace<F> {
    dt_ms: i64,
    f_ref: F,
    days: Vec<Day<F>>,
}

impl<F: Real> AngularVelocityTrace<F> {
    pub fn dt_ms(&self) -> i64 {
        self.dt_ms
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_ms as f64 / 1000.0
    }

    pub fn len(&self) -> usize {
        self.days.iter().map(Day::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn days(&self) -> &[Day<F>] {
        &self.days
    }

    pub fn iter_values(&self) -> impl Iterator<Item = F> + '_ {
        self.days.iter().flat_map(|d| d.values.iter().copied())
    }

    /// Invert the conversion: f = f_ref + omega / (2 pi).
    pub fn to_frequency(&self) -> FrequencyTrace<F> {
        let two_pi = F::from(2.0).unwrap() * F::PI();
        FrequencyTrace {
            dt_ms: self.dt_ms,
            f_ref: self.f_ref,
            days: self
                .days
                .iter()
                .map(|d| Day {
                    start_ms: d.start_ms,
                    slots: d.slots.clone(),
                    values: d.values.iter().map(|&w| self.f_ref + w / two_pi).collect(),
                    complete: d.complete,
                })
                .collect(),
        }
    }
}

/// Parse and classify a recording. The returned trace is raw (defective
/// days included); nothing is repaired.
pub fn load_trace<F: Real>(
    path: &Path,
    format: CsvFormat,
    f_ref: F,
) -> Result<(FrequencyTrace<F>, ValidationReport), LoadError> {
    let file = File::open(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut rows: Vec<(i64, f64, usize)> = Vec::new();
    let mut saw_content = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match parse_row(trimmed, format) {
            Ok((t_ms, value)) => {
                saw_content = true;
                rows.push((t_ms, value, line_no));
            }
            Err(msg) => {
                if !saw_content {
                    // optional header line
                    saw_content = true;
                    continue;
                }
                return Err(LoadError::Parse { line: line_no, msg });
            }
        }
    }
    if rows.len() < 2 {
        return Err(LoadError::TooFewRows);
    }

    let t0 = rows[0].0;
    let dt_ms = rows[1].0 - t0;
    if dt_ms <= 0 {
        return Err(LoadError::NonMonotone { line: rows[1].2 });
    }
    if DAY_MS % dt_ms != 0 {
        return Err(LoadError::DtNotDayDivisor { dt_ms });
    }
    if t0.rem_euclid(dt_ms) != 0 {
        return Err(LoadError::MisalignedStart { dt_ms });
    }

    struct DayAgg<F> {
        slots: Vec<u32>,
        values: Vec<F>,
        duplicates: usize,
        out_of_range: usize,
        first_out_of_range: Option<f64>,
    }
    let mut days: BTreeMap<i64, DayAgg<F>> = BTreeMap::new();
    let mut prev_t = i64::MIN;
    for &(t_ms, value, line_no) in &rows {
        if t_ms < prev_t {
            return Err(LoadError::NonMonotone { line: line_no });
        }
        if (t_ms - t0).rem_euclid(dt_ms) != 0 {
            return Err(LoadError::MixedResolution {
                line: line_no,
                dt_ms,
            });
        }
        let day_start = t_ms.div_euclid(DAY_MS) * DAY_MS;
        let slot = ((t_ms - day_start) / dt_ms) as u32;
        let agg = days.entry(day_start).or_insert_with(|| DayAgg {
            slots: Vec::new(),
            values: Vec::new(),
            duplicates: 0,
            out_of_range: 0,
            first_out_of_range: None,
        });
        if t_ms == prev_t {
            agg.duplicates += 1;
            continue;
        }
        prev_t = t_ms;
        if !in_plausible_band(value) {
            agg.out_of_range += 1;
            agg.first_out_of_range.get_or_insert(value);
        }
        agg.slots.push(slot);
        agg.values.push(F::from_f64_lossy(value));
    }

    let spd = (DAY_MS / dt_ms) as usize;
    let mut trace_days = Vec::with_capacity(days.len());
    let mut complete_days = Vec::new();
    let mut defects = Vec::new();
    for (start_ms, agg) in days {
        let date = format_date(start_ms);
        if agg.duplicates > 0 {
            defects.push(Defect {
                date: date.clone(),
                kind: DefectKind::DuplicateTimestamp,
                detail: format!("{} duplicated timestamp(s)", agg.duplicates),
            });
        }
        if agg.out_of_range > 0 {
            defects.push(Defect {
                date: date.clone(),
                kind: DefectKind::OutOfRange,
                detail: format!(
                    "{} sample(s) outside [{PLAUSIBLE_MIN_HZ}, {PLAUSIBLE_MAX_HZ}] Hz, first {}",
                    agg.out_of_range,
                    agg.first_out_of_range.unwrap_or(f64::NAN)
                ),
            });
        }
        if agg.slots.len() < spd {
            defects.push(Defect {
                date: date.clone(),
                kind: DefectKind::Gap,
                detail: format!("{} of {} samples missing", spd - agg.slots.len(), spd),
            });
        }
        let complete = agg.duplicates == 0 && agg.out_of_range == 0 && agg.slots.len() == spd;
        if complete {
            complete_days.push(date);
        }
        trace_days.push(Day {
            start_ms,
            slots: agg.slots,
            values: agg.values,
            complete,
        });
    }

    let report = ValidationReport {
        n_days_total: trace_days.len(),
        complete_days,
        defects,
    };
    Ok((
        FrequencyTrace {
            dt_ms,
            f_ref,
            days: trace_days,
        },
        report,
    ))
}

fn parse_row(line: &str, format: CsvFormat) -> Result<(i64, f64), String> {
    let mut fields = line.split(',');
    let ts = fields.next().ok_or("missing timestamp column")?.trim();
    let val = fields.next().ok_or("missing frequency column")?.trim();
    if fields.next().is_some() {
        return Err("expected exactly two columns".into());
    }
    let t_ms = parse_timestamp(ts, format)?;
    let value: f64 = val
        .parse()
        .map_err(|_| format!("cannot parse frequency {val:?}"))?;
    Ok((t_ms, value))
}

fn parse_timestamp(field: &str, format: CsvFormat) -> Result<i64, String> {
    match format {
        CsvFormat::Iso => {
            let dt: DateTime<chrono::FixedOffset> = DateTime::parse_from_rfc3339(field)
                .map_err(|e| format!("cannot parse timestamp {field:?}: {e}"))?;
            let utc = dt.with_timezone(&Utc);
            if !utc.timestamp_subsec_nanos().is_multiple_of(1_000_000) {
                return Err(format!("timestamp {field:?} has sub-millisecond precision"));
            }
            Ok(utc.timestamp_millis())
        }
        CsvFormat::Epoch => {
            let (negative, magnitude) = match field.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, field.strip_prefix('+').unwrap_or(field)),
            };
            let (int_part, frac_part) = match magnitude.split_once('.') {
                Some((i, f)) => (i, f),
                None => (magnitude, ""),
            };
            let secs: i64 = int_part
                .parse()
                .map_err(|_| format!("cannot parse epoch timestamp {field:?}"))?;
            if frac_part.len() > 3 {
                return Err(format!("timestamp {field:?} has sub-millisecond precision"));
            }
            let mut ms = 0i64;
            if !frac_part.is_empty() {
                let digits: i64 = frac_part
                    .parse()
                    .map_err(|_| format!("cannot parse epoch timestamp {field:?}"))?;
                ms = digits * 10i64.pow(3 - frac_part.len() as u32);
            }
            let total = secs * 1000 + ms;
            Ok(if negative { -total } else { total })
        }
    }
}

/// Keep exactly the report's complete days, chronologically.
pub fn select_complete_days<F: Real>(
    trace: &FrequencyTrace<F>,
    report: &ValidationReport,
) -> Result<FrequencyTrace<F>, SelectError> {
    let mut days = Vec::with_capacity(report.complete_days.len());
    for date in &report.complete_days {
        let day = trace
            .days
            .iter()
            .find(|d| &d.date() == date)
            .ok_or(SelectError::InconsistentReport)?;
        if !day.is_complete() || day.len() != trace.samples_per_day() {
            return Err(SelectError::InconsistentReport);
        }
        days.push(day.clone());
    }
    if days.is_empty() {
        return Err(SelectError::NoCompleteDays);
    }
    days.sort_by_key(|d| d.start_ms);
    Ok(FrequencyTrace {
        dt_ms: trace.dt_ms,
        f_ref: trace.f_ref,
        days,
    })
}

/// Convert a validated trace to angular velocities, omega = 2 pi (f - f_ref).
pub fn to_angular_velocity<F: Real>(
    trace: &FrequencyTrace<F>,
) -> Result<AngularVelocityTrace<F>, TraceError> {
    if trace.days.is_empty() {
        return Err(TraceError::Empty);
    }
    if !trace.is_analysis_ready() {
        return Err(TraceError::NotAnalysisReady);
    }
    let two_pi = F::from(2.0).unwrap() * F::PI();
    Ok(AngularVelocityTrace {
        dt_ms: trace.dt_ms,
        f_ref: trace.f_ref,
        days: trace
            .days
            .iter()
            .map(|d| Day {
                start_ms: d.start_ms,
                slots: d.slots.clone(),
                values: d
                    .values
                    .iter()
                    .map(|&f| two_pi * (f - trace.f_ref))
                    .collect(),
                complete: d.complete,
            })
            .collect(),
    })
}
