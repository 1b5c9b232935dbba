//! `gridfreq` command line: ingestion and validation of frequency
//! recordings, time-of-day profiles, trading-window analysis, swing-equation
//! simulation and theory validation.
//!
//! Exit codes: 0 success, 1 domain failure (no usable data, tolerance
//! breach), 2 usage or I/O error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Valid invocation, but the data or the tolerances said no.
    Domain(anyhow::Error),
    /// Unreadable/unwritable files, malformed inputs, bad flag values.
    Usage(anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) => 2,
        }
    }

    fn message(&self) -> &anyhow::Error {
        match self {
            CliError::Domain(e) | CliError::Usage(e) => e,
        }
    }
}

pub fn domain<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Domain(e.into())
}

pub fn usage<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Usage(e.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// ISO-8601 UTC timestamps, e.g. 2017-01-01T00:00:10Z
    CsvIso,
    /// Epoch-second timestamps, integer or decimal
    CsvEpoch,
}

impl Format {
    pub fn as_core(self) -> gridfreq::timeseries::CsvFormat {
        match self {
            Format::CsvIso => gridfreq::timeseries::CsvFormat::Iso,
            Format::CsvEpoch => gridfreq::timeseries::CsvFormat::Epoch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKindArg {
    Gaussian,
    HourlyJumps,
    Stable,
}

#[derive(Parser)]
#[command(
    name = "gridfreq",
    version,
    about = "Grid-frequency statistics and swing-equation simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse recordings and report complete days and per-day defects (JSON).
    Validate {
        /// Input CSV files (timestamp,frequency_hz)
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "csv-iso")]
        format: Format,
        #[arg(long, default_value_t = 50.0)]
        f_ref_hz: f64,
    },
    /// Mean frequency profile over the day or the hour (CSV).
    #[command(group(ArgGroup::new("mode").required(true).args(["daily", "hourly"])))]
    Profile {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Mean per time-of-day bin
        #[arg(long)]
        daily: bool,
        /// Mean per offset-into-the-hour bin
        #[arg(long)]
        hourly: bool,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv-iso")]
        format: Format,
        #[arg(long, default_value_t = 50.0)]
        f_ref_hz: f64,
    },
    /// Minute-by-minute exceedance seconds of a deviation threshold (CSV).
    Violations {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Deviation threshold in mHz
        #[arg(long, default_value_t = 100.0)]
        threshold_mhz: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv-iso")]
        format: Format,
        #[arg(long, default_value_t = 50.0)]
        f_ref_hz: f64,
    },
    /// Full trading-window workflow: report.json plus plot CSVs.
    Pipeline {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Trading marks, minutes of the hour
        #[arg(long, value_delimiter = ',', default_values_t = vec![0u32, 15, 30, 45])]
        marks: Vec<u32>,
        /// Half-width of each trading window, seconds
        #[arg(long, default_value_t = 150.0)]
        half_width_s: f64,
        #[arg(long, default_value_t = 100.0)]
        threshold_mhz: f64,
        /// Output directory for report.json and CSVs
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "csv-iso")]
        format: Format,
        #[arg(long, default_value_t = 50.0)]
        f_ref_hz: f64,
        /// Histogram bin count
        #[arg(long, default_value_t = 101)]
        hist_bins: usize,
        /// Autocorrelation cutoff for the decay-rate fit
        #[arg(long, default_value_t = 0.1)]
        acf_cutoff: f64,
    },
    /// Integrate a swing-equation network from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Optional trajectory CSV (t_s, theta_i..., omega_i...)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo check of the stationary predictions (exit 0 iff within
    /// tolerance: 2% Gaussian std, 10% stable scale).
    ValidateTheory {
        #[arg(long)]
        config: PathBuf,
        /// Number of independent trajectories
        #[arg(long, default_value_t = 1)]
        trials: u32,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a deterministic synthetic recording.
    Synth {
        #[arg(long, value_enum)]
        kind: SynthKindArg,
        #[arg(long, default_value_t = 2)]
        days: u32,
        /// Sample interval, seconds
        #[arg(long, default_value_t = 10.0)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv-iso")]
        format: Format,
        #[arg(long, default_value_t = 50.0)]
        f_ref_hz: f64,
        /// Gaussian background std, Hz (gaussian / hourly-jumps kinds)
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
        /// Jump amplitude, Hz (hourly-jumps kind)
        #[arg(long, default_value_t = 0.08)]
        jump: f64,
        /// Jump decay span, seconds (hourly-jumps kind)
        #[arg(long, default_value_t = 90.0)]
        decay_s: f64,
        /// Stability index (stable kind)
        #[arg(long, default_value_t = 1.9)]
        alpha: f64,
        /// Stable scale, Hz (stable kind)
        #[arg(long, default_value_t = 0.01)]
        scale: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate {
            paths,
            format,
            f_ref_hz,
        } => commands::validate(&paths, format, f_ref_hz),
        Command::Profile {
            paths,
            daily,
            hourly: _,
            out,
            format,
            f_ref_hz,
        } => commands::profile(&paths, daily, out.as_deref(), format, f_ref_hz),
        Command::Violations {
            paths,
            threshold_mhz,
            out,
            format,
            f_ref_hz,
        } => commands::violations(&paths, threshold_mhz, out.as_deref(), format, f_ref_hz),
        Command::Pipeline {
            paths,
            marks,
            half_width_s,
            threshold_mhz,
            out_dir,
            format,
            f_ref_hz,
            hist_bins,
            acf_cutoff,
        } => commands::pipeline(&commands::PipelineArgs {
            paths,
            marks,
            half_width_s,
            threshold_mhz,
            out_dir,
            format,
            f_ref_hz,
            hist_bins,
            acf_cutoff,
        }),
        Command::Simulate { config, out } => commands::simulate(&config, out.as_deref()),
        Command::ValidateTheory {
            config,
            trials,
            seed,
        } => commands::validate_theory(&config, trials, seed),
        Command::Synth {
            kind,
            days,
            dt,
            seed,
            out,
            format,
            f_ref_hz,
            sigma,
            jump,
            decay_s,
            alpha,
            scale,
        } => commands::synth(&commands::SynthArgs {
            kind,
            days,
            dt,
            seed,
            out,
            format,
            f_ref_hz,
            sigma,
            jump,
            decay_s,
            alpha,
            scale,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
