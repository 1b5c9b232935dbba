//! Statistics of power-grid frequency recordings and stochastic simulation
//! of synchronous-machine networks.
//!
//! The crate has two halves that meet in the middle:
//!
//! - **data analysis** ([`timeseries`], [`profiles`], [`stats`]): ingest
//!   frequency recordings, exclude defective days, aggregate by time of day,
//!   isolate trading windows, and fit Gaussian / Levy-stable laws with tail
//!   and autocorrelation diagnostics;
//! - **modelling** ([`swing`], [`theory`]): integrate swing-equation
//!   networks under Gaussian or stable power noise and compare the simulated
//!   bulk angular velocity against closed-form stationary predictions.
//!
//! [`synth`] generates deterministic synthetic recordings so the whole
//! pipeline can be exercised without proprietary data.
//!
//! All numeric code is generic over the scalar type through [`Real`]
//! (f32 or f64); the aliases below fix f64 for everyday use.

pub mod profiles;
pub mod scalar;
pub mod stats;
pub mod swing;
pub mod synth;
pub mod theory;
pub mod timeseries;

pub use scalar::Real;

pub type FrequencyTrace = timeseries::FrequencyTrace<f64>;
pub type AngularVelocityTrace = timeseries::AngularVelocityTrace<f64>;
pub type Day = timeseries::Day<f64>;

pub type DailyProfile = profiles::DailyProfile<f64>;
pub type HourlyProfile = profiles::HourlyProfile<f64>;
pub type ViolationProfile = profiles::ViolationProfile<f64>;
pub type WindowPartition = profiles::WindowPartition<f64>;

pub type SummaryStats = stats::SummaryStats<f64>;
pub type GaussianFit = stats::GaussianFit<f64>;
pub type StableFit = stats::StableFit<f64>;
pub type TailExcess = stats::TailExcess<f64>;
pub type AutocorrEstimate = stats::AutocorrEstimate<f64>;
pub type Histogram = stats::Histogram<f64>;

pub type GridModel = swing::GridModel<f64>;
pub type NoiseSpec = swing::NoiseSpec<f64>;
pub type SimParams = swing::SimParams<f64>;
pub type SimResult = swing::SimResult<f64>;
pub type BulkModel = swing::BulkModel<f64>;
pub type TheoryPrediction = theory::TheoryPrediction<f64>;
