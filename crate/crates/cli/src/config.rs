//! JSON simulation config:
//!
//! ```json
//! {
//!   "nodes": [{"M": 1.0, "P": 0.0, "D": 1.0, "sigma": 1.0}],
//!   "coupling": [[0, 1, 8.0]],
//!   "noise": {"kind": "stable", "alpha": 1.7},
//!   "sim": {"dt": 0.005, "steps": 2000000, "seed": 42,
//!           "burn_in_s": 10.0, "record_stride": 1}
//! }
//! ```
//!
//! Node indices in `coupling` are 0-based. `sigma` is the per-node noise
//! amplitude (Gaussian std, or the stable base scale).

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use gridfreq::swing::{GridModel, NoiseSpec, SimParams};

use crate::{usage, CliError};

/// Everything a run needs: the validated grid, the noise and the stepping.
pub type SimSetup = (GridModel<f64>, NoiseSpec<f64>, SimParams<f64>);

#[derive(Debug, Deserialize)]
pub struct SimConfig {
    pub nodes: Vec<NodeConfig>,
    #[serde(default)]
    pub coupling: Vec<(usize, usize, f64)>,
    pub noise: NoiseConfig,
    pub sim: SimSection,
}

#[derive(Debug, Deserialize)]
pub struct NodeConfig {
    #[serde(rename = "M")]
    pub inertia: f64,
    #[serde(rename = "P")]
    pub power: f64,
    #[serde(rename = "D")]
    pub damping: f64,
    pub sigma: f64,
}

#[derive(Debug, Deserialize)]
pub struct NoiseConfig {
    pub kind: String,
    pub alpha: Option<f64>,
}

#[derive(Debug, Deserialize)]
pub struct SimSection {
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub burn_in_s: Option<f64>,
    pub record_stride: Option<usize>,
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .map_err(usage)?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))
            .map_err(usage)
    }

    pub fn build(&self) -> Result<SimSetup, CliError> {
        let inertia: Vec<f64> = self.nodes.iter().map(|n| n.inertia).collect();
        let power: Vec<f64> = self.nodes.iter().map(|n| n.power).collect();
        let damping: Vec<f64> = self.nodes.iter().map(|n| n.damping).collect();
        let amplitudes: Vec<f64> = self.nodes.iter().map(|n| n.sigma).collect();
        let edges: Vec<(usize, usize, f64)> = self.coupling.clone();
        let grid = GridModel::from_edges(inertia, power, damping, &edges).map_err(usage)?;
        let noise = match self.noise.kind.as_str() {
            "gaussian" => NoiseSpec::gaussian(amplitudes).map_err(usage)?,
            "stable" => {
                let alpha = self
                    .noise
                    .alpha
                    .ok_or_else(|| usage(anyhow::anyhow!("stable noise requires alpha")))?;
                NoiseSpec::stable(alpha, amplitudes).map_err(usage)?
            }
            other => {
                return Err(usage(anyhow::anyhow!(
                    "unknown noise kind {other:?} (expected \"gaussian\" or \"stable\")"
                )))
            }
        };
        let mut params = SimParams::new(self.sim.dt, self.sim.steps, self.sim.seed);
        if let Some(b) = self.sim.burn_in_s {
            params = params.with_burn_in(b);
        }
        if let Some(s) = self.sim.record_stride {
            params = params.with_stride(s);
        }
        Ok((grid, noise, params))
    }
}
