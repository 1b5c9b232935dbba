//! Closed-form stationary statistics of the bulk angular velocity.
//!
//! For a homogeneous damping-to-inertia ratio gamma and independent node
//! noise the bulk follows a linearly damped stochastic equation, whose
//! stationary law is known in closed form:
//!
//! ```text
//! Gaussian noise:  std(w)   = sqrt(sum sigma_i^2 / (2 gamma)) / sum M_i
//! stable noise:    scale(w) = [ sum sigma_s_i^alpha / (gamma alpha) ]^(1/alpha)
//!                             / (sqrt(2) sum M_i)
//! ```
//!
//! and the autocorrelation decays as exp(-gamma dt). At alpha = 2 the stable
//! prediction reduces to the Gaussian one: sqrt(2) * scale = std.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;
use crate::swing::{GridModel, NoiseKind, NoiseSpec};

#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    #[error("damping-to-inertia ratio is not homogeneous; no closed-form prediction")]
    InhomogeneousGamma,
    #[error("prediction requires {expected} noise")]
    WrongNoiseKind { expected: &'static str },
    #[error("noise spec has {got} amplitudes for {expected} nodes")]
    NoiseMismatch { expected: usize, got: usize },
    #[error("gamma must be positive")]
    NonPositiveGamma,
}

/// Predicted stationary statistics, embedded in analysis reports next to the
/// empirical fits.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoryPrediction<F> {
    pub gamma: F,
    pub total_inertia: F,
    /// Standard deviation of the bulk angular velocity (Gaussian noise).
    pub sigma_omega: Option<F>,
    /// Stable scale of the bulk angular velocity (stable noise).
    pub sigma_s_omega: Option<F>,
    pub alpha: Option<F>,
}

fn check_noise<F: Real>(grid: &GridModel<F>, noise: &NoiseSpec<F>) -> Result<(), TheoryError> {
    if noise.amplitudes.len() != grid.n() {
        return Err(TheoryError::NoiseMismatch {
            expected: grid.n(),
            got: noise.amplitudes.len(),
        });
    }
    Ok(())
}

/// Stationary standard deviation of the bulk angular velocity under
/// Gaussian node noise with standard deviations `sigma_i`.
pub fn predict_std_gaussian<F: Real>(
    grid: &GridModel<F>,
    noise: &NoiseSpec<F>,
) -> Result<F, TheoryError> {
    check_noise(grid, noise)?;
    if noise.kind != NoiseKind::Gaussian {
        return Err(TheoryError::WrongNoiseKind {
            expected: "gaussian",
        });
    }
    let gamma = grid
        .homogeneous_gamma()
        .ok_or(TheoryError::InhomogeneousGamma)?;
    let sum_sq: F = noise.amplitudes.iter().map(|&a| a * a).sum();
    let two = F::from(2.0).unwrap();
    Ok((sum_sq / (two * gamma)).sqrt() / grid.total_inertia())
}

/// Stationary stable scale of the bulk angular velocity under stable node
/// noise with amplitudes `sigma_s_i` and shared stability `alpha`.
pub fn predict_scale_stable<F: Real>(
    grid: &GridModel<F>,
    noise: &NoiseSpec<F>,
) -> Result<F, TheoryError> {
    check_noise(grid, noise)?;
    let alpha = match noise.kind {
        NoiseKind::Stable { alpha } => alpha,
        NoiseKind::Gaussian => return Err(TheoryError::WrongNoiseKind { expected: "stable" }),
    };
    let gamma = grid
        .homogeneous_gamma()
        .ok_or(TheoryError::InhomogeneousGamma)?;
    let sum_pow: F = noise.amplitudes.iter().map(|&a| a.powf(alpha)).sum();
    let sqrt2 = F::from(std::f64::consts::SQRT_2).unwrap();
    Ok((sum_pow / (gamma * alpha)).powf(F::one() / alpha) / (sqrt2 * grid.total_inertia()))
}

/// Exponential autocorrelation exp(-gamma lag) at the given lags.
pub fn predicted_autocorrelation<F: Real>(gamma: F, lags: &[F]) -> Result<Vec<F>, TheoryError> {
    if gamma.is_nan() || gamma <= F::zero() {
        return Err(TheoryError::NonPositiveGamma);
    }
    Ok(lags.iter().map(|&l| (-gamma * l).exp()).collect())
}

/// Evaluate whichever prediction matches the noise family.
pub fn predict<F: Real>(
    grid: &GridModel<F>,
    noise: &NoiseSpec<F>,
) -> Result<TheoryPrediction<F>, TheoryError> {
    let gamma = grid
        .homogeneous_gamma()
        .ok_or(TheoryError::InhomogeneousGamma)?;
    let mut prediction = TheoryPrediction {
        gamma,
        total_inertia: grid.total_inertia(),
        sigma_omega: None,
        sigma_s_omega: None,
        alpha: None,
    };
    match noise.kind {
        NoiseKind::Gaussian => {
            prediction.sigma_omega = Some(predict_std_gaussian(grid, noise)?);
        }
        NoiseKind::Stable { alpha } => {
            prediction.sigma_s_omega = Some(predict_scale_stable(grid, noise)?);
            prediction.alpha = Some(alpha);
        }
    }
    Ok(prediction)
}
