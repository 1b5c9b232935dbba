//! Networks of synchronous machines driven by stochastic power fluctuations.
//!
//! Node dynamics:
//!
//! ```text
//! d theta_i/dt = omega_i
//! M_i d omega_i/dt = P_i + Gamma_i(t) - D_i omega_i + sum_j K_ij sin(theta_j - theta_i)
//! ```
//!
//! Integration is stochastic Euler (Euler-Maruyama) with a fixed step. The
//! per-step noise increment scales as dt^(1/alpha), the self-similarity
//! exponent of stable Levy motion (sqrt(dt) in the Gaussian case alpha = 2).
//!
//! Amplitude conventions: a Gaussian amplitude `sigma` is the standard
//! deviation of the white-noise power feed. A stable amplitude `sigma_s` is
//! calibrated so that alpha = 2 reproduces the Gaussian simulation with
//! `sigma = sigma_s` exactly; internally the increments carry stable scale
//! `sigma_s / sqrt(2) * dt^(1/alpha)`, matching the closed-form stationary
//! predictions in [`crate::theory`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Real;

/// Divergence guard on |omega|.
const OMEGA_LIMIT: f64 = 1e6;

/// Relative tolerance for the homogeneous damping-to-inertia check.
const GAMMA_HOMOGENEITY_TOL: f64 = 1e-12;

/// Relative tolerance on the power balance sum(P_i) = 0.
const POWER_BALANCE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least one node")]
    Empty,
    #[error("per-node parameter vectors have different lengths")]
    DimensionMismatch,
    #[error("inertia of node {node} must be positive and finite")]
    BadInertia { node: usize },
    #[error("damping of node {node} must be positive and finite")]
    BadDamping { node: usize },
    #[error("power of node {node} must be finite")]
    BadPower { node: usize },
    #[error("power imbalance {sum}")]
    PowerImbalance { sum: f64 },
    #[error("coupling matrix is not {n}x{n}")]
    BadCouplingShape { n: usize },
    #[error("coupling K[{i}][{j}] != K[{j}][{i}] (asymmetric)")]
    AsymmetricCoupling { i: usize, j: usize },
    #[error("coupling K[{i}][{j}] must be finite and non-negative")]
    NegativeCoupling { i: usize, j: usize },
    #[error("coupling diagonal K[{i}][{i}] must be zero")]
    NonzeroDiagonal { i: usize },
    #[error("edge ({i},{j}) out of range or a self-loop")]
    BadEdge { i: usize, j: usize },
    #[error("duplicate edge ({i},{j})")]
    DuplicateEdge { i: usize, j: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("noise spec has {got} amplitudes for {expected} nodes")]
    NoiseMismatch { expected: usize, got: usize },
    #[error("dt * gamma = {dt_gamma} violates the stability guard dt * gamma < 0.1")]
    UnstableDt { dt_gamma: f64 },
    #[error("{0}")]
    BadParam(&'static str),
    #[error("trajectory diverged (|omega| > 1e6) at step {step}")]
    Divergence { step: usize },
    #[error("damping-to-inertia ratio is not homogeneous across nodes")]
    InhomogeneousGamma,
}

/// Validated network model: inertia, injected power, damping and coupling.
#[derive(Debug, Clone)]
pub struct GridModel<F> {
    inertia: Vec<F>,
    power: Vec<F>,
    damping: Vec<F>,
    coupling: Vec<F>, // row-major n x n
}

impl<F: Real> GridModel<F> {
    /// Build from per-node parameters and a dense coupling matrix.
    pub fn new(
        inertia: Vec<F>,
        power: Vec<F>,
        damping: Vec<F>,
        coupling: Vec<F>,
    ) -> Result<Self, GridError> {
        let n = inertia.len();
        if n == 0 {
            return Err(GridError::Empty);
        }
        if power.len() != n || damping.len() != n {
            return Err(GridError::DimensionMismatch);
        }
        if coupling.len() != n * n {
            return Err(GridError::BadCouplingShape { n });
        }
        for i in 0..n {
            if !(inertia[i].is_finite() && inertia[i] > F::zero()) {
                return Err(GridError::BadInertia { node: i });
            }
            if !(damping[i].is_finite() && damping[i] > F::zero()) {
                return Err(GridError::BadDamping { node: i });
            }
            if !power[i].is_finite() {
                return Err(GridError::BadPower { node: i });
            }
        }
        for i in 0..n {
            if coupling[i * n + i] != F::zero() {
                return Err(GridError::NonzeroDiagonal { i });
            }
            for j in 0..n {
                let kij = coupling[i * n + j];
                if !kij.is_finite() || kij < F::zero() {
                    return Err(GridError::NegativeCoupling { i, j });
                }
                if kij != coupling[j * n + i] {
                    return Err(GridError::AsymmetricCoupling { i, j });
                }
            }
        }
        let sum_p: f64 = power.iter().map(|p| p.to_f64().unwrap()).sum();
        let scale: f64 = power
            .iter()
            .map(|p| p.to_f64().unwrap().abs())
            .sum::<f64>()
            .max(1.0);
        if sum_p.abs() > POWER_BALANCE_TOL * scale {
            return Err(GridError::PowerImbalance { sum: sum_p });
        }
        Ok(Self {
            inertia,
            power,
            damping,
            coupling,
        })
    }

    /// Build from an undirected edge list `(i, j, K)`.
    pub fn from_edges(
        inertia: Vec<F>,
        power: Vec<F>,
        damping: Vec<F>,
        edges: &[(usize, usize, F)],
    ) -> Result<Self, GridError> {
        let n = inertia.len();
        let mut k = vec![F::zero(); n * n];
        for &(i, j, kij) in edges {
            if i >= n || j >= n || i == j {
                return Err(GridError::BadEdge { i, j });
            }
            if k[i * n + j] != F::zero() {
                return Err(GridError::DuplicateEdge { i, j });
            }
            k[i * n + j] = kij;
            k[j * n + i] = kij;
        }
        Self::new(inertia, power, damping, k)
    }

    /// Isolated single machine.
    pub fn single_node(inertia: F, power: F, damping: F) -> Result<Self, GridError> {
        Self::new(vec![inertia], vec![power], vec![damping], vec![F::zero()])
    }

    pub fn n(&self) -> usize {
        self.inertia.len()
    }

    pub fn inertia(&self) -> &[F] {
        &self.inertia
    }

    pub fn power(&self) -> &[F] {
        &self.power
    }

    pub fn damping(&self) -> &[F] {
        &self.damping
    }

    pub fn coupling(&self, i: usize, j: usize) -> F {
        self.coupling[i * self.n() + j]
    }

    pub fn total_inertia(&self) -> F {
        self.inertia.iter().copied().sum()
    }

    /// The shared damping-to-inertia ratio, if it is homogeneous to within
    /// 1e-12 relative.
    pub fn homogeneous_gamma(&self) -> Option<F> {
        let g0 = self.damping[0] / self.inertia[0];
        for i in 1..self.n() {
            let gi = self.damping[i] / self.inertia[i];
            let diff = (gi - g0).abs().to_f64().unwrap();
            if diff > GAMMA_HOMOGENEITY_TOL * g0.to_f64().unwrap().abs().max(1.0) {
                return None;
            }
        }
        Some(g0)
    }

    pub fn max_gamma(&self) -> F {
        let mut g = self.damping[0] / self.inertia[0];
        for i in 1..self.n() {
            let gi = self.damping[i] / self.inertia[i];
            if gi > g {
                g = gi;
            }
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind<F> {
    Gaussian,
    Stable { alpha: F },
}

/// Per-node fluctuating power feed: one noise family shared by all nodes,
/// individual amplitudes.
#[derive(Debug, Clone)]
pub struct NoiseSpec<F> {
    pub kind: NoiseKind<F>,
    pub amplitudes: Vec<F>,
}

impl<F: Real> NoiseSpec<F> {
    pub fn gaussian(amplitudes: Vec<F>) -> Result<Self, SimError> {
        Self::validate_amplitudes(&amplitudes)?;
        Ok(Self {
            kind: NoiseKind::Gaussian,
            amplitudes,
        })
    }

    pub fn stable(alpha: F, amplitudes: Vec<F>) -> Result<Self, SimError> {
        if !(alpha > F::zero() && alpha <= F::from(2.0).unwrap()) {
            return Err(SimError::BadParam("stable alpha must lie in (0, 2]"));
        }
        Self::validate_amplitudes(&amplitudes)?;
        Ok(Self {
            kind: NoiseKind::Stable { alpha },
            amplitudes,
        })
    }

    /// Noiseless spec, for deterministic runs.
    pub fn none(n: usize) -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            amplitudes: vec![F::zero(); n],
        }
    }

    fn validate_amplitudes(amps: &[F]) -> Result<(), SimError> {
        if amps.iter().any(|a| !(a.is_finite() && *a >= F::zero())) {
            return Err(SimError::BadParam("noise amplitudes must be >= 0"));
        }
        Ok(())
    }
}

/// Time stepping, seeding and recording controls shared by the network and
/// bulk integrators.
#[derive(Debug, Clone)]
pub struct SimParams<F> {
    pub dt_s: F,
    /// Post-burn-in integration steps.
    pub steps: usize,
    pub seed: u64,
    /// Burn-in duration discarded before recording; defaults to 10/gamma.
    pub burn_in_s: Option<F>,
    /// Record every `record_stride`-th step (1 = every step).
    pub record_stride: usize,
    /// Initial state (theta, omega); defaults to the flat start.
    pub initial: Option<(Vec<F>, Vec<F>)>,
}

impl<F: Real> SimParams<F> {
    pub fn new(dt_s: F, steps: usize, seed: u64) -> Self {
        Self {
            dt_s,
            steps,
            seed,
            burn_in_s: None,
            record_stride: 1,
            initial: None,
        }
    }

    pub fn with_burn_in(mut self, burn_in_s: F) -> Self {
        self.burn_in_s = Some(burn_in_s);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_initial(mut self, theta: Vec<F>, omega: Vec<F>) -> Self {
        self.initial = Some((theta, omega));
        self
    }
}

/// Recorded trajectories, one row per node.
#[derive(Debug, Clone)]
pub struct SimResult<F> {
    pub dt_s: F,
    pub record_stride: usize,
    pub seed: u64,
    pub theta: Vec<Vec<F>>,
    pub omega: Vec<Vec<F>>,
}

impl<F: Real> SimResult<F> {
    pub fn n_nodes(&self) -> usize {
        self.omega.len()
    }

    pub fn n_recorded(&self) -> usize {
        self.omega.first().map_or(0, Vec::len)
    }

    /// Spacing of recorded samples in seconds.
    pub fn sample_dt_s(&self) -> F {
        self.dt_s * F::from(self.record_stride).unwrap()
    }
}

/// Inertia-weighted bulk angular velocity derived from a network run.
#[derive(Debug, Clone)]
pub struct BulkSeries<F> {
    pub dt_s: F,
    pub record_stride: usize,
    pub values: Vec<F>,
    /// False when the grid's damping-to-inertia ratio is inhomogeneous, in
    /// which case the one-dimensional reduction is not exact.
    pub exact_reduction: bool,
}

/// One standard-normal draw via Box-Muller. Deterministic: exactly two
/// uniforms consumed per call.
pub fn standard_normal<F: Real, R: Rng + ?Sized>(rng: &mut R) -> F {
    let u1 = uniform_open01(rng);
    let u2 = uniform_open01(rng);
    let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    F::from_f64_lossy(z)
}

fn uniform_open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// One draw from the stable law S(alpha, beta, scale, 0) by the
/// Chambers-Mallows-Stuck transform, in the parameterization continuous in
/// alpha. Panics if alpha is outside (0, 2], |beta| > 1 or scale <= 0.
pub fn sample_stable<F: Real, R: Rng + ?Sized>(alpha: F, beta: F, scale: F, rng: &mut R) -> F {
    let a = alpha.to_f64().unwrap();
    let b = beta.to_f64().unwrap();
    let c = scale.to_f64().unwrap();
    assert!(a > 0.0 && a <= 2.0, "alpha must lie in (0, 2]");
    assert!((-1.0..=1.0).contains(&b), "beta must lie in [-1, 1]");
    assert!(c > 0.0, "scale must be positive");

    let u = uniform_open01(rng);
    let w = -uniform_open01(rng).ln();
    let v = std::f64::consts::PI * (u - 0.5);

    let x = if (a - 1.0).abs() < 1e-4 {
        let xi = std::f64::consts::FRAC_PI_2 + b * v;
        let z = (xi * v.tan() - b * ((std::f64::consts::FRAC_PI_2 * w * v.cos()) / xi).ln()) * 2.0
            / std::f64::consts::PI;
        c * z + 2.0 / std::f64::consts::PI * b * c * c.ln()
    } else {
        let tan_half = (std::f64::consts::FRAC_PI_2 * a).tan();
        let bt = b * tan_half;
        let theta0 = bt.atan() / a;
        let s = (1.0 + bt * bt).powf(1.0 / (2.0 * a));
        let phi = a * (v + theta0);
        let z = s * phi.sin() / v.cos().powf(1.0 / a) * ((v - phi).cos() / w).powf((1.0 - a) / a);
        c * (z - bt)
    };
    F::from_f64_lossy(x)
}

/// Integrate the full network. Trajectories start at the flat state unless
/// `params.initial` overrides it; the burn-in segment is discarded.
pub fn simulate<F: Real>(
    grid: &GridModel<F>,
    noise: &NoiseSpec<F>,
    params: &SimParams<F>,
) -> Result<SimResult<F>, SimError> {
    let n = grid.n();
    if noise.amplitudes.len() != n {
        return Err(SimError::NoiseMismatch {
            expected: n,
            got: noise.amplitudes.len(),
        });
    }
    let dt = params.dt_s;
    if dt.is_nan() || dt <= F::zero() {
        return Err(SimError::BadParam("dt must be positive"));
    }
    let dt_gamma = (dt * grid.max_gamma()).to_f64().unwrap();
    if dt_gamma >= 0.1 {
        return Err(SimError::UnstableDt { dt_gamma });
    }
    if params.steps == 0 {
        return Err(SimError::BadParam("steps must be >= 1"));
    }
    if params.record_stride == 0 {
        return Err(SimError::BadParam("record_stride must be >= 1"));
    }

    let burn_in_s = params
        .burn_in_s
        .unwrap_or_else(|| F::from(10.0).unwrap() / grid.max_gamma());
    let burn_steps = (burn_in_s / dt).ceil().to_f64().unwrap() as usize;

    let (mut theta, mut omega) = match &params.initial {
        Some((t0, w0)) => {
            if t0.len() != n || w0.len() != n {
                return Err(SimError::BadParam("initial state has wrong dimension"));
            }
            (t0.clone(), w0.clone())
        }
        None => (vec![F::zero(); n], vec![F::zero(); n]),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let incr = NoiseIncrements::prepare(noise, dt);

    let n_rec = params.steps / params.record_stride;
    let mut rec_theta: Vec<Vec<F>> = vec![Vec::with_capacity(n_rec); n];
    let mut rec_omega: Vec<Vec<F>> = vec![Vec::with_capacity(n_rec); n];

    let mut d_omega = vec![F::zero(); n];
    let total_steps = burn_steps + params.steps;
    for step in 0..total_steps {
        for i in 0..n {
            let mut coupling_flow = F::zero();
            for j in 0..n {
                let k = grid.coupling[i * n + j];
                if k != F::zero() {
                    coupling_flow += k * (theta[j] - theta[i]).sin();
                }
            }
            let drift =
                dt * (grid.power[i] + coupling_flow - grid.damping[i] * omega[i]) / grid.inertia[i];
            d_omega[i] = drift + incr.draw(i, &mut rng) / grid.inertia[i];
        }
        for i in 0..n {
            theta[i] += dt * omega[i];
            omega[i] += d_omega[i];
            if omega[i].abs() > F::from(OMEGA_LIMIT).unwrap() {
                return Err(SimError::Divergence { step });
            }
        }
        if step >= burn_steps {
            let post = step - burn_steps;
            if (post + 1).is_multiple_of(params.record_stride) {
                for i in 0..n {
                    rec_theta[i].push(theta[i]);
                    rec_omega[i].push(omega[i]);
                }
            }
        }
    }

    Ok(SimResult {
        dt_s: dt,
        record_stride: params.record_stride,
        seed: params.seed,
        theta: rec_theta,
        omega: rec_omega,
    })
}

/// Per-step noise increment generator shared by both integrators.
enum NoiseIncrements<F> {
    Gaussian { scales: Vec<F> },
    Stable { alpha: F, scales: Vec<F> },
}

impl<F: Real> NoiseIncrements<F> {
    fn prepare(noise: &NoiseSpec<F>, dt: F) -> Self {
        match noise.kind {
            NoiseKind::Gaussian => NoiseIncrements::Gaussian {
                scales: noise.amplitudes.iter().map(|&a| a * dt.sqrt()).collect(),
            },
            NoiseKind::Stable { alpha } => {
                // amplitude sigma_s enters with stable scale sigma_s/sqrt(2),
                // increments scale as dt^(1/alpha)
                let sqrt2 = F::from(std::f64::consts::SQRT_2).unwrap();
                let dt_pow = dt.powf(F::one() / alpha);
                NoiseIncrements::Stable {
                    alpha,
                    scales: noise
                        .amplitudes
                        .iter()
                        .map(|&a| a / sqrt2 * dt_pow)
                        .collect(),
                }
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, node: usize, rng: &mut R) -> F {
        match self {
            NoiseIncrements::Gaussian { scales } => standard_normal::<F, R>(rng) * scales[node],
            NoiseIncrements::Stable { alpha, scales } => {
                sample_stable(*alpha, F::zero(), F::one(), rng) * scales[node]
            }
        }
    }
}

/// Inertia-weighted average of the recorded angular velocities.
pub fn bulk_velocity<F: Real>(sim: &SimResult<F>, grid: &GridModel<F>) -> BulkSeries<F> {
    let total = grid.total_inertia();
    let weights: Vec<F> = grid.inertia.iter().map(|&m| m / total).collect();
    let n_rec = sim.n_recorded();
    let mut values = Vec::with_capacity(n_rec);
    for k in 0..n_rec {
        let mut acc = F::zero();
        for (i, w) in weights.iter().enumerate() {
            acc += *w * sim.omega[i][k];
        }
        values.push(acc);
    }
    BulkSeries {
        dt_s: sim.dt_s,
        record_stride: sim.record_stride,
        values,
        exact_reduction: grid.homogeneous_gamma().is_some(),
    }
}

/// Aggregated noise feeding the one-dimensional bulk equation.
#[derive(Debug, Clone, Copy)]
pub enum AggregateNoise<F> {
    /// Combined Gaussian amplitude sqrt(sum sigma_i^2).
    Gaussian { sigma: F },
    /// Combined stable amplitude (sum sigma_s_i^alpha)^(1/alpha).
    Stable { alpha: F, sigma_s: F },
}

/// Reduced bulk model d/dt w = -gamma w + sum(Gamma_i)/sum(M_i).
#[derive(Debug, Clone, Copy)]
pub struct BulkModel<F> {
    pub gamma: F,
    pub total_inertia: F,
    pub noise: AggregateNoise<F>,
}

impl<F: Real> BulkModel<F> {
    /// Aggregate a homogeneous-ratio grid; errors when the ratio varies.
    pub fn from_grid(grid: &GridModel<F>, noise: &NoiseSpec<F>) -> Result<Self, SimError> {
        let gamma = grid
            .homogeneous_gamma()
            .ok_or(SimError::InhomogeneousGamma)?;
        if noise.amplitudes.len() != grid.n() {
            return Err(SimError::NoiseMismatch {
                expected: grid.n(),
                got: noise.amplitudes.len(),
            });
        }
        let agg = match noise.kind {
            NoiseKind::Gaussian => AggregateNoise::Gaussian {
                sigma: noise.amplitudes.iter().map(|&a| a * a).sum::<F>().sqrt(),
            },
            NoiseKind::Stable { alpha } => AggregateNoise::Stable {
                alpha,
                sigma_s: noise
                    .amplitudes
                    .iter()
                    .map(|&a| a.powf(alpha))
                    .sum::<F>()
                    .powf(F::one() / alpha),
            },
        };
        Ok(Self {
            gamma,
            total_inertia: grid.total_inertia(),
            noise: agg,
        })
    }
}

/// Integrate the bulk equation directly. Statistically indistinguishable
/// from `bulk_velocity(simulate(..))` for homogeneous-ratio grids.
pub fn simulate_bulk<F: Real>(
    model: &BulkModel<F>,
    params: &SimParams<F>,
    omega0: F,
) -> Result<Vec<F>, SimError> {
    let dt = params.dt_s;
    if dt.is_nan() || dt <= F::zero() {
        return Err(SimError::BadParam("dt must be positive"));
    }
    let dt_gamma = (dt * model.gamma).to_f64().unwrap();
    if dt_gamma >= 0.1 {
        return Err(SimError::UnstableDt { dt_gamma });
    }
    if params.steps == 0 {
        return Err(SimError::BadParam("steps must be >= 1"));
    }
    if params.record_stride == 0 {
        return Err(SimError::BadParam("record_stride must be >= 1"));
    }
    let burn_in_s = params
        .burn_in_s
        .unwrap_or_else(|| F::from(10.0).unwrap() / model.gamma);
    let burn_steps = (burn_in_s / dt).ceil().to_f64().unwrap() as usize;

    let spec = match model.noise {
        AggregateNoise::Gaussian { sigma } => NoiseSpec {
            kind: NoiseKind::Gaussian,
            amplitudes: vec![sigma],
        },
        AggregateNoise::Stable { alpha, sigma_s } => NoiseSpec {
            kind: NoiseKind::Stable { alpha },
            amplitudes: vec![sigma_s],
        },
    };
    let incr = NoiseIncrements::prepare(&spec, dt);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut w = omega0;
    let mut values = Vec::with_capacity(params.steps / params.record_stride);
    let total_steps = burn_steps + params.steps;
    for step in 0..total_steps {
        w += -model.gamma * w * dt + incr.draw(0, &mut rng) / model.total_inertia;
        if w.abs() > F::from(OMEGA_LIMIT).unwrap() {
            return Err(SimError::Divergence { step });
        }
        if step >= burn_steps {
            let post = step - burn_steps;
            if (post + 1).is_multiple_of(params.record_stride) {
                values.push(w);
            }
        }
    }
    Ok(values)
}

/// Derive a per-trajectory seed for ensemble runs (splitmix64 step).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
