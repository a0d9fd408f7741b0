//! Finite-volume solver for the polar-angle Fokker-Planck equation
//!
//!   ∂ρ/∂τ = (1/sinθ) ∂/∂θ [ sinθ ( ρ ∂U/∂θ + D ∂ρ/∂θ ) ]
//!
//! with U(θ) = sin²θ/2 + (i − h) cosθ and D = kT/(2E_b). The diffusion acts
//! on ∂ρ/∂θ; ρ is a density over solid angle, so masses carry the sinθ
//! Jacobian. Cells are uniform in θ, fluxes use Scharfetter-Gummel
//! upwinding (exact for the Boltzmann equilibrium) and both poles are
//! zero-flux faces.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::{DeviceError, DeviceParams, DriveCondition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    /// Backward Euler, unconditionally stable.
    Implicit,
    /// Forward Euler; kept for comparison and to exercise the stability guard.
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpConfig {
    pub grid_size: usize,
    pub dt: f64,
    pub scheme: TimeScheme,
}

impl Default for FpConfig {
    fn default() -> Self {
        Self {
            grid_size: 512,
            dt: 1e-3,
            scheme: TimeScheme::Implicit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpState {
    /// Cell centres, uniform on (0, π).
    pub theta_grid: Vec<f64>,
    pub rho: Vec<f64>,
    pub tau: f64,
}

impl FpState {
    /// Solid angle (per 2π) covered by each cell: cos θ₋ − cos θ₊.
    pub fn cell_weights(&self) -> Vec<f64> {
        weights(self.theta_grid.len())
    }

    /// ∫ρ sinθ dθ over the whole sphere.
    pub fn mass(&self) -> f64 {
        self.rho
            .iter()
            .zip(self.cell_weights())
            .map(|(r, w)| r * w)
            .sum()
    }
}

fn weights(n: usize) -> Vec<f64> {
    let h = PI / n as f64;
    (0..n)
        .map(|j| (j as f64 * h).cos() - ((j + 1) as f64 * h).cos())
        .collect()
}

fn centres(n: usize) -> Vec<f64> {
    let h = PI / n as f64;
    (0..n).map(|j| (j as f64 + 0.5) * h).collect()
}

/// Boltzmann distribution about θ = 0 truncated to the upper hemisphere.
pub fn fp_initial_state(params: &DeviceParams, grid_size: usize) -> FpState {
    let delta = params.barrier_kt();
    let theta = centres(grid_size);
    let w = weights(grid_size);
    let mut rho: Vec<f64> = theta
        .iter()
        .map(|&t| {
            if t < FRAC_PI_2 {
                (-delta * t.sin().powi(2)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let mass: f64 = rho.iter().zip(&w).map(|(r, w)| r * w).sum();
    rho.iter_mut().for_each(|r| *r /= mass);
    FpState {
        theta_grid: theta,
        rho,
        tau: 0.0,
    }
}

/// x / (eˣ − 1), continuous at 0.
fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

/// Face coefficients: flux through face j+½ is `fwd[j]·ρ_j − bwd[j]·ρ_{j+1}`,
/// already multiplied by sinθ at the face.
fn face_coefficients(
    params: &DeviceParams,
    drive: &DriveCondition,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let h = PI / n as f64;
    let d = 0.5 / params.barrier_kt();
    let bias = drive.i - drive.h;
    let potential = |t: f64| (0.5 * t.sin().powi(2) + bias * t.cos()) / d;
    let theta = centres(n);
    let mut fwd = vec![0.0; n - 1];
    let mut bwd = vec![0.0; n - 1];
    for j in 0..n - 1 {
        let dp = potential(theta[j + 1]) - potential(theta[j]);
        let s = ((j + 1) as f64 * h).sin() * d / h;
        fwd[j] = s * bernoulli(dp);
        bwd[j] = s * bernoulli(-dp);
    }
    (fwd, bwd)
}

/// Evolve the initial state under `drive`, returning one state per
/// requested checkpoint (dimensionless τ, non-decreasing).
pub fn fp_evolve(
    params: &DeviceParams,
    drive: &DriveCondition,
    config: &FpConfig,
    checkpoints: &[f64],
) -> Result<Vec<FpState>, DeviceError> {
    params.validate()?;
    if config.grid_size < 64 {
        return Err(DeviceError::InvalidDrive(format!(
            "grid_size must be >= 64, got {}",
            config.grid_size
        )));
    }
    if !(config.dt > 0.0) {
        return Err(DeviceError::InvalidDrive("dt must be positive".into()));
    }
    if checkpoints.windows(2).any(|w| w[1] < w[0]) || checkpoints.first().is_some_and(|&t| t < 0.0)
    {
        return Err(DeviceError::InvalidDrive(
            "checkpoints must be non-negative and non-decreasing".into(),
        ));
    }
    let n = config.grid_size;
    let w = weights(n);
    let (fwd, bwd) = face_coefficients(params, drive, n);
    let mut state = fp_initial_state(params, n);
    let stable_dt = (0..n)
        .map(|j| {
            let out = if j + 1 < n { fwd[j] } else { 0.0 } + if j > 0 { bwd[j - 1] } else { 0.0 };
            w[j] / out.max(f64::MIN_POSITIVE)
        })
        .fold(f64::INFINITY, f64::min);

    let mut out = Vec::with_capacity(checkpoints.len());
    let mut scratch = Tridiagonal::new(n);
    for &target in checkpoints {
        let span = target - state.tau;
        let steps = (span / config.dt).ceil() as usize;
        if steps > 0 {
            let dt = span / steps as f64;
            for _ in 0..steps {
                match config.scheme {
                    TimeScheme::Implicit => {
                        scratch.implicit_step(&mut state.rho, &w, &fwd, &bwd, dt)
                    }
                    TimeScheme::Explicit => explicit_step(&mut state.rho, &w, &fwd, &bwd, dt),
                }
                state.tau += dt;
                check_health(&state, &w, stable_dt)?;
            }
        }
        state.tau = target;
        out.push(state.clone());
    }
    Ok(out)
}

fn check_health(state: &FpState, w: &[f64], stable_dt: f64) -> Result<(), DeviceError> {
    let min = state.rho.iter().copied().fold(f64::INFINITY, f64::min);
    let mass: f64 = state.rho.iter().zip(w).map(|(r, w)| r * w).sum();
    let detail = if !(min >= -1e-9) {
        format!("density fell to {min:.3e}")
    } else if !((mass - 1.0).abs() <= 1e-4) {
        format!("mass drifted to {mass:.8}")
    } else {
        return Ok(());
    };
    Err(DeviceError::Unstable {
        tau: state.tau,
        detail,
        suggested_dt: 0.5 * stable_dt,
    })
}

fn explicit_step(rho: &mut [f64], w: &[f64], fwd: &[f64], bwd: &[f64], dt: f64) {
    let n = rho.len();
    let flux: Vec<f64> = (0..n - 1)
        .map(|j| fwd[j] * rho[j] - bwd[j] * rho[j + 1])
        .collect();
    for j in 0..n {
        let inflow = if j > 0 { flux[j - 1] } else { 0.0 };
        let outflow = if j + 1 < n { flux[j] } else { 0.0 };
        rho[j] += dt * (inflow - outflow) / w[j];
    }
}

struct Tridiagonal {
    c: Vec<f64>,
    d: Vec<f64>,
}

impl Tridiagonal {
    fn new(n: usize) -> Self {
        Self {
            c: vec![0.0; n],
            d: vec![0.0; n],
        }
    }

    /// Backward Euler step, solved with the Thomas algorithm. The matrix is
    /// an M-matrix with unit column sums (after weighting), so mass and
    /// positivity are preserved to round-off.
    fn implicit_step(&mut self, rho: &mut [f64], w: &[f64], fwd: &[f64], bwd: &[f64], dt: f64) {
        let n = rho.len();
        for j in 0..n {
            let lower = if j > 0 { -fwd[j - 1] } else { 0.0 };
            let upper = if j + 1 < n { -bwd[j] } else { 0.0 };
            let diag = w[j] / dt
                + if j + 1 < n { fwd[j] } else { 0.0 }
                + if j > 0 { bwd[j - 1] } else { 0.0 };
            let rhs = w[j] / dt * rho[j];
            if j == 0 {
                self.c[j] = upper / diag;
                self.d[j] = rhs / diag;
            } else {
                let m = diag - lower * self.c[j - 1];
                self.c[j] = upper / m;
                self.d[j] = (rhs - lower * self.d[j - 1]) / m;
            }
        }
        rho[n - 1] = self.d[n - 1];
        for j in (0..n - 1).rev() {
            rho[j] = self.d[j] - self.c[j] * rho[j + 1];
        }
    }
}

/// Probability of not having switched: mass in the starting hemisphere
/// θ < π/2. With `jacobian = false` the sinθ factor is dropped and the
/// result is normalized by the total of ρ instead.
pub fn fp_error_rate(state: &FpState, jacobian: bool) -> f64 {
    let n = state.theta_grid.len();
    let w = if jacobian {
        state.cell_weights()
    } else {
        vec![PI / n as f64; n]
    };
    let (mut upper, mut total) = (0.0, 0.0);
    for ((&t, &r), &wj) in state.theta_grid.iter().zip(&state.rho).zip(&w) {
        let m = r.max(0.0) * wj;
        total += m;
        if t < FRAC_PI_2 {
            upper += m;
        }
    }
    if total > 0.0 {
        (upper / total).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// ε after `drive.t_g` seconds.
pub fn fp_error_rate_at(
    params: &DeviceParams,
    drive: &DriveCondition,
    config: &FpConfig,
) -> Result<f64, DeviceError> {
    let tau = params.tau_rate() * drive.t_g;
    let states = fp_evolve(params, drive, config, &[tau])?;
    Ok(fp_error_rate(&states[0], true))
}
