//! Stochastic macrospin (LLG with Slonczewski torque) Monte Carlo.
//!
//! Time is measured in units of 1/(γμ₀H_k) and fields in units of H_k. The
//! easy axis is ẑ, the magnet starts near +ẑ and the injected spin
//! polarization points along −ẑ, so a successful switch ends with m_z < 0.
//! Overdrive i scales the damping-like torque so that i = 1 is the
//! zero-temperature instability threshold.
//!
//! The stochastic equation is integrated with the implicit midpoint rule,
//! which converges to the Stratonovich solution and preserves |m|
//! exactly up to the fixed-point tolerance.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DeviceError, DeviceParams, DriveCondition};
use crate::stats::Proportion;

type Vec3 = [f64; 3];

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialAngle {
    /// Thermal equilibrium in the upper well, exp(−Δ sin²θ) over solid angle.
    Boltzmann,
    /// Fixed polar angle in radians with uniform azimuth.
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlgConfig {
    /// Minimum number of steps per gate time.
    pub steps_per_gate: usize,
    /// Largest allowed step in units of 1/(γμ₀H_k).
    pub max_step: f64,
    pub initial: InitialAngle,
    /// Disable the thermal field (zero-temperature dynamics).
    pub noiseless: bool,
}

impl Default for LlgConfig {
    fn default() -> Self {
        Self {
            steps_per_gate: 2000,
            max_step: 0.01,
            initial: InitialAngle::Boltzmann,
            noiseless: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlgEstimate {
    pub epsilon: f64,
    pub interval: Proportion,
}

impl LlgEstimate {
    pub fn std_error(&self) -> f64 {
        self.interval.std_error()
    }
}

/// Fraction of `trials` that have not crossed the equator by `drive.t_g`.
/// Trial k draws from its own ChaCha stream (seed, k), so the estimate does
/// not depend on how rayon schedules the work.
pub fn llg_monte_carlo(
    params: &DeviceParams,
    drive: &DriveCondition,
    trials: usize,
    seed: u64,
    config: &LlgConfig,
) -> Result<LlgEstimate, DeviceError> {
    params.validate()?;
    if trials < 100 {
        return Err(DeviceError::InvalidDrive(format!(
            "at least 100 trials required, got {trials}"
        )));
    }
    if !(drive.t_g >= 0.0) || !(drive.i >= 0.0) {
        return Err(DeviceError::InvalidDrive(
            "drive requires i >= 0 and t_g >= 0".into(),
        ));
    }
    let span = params.precession_rate() * drive.t_g;
    let min_step = params.precession_rate() * 1e-15;
    let mut steps = config.steps_per_gate.max(1);
    if span / steps as f64 > config.max_step {
        steps = (span / config.max_step).ceil() as usize;
    }
    let dt = (span / steps as f64).max(min_step);
    let steps = if span > 0.0 {
        (span / dt).round().max(1.0) as usize
    } else {
        0
    };

    let failures: Result<Vec<bool>, DeviceError> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let m = run_trial(params, drive, config, dt, steps, &mut rng)?;
            Ok(m[2] > 0.0)
        })
        .collect();
    let errors = failures?.into_iter().filter(|&f| f).count() as u64;
    let interval = Proportion::wilson(errors, trials as u64, 1.96);
    Ok(LlgEstimate {
        epsilon: interval.rate,
        interval,
    })
}

fn initial_direction(params: &DeviceParams, initial: InitialAngle, rng: &mut impl Rng) -> Vec3 {
    let cos_theta = match initial {
        InitialAngle::Fixed(theta) => theta.cos(),
        InitialAngle::Boltzmann => {
            // s = 1 − cosθ; target density ∝ exp(−Δ s(2 − s)) on [0, 1].
            // Propose from exp(−Δ s) and accept with exp(−Δ s(1 − s)).
            let delta = params.barrier_kt();
            let tail = -(-delta).exp_m1();
            loop {
                let u: f64 = rng.gen();
                let s = -(-u * tail).ln_1p() / delta;
                if rng.gen::<f64>() < (-delta * s * (1.0 - s)).exp() {
                    break 1.0 - s;
                }
            }
        }
    };
    let phi = 2.0 * PI * rng.gen::<f64>();
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    [sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta]
}

fn run_trial(
    params: &DeviceParams,
    drive: &DriveCondition,
    config: &LlgConfig,
    dt: f64,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec3, DeviceError> {
    let alpha = params.alpha;
    let damping = 1.0 + alpha * alpha;
    let torque = alpha * drive.i;
    let noise = if config.noiseless {
        0.0
    } else {
        (alpha / (params.barrier_kt() * dt)).sqrt()
    };
    let p = [0.0, 0.0, -1.0];

    let mut m = initial_direction(params, config.initial, rng);
    for _ in 0..steps {
        let h_th: Vec3 = if noise > 0.0 {
            [
                noise * rng.sample::<f64, _>(StandardNormal),
                noise * rng.sample::<f64, _>(StandardNormal),
                noise * rng.sample::<f64, _>(StandardNormal),
            ]
        } else {
            [0.0; 3]
        };
        // dm/dt = m × v(m), with
        // v = −[h + α m×h + αi m×p − α²i p]/(1+α²), h = (m_z + h_ext) ẑ + h_th.
        let rate = |mm: Vec3| -> Vec3 {
            let h = [h_th[0], h_th[1], mm[2] + drive.h + h_th[2]];
            let mh = cross(mm, h);
            let mp = cross(mm, p);
            let v: Vec3 = std::array::from_fn(|k| {
                -(h[k] + alpha * mh[k] + torque * mp[k] - alpha * torque * p[k]) / damping
            });
            cross(mm, v)
        };
        let mut next = m;
        for _ in 0..20 {
            let mid: Vec3 = std::array::from_fn(|k| 0.5 * (m[k] + next[k]));
            let f = rate(mid);
            let candidate: Vec3 = std::array::from_fn(|k| m[k] + dt * f[k]);
            let change = (0..3)
                .map(|k| (candidate[k] - next[k]).abs())
                .fold(0.0, f64::max);
            next = candidate;
            if change < 1e-13 {
                break;
            }
        }
        let len = norm(next);
        if (len - 1.0).abs() > 1e-6 {
            return Err(DeviceError::NormDrift { drift: len - 1.0 });
        }
        m = next.map(|c| c / len);
    }
    Ok(m)
}
