//! Nanomagnet switching statistics: gate energy and delay to error rate.
//!
//! Three routes are provided. The closed form is fast and used for pricing
//! netlists; the Fokker-Planck solver and the stochastic LLG Monte Carlo are
//! independent oracles for it.

mod closed_form;
mod fokker_planck;
mod llg;
mod params;
mod pricing;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use closed_form::{closed_form_error_rate, iso_k_error_rate, max_error_rate_at};
pub use fokker_planck::{
    fp_error_rate, fp_error_rate_at, fp_evolve, fp_initial_state, FpConfig, FpState, TimeScheme,
};
pub use llg::{llg_monte_carlo, InitialAngle, LlgConfig, LlgEstimate};
pub use params::{DeviceParams, BOHR_MAGNETON, BOLTZMANN, DEFAULT_I_CRIT, GYROMAGNETIC, MU0};
pub use pricing::{
    energy_for_error_rate, error_rate_from_energy_delay, error_rate_with_model, fit_i_crit,
    gate_energy, solve_operating_point, supply_current, ErrorModel, FixedQuantity, OperatingPoint,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error("overdrive i = {i} is outside the closed form's validity region (requires I_supply/I_crit > 1)")]
    Overdrive { i: f64 },
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error("invalid device parameter: {0}")]
    InvalidParameter(String),
    #[error("parameter file: {0}")]
    Parse(String),
    #[error("target error rate {target} is unreachable: {reason}")]
    Unreachable { target: f64, reason: String },
    #[error("{kind} gates have no switching device")]
    NotADevice { kind: String },
    #[error("Fokker-Planck step became unstable at tau = {tau:.4}: {detail}; try dt <= {suggested_dt:.2e} or the implicit scheme")]
    Unstable {
        tau: f64,
        detail: String,
        suggested_dt: f64,
    },
    #[error("LLG integration lost unit norm (|m| - 1 = {drift:.2e}); reduce the time step")]
    NormDrift { drift: f64 },
}

/// Operating condition of one switching event.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveCondition {
    /// Overdrive I_supply / I_crit.
    pub i: f64,
    /// External field in units of H_k.
    pub h: f64,
    /// Gate on-time in seconds.
    pub t_g: f64,
}

impl DriveCondition {
    pub fn new(i: f64, t_g: f64) -> Self {
        Self { i, h: 0.0, t_g }
    }
}
