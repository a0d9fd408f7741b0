//! Statistical error compensation: the fusion rule that cancels sparse
//! main-block errors using a cheap estimate, diagnostics that say whether an
//! error PMF is sparse enough for it, and the hardware composition of main
//! block, estimator and fusion stage.

mod compose;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noisy_sim::{BitErrorProfile, ErrorPmf};

pub use compose::{
    compose_sisc, EcConfig, Region, RegionCounts, SiscArchitecture, TapBank, EC_WARN_RATIO,
};

#[derive(Debug, Error)]
pub enum SiscError {
    #[error("invalid fusion parameters: {0}")]
    Params(String),
    #[error("composition failed: {0}")]
    Compose(String),
    #[error(transparent)]
    Netlist(#[from] crate::netlist::NetlistError),
    #[error(transparent)]
    Device(#[from] crate::device_model::DeviceError),
    #[error(transparent)]
    Shape(#[from] crate::delay_shaping::ShapeError),
}

/// Output precision `l` and peak count `p_k`; the correction quantum is
/// 2^(l − ⌈log₂ p_k⌉).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionParams {
    pub l: u32,
    pub p_k: u64,
}

impl FusionParams {
    pub fn new(l: u32, p_k: u64) -> Result<Self, SiscError> {
        let p = Self { l, p_k };
        if p_k == 0 {
            return Err(SiscError::Params("p_k must be at least 1".into()));
        }
        if !(1..=62).contains(&l) {
            return Err(SiscError::Params(format!("precision {l} outside 1..=62")));
        }
        if p.s() > l {
            return Err(SiscError::Params(format!(
                "{p_k} peaks need more than {l} bits"
            )));
        }
        Ok(p)
    }

    /// ⌈log₂ p_k⌉.
    pub fn s(&self) -> u32 {
        if self.p_k <= 1 {
            0
        } else {
            64 - (self.p_k - 1).leading_zeros()
        }
    }

    pub fn step(&self) -> i64 {
        1i64 << (self.l - self.s())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fused {
    pub y_hat: i64,
    pub eta_hat: i64,
}

/// η̂ = step·⌊(y_a − y_e)/step + ½⌋ and ŷ = y_a − η̂, in exact integers.
/// Halfway differences round up.
pub fn fuse(y_a: i64, y_e: i64, params: &FusionParams) -> Fused {
    let step = params.step();
    let d = y_a - y_e;
    let eta_hat = step * (2 * d + step).div_euclid(2 * step);
    Fused {
        y_hat: y_a - eta_hat,
        eta_hat,
    }
}

/// [`fuse`] as the l-bit hardware computes it: everything modulo 2^l, the
/// result read back as two's complement.
pub fn fuse_wrapping(y_a: i64, y_e: i64, params: &FusionParams) -> Fused {
    let l = params.l;
    let wrap = |v: i64| -> i64 {
        let m = v.rem_euclid(1i64 << l);
        if m >= 1i64 << (l - 1) {
            m - (1i64 << l)
        } else {
            m
        }
    };
    let d = wrap(y_a - y_e);
    let f = fuse(d, 0, params);
    Fused {
        y_hat: wrap(y_a - f.eta_hat),
        eta_hat: wrap(f.eta_hat),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    /// Values carrying more than δ of the mass, ascending.
    pub peaks: Vec<i64>,
    pub peak_count: usize,
    /// Smallest gap between two peaks (`None` with fewer than two).
    pub min_separation: Option<i64>,
    /// Mass not on a peak.
    pub tail_mass: f64,
}

impl SparsityReport {
    /// At most p_k peaks, spaced at least one correction quantum apart.
    pub fn is_sparse(&self, params: &FusionParams) -> bool {
        self.peak_count >= 1
            && self.peak_count as u64 <= params.p_k
            && self.min_separation.map_or(true, |d| d >= params.step())
    }
}

pub fn pmf_sparsity(pmf: &ErrorPmf, delta: f64) -> SparsityReport {
    let peaks: Vec<i64> = pmf
        .iter()
        .filter(|&(_, p)| p > delta)
        .map(|(v, _)| v)
        .collect();
    let on_peaks: f64 = peaks.iter().map(|&v| pmf.probability(v)).sum();
    let min_separation = peaks.windows(2).map(|w| w[1] - w[0]).min();
    SparsityReport {
        peak_count: peaks.len(),
        min_separation,
        tail_mass: (1.0 - on_peaks).max(0.0),
        peaks,
    }
}

/// Pr{η ≡ 0 (mod step)}: the share of errors the fusion rule can cancel
/// outright. Used as the scalar sparsity score.
pub fn lattice_mass(pmf: &ErrorPmf, step: i64) -> f64 {
    pmf.iter()
        .filter(|&(v, _)| v.rem_euclid(step) == 0)
        .map(|(_, p)| p)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitRateCheck {
    pub pass: bool,
    /// min MSB rate / max LSB rate (infinite when the LSBs never flip).
    pub margin: f64,
    pub min_msb: f64,
    pub max_lsb: f64,
    /// Set when the check could not be meaningful (no MSB errors at all).
    pub note: Option<String>,
}

/// Every one of the top `p` bits must flip at least `ratio_min` times as
/// often as any lower bit.
pub fn check_sparsity_condition(
    profile: &BitErrorProfile,
    p: usize,
    ratio_min: f64,
) -> Result<BitRateCheck, SiscError> {
    let l = profile.rates.len();
    if p == 0 || p >= l {
        return Err(SiscError::Params(format!(
            "MSB count {p} must lie in 1..{l}"
        )));
    }
    let rates: Vec<f64> = profile.rates.iter().map(|r| r.rate).collect();
    let min_msb = rates[l - p..].iter().copied().fold(f64::INFINITY, f64::min);
    let max_lsb = rates[..l - p].iter().copied().fold(0.0, f64::max);
    if min_msb == 0.0 {
        return Ok(BitRateCheck {
            pass: false,
            margin: 0.0,
            min_msb,
            max_lsb,
            note: Some("an MSB never flips; the condition is degenerate".into()),
        });
    }
    let margin = if max_lsb == 0.0 {
        f64::INFINITY
    } else {
        min_msb / max_lsb
    };
    Ok(BitRateCheck {
        pass: margin >= ratio_min,
        margin,
        min_msb,
        max_lsb,
        note: None,
    })
}
