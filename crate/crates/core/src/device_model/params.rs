use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::DeviceError;

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const MU0: f64 = 4.0e-7 * PI;
/// Electron gyromagnetic ratio (rad s⁻¹ T⁻¹).
pub const GYROMAGNETIC: f64 = 1.760_859_63e11;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// Critical current fitted so that an inverter operated at ε = 10% with a
/// 1 ns gate time spends 1000 kT; see `fit_i_crit`.
pub const DEFAULT_I_CRIT: f64 = 2.924_477_224_001e-6;

/// Nanomagnet gate parameters. Defaults are the all-spin-logic device of
/// the reference design (52 kT barrier, CoFe-like free layer, 300 K).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Energy barrier in joules.
    pub e_b: f64,
    pub h_k: f64,
    pub m_s: f64,
    pub alpha: f64,
    pub ra: f64,
    pub temperature: f64,
    pub magnet_width: f64,
    pub magnet_length: f64,
    pub magnet_thickness: f64,
    pub polarization: f64,
    pub channel_length: f64,
    pub channel_thickness: f64,
    pub lead_thickness: f64,
    pub lead_length: f64,
    pub i_crit: f64,
    /// Bohr magnetons per magnet, M_s·V/μ_B.
    pub n_s: f64,
    /// Series spin-path resistance, RA over the magnet footprint.
    pub r_spin: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        let mut p = Self {
            e_b: 52.0 * BOLTZMANN * 300.0,
            h_k: 1.6e5,
            m_s: 2.5e5,
            alpha: 0.007,
            ra: 0.6e-14,
            temperature: 300.0,
            magnet_width: 37.8e-9,
            magnet_length: 75.7e-9,
            magnet_thickness: 3e-9,
            polarization: 0.8,
            channel_length: 100e-9,
            channel_thickness: 200e-9,
            lead_thickness: 100e-9,
            lead_length: 200e-9,
            i_crit: DEFAULT_I_CRIT,
            n_s: 0.0,
            r_spin: 0.0,
        };
        p.refresh_derived();
        p
    }
}

impl DeviceParams {
    pub fn kt(&self) -> f64 {
        BOLTZMANN * self.temperature
    }

    /// Barrier height in units of kT (the Δ of the switching statistics).
    pub fn barrier_kt(&self) -> f64 {
        self.e_b / self.kt()
    }

    pub fn with_barrier_kt(mut self, delta: f64) -> Self {
        self.e_b = delta * self.kt();
        self
    }

    pub fn volume(&self) -> f64 {
        self.magnet_width * self.magnet_length * self.magnet_thickness
    }

    /// Recompute `n_s` and `r_spin` from geometry. Call after editing
    /// dimensions or RA directly.
    pub fn refresh_derived(&mut self) {
        self.n_s = self.m_s * self.volume() / BOHR_MAGNETON;
        self.r_spin = self.ra / (self.magnet_width * self.magnet_length);
    }

    /// αγμ₀H_k/(1+α²): converts seconds to the dimensionless time τ.
    pub fn tau_rate(&self) -> f64 {
        self.alpha * GYROMAGNETIC * MU0 * self.h_k / (1.0 + self.alpha * self.alpha)
    }

    /// Precession frequency γμ₀H_k, the natural time unit of the LLG solver.
    pub fn precession_rate(&self) -> f64 {
        GYROMAGNETIC * MU0 * self.h_k
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        for (name, value) in self.fields() {
            if !(value.is_finite() && value > 0.0) {
                return Err(DeviceError::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.alpha >= 1.0 {
            return Err(DeviceError::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.polarization > 1.0 {
            return Err(DeviceError::InvalidParameter(format!(
                "polarization must lie in (0, 1], got {}",
                self.polarization
            )));
        }
        Ok(())
    }

    fn fields(&self) -> [(&'static str, f64); 17] {
        [
            ("e_b", self.e_b),
            ("h_k", self.h_k),
            ("m_s", self.m_s),
            ("alpha", self.alpha),
            ("ra", self.ra),
            ("temperature", self.temperature),
            ("magnet_width", self.magnet_width),
            ("magnet_length", self.magnet_length),
            ("magnet_thickness", self.magnet_thickness),
            ("polarization", self.polarization),
            ("channel_length", self.channel_length),
            ("channel_thickness", self.channel_thickness),
            ("lead_thickness", self.lead_thickness),
            ("lead_length", self.lead_length),
            ("i_crit", self.i_crit),
            ("n_s", self.n_s),
            ("r_spin", self.r_spin),
        ]
    }

    fn field_mut(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "e_b" => &mut self.e_b,
            "h_k" => &mut self.h_k,
            "m_s" => &mut self.m_s,
            "alpha" => &mut self.alpha,
            "ra" => &mut self.ra,
            "temperature" => &mut self.temperature,
            "magnet_width" => &mut self.magnet_width,
            "magnet_length" => &mut self.magnet_length,
            "magnet_thickness" => &mut self.magnet_thickness,
            "polarization" => &mut self.polarization,
            "channel_length" => &mut self.channel_length,
            "channel_thickness" => &mut self.channel_thickness,
            "lead_thickness" => &mut self.lead_thickness,
            "lead_length" => &mut self.lead_length,
            "i_crit" => &mut self.i_crit,
            "n_s" => &mut self.n_s,
            "r_spin" => &mut self.r_spin,
            _ => return None,
        })
    }

    /// Parse `key = value` lines (SI units, `#` comments). Missing keys keep
    /// their defaults. `e_b_kt` sets the barrier in kT at the file's
    /// temperature. Derived quantities (`n_s`, `r_spin`) are recomputed from
    /// geometry unless given explicitly.
    pub fn from_kv_text(text: &str) -> Result<Self, DeviceError> {
        let mut p = Self::default();
        let mut barrier_kt = None;
        let mut explicit = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(char::is_whitespace))
                .ok_or_else(|| {
                    DeviceError::Parse(format!("line {}: expected `key = value`", lineno + 1))
                })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                DeviceError::Parse(format!("line {}: bad number for {key}", lineno + 1))
            })?;
            if key == "e_b_kt" {
                barrier_kt = Some(value);
                continue;
            }
            let slot = p.field_mut(key).ok_or_else(|| {
                DeviceError::Parse(format!("line {}: unknown key {key}", lineno + 1))
            })?;
            *slot = value;
            explicit.push(key.to_string());
        }
        let (n_s, r_spin) = (p.n_s, p.r_spin);
        p.refresh_derived();
        if explicit.iter().any(|k| k == "n_s") {
            p.n_s = n_s;
        }
        if explicit.iter().any(|k| k == "r_spin") {
            p.r_spin = r_spin;
        }
        if let Some(kt) = barrier_kt {
            p.e_b = kt * p.kt();
        }
        p.validate()?;
        Ok(p)
    }

    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        for (name, value) in self.fields() {
            let _ = writeln!(out, "{name} = {value:e}");
        }
        out
    }
}
