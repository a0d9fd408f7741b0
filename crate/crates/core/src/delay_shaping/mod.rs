//! Delay-assignment transforms that shape where errors occur.
//!
//! A [`DelayAssignment`] annotates every gate with (delay, current, energy,
//! ε). Delays are stored as factors of a unit delay; constants carry zeros.
//! [`ipdb`] stretches off-critical gates until every gate sits on a path of
//! the critical delay, [`ipdr`] and [`ipdr_schedule`] move delay along
//! paths at constant path delay, and [`constrained_ipdb`] /
//! [`current_redistribute`] trade energy where ε has headroom. Every
//! transform keeps each gate's switching energy unless stated otherwise,
//! so a delay change by χ rescales the current by 1/√χ.

mod balance;
mod ipdr;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device_model::{
    energy_for_error_rate, error_rate_with_model, gate_energy, supply_current, DeviceError,
    DeviceParams, ErrorModel,
};
use crate::netlist::{GateKind, LogicNetwork, NetlistError};
use crate::noisy_sim::{EpsilonAssignment, Provenance};

pub use balance::{
    ipdb, ipdb_factors, is_balanced, rebalance, BalanceMethod, BalanceReport, DEFAULT_PATH_CAP,
};
pub use ipdr::{
    ipdr, ipdr_candidates, ipdr_schedule, stretch_regions, EnergyPolicy, IpdrMove, IpdrProfile,
    MoveRecord, ScheduleReport,
};

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("ipdr move rejected: {0}")]
    MoveRejected(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("assignment covers {got} gates, network has {expected}")]
    Coverage { expected: usize, got: usize },
    #[error("malformed assignment file: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Turns (energy, delay) into ε for a gate kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pricer {
    pub params: DeviceParams,
    pub model: ErrorModel,
}

impl Pricer {
    pub fn new(params: DeviceParams, model: ErrorModel) -> Self {
        Self { params, model }
    }

    pub fn epsilon(&self, kind: GateKind, energy: f64, delay: f64) -> Result<f64, DeviceError> {
        if kind.is_const() {
            return Ok(0.0);
        }
        error_rate_with_model(&self.params, self.model, energy, delay, kind)
    }

    /// Per-magnet current giving `eps` at `delay`.
    pub fn current_for(&self, eps: f64, delay: f64) -> Result<f64, DeviceError> {
        let e = energy_for_error_rate(&self.params, self.model, eps, delay, GateKind::Inv)?;
        supply_current(&self.params, e, delay, GateKind::Inv)
    }

    pub fn energy(&self, kind: GateKind, current: f64, delay: f64) -> f64 {
        if kind.is_const() {
            0.0
        } else {
            gate_energy(&self.params, current, delay, kind).expect("non-constant gate")
        }
    }

    pub fn current(&self, kind: GateKind, energy: f64, delay: f64) -> Result<f64, DeviceError> {
        if kind.is_const() {
            return Ok(0.0);
        }
        supply_current(&self.params, energy, delay, kind)
    }
}

/// Per-gate operating points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayAssignment {
    /// Seconds per unit of delay factor.
    pub unit_delay: f64,
    /// Per-magnet current of the uniform reference point (E_g,u).
    pub unit_current: f64,
    pub factor: Vec<f64>,
    pub current: Vec<f64>,
    pub energy: Vec<f64>,
    pub epsilon: Vec<f64>,
}

impl DelayAssignment {
    /// Every gate at the unit delay and the current giving `eps_unit`.
    pub fn uniform(
        net: &LogicNetwork,
        pricer: &Pricer,
        unit_delay: f64,
        eps_unit: f64,
    ) -> Result<Self, ShapeError> {
        let unit_current = pricer.current_for(eps_unit, unit_delay)?;
        Self::at_current(net, pricer, unit_delay, unit_current)
    }

    pub fn at_current(
        net: &LogicNetwork,
        pricer: &Pricer,
        unit_delay: f64,
        unit_current: f64,
    ) -> Result<Self, ShapeError> {
        let n = net.gates.len();
        let mut a = Self {
            unit_delay,
            unit_current,
            factor: vec![0.0; n],
            current: vec![0.0; n],
            energy: vec![0.0; n],
            epsilon: vec![0.0; n],
        };
        for g in &net.gates {
            if g.kind.is_const() {
                continue;
            }
            a.factor[g.id] = 1.0;
            a.current[g.id] = unit_current;
            a.energy[g.id] = pricer.energy(g.kind, unit_current, unit_delay);
        }
        a.refresh_epsilon(net, pricer)?;
        Ok(a)
    }

    pub fn delay(&self, g: usize) -> f64 {
        self.factor[g] * self.unit_delay
    }

    pub fn delays(&self) -> Vec<f64> {
        self.factor.iter().map(|f| f * self.unit_delay).collect()
    }

    pub fn total_energy(&self) -> f64 {
        self.energy.iter().sum()
    }

    pub fn refresh_epsilon(
        &mut self,
        net: &LogicNetwork,
        pricer: &Pricer,
    ) -> Result<(), ShapeError> {
        for g in &net.gates {
            self.epsilon[g.id] = if g.kind.is_const() {
                0.0
            } else {
                pricer.epsilon(g.kind, self.energy[g.id], self.delay(g.id))?
            };
        }
        Ok(())
    }

    /// New delay factors at unchanged per-gate energy.
    pub fn with_factors(
        &self,
        net: &LogicNetwork,
        pricer: &Pricer,
        factors: Vec<f64>,
    ) -> Result<Self, ShapeError> {
        if factors.len() != net.gates.len() {
            return Err(ShapeError::Coverage {
                expected: net.gates.len(),
                got: factors.len(),
            });
        }
        let mut a = self.clone();
        a.factor = factors;
        for g in &net.gates {
            a.current[g.id] = pricer.current(g.kind, a.energy[g.id], a.delay(g.id))?;
        }
        a.refresh_epsilon(net, pricer)?;
        Ok(a)
    }

    /// Entries carried over to new gate ids after [`LogicNetwork::prune`].
    pub fn remapped(&self, map: &[Option<crate::netlist::GateId>]) -> Self {
        let keep = |v: &[f64]| -> Vec<f64> {
            map.iter()
                .zip(v)
                .filter(|(m, _)| m.is_some())
                .map(|(_, &x)| x)
                .collect()
        };
        Self {
            unit_delay: self.unit_delay,
            unit_current: self.unit_current,
            factor: keep(&self.factor),
            current: keep(&self.current),
            energy: keep(&self.energy),
            epsilon: keep(&self.epsilon),
        }
    }

    pub fn epsilons(&self) -> EpsilonAssignment {
        EpsilonAssignment {
            eps: self.epsilon.clone(),
            provenance: Provenance::Physical,
        }
    }

    /// CSV columns gate_id, tag, delay_factor, delay_s, current_A,
    /// energy_J, epsilon. `tag` is the gate's tags joined by '|'.
    pub fn write_csv<W: Write>(&self, net: &LogicNetwork, w: W) -> Result<(), ShapeError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "gate_id",
            "tag",
            "delay_factor",
            "delay_s",
            "current_A",
            "energy_J",
            "epsilon",
        ])?;
        for g in &net.gates {
            let i = g.id;
            out.write_record([
                i.to_string(),
                g.tags.join("|"),
                format!("{:.12e}", self.factor[i]),
                format!("{:.12e}", self.delay(i)),
                format!("{:.12e}", self.current[i]),
                format!("{:.12e}", self.energy[i]),
                format!("{:.12e}", self.epsilon[i]),
            ])?;
        }
        out.flush().map_err(|e| ShapeError::Format(e.to_string()))?;
        Ok(())
    }
}

/// Delay factors read from an assignment CSV. Only `gate_id` and
/// `delay_factor` are required; the other columns may be empty.
pub fn read_delay_factors<R: Read>(r: R, n_gates: usize) -> Result<Vec<f64>, ShapeError> {
    let mut reader = csv::Reader::from_reader(r);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| ShapeError::Format(format!("missing column {name}")))
    };
    let (id_col, factor_col) = (col("gate_id")?, col("delay_factor")?);
    let mut factors = vec![f64::NAN; n_gates];
    for row in reader.records() {
        let row = row?;
        let id: usize = row
            .get(id_col)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| ShapeError::Format(format!("bad gate id in {row:?}")))?;
        let f: f64 = row
            .get(factor_col)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| ShapeError::Format(format!("bad delay factor in {row:?}")))?;
        if id >= n_gates {
            return Err(ShapeError::Format(format!("gate id {id} out of range")));
        }
        factors[id] = f;
    }
    if let Some(missing) = factors.iter().position(|f| f.is_nan()) {
        return Err(ShapeError::Format(format!(
            "no delay factor for gate {missing}"
        )));
    }
    Ok(factors)
}

/// Like [`ipdb`], but a gate whose stretched delay would push ε below
/// `eps_floor` instead keeps ε = `eps_floor` at that delay and spends less
/// energy.
pub fn constrained_ipdb(
    net: &LogicNetwork,
    pricer: &Pricer,
    unit_delay: f64,
    unit_current: f64,
    eps_floor: f64,
) -> Result<DelayAssignment, ShapeError> {
    let a = ipdb(net, pricer, unit_delay, unit_current)?;
    clamp_to_floor(net, &a, pricer, eps_floor)
}

/// Lower the energy of every gate whose ε is below `eps_floor` until its ε
/// equals the floor, at unchanged delay. A floor of 0 changes nothing.
pub fn clamp_to_floor(
    net: &LogicNetwork,
    assignment: &DelayAssignment,
    pricer: &Pricer,
    eps_floor: f64,
) -> Result<DelayAssignment, ShapeError> {
    let mut a = assignment.clone();
    if eps_floor <= 0.0 {
        return Ok(a);
    }
    for g in &net.gates {
        let i = g.id;
        if g.kind.is_const() || a.epsilon[i] >= eps_floor {
            continue;
        }
        let t = a.delay(i);
        let e = energy_for_error_rate(&pricer.params, pricer.model, eps_floor, t, g.kind)?;
        if e < a.energy[i] {
            a.energy[i] = e;
            a.current[i] = pricer.current(g.kind, e, t)?;
            a.epsilon[i] = pricer.epsilon(g.kind, e, t)?;
        }
    }
    Ok(a)
}

/// Scale the energy of gates in `region` by `weight(gate)`, renormalized so
/// the region's total energy is unchanged. Delays are untouched; currents
/// and ε follow. Gates outside the region (weight `None`) are left alone.
pub fn current_redistribute<F>(
    net: &LogicNetwork,
    assignment: &DelayAssignment,
    pricer: &Pricer,
    weight: F,
) -> Result<DelayAssignment, ShapeError>
where
    F: Fn(&crate::netlist::Gate) -> Option<f64>,
{
    let mut a = assignment.clone();
    let targets: Vec<(usize, f64)> = net
        .gates
        .iter()
        .filter(|g| !g.kind.is_const())
        .filter_map(|g| weight(g).map(|w| (g.id, w)))
        .collect();
    if targets.iter().any(|&(_, w)| !(w > 0.0 && w.is_finite())) {
        return Err(ShapeError::Infeasible(
            "redistribution weights must be positive".into(),
        ));
    }
    let before: f64 = targets.iter().map(|&(g, _)| a.energy[g]).sum();
    let weighted: f64 = targets.iter().map(|&(g, w)| w * a.energy[g]).sum();
    if targets.is_empty() || weighted == 0.0 {
        return Ok(a);
    }
    let norm = before / weighted;
    for &(g, w) in &targets {
        let kind = net.gates[g].kind;
        a.energy[g] *= w * norm;
        a.current[g] = pricer.current(kind, a.energy[g], a.delay(g))?;
        a.epsilon[g] = pricer.epsilon(kind, a.energy[g], a.delay(g))?;
    }
    Ok(a)
}

/// Critical-path figures plus ε_cp_avg = ε(E_g,u, T_cp / N_cp).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapedTiming {
    pub n_cp: usize,
    pub t_cp: f64,
    pub t_cp_avg: f64,
    pub eps_cp_avg: f64,
}

pub fn timing_summary(
    net: &LogicNetwork,
    assignment: &DelayAssignment,
    pricer: &Pricer,
) -> Result<ShapedTiming, ShapeError> {
    let s = crate::netlist::critical_path_summary(net, &assignment.delays())?;
    let unit_energy = pricer.energy(
        GateKind::Inv,
        assignment.unit_current,
        assignment.unit_delay,
    );
    let eps_cp_avg = pricer.epsilon(GateKind::Inv, unit_energy, s.t_cp_avg)?;
    Ok(ShapedTiming {
        n_cp: s.n_cp,
        t_cp: s.t_cp,
        t_cp_avg: s.t_cp_avg,
        eps_cp_avg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pricer() -> Pricer {
        Pricer::new(DeviceParams::default(), ErrorModel::IsoK)
    }

    fn chain(n: usize) -> LogicNetwork {
        let mut net = LogicNetwork::new();
        let mut s = net.add_input("x", 0);
        for _ in 0..n {
            s = net.inv(s, &[]);
        }
        net.add_output(s, false, "y", 0, false);
        net
    }

    #[test]
    fn uniform_chain_summary_uses_gate_epsilon() {
        let net = chain(5);
        let p = pricer();
        let a = DelayAssignment::uniform(&net, &p, 1e-9, 0.1).unwrap();
        let t = timing_summary(&net, &a, &p).unwrap();
        assert_eq!(t.n_cp, 5);
        assert!((t.eps_cp_avg - 0.1).abs() < 1e-9);
        assert!(a.epsilon.iter().all(|e| (e - 0.1).abs() < 1e-9));
    }

    #[test]
    fn redistribution_preserves_energy() {
        let net = chain(2);
        let p = pricer();
        let a = DelayAssignment::uniform(&net, &p, 1e-9, 0.01).unwrap();
        let flat = current_redistribute(&net, &a, &p, |_| Some(1.0)).unwrap();
        assert_eq!(flat, a);
        let swapped =
            current_redistribute(&net, &a, &p, |g| Some(if g.id == 0 { 2.0 } else { 0.5 }))
                .unwrap();
        assert!((swapped.total_energy() / a.total_energy() - 1.0).abs() < 1e-12);
        assert!((swapped.energy[0] / swapped.energy[1] - 4.0).abs() < 1e-9);
        assert!(swapped.epsilon[0] < a.epsilon[0] && swapped.epsilon[1] > a.epsilon[1]);
    }

    #[test]
    fn csv_round_trip_of_factors() {
        let net = chain(3);
        let p = pricer();
        let a = DelayAssignment::uniform(&net, &p, 1e-9, 0.1).unwrap();
        let a = a.with_factors(&net, &p, vec![1.5, 0.5, 1.0]).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&net, &mut buf).unwrap();
        assert_eq!(
            read_delay_factors(buf.as_slice(), 3).unwrap(),
            vec![1.5, 0.5, 1.0]
        );
    }
}
