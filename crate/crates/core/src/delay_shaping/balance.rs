use serde::{Deserialize, Serialize};

use super::{DelayAssignment, Pricer, ShapeError};
use crate::netlist::{
    arrival_times, departure_times, partition_path, primary_paths, GateId, LogicNetwork,
    NetlistError,
};

/// Primary-path enumeration gives up beyond this many paths and the
/// output-first pass takes over.
pub const DEFAULT_PATH_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceMethod {
    /// Paths in decreasing node count, each off-critical gate filled to the
    /// critical delay on first visit.
    PrimaryPaths,
    /// One reverse-topological sweep; used when the path count is too large.
    OutputFirst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub balanced: bool,
    pub t_cp: f64,
    /// T_cp minus the longest path delay through each gate (0 for
    /// constants). A balanced assignment has every residual at 0.
    pub residual: Vec<f64>,
    /// Gate with the largest |residual|.
    pub worst_gate: Option<GateId>,
}

fn logic(net: &LogicNetwork, g: GateId) -> bool {
    !net.gates[g].kind.is_const()
}

/// Checks that every gate lies on a path of delay exactly T_cp. Delays are
/// in any consistent unit; the tolerance is 1e-9 T_cp.
pub fn is_balanced(net: &LogicNetwork, delays: &[f64]) -> Result<BalanceReport, NetlistError> {
    let a = arrival_times(net, delays)?;
    let d = departure_times(net, delays)?;
    let drives = net.output_drivers();
    let t_cp = (0..net.gates.len())
        .filter(|&g| drives[g])
        .map(|g| a[g])
        .fold(0.0, f64::max);
    let tol = 1e-9 * t_cp.max(f64::MIN_POSITIVE);
    let mut residual = vec![0.0; net.gates.len()];
    let mut balanced = true;
    let mut worst: Option<(GateId, f64)> = None;
    for g in (0..net.gates.len()).filter(|&g| logic(net, g)) {
        let r = t_cp - (a[g] + d[g] - delays[g]);
        residual[g] = r;
        if r.abs() > tol || !(delays[g] > 0.0) {
            balanced = false;
        }
        if worst.map_or(true, |(_, w)| r.abs() > w) {
            worst = Some((g, r.abs()));
        }
    }
    Ok(BalanceReport {
        balanced,
        t_cp,
        residual,
        worst_gate: worst.map(|(g, _)| g),
    })
}

/// Slack of `g` under `delays`: how much T_g can grow before some path
/// through it exceeds `t_cp`.
fn slack(a: &[f64], d: &[f64], delays: &[f64], g: GateId, t_cp: f64) -> f64 {
    t_cp - (a[g] + d[g] - delays[g])
}

/// Normalized I-PDB delay factors (critical gates stay at 1).
pub fn ipdb_factors(
    net: &LogicNetwork,
    cap: usize,
) -> Result<(Vec<f64>, BalanceMethod), ShapeError> {
    let unit: Vec<f64> = net
        .gates
        .iter()
        .map(|g| if g.kind.is_const() { 0.0 } else { 1.0 })
        .collect();
    let paths = match primary_paths(net, cap) {
        Ok(p) => p,
        Err(NetlistError::PathCap { .. }) => {
            let fixed = vec![false; net.gates.len()];
            let t_cp = crate::netlist::critical_path_summary(net, &unit)?.t_cp;
            return Ok((
                rebalance(net, &unit, &fixed, 1.0, t_cp)?,
                BalanceMethod::OutputFirst,
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let mut delays = unit;
    if paths.paths.is_empty() {
        return Ok((delays, BalanceMethod::PrimaryPaths));
    }
    let t_cp = paths.rho1().len() as f64;
    let critical = paths.critical_gates();
    let mut updated = vec![false; net.gates.len()];
    for path in &paths.paths[paths.n_critical..] {
        for run in partition_path(path, &critical) {
            if run.iter().any(|g| critical.contains(g)) {
                continue;
            }
            for &g in &run {
                if updated[g] {
                    continue;
                }
                // Only g changes per update, so a fresh timing pass keeps
                // the rule exact; the networks that reach this branch are
                // small enough for the quadratic cost.
                let a = arrival_times(net, &delays)?;
                let d = departure_times(net, &delays)?;
                delays[g] += slack(&a, &d, &delays, g, t_cp).max(0.0);
                updated[g] = true;
            }
        }
    }
    Ok((delays, BalanceMethod::PrimaryPaths))
}

/// Balanced delays with the `fixed` gates held at their current values and
/// every other gate at least `lower`. Sweeps gates from the outputs back,
/// giving each free gate all of its slack against `t_cp` while its
/// upstream free gates still sit at `lower`.
pub fn rebalance(
    net: &LogicNetwork,
    delays: &[f64],
    fixed: &[bool],
    lower: f64,
    t_cp: f64,
) -> Result<Vec<f64>, ShapeError> {
    let mut t: Vec<f64> = (0..net.gates.len())
        .map(|g| match (logic(net, g), fixed[g]) {
            (false, _) => 0.0,
            (true, true) => delays[g],
            (true, false) => lower,
        })
        .collect();
    let a = arrival_times(net, &t)?;
    let drives = net.output_drivers();
    let tol = 1e-9 * t_cp;
    if let Some(g) = (0..net.gates.len()).find(|&g| drives[g] && a[g] > t_cp + tol) {
        return Err(ShapeError::Infeasible(format!(
            "held delays already give a path of {:.6} through gate {g}, above the target {t_cp:.6}",
            a[g]
        )));
    }
    let fanouts = net.fanouts();
    let mut d = vec![0.0; net.gates.len()];
    for &g in net.topo_order()?.iter().rev() {
        if !logic(net, g) {
            continue;
        }
        let downstream = fanouts[g]
            .iter()
            .filter(|&&h| logic(net, h))
            .map(|&h| d[h])
            .fold(0.0, f64::max);
        if !fixed[g] {
            let fill = t_cp - (a[g] - t[g]) - downstream;
            if fill < lower - tol {
                return Err(ShapeError::Infeasible(format!(
                    "gate {g} would need delay {fill:.6}, below the floor {lower:.6}"
                )));
            }
            t[g] = fill.max(lower);
        }
        d[g] = t[g] + downstream;
    }
    Ok(t)
}

/// I-PDB: off-critical gates slowed until balanced, at the per-gate energy
/// of the uniform assignment (`unit_current` at `unit_delay`).
pub fn ipdb(
    net: &LogicNetwork,
    pricer: &Pricer,
    unit_delay: f64,
    unit_current: f64,
) -> Result<DelayAssignment, ShapeError> {
    let (factors, _) = ipdb_factors(net, DEFAULT_PATH_CAP)?;
    let base = DelayAssignment::at_current(net, pricer, unit_delay, unit_current)?;
    base.with_factors(net, pricer, factors)
}
