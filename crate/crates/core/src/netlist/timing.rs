//! Longest-path timing on the gate DAG.
//!
//! A path runs from a source gate (one fed by a primary input) to a gate
//! driving a primary output. Constant gates are not path nodes: they have
//! no delay and never appear in a path. Path delays include the delays of
//! both end gates.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{GateId, LogicNetwork, NetlistError, Signal};

/// Cap on the number of critical paths listed in a summary.
const MAX_LISTED_PATHS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    /// Largest number of gates on any path.
    pub n_cp: usize,
    /// Largest path delay.
    pub t_cp: f64,
    /// T_cp / N_cp.
    pub t_cp_avg: f64,
    /// Paths achieving `t_cp` (at most 64, lexicographic by gate id).
    pub critical_paths: Vec<Vec<GateId>>,
}

pub(crate) fn is_logic(net: &LogicNetwork, g: GateId) -> bool {
    !net.gates[g].kind.is_const()
}

/// Non-constant gate fanins.
pub(crate) fn logic_fanins(net: &LogicNetwork, g: GateId) -> impl Iterator<Item = GateId> + '_ {
    net.gates[g]
        .gate_fanins()
        .filter(move |&f| is_logic(net, f))
}

/// Fed directly by a primary input (or a tied constant).
pub(crate) fn is_source(net: &LogicNetwork, g: GateId) -> bool {
    is_logic(net, g)
        && net.gates[g].fanins.iter().any(|s| match *s {
            Signal::Input { .. } => true,
            Signal::Gate(f) => !is_logic(net, f),
        })
}

/// Latest arrival at each gate's output: T_g + max over fanin arrivals.
pub fn arrival_times(net: &LogicNetwork, delays: &[f64]) -> Result<Vec<f64>, NetlistError> {
    let order = net.topo_order()?;
    let mut a = vec![0.0; net.gates.len()];
    for g in order {
        if !is_logic(net, g) {
            continue;
        }
        let upstream = logic_fanins(net, g).map(|f| a[f]).fold(0.0, f64::max);
        a[g] = delays[g] + upstream;
    }
    Ok(a)
}

/// Longest delay from each gate's input to any primary output, including
/// the gate itself.
pub fn departure_times(net: &LogicNetwork, delays: &[f64]) -> Result<Vec<f64>, NetlistError> {
    let order = net.topo_order()?;
    let fanouts = net.fanouts();
    let mut d = vec![0.0; net.gates.len()];
    for &g in order.iter().rev() {
        if !is_logic(net, g) {
            continue;
        }
        let downstream = fanouts[g].iter().map(|&h| d[h]).fold(0.0, f64::max);
        d[g] = delays[g] + downstream;
    }
    Ok(d)
}

/// Unit delays on logic gates, zero on constants.
pub(crate) fn unit_delays(net: &LogicNetwork) -> Vec<f64> {
    net.gates
        .iter()
        .map(|g| if g.kind.is_const() { 0.0 } else { 1.0 })
        .collect()
}

pub fn critical_path_summary(
    net: &LogicNetwork,
    delays: &[f64],
) -> Result<TimingSummary, NetlistError> {
    let drives = net.output_drivers();
    let a = arrival_times(net, delays)?;
    let counts = arrival_times(net, &unit_delays(net))?;
    let mut t_cp = 0.0f64;
    let mut n_cp = 0.0f64;
    for g in 0..net.gates.len() {
        if drives[g] {
            t_cp = t_cp.max(a[g]);
            n_cp = n_cp.max(counts[g]);
        }
    }
    let d = departure_times(net, delays)?;
    let critical_paths = tight_paths(net, delays, &a, &d, t_cp, MAX_LISTED_PATHS);
    let n_cp = n_cp.round() as usize;
    Ok(TimingSummary {
        n_cp,
        t_cp,
        t_cp_avg: if n_cp > 0 { t_cp / n_cp as f64 } else { 0.0 },
        critical_paths,
    })
}

/// Enumerate up to `cap` paths of total delay `t_cp` by walking edges with
/// zero slack, in lexicographic order.
fn tight_paths(
    net: &LogicNetwork,
    delays: &[f64],
    a: &[f64],
    d: &[f64],
    t_cp: f64,
    cap: usize,
) -> Vec<Vec<GateId>> {
    let tol = 1e-9 * t_cp.max(1e-300);
    let fanouts = net.fanouts();
    let drives = net.output_drivers();
    let mut out = Vec::new();
    let mut starts: Vec<GateId> = (0..net.gates.len())
        .filter(|&g| is_source(net, g) && (d[g] - t_cp).abs() <= tol)
        .collect();
    starts.sort_unstable();
    let mut stack: Vec<(Vec<GateId>, usize)> = Vec::new();
    for s in starts {
        stack.push((vec![s], 0));
        while let Some((path, next)) = stack.pop() {
            if out.len() >= cap {
                return out;
            }
            let g = *path.last().unwrap();
            if next == 0 && drives[g] && (a[g] - t_cp).abs() <= tol {
                out.push(path.clone());
            }
            let mut succ: Vec<GateId> = fanouts[g]
                .iter()
                .copied()
                .filter(|&h| {
                    (a[g] + d[h] - t_cp).abs() <= tol && (a[h] - a[g] - delays[h]).abs() <= tol
                })
                .collect();
            succ.sort_unstable();
            if next < succ.len() {
                let h = succ[next];
                stack.push((path.clone(), next + 1));
                let mut p = path;
                p.push(h);
                stack.push((p, 0));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IoCritical {
    /// Longest delay from a primary input through the gate, inclusive.
    pub t_imax: f64,
    /// Longest delay from the gate to a primary output, inclusive.
    pub t_omax: f64,
    /// Source → gate.
    pub input_path: Vec<GateId>,
    /// Gate → sink.
    pub output_path: Vec<GateId>,
}

/// Input and output critical paths through `gate`. With `min_nodes`, only
/// complete paths with at least that many gates are admissible (the input
/// and output maxima may come from different admissible paths).
pub fn io_critical_paths(
    net: &LogicNetwork,
    delays: &[f64],
    gate: GateId,
    min_nodes: Option<usize>,
) -> Result<IoCritical, NetlistError> {
    if gate >= net.gates.len() {
        return Err(NetlistError::NoSuchGate(gate));
    }
    if !is_logic(net, gate) {
        return Err(NetlistError::Unreachable(gate));
    }
    match min_nodes {
        None => unrestricted(net, delays, gate),
        Some(min) => restricted(net, delays, gate, min),
    }
}

fn unrestricted(
    net: &LogicNetwork,
    delays: &[f64],
    gate: GateId,
) -> Result<IoCritical, NetlistError> {
    let a = arrival_times(net, delays)?;
    let d = departure_times(net, delays)?;
    let fanouts = net.fanouts();
    let drives = net.output_drivers();
    let tol = |x: f64| 1e-9 * x.abs().max(1e-300);

    let mut input_path = vec![gate];
    let mut g = gate;
    loop {
        let prev = logic_fanins(net, g)
            .filter(|&f| (a[f] + delays[g] - a[g]).abs() <= tol(a[g]))
            .min();
        match prev {
            Some(f) if !(is_source(net, g) && (a[g] - delays[g]).abs() <= tol(a[g])) => {
                input_path.push(f);
                g = f;
            }
            _ => break,
        }
    }
    if !is_source(net, g) {
        return Err(NetlistError::Unreachable(gate));
    }
    input_path.reverse();

    let mut output_path = vec![gate];
    let mut g = gate;
    loop {
        if drives[g] && (d[g] - delays[g]).abs() <= tol(d[g]) {
            break;
        }
        let next = fanouts[g]
            .iter()
            .copied()
            .filter(|&h| (d[h] + delays[g] - d[g]).abs() <= tol(d[g]))
            .min();
        match next {
            Some(h) => {
                output_path.push(h);
                g = h;
            }
            None => break,
        }
    }
    if !drives[g] {
        return Err(NetlistError::Unreachable(gate));
    }
    Ok(IoCritical {
        t_imax: a[gate],
        t_omax: d[gate],
        input_path,
        output_path,
    })
}

/// Longest-delay table indexed by node count, over one cone.
struct CountTable {
    best: HashMap<GateId, Vec<f64>>,
}

impl CountTable {
    fn get(&self, g: GateId, k: usize) -> f64 {
        self.best
            .get(&g)
            .and_then(|v| v.get(k).copied())
            .unwrap_or(f64::NEG_INFINITY)
    }
}

fn restricted(
    net: &LogicNetwork,
    delays: &[f64],
    gate: GateId,
    min_nodes: usize,
) -> Result<IoCritical, NetlistError> {
    let order = net.topo_order()?;
    let fanouts = net.fanouts();
    let drives = net.output_drivers();

    // Fanin cone: best prefix delay from a source to v using exactly k gates.
    let mut in_cone = vec![false; net.gates.len()];
    let mut stack = vec![gate];
    while let Some(g) = stack.pop() {
        if !in_cone[g] {
            in_cone[g] = true;
            stack.extend(logic_fanins(net, g));
        }
    }
    let mut prefix = CountTable {
        best: HashMap::new(),
    };
    for &g in order.iter().filter(|&&g| in_cone[g]) {
        let mut row: Vec<f64> = Vec::new();
        if is_source(net, g) {
            row.resize(2, f64::NEG_INFINITY);
            row[1] = delays[g];
        }
        for f in logic_fanins(net, g) {
            let frow = &prefix.best[&f];
            if row.len() < frow.len() + 1 {
                row.resize(frow.len() + 1, f64::NEG_INFINITY);
            }
            for (k, &v) in frow.iter().enumerate() {
                row[k + 1] = row[k + 1].max(v + delays[g]);
            }
        }
        prefix.best.insert(g, row);
    }

    // Fanout cone: best suffix delay from v to a sink using exactly k gates.
    let mut out_cone = vec![false; net.gates.len()];
    let mut stack = vec![gate];
    while let Some(g) = stack.pop() {
        if !out_cone[g] {
            out_cone[g] = true;
            stack.extend(fanouts[g].iter().copied());
        }
    }
    let mut suffix = CountTable {
        best: HashMap::new(),
    };
    for &g in order.iter().rev().filter(|&&g| out_cone[g]) {
        let mut row: Vec<f64> = Vec::new();
        if drives[g] {
            row.resize(2, f64::NEG_INFINITY);
            row[1] = delays[g];
        }
        for &h in &fanouts[g] {
            let hrow = &suffix.best[&h];
            if row.len() < hrow.len() + 1 {
                row.resize(hrow.len() + 1, f64::NEG_INFINITY);
            }
            for (k, &v) in hrow.iter().enumerate() {
                row[k + 1] = row[k + 1].max(v + delays[g]);
            }
        }
        suffix.best.insert(g, row);
    }

    let pre = &prefix.best[&gate];
    let suf = &suffix.best[&gate];
    let (mut t_imax, mut k_in) = (f64::NEG_INFINITY, 0);
    let (mut t_omax, mut k_out) = (f64::NEG_INFINITY, 0);
    for (ki, &vi) in pre.iter().enumerate() {
        for (ko, &vo) in suf.iter().enumerate() {
            if vi.is_finite() && vo.is_finite() && ki + ko > min_nodes {
                if vi > t_imax {
                    t_imax = vi;
                    k_in = ki;
                }
                if vo > t_omax {
                    t_omax = vo;
                    k_out = ko;
                }
            }
        }
    }
    if !t_imax.is_finite() {
        return Err(NetlistError::Unreachable(gate));
    }

    let tol = |x: f64| 1e-9 * x.abs().max(1e-300);
    let mut input_path = vec![gate];
    let (mut g, mut k) = (gate, k_in);
    while k > 1 {
        let target = prefix.get(g, k) - delays[g];
        let f = logic_fanins(net, g)
            .filter(|&f| (prefix.get(f, k - 1) - target).abs() <= tol(target))
            .min()
            .expect("prefix table is consistent");
        input_path.push(f);
        g = f;
        k -= 1;
    }
    input_path.reverse();
    let mut output_path = vec![gate];
    let (mut g, mut k) = (gate, k_out);
    while k > 1 {
        let target = suffix.get(g, k) - delays[g];
        let h = fanouts[g]
            .iter()
            .copied()
            .filter(|&h| (suffix.get(h, k - 1) - target).abs() <= tol(target))
            .min()
            .expect("suffix table is consistent");
        output_path.push(h);
        g = h;
        k -= 1;
    }
    Ok(IoCritical {
        t_imax,
        t_omax,
        input_path,
        output_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::GateKind;

    pub(crate) fn chain(n: usize) -> LogicNetwork {
        let mut net = LogicNetwork::new();
        let mut s = net.add_input("x", 0);
        for _ in 0..n {
            s = net.add_gate(GateKind::Buf, &[s], &[]);
        }
        net.add_output(s, false, "y", 0, false);
        net
    }

    /// x → g0 → {g1 → g4, g2} → g3, with x also feeding g3 directly.
    /// Gate ids in creation order: g0 = 0, g1 = 1, g2 = 2, g4 = 3, g3 = 4.
    pub(crate) fn diamond() -> LogicNetwork {
        let mut net = LogicNetwork::new();
        let x = net.add_input("x", 0);
        let g0 = net.add_gate(GateKind::Buf, &[x], &["g0"]);
        let g1 = net.add_gate(GateKind::Buf, &[g0], &["g1"]);
        let g2 = net.add_gate(GateKind::Buf, &[g0], &["g2"]);
        let g4 = net.add_gate(GateKind::Buf, &[g1], &["g4"]);
        let g3 = net.add_gate(GateKind::Maj3, &[g4, g2, x], &["g3"]);
        net.add_output(g3, false, "y", 0, false);
        net
    }

    #[test]
    fn chain_summary() {
        let net = chain(5);
        let s = critical_path_summary(&net, &[1.0; 5]).unwrap();
        assert_eq!((s.n_cp, s.t_cp), (5, 5.0));
        assert_eq!(s.critical_paths, vec![vec![0, 1, 2, 3, 4]]);
        let io = io_critical_paths(&net, &[1.0; 5], 2, None).unwrap();
        assert_eq!((io.t_imax, io.t_omax), (3.0, 3.0));
        let io = io_critical_paths(&net, &[1.0; 5], 0, None).unwrap();
        assert_eq!(io.t_imax, 1.0);
    }

    #[test]
    fn diamond_summary() {
        let net = diamond();
        let s = critical_path_summary(&net, &[1.0; 5]).unwrap();
        assert_eq!((s.n_cp, s.t_cp), (4, 4.0));
        let io = io_critical_paths(&net, &[1.0; 5], 2, None).unwrap();
        assert_eq!((io.t_imax, io.t_omax), (2.0, 2.0));
        assert_eq!(io.input_path, vec![0, 2]);
        assert_eq!(io.output_path, vec![2, 4]);
    }

    #[test]
    fn restriction_excludes_short_paths() {
        // g3 is also reachable directly from x (a 1-gate path), which a
        // 4-node restriction must ignore.
        let net = diamond();
        let delays = [1.0, 1.0, 1.0, 1.0, 1.0];
        let io = io_critical_paths(&net, &delays, 4, Some(4)).unwrap();
        assert_eq!((io.t_imax, io.t_omax), (4.0, 1.0));
        assert!(io_critical_paths(&net, &delays, 2, Some(4)).is_err());
    }
}
