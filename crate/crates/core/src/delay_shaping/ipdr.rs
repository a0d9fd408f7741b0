use serde::{Deserialize, Serialize};

use super::balance::{is_balanced, rebalance};
use super::{DelayAssignment, Pricer, ShapeError};
use crate::netlist::{critical_path_summary, io_critical_paths, GateId, LogicNetwork};

/// What a delay move holds fixed per gate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyPolicy {
    /// Energy stays put; current follows 1/√T.
    #[default]
    ConstantEnergy,
    /// Current stays put; energy follows T.
    ConstantCurrent,
}

/// Take `amount` (delay-factor units) from `gate` and give the same amount
/// to each of `receivers`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpdrMove {
    pub gate: GateId,
    pub receivers: Vec<GateId>,
    pub amount: f64,
}

/// Gates allowed to receive delay from `gate`: those on its input critical
/// path whose own output critical path runs through `gate`, and the mirror
/// case on its output critical path.
pub fn ipdr_candidates(
    net: &LogicNetwork,
    delays: &[f64],
    gate: GateId,
) -> Result<Vec<GateId>, ShapeError> {
    let io = io_critical_paths(net, delays, gate, None)?;
    let mut out = Vec::new();
    for &q in io.input_path.iter().filter(|&&q| q != gate) {
        if io_critical_paths(net, delays, q, None)?
            .output_path
            .contains(&gate)
        {
            out.push(q);
        }
    }
    for &q in io.output_path.iter().filter(|&&q| q != gate) {
        if io_critical_paths(net, delays, q, None)?
            .input_path
            .contains(&gate)
        {
            out.push(q);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Apply one redistribution move. The result must stay balanced with the
/// same T_cp; otherwise the move is rejected naming the first failed check.
pub fn ipdr(
    net: &LogicNetwork,
    assignment: &DelayAssignment,
    pricer: &Pricer,
    mv: &IpdrMove,
    policy: EnergyPolicy,
) -> Result<DelayAssignment, ShapeError> {
    let reject = |why: String| Err(ShapeError::MoveRejected(why));
    if mv.gate >= net.gates.len() || net.gates[mv.gate].kind.is_const() {
        return reject(format!("gate {} is not a logic gate", mv.gate));
    }
    if !(mv.amount >= 0.0) {
        return reject(format!("amount {} must be non-negative", mv.amount));
    }
    if mv.amount >= assignment.factor[mv.gate] {
        return reject(format!(
            "amount {} would leave gate {} with a non-positive delay (has {})",
            mv.amount, mv.gate, assignment.factor[mv.gate]
        ));
    }
    if mv.amount == 0.0 {
        return Ok(assignment.clone());
    }
    if let Some(&q) = mv
        .receivers
        .iter()
        .find(|&&q| q >= net.gates.len() || q == mv.gate || net.gates[q].kind.is_const())
    {
        return reject(format!("receiver {q} is not a distinct logic gate"));
    }
    let before = is_balanced(net, &assignment.factor)?;
    if !before.balanced {
        return reject(format!(
            "input assignment is not balanced (worst gate {:?})",
            before.worst_gate
        ));
    }
    let mut factors = assignment.factor.clone();
    factors[mv.gate] -= mv.amount;
    for &q in &mv.receivers {
        factors[q] += mv.amount;
    }
    let after = is_balanced(net, &factors)?;
    if (after.t_cp - before.t_cp).abs() > 1e-9 * before.t_cp {
        return reject(format!(
            "critical delay would change from {} to {}",
            before.t_cp, after.t_cp
        ));
    }
    if !after.balanced {
        let g = after.worst_gate.expect("unbalanced implies a worst gate");
        return reject(format!(
            "gate {g} would be left with residual {:.3e}",
            after.residual[g]
        ));
    }
    match policy {
        EnergyPolicy::ConstantEnergy => assignment.with_factors(net, pricer, factors),
        EnergyPolicy::ConstantCurrent => {
            let mut a = assignment.clone();
            a.factor = factors;
            for g in net.gates.iter().filter(|g| !g.kind.is_const()) {
                a.energy[g.id] = pricer.energy(g.kind, a.current[g.id], a.delay(g.id));
            }
            a.refresh_epsilon(net, pricer)?;
            Ok(a)
        }
    }
}

/// MSB-error-boost policy for [`ipdr_schedule`].
///
/// The gates of the longest path whose errors can only reach the top
/// `msb_bits` bits of output word `word`, plus the first `fast_head` gates
/// of that path, run `speedup` faster. The delay freed is spread evenly
/// over the rest of the path, and every other gate is re-fitted so the
/// assignment stays balanced, never going below `min_factor`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpdrProfile {
    pub word: String,
    pub msb_bits: usize,
    pub speedup: f64,
    #[serde(default)]
    pub fast_head: usize,
    pub min_factor: f64,
    /// The speedup is reached in this many equal increments.
    pub steps: usize,
}

/// Delay changes of one schedule step, in factor units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub step: usize,
    pub decreased: Vec<(GateId, f64)>,
    pub increased: Vec<(GateId, f64)>,
    pub t_cp: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub fast_gates: Vec<GateId>,
    pub moves: Vec<MoveRecord>,
    pub requested_steps: usize,
    /// Why the schedule stopped early, if it did.
    pub stopped: Option<String>,
}

/// Gates whose output can reach a bit of `word` below `lsb_limit`.
fn reaches_low_bits(
    net: &LogicNetwork,
    word: &str,
    lsb_limit: u32,
) -> Result<Vec<bool>, ShapeError> {
    let mut reach = vec![false; net.gates.len()];
    for po in &net.primary_outputs {
        if po.word == word && po.bit < lsb_limit {
            reach[po.driver] = true;
        }
    }
    for &g in net.topo_order()?.iter().rev() {
        if reach[g] {
            for f in net.gates[g].gate_fanins() {
                reach[f] = true;
            }
        }
    }
    Ok(reach)
}

/// Run the MSB-error-boost policy as a sequence of balanced steps. Each
/// step is checked (balanced, T_cp unchanged) before it is taken; an
/// infeasible step ends the schedule and the last good assignment is
/// returned with the reason in the report.
pub fn ipdr_schedule(
    net: &LogicNetwork,
    assignment: &DelayAssignment,
    pricer: &Pricer,
    profile: &IpdrProfile,
) -> Result<(DelayAssignment, ScheduleReport), ShapeError> {
    let mut report = ScheduleReport {
        requested_steps: profile.steps,
        ..Default::default()
    };
    let start = is_balanced(net, &assignment.factor)?;
    if !start.balanced {
        return Err(ShapeError::Infeasible(
            "schedule needs a balanced starting assignment".into(),
        ));
    }
    let t_cp = start.t_cp;
    let n_bits = net
        .primary_outputs
        .iter()
        .filter(|po| po.word == profile.word)
        .map(|po| po.bit + 1)
        .max()
        .unwrap_or(0);
    if n_bits == 0 {
        return Err(ShapeError::Infeasible(format!(
            "no output word '{}'",
            profile.word
        )));
    }
    if (profile.msb_bits == 0 && profile.fast_head == 0)
        || profile.speedup == 0.0
        || profile.steps == 0
    {
        return Ok((assignment.clone(), report));
    }
    if !(0.0..1.0).contains(&profile.speedup) {
        return Err(ShapeError::Infeasible(format!(
            "speedup {} outside [0, 1)",
            profile.speedup
        )));
    }

    let unit: Vec<f64> = net
        .gates
        .iter()
        .map(|g| if g.kind.is_const() { 0.0 } else { 1.0 })
        .collect();
    let rho1 = critical_path_summary(net, &unit)?
        .critical_paths
        .into_iter()
        .next()
        .unwrap_or_default();
    let low = reaches_low_bits(
        net,
        &profile.word,
        n_bits.saturating_sub(profile.msb_bits as u32),
    )?;
    let fast: Vec<bool> = rho1
        .iter()
        .enumerate()
        .map(|(k, &g)| k < profile.fast_head || !low[g])
        .collect();
    report.fast_gates = rho1
        .iter()
        .zip(&fast)
        .filter(|(_, &f)| f)
        .map(|(&g, _)| g)
        .collect();
    let n_slow = fast.iter().filter(|&&f| !f).count();
    if report.fast_gates.is_empty() || n_slow == 0 {
        report.stopped = Some("policy selects no gate, or every gate, of the longest path".into());
        return Ok((assignment.clone(), report));
    }
    let mut on_rho1 = vec![false; net.gates.len()];
    rho1.iter().for_each(|&g| on_rho1[g] = true);

    let mut current = assignment.factor.clone();
    for step in 1..=profile.steps {
        let s = profile.speedup * step as f64 / profile.steps as f64;
        let mut target = assignment.factor.clone();
        let freed: f64 = rho1
            .iter()
            .zip(&fast)
            .filter(|(_, &f)| f)
            .map(|(&g, _)| assignment.factor[g] * s)
            .sum();
        for (&g, &f) in rho1.iter().zip(&fast) {
            target[g] = if f {
                assignment.factor[g] * (1.0 - s)
            } else {
                assignment.factor[g] + freed / n_slow as f64
            };
        }
        let next = match rebalance(net, &target, &on_rho1, profile.min_factor, t_cp) {
            Ok(t) => t,
            Err(e) => {
                report.stopped = Some(format!("step {step}: {e}"));
                break;
            }
        };
        let check = is_balanced(net, &next)?;
        if !check.balanced || (check.t_cp - t_cp).abs() > 1e-9 * t_cp {
            report.stopped = Some(format!("step {step}: result not balanced at T_cp {}", t_cp));
            break;
        }
        let mut rec = MoveRecord {
            step,
            decreased: Vec::new(),
            increased: Vec::new(),
            t_cp: check.t_cp,
        };
        for g in 0..net.gates.len() {
            let delta = next[g] - current[g];
            if delta < -1e-12 {
                rec.decreased.push((g, -delta));
            } else if delta > 1e-12 {
                rec.increased.push((g, delta));
            }
        }
        report.moves.push(rec);
        current = next;
    }
    Ok((assignment.with_factors(net, pricer, current)?, report))
}

/// Redistribute delay inside input-closed regions (gate sets fed only by
/// primary inputs, constants and each other), such as one multiplier.
///
/// Balancing leaves a region's slack on its exit gates, the ones feeding
/// the rest of the network. This moves it back: every non-exit gate not
/// downstream of an exit has its delay multiplied by the largest λ ≤
/// `max_scale` that keeps each exit at or above `exit_floor`, and exits
/// give up what the interior takes. Exit finishing times do not move, so
/// the assignment stays balanced with the same T_cp (checked). Returns the
/// new factors and each region's λ.
pub fn stretch_regions(
    net: &LogicNetwork,
    factors: &[f64],
    regions: &[Vec<GateId>],
    max_scale: f64,
    exit_floor: f64,
) -> Result<(Vec<f64>, Vec<f64>), ShapeError> {
    let n = net.gates.len();
    let start = is_balanced(net, factors)?;
    if !start.balanced {
        return Err(ShapeError::Infeasible(
            "region stretch needs a balanced starting assignment".into(),
        ));
    }
    let arrival = crate::netlist::arrival_times(net, factors)?;
    let fanouts = net.fanouts();
    let drives = net.output_drivers();
    let logic = |g: GateId| !net.gates[g].kind.is_const();
    let begin = |g: GateId, a: &[f64]| {
        net.gates[g]
            .gate_fanins()
            .filter(|&f| logic(f))
            .map(|f| a[f])
            .fold(0.0, f64::max)
    };
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (r, region) in regions.iter().enumerate() {
        for &g in region {
            if g >= n || !logic(g) {
                return Err(ShapeError::Infeasible(format!(
                    "region {r} lists {g}, which is not a logic gate"
                )));
            }
            if owner[g].replace(r).is_some() {
                return Err(ShapeError::Infeasible(format!(
                    "gate {g} belongs to two regions"
                )));
            }
        }
    }
    let mut out = factors.to_vec();
    let mut scales = Vec::with_capacity(regions.len());
    let order = net.topo_order()?;
    for (r, region) in regions.iter().enumerate() {
        let inside = |g: GateId| owner[g] == Some(r);
        if let Some(&g) = region
            .iter()
            .find(|&&g| net.gates[g].gate_fanins().any(|f| logic(f) && !inside(f)))
        {
            return Err(ShapeError::Infeasible(format!(
                "region {r} is fed from outside through gate {g}"
            )));
        }
        // Exits and everything they feed inside the region keep their
        // finishing times.
        let mut held = vec![false; n];
        for &g in order.iter().filter(|&&g| inside(g)) {
            held[g] = drives[g]
                || fanouts[g].iter().any(|&h| !inside(h))
                || net.gates[g].gate_fanins().any(|f| logic(f) && held[f]);
        }
        let mut lambda = max_scale;
        for &h in region.iter().filter(|&&h| held[h]) {
            let scaled: Vec<GateId> = net.gates[h]
                .gate_fanins()
                .filter(|&f| logic(f) && !held[f])
                .collect();
            let Some(latest_scaled) = scaled.iter().map(|&f| arrival[f]).reduce(f64::max) else {
                continue;
            };
            let s = begin(h, &arrival);
            let held_latest = net.gates[h]
                .gate_fanins()
                .any(|f| logic(f) && held[f] && arrival[f] >= s);
            let bound = if held_latest {
                s / latest_scaled
            } else {
                (arrival[h] - exit_floor) / latest_scaled
            };
            lambda = lambda.min(bound);
        }
        let lambda = lambda.max(1.0);
        scales.push(lambda);
        if lambda == 1.0 {
            continue;
        }
        let mut a = arrival.clone();
        for &g in region.iter().filter(|&&g| !held[g]) {
            a[g] = lambda * arrival[g];
        }
        for &g in region {
            out[g] = a[g] - begin(g, &a);
        }
    }
    let after = is_balanced(net, &out)?;
    if !after.balanced || (after.t_cp - start.t_cp).abs() > 1e-9 * start.t_cp {
        return Err(ShapeError::Infeasible(format!(
            "stretched assignment fails the balance check (worst gate {:?})",
            after.worst_gate
        )));
    }
    Ok((out, scales))
}
