//! Majority/inverter logic networks and the timing/path machinery used by
//! the delay-shaping transforms.
//!
//! Gates are stored in a vector and addressed by index. Primary inputs are
//! available in both polarities (ASL inputs come from magnets that can be
//! read either way), and each primary output may be taken inverted; inside
//! the network inversion costs an INV gate.

mod json;
mod paths;
mod timing;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use paths::{partition_path, path_count, primary_paths, PathEnumerator, PathSet};
pub use timing::{
    arrival_times, critical_path_summary, departure_times, io_critical_paths, IoCritical,
    TimingSummary,
};

pub type GateId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Maj3,
    Inv,
    Buf,
    Const0,
    Const1,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Maj3 => 3,
            GateKind::Inv | GateKind::Buf => 1,
            GateKind::Const0 | GateKind::Const1 => 0,
        }
    }

    pub fn is_const(self) -> bool {
        matches!(self, GateKind::Const0 | GateKind::Const1)
    }

    /// Number of magnets driven per switching event (energy multiplier).
    /// Constants have no device.
    pub fn drive_multiplier(self) -> Option<f64> {
        match self {
            GateKind::Maj3 => Some(3.0),
            GateKind::Inv | GateKind::Buf => Some(1.0),
            GateKind::Const0 | GateKind::Const1 => None,
        }
    }

    pub fn eval(self, bits: &[bool]) -> bool {
        match self {
            GateKind::Maj3 => (bits[0] as u8 + bits[1] as u8 + bits[2] as u8) >= 2,
            GateKind::Inv => !bits[0],
            GateKind::Buf => bits[0],
            GateKind::Const0 => false,
            GateKind::Const1 => true,
        }
    }

    /// Bit-parallel evaluation over 64 lanes.
    pub fn eval_word(self, w: &[u64]) -> u64 {
        match self {
            GateKind::Maj3 => (w[0] & w[1]) | (w[0] & w[2]) | (w[1] & w[2]),
            GateKind::Inv => !w[0],
            GateKind::Buf => w[0],
            GateKind::Const0 => 0,
            GateKind::Const1 => !0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Input { index: usize, inverted: bool },
    Gate(GateId),
}

impl Signal {
    pub fn gate(self) -> Option<GateId> {
        match self {
            Signal::Gate(g) => Some(g),
            Signal::Input { .. } => None,
        }
    }

    /// Complemented primary-input literal. Panics on gate signals, which
    /// need an explicit INV.
    pub fn not(self) -> Signal {
        match self {
            Signal::Input { index, inverted } => Signal::Input {
                index,
                inverted: !inverted,
            },
            Signal::Gate(_) => panic!("internal signals cannot be inverted for free"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub id: GateId,
    pub kind: GateKind,
    pub fanins: Vec<Signal>,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl Gate {
    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }

    pub fn gate_fanins(&self) -> impl Iterator<Item = GateId> + '_ {
        self.fanins.iter().filter_map(|s| s.gate())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimaryInput {
    pub name: String,
    pub word: String,
    pub bit: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimaryOutput {
    pub name: String,
    pub driver: GateId,
    #[serde(default)]
    pub inverted: bool,
    pub word: String,
    pub bit: u32,
    /// Two's-complement sign bit: weight −2^bit instead of +2^bit.
    #[serde(default)]
    pub sign: bool,
}

impl PrimaryOutput {
    pub fn weight(&self) -> i64 {
        let w = 1i64 << self.bit;
        if self.sign {
            -w
        } else {
            w
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LogicNetwork {
    pub gates: Vec<Gate>,
    pub primary_inputs: Vec<PrimaryInput>,
    pub primary_outputs: Vec<PrimaryOutput>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetlistError {
    #[error("network has a cycle through gate {0}")]
    Cycle(GateId),
    #[error("input vector has {got} bits, network has {expected} primary inputs")]
    InputWidth { expected: usize, got: usize },
    #[error("gate {0} does not exist")]
    NoSuchGate(GateId),
    #[error("gate {0} is not connected to both a primary input and a primary output")]
    Unreachable(GateId),
    #[error("path enumeration exceeded the cap of {cap} paths")]
    PathCap { cap: usize },
    #[error("netlist file: {0}")]
    Format(String),
    #[error("unknown word {0}")]
    UnknownWord(String),
}

/// One validation finding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Diagnostic {
    Arity {
        gate: GateId,
        expected: usize,
        got: usize,
    },
    BadId {
        position: usize,
        id: GateId,
    },
    DanglingFanin {
        gate: GateId,
        fanin: String,
    },
    Cycle {
        gate: GateId,
    },
    BadOutputDriver {
        output: String,
        driver: GateId,
    },
    DuplicateOutputBit {
        word: String,
        bit: u32,
    },
    NoInputSupport {
        gate: GateId,
    },
    Dead {
        gate: GateId,
    },
}

impl LogicNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_input(&mut self, word: &str, bit: u32) -> Signal {
        let index = self.primary_inputs.len();
        self.primary_inputs.push(PrimaryInput {
            name: format!("{word}[{bit}]"),
            word: word.into(),
            bit,
        });
        Signal::Input {
            index,
            inverted: false,
        }
    }

    /// Add `width` input bits of one word, LSB first.
    pub fn add_input_word(&mut self, word: &str, width: u32) -> Vec<Signal> {
        (0..width).map(|b| self.add_input(word, b)).collect()
    }

    pub fn add_gate(&mut self, kind: GateKind, fanins: &[Signal], tags: &[&str]) -> Signal {
        let id = self.gates.len();
        debug_assert_eq!(kind.arity(), fanins.len());
        self.gates.push(Gate {
            id,
            kind,
            fanins: fanins.to_vec(),
            tags: tags.iter().map(|t| t.to_string()).collect(),
        });
        Signal::Gate(id)
    }

    pub fn maj(&mut self, a: Signal, b: Signal, c: Signal, tags: &[&str]) -> Signal {
        self.add_gate(GateKind::Maj3, &[a, b, c], tags)
    }

    pub fn inv(&mut self, a: Signal, tags: &[&str]) -> Signal {
        self.add_gate(GateKind::Inv, &[a], tags)
    }

    pub fn add_output(&mut self, driver: Signal, inverted: bool, word: &str, bit: u32, sign: bool) {
        let driver = match driver {
            Signal::Gate(g) => g,
            Signal::Input { .. } => panic!("primary outputs must be driven by a gate"),
        };
        self.primary_outputs.push(PrimaryOutput {
            name: format!("{word}[{bit}]"),
            driver,
            inverted,
            word: word.into(),
            bit,
            sign,
        });
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Gates that carry a switching device (everything but constants).
    pub fn device_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.kind.is_const()).count()
    }

    pub fn fanouts(&self) -> Vec<Vec<GateId>> {
        let mut out = vec![Vec::new(); self.gates.len()];
        for g in &self.gates {
            for f in g.gate_fanins() {
                if f < out.len() && !out[f].contains(&g.id) {
                    out[f].push(g.id);
                }
            }
        }
        out
    }

    pub fn output_drivers(&self) -> Vec<bool> {
        let mut drives = vec![false; self.gates.len()];
        for o in &self.primary_outputs {
            if o.driver < drives.len() {
                drives[o.driver] = true;
            }
        }
        drives
    }

    /// Kahn topological order.
    pub fn topo_order(&self) -> Result<Vec<GateId>, NetlistError> {
        let n = self.gates.len();
        let fanouts = self.fanouts();
        let mut indegree: Vec<usize> = self
            .gates
            .iter()
            .map(|g| {
                g.gate_fanins()
                    .filter(|&f| f < n)
                    .collect::<HashSet<_>>()
                    .len()
            })
            .collect();
        let mut ready: Vec<GateId> = (0..n).filter(|&g| indegree[g] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(g) = ready.pop() {
            order.push(g);
            for &h in fanouts[g].iter().rev() {
                indegree[h] -= 1;
                if indegree[h] == 0 {
                    ready.push(h);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&g| indegree[g] > 0).unwrap_or(0);
            return Err(NetlistError::Cycle(stuck));
        }
        Ok(order)
    }

    /// Structural checks. An empty list means the network is usable.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let n = self.gates.len();
        for (pos, g) in self.gates.iter().enumerate() {
            if g.id != pos {
                diags.push(Diagnostic::BadId {
                    position: pos,
                    id: g.id,
                });
            }
            if g.fanins.len() != g.kind.arity() {
                diags.push(Diagnostic::Arity {
                    gate: pos,
                    expected: g.kind.arity(),
                    got: g.fanins.len(),
                });
            }
            for s in &g.fanins {
                let bad = match *s {
                    Signal::Gate(f) => f >= n,
                    Signal::Input { index, .. } => index >= self.primary_inputs.len(),
                };
                if bad {
                    diags.push(Diagnostic::DanglingFanin {
                        gate: pos,
                        fanin: format!("{s:?}"),
                    });
                }
            }
        }
        let mut seen = HashSet::new();
        for o in &self.primary_outputs {
            if o.driver >= n {
                diags.push(Diagnostic::BadOutputDriver {
                    output: o.name.clone(),
                    driver: o.driver,
                });
            }
            if !seen.insert((o.word.clone(), o.bit)) {
                diags.push(Diagnostic::DuplicateOutputBit {
                    word: o.word.clone(),
                    bit: o.bit,
                });
            }
        }
        if !diags.is_empty() {
            return diags;
        }
        if let Err(NetlistError::Cycle(g)) = self.topo_order() {
            diags.push(Diagnostic::Cycle { gate: g });
            return diags;
        }
        let supported = self.input_support();
        let live = self.live_gates();
        for g in &self.gates {
            if !g.kind.is_const() && !supported[g.id] {
                diags.push(Diagnostic::NoInputSupport { gate: g.id });
            }
            if !live[g.id] {
                diags.push(Diagnostic::Dead { gate: g.id });
            }
        }
        diags
    }

    /// Gates whose fanin cone reaches a primary input.
    fn input_support(&self) -> Vec<bool> {
        let mut support = vec![false; self.gates.len()];
        if let Ok(order) = self.topo_order() {
            for g in order {
                let gate = &self.gates[g];
                support[g] = gate.fanins.iter().any(|s| match *s {
                    Signal::Input { .. } => true,
                    Signal::Gate(f) => support[f],
                });
            }
        }
        support
    }

    /// Gates in the fanin cone of some primary output.
    pub fn live_gates(&self) -> Vec<bool> {
        let mut live = vec![false; self.gates.len()];
        let mut stack: Vec<GateId> = self.primary_outputs.iter().map(|o| o.driver).collect();
        while let Some(g) = stack.pop() {
            if g >= live.len() || live[g] {
                continue;
            }
            live[g] = true;
            stack.extend(self.gates[g].gate_fanins());
        }
        live
    }

    /// Drop gates outside every output cone and renumber. Returns the
    /// old-to-new id map.
    pub fn prune(&mut self) -> Vec<Option<GateId>> {
        let live = self.live_gates();
        let mut map = vec![None; self.gates.len()];
        let mut next = 0;
        for (g, &alive) in live.iter().enumerate() {
            if alive {
                map[g] = Some(next);
                next += 1;
            }
        }
        let old = std::mem::take(&mut self.gates);
        for mut gate in old.into_iter().filter(|g| live[g.id]) {
            gate.id = map[gate.id].expect("live gate");
            for s in &mut gate.fanins {
                if let Signal::Gate(f) = s {
                    *f = map[*f].expect("fanin of a live gate is live");
                }
            }
            self.gates.push(gate);
        }
        for o in &mut self.primary_outputs {
            o.driver = map[o.driver].expect("output driver is live");
        }
        map
    }

    /// Noiseless evaluation. Returns one bit per primary output (after
    /// output inversion).
    pub fn eval_noiseless(&self, inputs: &[bool]) -> Result<Vec<bool>, NetlistError> {
        let values = self.eval_gates(inputs)?;
        Ok(self
            .primary_outputs
            .iter()
            .map(|o| values[o.driver] ^ o.inverted)
            .collect())
    }

    /// Noiseless value of every gate.
    pub fn eval_gates(&self, inputs: &[bool]) -> Result<Vec<bool>, NetlistError> {
        if inputs.len() != self.primary_inputs.len() {
            return Err(NetlistError::InputWidth {
                expected: self.primary_inputs.len(),
                got: inputs.len(),
            });
        }
        let mut values = vec![false; self.gates.len()];
        let mut buf = [false; 3];
        for g in self.topo_order()? {
            let gate = &self.gates[g];
            for (slot, s) in buf.iter_mut().zip(&gate.fanins) {
                *slot = match *s {
                    Signal::Input { index, inverted } => inputs[index] ^ inverted,
                    Signal::Gate(f) => values[f],
                };
            }
            values[g] = gate.kind.eval(&buf[..gate.fanins.len()]);
        }
        Ok(values)
    }

    /// Names of the output words in first-appearance order.
    pub fn output_words(&self) -> Vec<String> {
        let mut words: Vec<String> = Vec::new();
        for o in &self.primary_outputs {
            if !words.contains(&o.word) {
                words.push(o.word.clone());
            }
        }
        words
    }

    /// Decode output bits into one integer per word using the bit weights.
    pub fn decode_outputs(&self, bits: &[bool]) -> BTreeMap<String, i64> {
        let mut words = BTreeMap::new();
        for (o, &b) in self.primary_outputs.iter().zip(bits) {
            let entry = words.entry(o.word.clone()).or_insert(0i64);
            if b {
                *entry += o.weight();
            }
        }
        words
    }

    /// Build an input vector from word values (two's complement bits; bits
    /// of unnamed words stay 0).
    pub fn encode_inputs(&self, words: &[(&str, i64)]) -> Result<Vec<bool>, NetlistError> {
        let mut bits = vec![false; self.primary_inputs.len()];
        for (word, value) in words {
            let mut any = false;
            for (k, pi) in self.primary_inputs.iter().enumerate() {
                if pi.word == *word {
                    bits[k] = (value >> pi.bit) & 1 == 1;
                    any = true;
                }
            }
            if !any {
                return Err(NetlistError::UnknownWord(word.to_string()));
            }
        }
        Ok(bits)
    }

    /// Gates carrying `tag`.
    pub fn gates_tagged(&self, tag: &str) -> Vec<GateId> {
        self.gates
            .iter()
            .filter(|g| g.has_tag(tag))
            .map(|g| g.id)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_identities() {
        assert!(GateKind::Maj3.eval(&[true, true, false]));
        for a in [false, true] {
            for b in [false, true] {
                assert_eq!(GateKind::Maj3.eval(&[a, b, false]), a && b);
                assert_eq!(GateKind::Maj3.eval(&[a, b, true]), a || b);
            }
        }
    }

    #[test]
    fn single_inverter_is_valid() {
        let mut net = LogicNetwork::new();
        let x = net.add_input("x", 0);
        let y = net.inv(x, &[]);
        net.add_output(y, false, "y", 0, false);
        assert!(net.validate().is_empty());
        assert_eq!(net.eval_noiseless(&[true]).unwrap(), vec![false]);
    }

    #[test]
    fn arity_and_cycle_are_reported() {
        let mut net = LogicNetwork::new();
        let x = net.add_input("x", 0);
        net.gates.push(Gate {
            id: 0,
            kind: GateKind::Maj3,
            fanins: vec![x, x],
            tags: vec![],
        });
        net.add_output(Signal::Gate(0), false, "y", 0, false);
        assert!(matches!(
            net.validate()[0],
            Diagnostic::Arity {
                gate: 0,
                expected: 3,
                got: 2
            }
        ));

        let mut net = LogicNetwork::new();
        let x = net.add_input("x", 0);
        net.gates.push(Gate {
            id: 0,
            kind: GateKind::Maj3,
            fanins: vec![x, x, Signal::Gate(0)],
            tags: vec![],
        });
        net.add_output(Signal::Gate(0), false, "y", 0, false);
        assert_eq!(net.validate(), vec![Diagnostic::Cycle { gate: 0 }]);
    }

    #[test]
    fn prune_drops_dead_gates() {
        let mut net = LogicNetwork::new();
        let x = net.add_input("x", 0);
        let _dead = net.inv(x, &["dead"]);
        let y = net.inv(x, &["live"]);
        net.add_output(y, false, "y", 0, false);
        assert_eq!(net.validate(), vec![Diagnostic::Dead { gate: 0 }]);
        net.prune();
        assert_eq!(net.gate_count(), 1);
        assert!(net.validate().is_empty());
        assert_eq!(net.gates[0].tags, vec!["live".to_string()]);
    }

    #[test]
    fn signed_decode() {
        let mut net = LogicNetwork::new();
        let xs = net.add_input_word("x", 3);
        for (b, &x) in xs.iter().enumerate() {
            let g = net.add_gate(GateKind::Buf, &[x], &[]);
            net.add_output(g, false, "y", b as u32, b == 2);
        }
        let bits = net.encode_inputs(&[("x", -3)]).unwrap();
        let out = net.eval_noiseless(&bits).unwrap();
        assert_eq!(net.decode_outputs(&out)["y"], -3);
    }
}
