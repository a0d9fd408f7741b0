//! Generators for the majority-logic arithmetic blocks: ripple-carry adder,
//! Baugh-Wooley multiplier with an embedded reduced-precision estimator,
//! and carry-save accumulation.
//!
//! Every gate carries exactly one role tag (`m1`, `i1`, `m2`, `m3`, `pp`,
//! `vote`, `buf`, `const`) plus grouping tags such as `FA12`, `col5` or a scope
//! name supplied by the caller.

mod bwm;
mod csa;
mod rca;
mod reorder;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{GateKind, LogicNetwork, NetlistError, Signal};

pub use bwm::{
    build_bwm, build_bwm_signed_unsigned, bwm_into, rpe_offset, BwmSignals, Signedness, RPE_BITS,
};
pub use csa::{build_csa, constant_word, csa_into, csa_width, sign_extend};
pub use rca::{build_rca, rca_into};
pub use reorder::reorder_dimensions;

pub const ROLE_TAGS: &[&str] = &["m1", "i1", "m2", "m3", "pp", "vote", "buf", "const"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("invalid block parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum BlockKind {
    Rca {
        width: usize,
    },
    Bwm {
        signedness: Signedness,
        rpe_bits: usize,
    },
    Csa {
        operands: usize,
        width: usize,
        serial: bool,
    },
}

/// A named group of internal signals exposed to other blocks, read as a
/// two's-complement or unsigned word plus a constant offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    /// LSB first.
    pub bits: Vec<Signal>,
    pub signed: bool,
    /// Added after decoding the bits.
    pub offset: i64,
}

impl Tap {
    pub fn decode(&self, gate_values: &[bool], inputs: &[bool]) -> i64 {
        let n = self.bits.len();
        let mut v = 0i64;
        for (k, s) in self.bits.iter().enumerate() {
            let bit = match *s {
                Signal::Gate(g) => gate_values[g],
                Signal::Input { index, inverted } => inputs[index] ^ inverted,
            };
            if bit {
                v += if self.signed && k + 1 == n {
                    -(1i64 << k)
                } else {
                    1i64 << k
                };
            }
        }
        v + self.offset
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDescriptor {
    pub kind: BlockKind,
    pub network: LogicNetwork,
    pub tap_map: BTreeMap<String, Tap>,
}

impl BlockDescriptor {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("blocks always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ArithError> {
        serde_json::from_str(text)
            .map_err(|e| ArithError::Netlist(NetlistError::Format(e.to_string())))
    }

    /// Drop unused gates and remap taps accordingly.
    pub fn prune(&mut self) {
        let map = self.network.prune();
        for tap in self.tap_map.values_mut() {
            for s in &mut tap.bits {
                if let Signal::Gate(g) = s {
                    *g = map[*g].expect("tapped gates are kept alive by outputs");
                }
            }
        }
    }
}

/// A bit that may be a known zero.
pub type Bit = Option<Signal>;

/// Gate-construction context: shared tie cells, adder numbering and the
/// tags applied to every new gate.
pub struct Builder<'a> {
    pub net: &'a mut LogicNetwork,
    zero: Option<Signal>,
    one: Option<Signal>,
    adders: usize,
    scope: Vec<String>,
}

impl<'a> Builder<'a> {
    pub fn new(net: &'a mut LogicNetwork) -> Self {
        // Reuse tie cells already present so repeated builders share them.
        let find = |kind: GateKind| {
            net.gates
                .iter()
                .find(|g| g.kind == kind)
                .map(|g| Signal::Gate(g.id))
        };
        let zero = find(GateKind::Const0);
        let one = find(GateKind::Const1);
        let adders = net.gates.iter().filter(|g| g.has_tag("m1")).count();
        Self {
            net,
            zero,
            one,
            adders,
            scope: Vec::new(),
        }
    }

    /// Run `f` with `tag` added to every gate it creates.
    pub fn scoped<R>(&mut self, tag: impl Into<String>, f: impl FnOnce(&mut Self) -> R) -> R {
        self.scope.push(tag.into());
        let r = f(self);
        self.scope.pop();
        r
    }

    pub fn gate(&mut self, kind: GateKind, fanins: &[Signal], tags: &[&str]) -> Signal {
        self.gate_owned(kind, fanins, tags.iter().map(|t| t.to_string()).collect())
    }

    fn gate_owned(&mut self, kind: GateKind, fanins: &[Signal], mut tags: Vec<String>) -> Signal {
        tags.extend(self.scope.iter().cloned());
        let id = self.net.gates.len();
        self.net.gates.push(crate::netlist::Gate {
            id,
            kind,
            fanins: fanins.to_vec(),
            tags,
        });
        Signal::Gate(id)
    }

    pub fn zero(&mut self) -> Signal {
        if let Some(z) = self.zero {
            return z;
        }
        let z = self.net.add_gate(GateKind::Const0, &[], &["const"]);
        self.zero = Some(z);
        z
    }

    pub fn one(&mut self) -> Signal {
        if let Some(o) = self.one {
            return o;
        }
        let o = self.net.add_gate(GateKind::Const1, &[], &["const"]);
        self.one = Some(o);
        o
    }

    /// Majority full adder: m1 = MAJ(a, b, c) is the carry, i1 = ¬m1,
    /// m2 = MAJ(a, b, i1), m3 = MAJ(i1, c, m2) is the sum.
    pub fn full_adder(
        &mut self,
        a: Signal,
        b: Signal,
        c: Signal,
        tags: &[&str],
    ) -> (Signal, Signal) {
        let group = format!("FA{}", self.adders);
        self.adders += 1;
        let tagged = |role: &str| -> Vec<String> {
            [role, group.as_str()]
                .iter()
                .chain(tags)
                .map(|t| t.to_string())
                .collect()
        };
        let m1 = self.gate_owned(GateKind::Maj3, &[a, b, c], tagged("m1"));
        let i1 = self.gate_owned(GateKind::Inv, &[m1], tagged("i1"));
        let m2 = self.gate_owned(GateKind::Maj3, &[a, b, i1], tagged("m2"));
        let m3 = self.gate_owned(GateKind::Maj3, &[i1, c, m2], tagged("m3"));
        (m3, m1)
    }

    /// Add up to three bits; absent bits are zero. Returns (sum, carry).
    pub fn add3(&mut self, bits: [Bit; 3], tags: &[&str]) -> (Bit, Bit) {
        let present: Vec<Signal> = bits.iter().flatten().copied().collect();
        match present.len() {
            0 => (None, None),
            1 => (Some(present[0]), None),
            2 => {
                let z = self.zero();
                let (s, c) = self.full_adder(present[0], present[1], z, tags);
                (Some(s), Some(c))
            }
            _ => {
                let (s, c) = self.full_adder(present[0], present[1], present[2], tags);
                (Some(s), Some(c))
            }
        }
    }

    /// Ripple-carry sum of two bit vectors modulo 2^width.
    pub fn ripple(
        &mut self,
        x: &[Bit],
        y: &[Bit],
        carry_in: Bit,
        width: usize,
        tags: &[&str],
    ) -> Vec<Bit> {
        let mut carry = carry_in;
        let mut out = Vec::with_capacity(width);
        for k in 0..width {
            let col = format!("col{k}");
            let mut t = tags.to_vec();
            t.push(&col);
            let (s, c) = self.add3(
                [
                    x.get(k).copied().flatten(),
                    y.get(k).copied().flatten(),
                    carry,
                ],
                &t,
            );
            out.push(s);
            carry = c;
        }
        out
    }

    /// Resolve a possibly-zero bit to a drivable signal.
    pub fn materialize(&mut self, bit: Bit) -> Signal {
        bit.unwrap_or_else(|| self.zero())
    }
}

/// Column heights to bit-vector helpers for carry-save reduction.
pub(crate) fn heap_push(heap: &mut Vec<Vec<Signal>>, column: usize, s: Signal) {
    if heap.len() <= column {
        heap.resize(column + 1, Vec::new());
    }
    heap[column].push(s);
}
