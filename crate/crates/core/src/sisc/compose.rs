use serde::{Deserialize, Serialize};

use super::{FusionParams, SiscError};
use crate::arith_gen::{constant_word, csa_into, Bit, Builder};
use crate::delay_shaping::{DelayAssignment, Pricer};
use crate::device_model::energy_for_error_rate;
use crate::netlist::{GateKind, LogicNetwork, Signal};

/// EC gate count above this share of the main block draws a warning.
pub const EC_WARN_RATIO: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EcConfig {
    /// EC gate ε as a multiple of ε_cp_avg.
    pub epsilon_ratio: f64,
    /// Absolute EC ε; overrides the ratio when set.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Low tap bits left out of the estimator sum; their mean is added back
    /// as a constant.
    pub tap_drop_bits: u32,
}

impl Default for EcConfig {
    fn default() -> Self {
        Self {
            epsilon_ratio: 1e-4,
            epsilon: None,
            tap_drop_bits: 2,
        }
    }
}

impl EcConfig {
    pub fn ec_epsilon(&self, eps_cp_avg: f64) -> f64 {
        self.epsilon.unwrap_or(self.epsilon_ratio * eps_cp_avg)
    }
}

/// Estimator inputs: unsigned tap words read from the main block. Their
/// estimate of the main output is Σ 2^shift (tap + offset) + bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TapBank {
    /// Each LSB first.
    pub taps: Vec<Vec<Signal>>,
    pub shift: u32,
    pub offset: i64,
    pub bias_correction: i64,
}

impl TapBank {
    /// Constant folded into the estimator sum.
    pub fn constant(&self, drop_bits: u32) -> i64 {
        let n = self.taps.len() as i64;
        let dropped_mean = if drop_bits == 0 {
            0
        } else {
            ((1i64 << drop_bits) - 1) << self.shift >> 1
        };
        n * ((self.offset << self.shift) + dropped_mean) + self.bias_correction
    }

    /// Software value of the estimate given each tap's raw reading.
    pub fn estimate(&self, raw: &[i64], drop_bits: u32) -> i64 {
        raw.iter()
            .map(|&r| (r >> drop_bits << drop_bits) << self.shift)
            .sum::<i64>()
            + self.constant(drop_bits)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Main,
    Estimator,
    Fusion,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCounts {
    pub main: usize,
    pub estimator: usize,
    pub fusion: usize,
}

/// Main block, estimator and fusion stage in one network. Output words:
/// the main block's `y_a` (name kept from the input network), `y_e` and
/// the corrected `y_hat`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiscArchitecture {
    pub network: LogicNetwork,
    pub assignment: DelayAssignment,
    pub region: Vec<Region>,
    pub counts: RegionCounts,
    /// (estimator + fusion) / main, logic gates only.
    pub ec_ratio: f64,
    pub fusion: FusionParams,
    pub ec_epsilon: f64,
    pub main_word: String,
    pub warnings: Vec<String>,
}

/// Attach an estimator CSA and the three-adder fusion stage to a shaped
/// main block.
///
/// `mb` prices the main-block gates; every added gate, and every main-block
/// gate tagged `rpe` (tap logic that exists only for the estimator), is
/// re-priced to the EC error rate at its delay.
#[allow(clippy::too_many_arguments)]
pub fn compose_sisc(
    mut net: LogicNetwork,
    mb: &DelayAssignment,
    main_word: &str,
    bank: &TapBank,
    fusion: FusionParams,
    ec: &EcConfig,
    pricer: &Pricer,
    eps_cp_avg: f64,
) -> Result<SiscArchitecture, SiscError> {
    let l = fusion.l as usize;
    if mb.factor.len() != net.gates.len() {
        return Err(SiscError::Compose(format!(
            "assignment covers {} gates, main block has {}",
            mb.factor.len(),
            net.gates.len()
        )));
    }
    let mut ya: Vec<(u32, Signal, bool)> = net
        .primary_outputs
        .iter()
        .filter(|o| o.word == main_word)
        .map(|o| (o.bit, Signal::Gate(o.driver), o.inverted))
        .collect();
    ya.sort_unstable_by_key(|&(bit, _, _)| bit);
    if ya.len() != l
        || ya
            .iter()
            .enumerate()
            .any(|(k, &(bit, _, _))| bit as usize != k)
    {
        return Err(SiscError::Compose(format!(
            "word '{main_word}' must have exactly bits 0..{l}"
        )));
    }
    if bank.taps.is_empty() {
        return Err(SiscError::Compose(
            "estimator needs at least one tap".into(),
        ));
    }
    let mb_gates = net.gates.len();
    let drop = ec.tap_drop_bits as usize;

    let (y_e, y_hat) = {
        let mut b = Builder::new(&mut net);
        let y_e: Vec<Bit> = b.scoped("est", |b| {
            let mut operands: Vec<Vec<Bit>> = bank
                .taps
                .iter()
                .map(|tap| {
                    let mut op = vec![None; l];
                    for (k, &s) in tap.iter().enumerate().skip(drop) {
                        let col = k + bank.shift as usize;
                        if col < l {
                            op[col] = Some(s);
                        }
                    }
                    op
                })
                .collect();
            operands.push(constant_word(b, bank.constant(ec.tap_drop_bits), l));
            csa_into(b, &operands, l, false)
        });
        let y_hat: Vec<Bit> = b.scoped("fusion", |b| {
            let ya_bits: Vec<Bit> = ya
                .iter()
                .map(|&(_, s, inv)| {
                    Some(if inv {
                        b.gate(GateKind::Inv, &[s], &["neg"])
                    } else {
                        s
                    })
                })
                .collect();
            let s = fusion.s() as usize;
            if s == 0 {
                return ya_bits;
            }
            let negate = |b: &mut Builder<'_>, bits: &[Bit]| -> Vec<Bit> {
                bits.iter()
                    .map(|bit| {
                        let constant = bit.and_then(|s| s.gate()).map(|g| b.net.gates[g].kind);
                        Some(match (bit, constant) {
                            (None, _) | (_, Some(GateKind::Const0)) => b.one(),
                            (_, Some(GateKind::Const1)) => b.zero(),
                            (Some(sig), _) => b.gate(GateKind::Inv, &[*sig], &["neg"]),
                        })
                    })
                    .collect()
            };
            let one = Some(b.one());
            // y_a − y_e.
            let neg_ye = negate(b, &y_e);
            let d = b.ripple(&ya_bits, &neg_ye, one, l, &["diff"]);
            // + step/2, then keep the top s bits: η̂.
            let h = l - s;
            let rounded = b.ripple(&d[h - 1..], &[one], None, s + 1, &["round"]);
            let eta_hi = &rounded[1..];
            // y_a − η̂; the low h bits of η̂ are zero.
            let neg_eta = negate(b, eta_hi);
            let hi = b.ripple(&ya_bits[h..], &neg_eta, one, s, &["correct"]);
            ya_bits[..h].iter().copied().chain(hi).collect()
        });
        (y_e, y_hat)
    };
    for (word, bits) in [("y_e", &y_e), ("y_hat", &y_hat)] {
        for (k, bit) in bits.iter().enumerate() {
            let driver = match bit {
                Some(s) => *s,
                None => Builder::new(&mut net).zero(),
            };
            let driver = match driver {
                Signal::Gate(_) => driver,
                Signal::Input { .. } => net.add_gate(GateKind::Buf, &[driver], &["buf", "fusion"]),
            };
            net.add_output(driver, false, word, k as u32, k + 1 == l);
        }
    }
    let old_len = net.gates.len();
    let map = net.prune();
    let problems = net.validate();
    if !problems.is_empty() {
        let tags: Vec<String> = problems
            .iter()
            .filter_map(|d| match d {
                crate::netlist::Diagnostic::NoInputSupport { gate } => {
                    Some(net.gates[*gate].tags.join("|"))
                }
                _ => None,
            })
            .collect();
        return Err(SiscError::Compose(format!(
            "composed network is invalid: {problems:?} {tags:?}"
        )));
    }

    let region: Vec<Region> = net
        .gates
        .iter()
        .map(|g| {
            if g.has_tag("fusion") {
                Region::Fusion
            } else if g.has_tag("est") || g.has_tag("rpe") {
                Region::Estimator
            } else {
                Region::Main
            }
        })
        .collect();
    let mut counts = RegionCounts::default();
    for (g, r) in net.gates.iter().zip(&region) {
        if g.kind.is_const() {
            continue;
        }
        match r {
            Region::Main => counts.main += 1,
            Region::Estimator => counts.estimator += 1,
            Region::Fusion => counts.fusion += 1,
        }
    }
    let ec_ratio = (counts.estimator + counts.fusion) as f64 / counts.main.max(1) as f64;
    let mut warnings = Vec::new();
    if ec_ratio > EC_WARN_RATIO {
        warnings.push(format!(
            "EC block is {:.1}% of the main block ({} estimator + {} fusion gates vs {} main)",
            100.0 * ec_ratio,
            counts.estimator,
            counts.fusion,
            counts.main
        ));
    }

    let eps_ec = ec.ec_epsilon(eps_cp_avg);
    let mut a = mb.clone();
    for g in mb_gates..old_len {
        a.factor
            .push(if map[g].is_some_and(|n| net.gates[n].kind.is_const()) {
                0.0
            } else {
                1.0
            });
        a.current.push(0.0);
        a.energy.push(0.0);
        a.epsilon.push(0.0);
    }
    let mut a = a.remapped(&map);
    for g in net
        .gates
        .iter()
        .filter(|g| !g.kind.is_const() && region[g.id] != Region::Main)
    {
        let t = a.delay(g.id);
        let e = energy_for_error_rate(&pricer.params, pricer.model, eps_ec, t, g.kind)?;
        a.energy[g.id] = e;
        a.current[g.id] = pricer.current(g.kind, e, t)?;
        a.epsilon[g.id] = pricer.epsilon(g.kind, e, t)?;
    }
    Ok(SiscArchitecture {
        network: net,
        assignment: a,
        region,
        counts,
        ec_ratio,
        fusion,
        ec_epsilon: eps_ec,
        main_word: main_word.to_string(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device_model::{DeviceParams, ErrorModel};
    use crate::sisc::fuse_wrapping;

    /// Main block passes an 8-bit signed input through buffers.
    fn pass_through() -> LogicNetwork {
        let mut net = LogicNetwork::new();
        let x = net.add_input_word("x", 8);
        for (k, &s) in x.iter().enumerate() {
            let g = net.add_gate(GateKind::Buf, &[s], &["buf"]);
            net.add_output(g, false, "y", k as u32, k == 7);
        }
        net
    }

    #[test]
    fn hardware_fusion_matches_software() {
        let net = pass_through();
        let pricer = Pricer::new(DeviceParams::default(), ErrorModel::IsoK);
        let mb = DelayAssignment::uniform(&net, &pricer, 1e-9, 0.1).unwrap();
        // Estimator reads the main output's low 7 bits only: y_e = y mod 128,
        // so y_a − y_e is 0 or −128, a whole step, and fusion removes it.
        let low: Vec<Signal> = net
            .primary_outputs
            .iter()
            .take(7)
            .map(|o| Signal::Gate(o.driver))
            .collect();
        let bank = TapBank {
            taps: vec![low],
            shift: 0,
            offset: 0,
            bias_correction: 0,
        };
        let fusion = FusionParams::new(8, 2).unwrap();
        let ec = EcConfig {
            tap_drop_bits: 0,
            ..Default::default()
        };
        let arch = compose_sisc(net, &mb, "y", &bank, fusion, &ec, &pricer, 0.1).unwrap();
        assert!(arch.network.validate().is_empty());
        for x in -128..128i64 {
            let bits = arch.network.encode_inputs(&[("x", x)]).unwrap();
            let out = arch
                .network
                .decode_outputs(&arch.network.eval_noiseless(&bits).unwrap());
            assert_eq!(out["y_e"], x.rem_euclid(128));
            assert_eq!(
                out["y_hat"],
                fuse_wrapping(out["y"], out["y_e"], &fusion).y_hat,
                "x = {x}"
            );
            assert_eq!(out["y_hat"], x.rem_euclid(128));
        }
        assert!(arch
            .assignment
            .epsilon
            .iter()
            .zip(&arch.region)
            .all(|(&e, r)| *r == Region::Main || e < 1e-4));
    }

    #[test]
    fn tap_constant_includes_dropped_bit_mean() {
        let bank = TapBank {
            taps: vec![vec![]; 3],
            shift: 6,
            offset: -496,
            bias_correction: 10,
        };
        assert_eq!(bank.constant(0), 3 * (-496 * 64) + 10);
        assert_eq!(bank.constant(2), 3 * (-496 * 64 + 96) + 10);
        assert_eq!(
            bank.estimate(&[7, 0, 4], 2),
            (4 + 4) * 64 + bank.constant(2)
        );
    }
}
