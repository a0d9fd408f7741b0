#![allow(dead_code)]

use asl_sisc::delay_shaping::Pricer;
use asl_sisc::device_model::{DeviceParams, ErrorModel};
use asl_sisc::netlist::{GateKind, LogicNetwork, Signal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn iso_k_pricer() -> Pricer {
    Pricer::new(DeviceParams::default(), ErrorModel::IsoK)
}

/// Random DAG of inverters and majority gates over three inputs. Fanins
/// come from the inputs (sometimes complemented) or earlier gates; every gate nobody reads drives
/// an output bit of word `y`, so nothing is dead.
pub fn random_dag(gates: usize, seed: u64) -> LogicNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = LogicNetwork::new();
    let inputs: Vec<Signal> = (0..3).map(|k| net.add_input("x", k)).collect();
    let mut signals = inputs.clone();
    let mut read = vec![false; gates];
    for _ in 0..gates {
        let kind = if rng.gen_bool(0.3) {
            GateKind::Inv
        } else {
            GateKind::Maj3
        };
        let fanins: Vec<Signal> = (0..kind.arity())
            .map(|_| {
                let s = signals[rng.gen_range(0..signals.len())];
                if s.gate().is_none() && rng.gen_bool(0.2) {
                    s.not()
                } else {
                    s
                }
            })
            .collect();
        for f in &fanins {
            if let Some(g) = f.gate() {
                read[g] = true;
            }
        }
        signals.push(net.add_gate(kind, &fanins, &[]));
    }
    let mut bit = 0;
    for (g, &r) in read.iter().enumerate() {
        if !r {
            net.add_output(Signal::Gate(g), false, "y", bit, false);
            bit += 1;
        }
    }
    net
}
