use std::collections::BTreeMap;

use super::{ArithError, BlockDescriptor, BlockKind, Builder};
use crate::netlist::{GateKind, LogicNetwork, Signal};

/// Ripple-carry adder on primary-input operands.
///
/// Each stage is the four-gate majority full adder (m1 carry, i1 its
/// inverse, m2 and m3 forming the sum). Stages alternate polarity: odd
/// stages read complemented operand literals and receive the complemented
/// carry, so the carry chain is m1 → i1 → m1 → … with no extra inverters,
/// and m2 of stage j takes the un-inverted carry straight from m1 of stage
/// j−1. Odd stages therefore produce complemented sums, which are undone
/// for free at the output. Returns (sum bits, carry out), each with an
/// output-inversion flag.
pub fn rca_into(
    b: &mut Builder<'_>,
    x: &[Signal],
    y: &[Signal],
    carry_in: Signal,
) -> (Vec<(Signal, bool)>, (Signal, bool)) {
    assert_eq!(x.len(), y.len());
    let width = x.len();
    let mut sums = Vec::with_capacity(width);
    // (carry, complemented carry) as seen by the current stage.
    let (mut c, mut nc) = (carry_in, carry_in.not());
    let mut last_m1 = None;
    for j in 0..width {
        let odd = j % 2 == 1;
        let (a, bb) = if odd {
            (x[j].not(), y[j].not())
        } else {
            (x[j], y[j])
        };
        let tags = [format!("FA{j}"), format!("bit{j}")];
        let t: Vec<&str> = tags.iter().map(String::as_str).collect();
        let m1 = b.gate(GateKind::Maj3, &[a, bb, c], &[&["m1"], &t[..]].concat());
        let i1 = b.gate(GateKind::Inv, &[m1], &[&["i1"], &t[..]].concat());
        let m2 = b.gate(GateKind::Maj3, &[a, bb, nc], &[&["m2"], &t[..]].concat());
        let m3 = b.gate(GateKind::Maj3, &[i1, c, m2], &[&["m3"], &t[..]].concat());
        sums.push((m3, odd));
        c = i1;
        nc = m1;
        last_m1 = Some((m1, odd));
    }
    (sums, last_m1.expect("width >= 1"))
}

/// `width`-bit adder with carry in. Output word `s` has width + 1 bits
/// (carry out on top), unsigned.
pub fn build_rca(width: usize) -> Result<BlockDescriptor, ArithError> {
    if width == 0 {
        return Err(ArithError::Params("adder width must be at least 1".into()));
    }
    let mut net = LogicNetwork::new();
    let a = net.add_input_word("a", width as u32);
    let bw = net.add_input_word("b", width as u32);
    let cin = net.add_input("cin", 0);
    let (sums, cout) = {
        let mut b = Builder::new(&mut net);
        rca_into(&mut b, &a, &bw, cin)
    };
    for (k, (s, inv)) in sums.into_iter().enumerate() {
        net.add_output(s, inv, "s", k as u32, false);
    }
    net.add_output(cout.0, cout.1, "s", width as u32, false);
    Ok(BlockDescriptor {
        kind: BlockKind::Rca { width },
        network: net,
        tap_map: BTreeMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn add(block: &BlockDescriptor, a: i64, b: i64, cin: i64) -> i64 {
        let net = &block.network;
        let bits = net
            .encode_inputs(&[("a", a), ("b", b), ("cin", cin)])
            .unwrap();
        net.decode_outputs(&net.eval_noiseless(&bits).unwrap())["s"]
    }

    #[test]
    fn single_stage_is_a_full_adder() {
        let block = build_rca(1).unwrap();
        for v in 0..8 {
            assert_eq!(
                add(&block, v & 1, (v >> 1) & 1, v >> 2),
                (v & 1) + ((v >> 1) & 1) + (v >> 2)
            );
        }
    }

    #[test]
    fn exhaustive_small_widths() {
        for width in 2..=6 {
            let block = build_rca(width).unwrap();
            assert!(block.network.validate().is_empty());
            let top = 1i64 << width;
            for a in 0..top {
                for b in 0..top {
                    for cin in 0..2 {
                        assert_eq!(add(&block, a, b, cin), a + b + cin, "width {width}");
                    }
                }
            }
        }
    }

    #[test]
    fn stage_structure() {
        let block = build_rca(15).unwrap();
        assert_eq!(block.network.gate_count(), 60);
        for role in ["m1", "i1", "m2", "m3"] {
            assert_eq!(block.network.gates_tagged(role).len(), 15);
        }
    }
}
