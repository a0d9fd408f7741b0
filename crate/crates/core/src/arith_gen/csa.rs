use std::collections::BTreeMap;

use super::bwm::reduce_heap;
use super::{heap_push, ArithError, Bit, BlockDescriptor, BlockKind, Builder};
use crate::netlist::{LogicNetwork, Signal};

/// Result width that holds the sum of `operands` signed words of
/// `operand_width` bits without overflow.
pub fn csa_width(operands: usize, operand_width: usize) -> usize {
    operand_width + (usize::BITS - operands.saturating_sub(1).leading_zeros()) as usize
}

/// Repeat the sign bit up to `width`.
pub fn sign_extend(bits: &[Bit], width: usize) -> Vec<Bit> {
    let sign = bits.last().copied().flatten();
    (0..width)
        .map(|k| if k < bits.len() { bits[k] } else { sign })
        .collect()
}

/// `value` modulo 2^width as tie-cell bits.
pub fn constant_word(b: &mut Builder<'_>, value: i64, width: usize) -> Vec<Bit> {
    (0..width)
        .map(|k| {
            if (value >> k) & 1 == 1 {
                Some(b.one())
            } else {
                None
            }
        })
        .collect()
}

/// Sum of `operands` (each already extended to `width` bits) modulo
/// 2^width. Serial mode folds operands one at a time into a carry-save
/// pair, one full-adder row per operand, the way a streaming accumulator
/// would; otherwise a Wallace tree. Both end in a ripple adder.
pub fn csa_into(
    b: &mut Builder<'_>,
    operands: &[Vec<Bit>],
    width: usize,
    serial: bool,
) -> Vec<Bit> {
    assert!(operands.iter().all(|op| op.len() == width));
    match operands.len() {
        0 => return vec![None; width],
        1 => return operands[0].clone(),
        _ => {}
    }
    if !serial {
        let mut heap = Vec::new();
        for op in operands {
            for (k, bit) in op.iter().enumerate() {
                if let Some(s) = bit {
                    heap_push(&mut heap, k, *s);
                }
            }
        }
        return reduce_heap(b, heap, width);
    }
    let mut sums = operands[0].clone();
    let mut carries = operands[1].clone();
    for (n, op) in operands.iter().enumerate().skip(2) {
        let stage = format!("stage{n}");
        let mut next_sums = vec![None; width];
        let mut next_carries = vec![None; width];
        for k in 0..width {
            let col = format!("col{k}");
            let (s, c) = b.add3([sums[k], carries[k], op[k]], &[&col, &stage]);
            next_sums[k] = s;
            if k + 1 < width {
                next_carries[k + 1] = c;
            }
        }
        sums = next_sums;
        carries = next_carries;
    }
    b.ripple(&sums, &carries, None, width, &["final"])
}

/// Adder for `operands` signed words `x0`, `x1`, … of `operand_width` bits.
/// Output word `s`, signed, `csa_width` bits.
pub fn build_csa(
    operands: usize,
    operand_width: usize,
    serial: bool,
) -> Result<BlockDescriptor, ArithError> {
    if operands < 2 || operand_width == 0 {
        return Err(ArithError::Params(format!(
            "need at least two operands of nonzero width, got {operands} x {operand_width}"
        )));
    }
    let width = csa_width(operands, operand_width);
    let mut net = LogicNetwork::new();
    let words: Vec<Vec<Bit>> = (0..operands)
        .map(|n| {
            net.add_input_word(&format!("x{n}"), operand_width as u32)
                .into_iter()
                .map(Some)
                .collect()
        })
        .collect();
    let sum: Vec<Signal> = {
        let mut b = Builder::new(&mut net);
        let extended: Vec<Vec<Bit>> = words.iter().map(|w| sign_extend(w, width)).collect();
        let bits = b.scoped("csa", |b| csa_into(b, &extended, width, serial));
        bits.into_iter().map(|bit| b.materialize(bit)).collect()
    };
    for (k, s) in sum.into_iter().enumerate() {
        // Two's complement inputs may pass straight through to an output;
        // route those through a buffer so every output has a gate driver.
        let driver = match s {
            Signal::Gate(_) => s,
            Signal::Input { .. } => net.add_gate(crate::netlist::GateKind::Buf, &[s], &["buf"]),
        };
        net.add_output(driver, false, "s", k as u32, k + 1 == width);
    }
    let mut block = BlockDescriptor {
        kind: BlockKind::Csa {
            operands,
            width: operand_width,
            serial,
        },
        network: net,
        tap_map: BTreeMap::new(),
    };
    block.prune();
    Ok(block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn widths() {
        assert_eq!(csa_width(2, 16), 17);
        assert_eq!(csa_width(3, 16), 18);
        assert_eq!(csa_width(4, 16), 18);
        assert_eq!(csa_width(120, 16), 23);
        assert_eq!(csa_width(128, 16), 23);
        assert_eq!(csa_width(129, 16), 24);
    }

    fn check(n: usize, w: usize, serial: bool, trials: usize) {
        let block = build_csa(n, w, serial).unwrap();
        assert!(block.network.validate().is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let half = 1i64 << (w - 1);
        let names: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
        for t in 0..trials {
            let values: Vec<i64> = (0..n)
                .map(|_| match t {
                    0 => -half,
                    1 => half - 1,
                    _ => rng.gen_range(-half..half),
                })
                .collect();
            let pairs: Vec<(&str, i64)> = names
                .iter()
                .map(String::as_str)
                .zip(values.iter().copied())
                .collect();
            let net = &block.network;
            let out = net
                .eval_noiseless(&net.encode_inputs(&pairs).unwrap())
                .unwrap();
            assert_eq!(
                net.decode_outputs(&out)["s"],
                values.iter().sum::<i64>(),
                "{values:?}"
            );
        }
    }

    #[test]
    fn serial_and_tree_sums() {
        for n in [2, 3, 5, 8] {
            check(n, 6, true, 200);
            check(n, 6, false, 200);
        }
        check(40, 16, true, 50);
    }
}
