//! 8×8 Baugh-Wooley multiplier with an embedded 5×5 estimator.
//!
//! Partial products involving exactly one sign bit are complemented
//! (NAND terms) and the resulting bias is repaid by constant ones, so every
//! column is a plain sum of bits. The top 5×5 corner of the array (operand
//! bits 3..7) is reduced first as a carry-save array; four extra full adders
//! (tagged `rpe`) resolve it into a 10-bit word equal to the product of the
//! truncated operands plus a known offset. The main product then continues
//! from the unresolved carry-save state, so the estimator adders hang off
//! the datapath instead of sitting on it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{heap_push, ArithError, Bit, BlockDescriptor, BlockKind, Builder, Tap};
use crate::netlist::{GateKind, LogicNetwork, Signal};

pub const OPERAND_BITS: usize = 8;
/// Operand bits kept by the estimator.
pub const RPE_BITS: usize = 5;
const PRODUCT_BITS: usize = 2 * OPERAND_BITS;
const LOW: usize = OPERAND_BITS - RPE_BITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signedness {
    /// Both operands two's complement.
    SignedSigned,
    /// First operand two's complement, second unsigned.
    SignedUnsigned,
}

impl Signedness {
    fn complemented(self, i: usize, j: usize) -> bool {
        let top = OPERAND_BITS - 1;
        match self {
            Signedness::SignedSigned => (i == top) != (j == top),
            Signedness::SignedUnsigned => i == top,
        }
    }

    /// Sum of the negative weights folded into the NAND terms, as a
    /// positive correction modulo 2^16.
    fn correction(self) -> i64 {
        let n = OPERAND_BITS as u32;
        let mask = (1i64 << PRODUCT_BITS) - 1;
        let bias = match self {
            // Two rows of −(2^(2n−2) − 2^(n−1)).
            Signedness::SignedSigned => 2 * ((1i64 << (2 * n - 2)) - (1i64 << (n - 1))),
            // One row of −(2^(2n−1) − 2^(n−1)).
            Signedness::SignedUnsigned => (1i64 << (2 * n - 1)) - (1i64 << (n - 1)),
        };
        (-bias) & mask
    }
}

/// Value that must be added to the raw unsigned 10-bit estimator word to
/// obtain the product of the truncated operands. The raw word never wraps,
/// so this is exact for all operands.
pub fn rpe_offset(signedness: Signedness) -> i64 {
    let m = RPE_BITS as u32;
    match signedness {
        Signedness::SignedSigned => -2 * ((1i64 << (2 * m - 2)) - (1i64 << (m - 1))),
        Signedness::SignedUnsigned => -((1i64 << (2 * m - 1)) - (1i64 << (m - 1))),
    }
}

pub struct BwmSignals {
    /// 16 product bits, LSB first, two's complement.
    pub product: Vec<Bit>,
    /// Raw 10-bit estimator word, LSB first (unsigned; add `rpe_offset`).
    pub rpe: Vec<Signal>,
}

fn partial_product(b: &mut Builder<'_>, x: Signal, y: Signal, complemented: bool) -> Signal {
    if complemented {
        // ¬(x ∧ y) = ¬x ∨ ¬y, using the free input complements.
        let one = b.one();
        b.gate(GateKind::Maj3, &[x.not(), y.not(), one], &["pp"])
    } else {
        let zero = b.zero();
        b.gate(GateKind::Maj3, &[x, y, zero], &["pp"])
    }
}

/// Instantiate one multiplier on primary-input literals `x` (first operand)
/// and `y`, LSB first.
pub fn bwm_into(
    b: &mut Builder<'_>,
    x: &[Signal],
    y: &[Signal],
    signedness: Signedness,
) -> BwmSignals {
    assert_eq!(x.len(), OPERAND_BITS);
    assert_eq!(y.len(), OPERAND_BITS);
    let mut pp = vec![vec![None; OPERAND_BITS]; OPERAND_BITS];
    for i in 0..OPERAND_BITS {
        for j in 0..OPERAND_BITS {
            pp[i][j] = Some(partial_product(
                b,
                x[i],
                y[j],
                signedness.complemented(i, j),
            ));
        }
    }

    // Estimator corner as a carry-save array. Row r adds pp[LOW + k][LOW + r]
    // at relative column k + r; `sums[k]` sits at column k + r, `carries[k]`
    // at column k + r + 1.
    let mut heap: Vec<Vec<Signal>> = Vec::new();
    let mut sums: Vec<Bit> = (0..RPE_BITS).map(|k| pp[LOW + k][LOW]).collect();
    let mut carries: Vec<Bit> = vec![None; RPE_BITS];
    let base = 2 * LOW;
    heap_push(&mut heap, base, sums[0].expect("partial product"));
    for r in 1..RPE_BITS {
        let mut next_sums = vec![None; RPE_BITS];
        let mut next_carries = vec![None; RPE_BITS];
        for k in 0..RPE_BITS {
            let col = format!("col{}", base + k + r);
            let upper = sums.get(k + 1).copied().flatten();
            let (s, c) = b.add3([pp[LOW + k][LOW + r], upper, carries[k]], &[&col]);
            next_sums[k] = s;
            next_carries[k] = c;
        }
        sums = next_sums;
        carries = next_carries;
        heap_push(&mut heap, base + r, sums[0].expect("row sum"));
    }
    let last = RPE_BITS - 1;
    // Unresolved corner state: sums[k] at column base+last+k, carries[k] one higher.
    for k in 1..RPE_BITS {
        heap_push(&mut heap, base + last + k, sums[k].expect("row sum"));
    }
    for k in 0..RPE_BITS {
        if let Some(c) = carries[k] {
            heap_push(&mut heap, base + last + k + 1, c);
        }
    }

    // Estimator read-out: low bits straight from the array, then four
    // ripple adders, then the top bit (the two addends there are never both
    // one because the corner sum stays below 2^10).
    let mut rpe: Vec<Signal> = (0..RPE_BITS).map(|r| heap[base + r][0]).collect();
    let mut ripple: Bit = None;
    for k in 1..RPE_BITS {
        let col = format!("col{}", base + last + k);
        let (s, c) = b.scoped("rpe", |b| {
            b.add3([sums[k], carries[k - 1], ripple], &[&col])
        });
        rpe.push(s.expect("ripple sum"));
        ripple = c;
    }
    let top = match (carries[last], ripple) {
        (Some(c), Some(r)) => {
            let one = b.one();
            b.scoped("rpe", |b| b.gate(GateKind::Maj3, &[c, r, one], &["m1"]))
        }
        (Some(c), None) | (None, Some(c)) => c,
        (None, None) => b.zero(),
    };
    rpe.push(top);

    // Everything outside the corner, plus the sign corrections.
    for (i, row) in pp.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if i < LOW || j < LOW {
                heap_push(&mut heap, i + j, p.expect("partial product"));
            }
        }
    }
    let correction = signedness.correction();
    for k in 0..PRODUCT_BITS {
        if (correction >> k) & 1 == 1 {
            let one = b.one();
            heap_push(&mut heap, k, one);
        }
    }
    let product = reduce_heap(b, heap, PRODUCT_BITS);
    BwmSignals { product, rpe }
}

/// Carry-save (Wallace) reduction of a bit heap to two rows, then a ripple
/// adder; result modulo 2^width.
pub(crate) fn reduce_heap(
    b: &mut Builder<'_>,
    mut heap: Vec<Vec<Signal>>,
    width: usize,
) -> Vec<Bit> {
    heap.resize(width.max(heap.len()), Vec::new());
    heap.truncate(width);
    while heap.iter().any(|c| c.len() > 2) {
        let mut next: Vec<Vec<Signal>> = vec![Vec::new(); width];
        for (k, column) in heap.iter().enumerate() {
            let col = format!("col{k}");
            let mut chunks = column.chunks_exact(3);
            for t in chunks.by_ref() {
                let (s, c) = b.full_adder(t[0], t[1], t[2], &[&col]);
                next[k].push(s);
                if k + 1 < width {
                    next[k + 1].push(c);
                }
            }
            next[k].extend_from_slice(chunks.remainder());
        }
        heap = next;
    }
    let x: Vec<Bit> = heap.iter().map(|c| c.first().copied()).collect();
    let y: Vec<Bit> = heap.iter().map(|c| c.get(1).copied()).collect();
    b.ripple(&x, &y, None, width, &[])
}

fn build(signedness: Signedness) -> BlockDescriptor {
    let mut net = LogicNetwork::new();
    let a = net.add_input_word("a", OPERAND_BITS as u32);
    let y = net.add_input_word("b", OPERAND_BITS as u32);
    let signals = {
        let mut b = Builder::new(&mut net);
        let mut s = bwm_into(&mut b, &a, &y, signedness);
        s.product = s
            .product
            .into_iter()
            .map(|bit| Some(b.materialize(bit)))
            .collect();
        s
    };
    for (k, bit) in signals.product.iter().enumerate() {
        let sign = k + 1 == PRODUCT_BITS;
        net.add_output(bit.expect("materialized"), false, "p", k as u32, sign);
    }
    // Expose the estimator so its gates stay live in the stand-alone block.
    for (k, &s) in signals.rpe.iter().enumerate() {
        net.add_output(s, false, "m_o5", k as u32, false);
    }
    let mut tap_map = BTreeMap::new();
    tap_map.insert(
        "m_o5".to_string(),
        Tap {
            bits: signals.rpe,
            signed: false,
            offset: rpe_offset(signedness),
        },
    );
    let mut block = BlockDescriptor {
        kind: BlockKind::Bwm {
            signedness,
            rpe_bits: RPE_BITS,
        },
        network: net,
        tap_map,
    };
    block.prune();
    block
}

/// Signed 8×8 multiplier: output word `p` (16 bits, two's complement) and
/// estimator word `m_o5` (raw; see the `m_o5` tap for the offset).
pub fn build_bwm() -> Result<BlockDescriptor, ArithError> {
    Ok(build(Signedness::SignedSigned))
}

/// Signed `a` times unsigned `b`.
pub fn build_bwm_signed_unsigned() -> Result<BlockDescriptor, ArithError> {
    Ok(build(Signedness::SignedUnsigned))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(block: &BlockDescriptor, a: i64, b: i64) -> (i64, i64) {
        let net = &block.network;
        let bits = net.encode_inputs(&[("a", a), ("b", b)]).unwrap();
        let values = net.eval_gates(&bits).unwrap();
        let out: Vec<bool> = net
            .primary_outputs
            .iter()
            .map(|o| values[o.driver] ^ o.inverted)
            .collect();
        (
            net.decode_outputs(&out)["p"],
            block.tap_map["m_o5"].decode(&values, &bits),
        )
    }

    #[test]
    fn spot_products() {
        let block = build_bwm().unwrap();
        assert_eq!(run(&block, 5, 7).0, 35);
        assert_eq!(run(&block, -8, 3).0, -24);
        assert_eq!(run(&block, -128, -128).0, 16384);
        for v in -128..128 {
            assert_eq!(run(&block, 0, v).0, 0);
        }
    }

    #[test]
    fn corrections_match_closed_forms() {
        assert_eq!(Signedness::SignedSigned.correction(), (1 << 8) + (1 << 15));
        assert_eq!(
            Signedness::SignedUnsigned.correction(),
            (1 << 7) + (1 << 15)
        );
        assert_eq!(rpe_offset(Signedness::SignedUnsigned), -496);
        assert_eq!(rpe_offset(Signedness::SignedSigned), -480);
    }

    #[test]
    fn signed_unsigned_variant() {
        let block = build_bwm_signed_unsigned().unwrap();
        for (a, b) in [(-128, 255), (127, 255), (-1, 1), (-77, 200), (0, 255)] {
            let (p, est) = run(&block, a, b);
            assert_eq!(p, a * b);
            assert_eq!(est, (a >> 3) * (b >> 3));
        }
    }
}
