use asl_sisc::arith_gen::{
    build_bwm, build_bwm_signed_unsigned, build_csa, build_rca, reorder_dimensions,
    BlockDescriptor, Tap,
};
use asl_sisc::netlist::{LogicNetwork, Signal};
use asl_sisc::noisy_sim::{decode_pattern, lane_pattern, output_lanes, word_layout, Engine};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Evaluate up to 64 input assignments at once; returns (output word per
/// lane, tap value per lane).
fn eval_lanes(
    block: &BlockDescriptor,
    word: &str,
    tap: Option<&str>,
    vectors: &[Vec<(&str, i64)>],
) -> Vec<(i64, i64)> {
    let net: &LogicNetwork = &block.network;
    let engine = Engine::new(net).unwrap();
    let mut inputs = vec![0u64; net.primary_inputs.len()];
    for (lane, v) in vectors.iter().enumerate() {
        for (w, &bit) in inputs.iter_mut().zip(&net.encode_inputs(v).unwrap()) {
            *w |= (bit as u64) << lane;
        }
    }
    let mut values = vec![0u64; net.gates.len()];
    engine.eval_clean(&inputs, &mut values);
    let po = output_lanes(net, &values);
    let (layout, weights) = word_layout(net, word).unwrap();
    (0..vectors.len())
        .map(|lane| {
            let y = decode_pattern(lane_pattern(&po, &layout, lane), &weights);
            let t = tap.map_or(0, |name| {
                tap_value(&block.tap_map[name], &values, &inputs, lane)
            });
            (y, t)
        })
        .collect()
}

fn tap_value(tap: &Tap, values: &[u64], inputs: &[u64], lane: usize) -> i64 {
    let n = tap.bits.len();
    let mut v = tap.offset;
    for (k, s) in tap.bits.iter().enumerate() {
        let word = match *s {
            Signal::Gate(g) => values[g],
            Signal::Input { index, inverted } => inputs[index] ^ if inverted { !0 } else { 0 },
        };
        if word >> lane & 1 == 1 {
            v += if tap.signed && k + 1 == n {
                -(1 << k)
            } else {
                1 << k
            };
        }
    }
    v
}

fn exhaustive_bwm(block: &BlockDescriptor, b_range: std::ops::Range<i64>) {
    let tap = block.tap_map.keys().next().cloned();
    let pairs: Vec<(i64, i64)> = (-128..128)
        .flat_map(|a| b_range.clone().map(move |b| (a, b)))
        .collect();
    for chunk in pairs.chunks(64) {
        let vectors: Vec<Vec<(&str, i64)>> = chunk
            .iter()
            .map(|&(a, b)| vec![("a", a), ("b", b)])
            .collect();
        for (&(a, b), (p, est)) in
            chunk
                .iter()
                .zip(eval_lanes(block, "p", tap.as_deref(), &vectors))
        {
            assert_eq!(p, a * b, "{a} x {b}");
            assert_eq!(est, (a >> 3) * (b >> 3), "estimate of {a} x {b}");
        }
    }
}

#[test]
fn signed_multiplier_is_exact_on_every_operand_pair() {
    exhaustive_bwm(&build_bwm().unwrap(), -128..128);
}

#[test]
fn signed_unsigned_multiplier_is_exact_on_every_operand_pair() {
    exhaustive_bwm(&build_bwm_signed_unsigned().unwrap(), 0..256);
}

#[test]
fn estimator_gates_hang_off_the_datapath() {
    let block = build_bwm().unwrap();
    let net = &block.network;
    let rpe: Vec<usize> = net.gates_tagged("rpe");
    assert!(!rpe.is_empty());
    // Only other estimator gates read an estimator gate.
    let fanouts = net.fanouts();
    for &g in &rpe {
        assert!(
            fanouts[g].iter().all(|&h| net.gates[h].has_tag("rpe")),
            "gate {g}"
        );
    }
    assert!(net
        .primary_outputs
        .iter()
        .filter(|o| o.word == "p")
        .all(|o| !net.gates[o.driver].has_tag("rpe")));
}

#[test]
fn adder_adds_random_operands() {
    let block = build_rca(15).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases: Vec<(i64, i64, i64)> = (0..2048)
        .map(|k| match k {
            0 => (32767, 32767, 1),
            1 => (0, 0, 0),
            _ => (
                rng.gen_range(0..1 << 15),
                rng.gen_range(0..1 << 15),
                rng.gen_range(0..2),
            ),
        })
        .collect();
    for chunk in cases.chunks(64) {
        let vectors: Vec<Vec<(&str, i64)>> = chunk
            .iter()
            .map(|&(a, b, c)| vec![("a", a), ("b", b), ("cin", c)])
            .collect();
        for (&(a, b, c), (s, _)) in chunk.iter().zip(eval_lanes(&block, "s", None, &vectors)) {
            assert_eq!(s, a + b + c);
        }
    }
    assert!(build_rca(0).is_err());
}

#[test]
fn adder_has_four_gates_per_stage() {
    let net = build_rca(15).unwrap().network;
    assert_eq!(net.gate_count(), 60);
    for role in ["m1", "i1", "m2", "m3"] {
        assert_eq!(net.gates_tagged(role).len(), 15);
    }
}

#[test]
fn serial_and_tree_accumulators_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for serial in [true, false] {
        let block = build_csa(9, 12, serial).unwrap();
        let names: Vec<String> = (0..9).map(|k| format!("x{k}")).collect();
        let cases: Vec<Vec<i64>> = (0..256)
            .map(|_| (0..9).map(|_| rng.gen_range(-2048..2048)).collect())
            .collect();
        for chunk in cases.chunks(64) {
            let vectors: Vec<Vec<(&str, i64)>> = chunk
                .iter()
                .map(|v| {
                    names
                        .iter()
                        .map(String::as_str)
                        .zip(v.iter().copied())
                        .collect()
                })
                .collect();
            for (v, (s, _)) in chunk.iter().zip(eval_lanes(&block, "s", None, &vectors)) {
                assert_eq!(s, v.iter().sum::<i64>());
            }
        }
    }
    assert!(build_csa(1, 8, true).is_err());
}

#[test]
fn blocks_survive_json() {
    let block = build_bwm_signed_unsigned().unwrap();
    assert_eq!(BlockDescriptor::from_json(&block.to_json()).unwrap(), block);
}

#[test]
fn reorder_sorts_ascending_and_keeps_ties() {
    assert_eq!(reorder_dimensions(&[3.0, -1.0, 3.0, 0.0]), vec![1, 3, 0, 2]);
    assert!(reorder_dimensions(&[]).is_empty());
}
