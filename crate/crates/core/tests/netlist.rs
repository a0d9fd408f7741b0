mod common;

use asl_sisc::arith_gen::build_rca;
use asl_sisc::netlist::{
    arrival_times, critical_path_summary, departure_times, path_count, Diagnostic, GateKind,
    LogicNetwork, NetlistError, PathEnumerator,
};
use common::random_dag;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_delays(net: &LogicNetwork, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    net.gates.iter().map(|_| rng.gen_range(0.5..3.0)).collect()
}

#[test]
fn timing_agrees_with_brute_force_paths() {
    for seed in 0..40 {
        let net = random_dag(5 + (seed as usize % 20), seed);
        let delays = random_delays(&net, seed + 100);
        let paths: Vec<Vec<usize>> = PathEnumerator::new(&net).collect();
        assert_eq!(paths.len() as f64, path_count(&net).unwrap());
        let longest = paths
            .iter()
            .map(|p| p.iter().map(|&g| delays[g]).sum::<f64>())
            .fold(0.0, f64::max);
        let nodes = paths.iter().map(Vec::len).max().unwrap();
        let s = critical_path_summary(&net, &delays).unwrap();
        assert!((s.t_cp - longest).abs() < 1e-9, "seed {seed}");
        assert_eq!(s.n_cp, nodes);
        let (a, d) = (
            arrival_times(&net, &delays).unwrap(),
            departure_times(&net, &delays).unwrap(),
        );
        let through = (0..net.gates.len())
            .map(|g| a[g] + d[g] - delays[g])
            .fold(0.0, f64::max);
        assert!((through - s.t_cp).abs() < 1e-9);
        for p in &s.critical_paths {
            assert!((p.iter().map(|&g| delays[g]).sum::<f64>() - s.t_cp).abs() < 1e-9);
        }
    }
}

#[test]
fn adder_critical_path_is_the_carry_chain() {
    let net = build_rca(15).unwrap().network;
    let s = critical_path_summary(&net, &vec![1.0; net.gates.len()]).unwrap();
    // m1 and i1 of the first 14 stages, then m1 (carry out) or i1 and m3 of the last.
    assert_eq!(s.n_cp, 31);
    assert_eq!(s.t_cp, 31.0);
}

#[test]
fn json_round_trip_preserves_function() {
    let net = random_dag(25, 9);
    let back = LogicNetwork::from_json(&net.to_json()).unwrap();
    assert_eq!(back, net);
    for v in 0..8u32 {
        let bits: Vec<bool> = (0..3).map(|k| v >> k & 1 == 1).collect();
        assert_eq!(
            net.eval_noiseless(&bits).unwrap(),
            back.eval_noiseless(&bits).unwrap()
        );
    }
    assert!(matches!(
        LogicNetwork::from_json("{\"gates\": 3}"),
        Err(NetlistError::Format(_))
    ));
}

#[test]
fn pruning_keeps_outputs_and_drops_the_rest() {
    let mut net = LogicNetwork::new();
    let a = net.add_input("a", 0);
    let b = net.add_input("b", 0);
    let c = net.add_input("c", 0);
    let m = net.maj(a, b, c, &[]);
    let dead = net.inv(m, &[]);
    let _also_dead = net.maj(dead, a, b, &[]);
    let y = net.inv(m, &[]);
    net.add_output(y, false, "y", 0, false);
    assert!(net
        .validate()
        .iter()
        .any(|d| matches!(d, Diagnostic::Dead { .. })));
    let before: Vec<Vec<bool>> = (0..8u32)
        .map(|v| {
            net.eval_noiseless(&[v & 1 == 1, v & 2 == 2, v & 4 == 4])
                .unwrap()
        })
        .collect();
    let map = net.prune();
    assert_eq!(net.gate_count(), 2);
    assert_eq!(map.iter().filter(|m| m.is_none()).count(), 2);
    assert!(net.validate().is_empty());
    for v in 0..8u32 {
        assert_eq!(
            net.eval_noiseless(&[v & 1 == 1, v & 2 == 2, v & 4 == 4])
                .unwrap(),
            before[v as usize]
        );
    }
}

#[test]
fn malformed_networks_are_diagnosed() {
    let mut net = LogicNetwork::new();
    let a = net.add_input("a", 0);
    let g0 = net.inv(a, &[]);
    let g1 = net.maj(g0, a, a, &[]);
    net.add_output(g1, false, "y", 0, false);
    // Close a loop by hand.
    net.gates[g0.gate().unwrap()].fanins = vec![g1];
    assert_eq!(net.validate(), vec![Diagnostic::Cycle { gate: 0 }]);
    assert!(net.topo_order().is_err());
    // Local faults are reported before the graph-level checks run.
    net.add_output(g0, false, "y", 0, false);
    assert_eq!(
        net.validate(),
        vec![Diagnostic::DuplicateOutputBit {
            word: "y".into(),
            bit: 0
        }]
    );

    let mut bad = LogicNetwork::new();
    let x = bad.add_input("x", 0);
    let g = bad.add_gate(GateKind::Maj3, &[x, x, x], &[]);
    bad.add_output(g, false, "y", 0, false);
    bad.gates[0].fanins.pop();
    assert!(bad.validate().iter().any(|d| matches!(
        d,
        Diagnostic::Arity {
            expected: 3,
            got: 2,
            ..
        }
    )));
    assert!(matches!(
        bad.eval_noiseless(&[true, false]),
        Err(NetlistError::InputWidth { .. })
    ));
}

#[test]
fn words_encode_and_decode_in_twos_complement() {
    let net = build_rca(6).unwrap().network;
    let bits = net
        .encode_inputs(&[("a", 45), ("b", 30), ("cin", 1)])
        .unwrap();
    assert_eq!(
        net.decode_outputs(&net.eval_noiseless(&bits).unwrap())["s"],
        76
    );
    assert!(net.encode_inputs(&[("zz", 1)]).is_err());
}
