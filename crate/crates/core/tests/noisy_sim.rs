mod common;

use asl_sisc::arith_gen::build_rca;
use asl_sisc::netlist::{GateKind, LogicNetwork};
use asl_sisc::noisy_sim::{
    monte_carlo_error_pmf, monte_carlo_words, noisy_gate_step, simulate_step, simulate_trial,
    uniform_inputs, EpsilonAssignment, InitialState, SimError, TrialMode, TrialProtocol,
};
use common::random_dag;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn inverter() -> LogicNetwork {
    let mut net = LogicNetwork::new();
    let x = net.add_input("x", 0);
    let y = net.inv(x, &[]);
    net.add_output(y, false, "y", 0, false);
    net
}

fn within_3_sigma(hits: u64, n: u64, p: f64) -> bool {
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (hits as f64 / n as f64 - p).abs() <= 3.0 * sigma
}

#[test]
fn gates_fail_only_when_they_must_switch() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 100_000u64;
    for kind in [GateKind::Inv, GateKind::Maj3] {
        let fanins = vec![false; kind.arity()];
        let clean = kind.eval(&fanins);
        let (mut flips_switch, mut flips_hold) = (0u64, 0u64);
        for _ in 0..n {
            flips_switch +=
                (noisy_gate_step(kind, &fanins, !clean, 0.2, rng.gen()) != clean) as u64;
            flips_hold += (noisy_gate_step(kind, &fanins, clean, 0.2, rng.gen()) != clean) as u64;
        }
        assert!(
            within_3_sigma(flips_switch, n, 0.2),
            "{kind:?}: {flips_switch}"
        );
        assert_eq!(flips_hold, 0);
    }
}

#[test]
fn bitsliced_engine_follows_the_same_law() {
    let net = inverter();
    let eps = EpsilonAssignment::uniform(&net, 0.05);
    let n = 100_000;
    // Reset on x = 1 (inverter low), then apply x = 0: every trial must switch.
    let switching = TrialProtocol {
        mode: TrialMode::Reset {
            reset_vector: Some(vec![true]),
        },
        trials: n,
        seed: 4,
    };
    let t = monte_carlo_words(&net, &eps, &switching, &["y"], |_| vec![false]).unwrap();
    let wrong = t.noisy[0]
        .iter()
        .zip(&t.clean[0])
        .filter(|(a, b)| a != b)
        .count() as u64;
    assert!(within_3_sigma(wrong, n, 0.05), "{wrong}");
    let holding = TrialProtocol {
        mode: TrialMode::Reset {
            reset_vector: Some(vec![false]),
        },
        trials: n,
        seed: 4,
    };
    let t = monte_carlo_words(&net, &eps, &holding, &["y"], |_| vec![false]).unwrap();
    assert_eq!(t.noisy[0], t.clean[0]);
}

#[test]
fn noiseless_scalar_trial_is_exact() {
    for seed in 0..10 {
        let net = random_dag(20, seed);
        let eps = EpsilonAssignment::uniform(&net, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in 0..8u32 {
            let bits: Vec<bool> = (0..3).map(|k| v >> k & 1 == 1).collect();
            let out =
                simulate_trial(&net, &eps, &TrialProtocol::reset(1, 0), &bits, &mut rng).unwrap();
            assert_eq!(out, net.eval_noiseless(&bits).unwrap());
        }
    }
}

#[test]
fn adder_pmf_is_reproducible_and_normalized() {
    let net = build_rca(8).unwrap().network;
    let eps = EpsilonAssignment::uniform(&net, 0.02);
    let protocol = TrialProtocol::reset(5000, 99);
    let run =
        || monte_carlo_error_pmf(&net, &eps, &protocol, "s", uniform_inputs(17), true).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.pmf, b.pmf);
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.pmf.samples, 5000);
    assert!((a.pmf.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-12);
    let samples = a.samples.unwrap();
    let nonzero = samples.iter().filter(|s| s.noisy != s.correct).count() as f64;
    assert!((1.0 - a.pmf.zero_mass() - nonzero / 5000.0).abs() < 1e-12);
    let other = monte_carlo_error_pmf(
        &net,
        &eps,
        &TrialProtocol::reset(5000, 100),
        "s",
        uniform_inputs(17),
        false,
    )
    .unwrap();
    assert_ne!(other.pmf, a.pmf);
}

#[test]
fn streaming_keeps_errors_in_the_state() {
    let net = inverter();
    let eps = EpsilonAssignment::uniform(&net, 1.0);
    let mut state = net.eval_gates(&[false]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    // ε = 1: the gate never manages to switch, so it stays stuck high.
    for _ in 0..5 {
        assert_eq!(
            simulate_step(&net, &eps, &mut state, &[true], &mut rng).unwrap(),
            vec![true]
        );
    }
    let protocol = TrialProtocol {
        mode: TrialMode::Streaming {
            initial: InitialState::Zeros,
        },
        trials: 64,
        seed: 1,
    };
    let t = monte_carlo_words(&net, &eps, &protocol, &["y"], |_| vec![false]).unwrap();
    assert!(t.noisy[0].iter().all(|&y| y == 0));
}

#[test]
fn bad_requests_are_rejected() {
    let net = inverter();
    let short = EpsilonAssignment::uniform(&random_dag(5, 0), 0.1);
    let p = TrialProtocol::reset(10, 0);
    assert!(monte_carlo_error_pmf(&net, &short, &p, "y", uniform_inputs(1), false).is_err());
    let eps = EpsilonAssignment::uniform(&net, 0.1);
    assert!(matches!(
        monte_carlo_error_pmf(&net, &eps, &p, "nope", uniform_inputs(1), false),
        Err(SimError::NoWord(_))
    ));
    assert!(monte_carlo_error_pmf(
        &net,
        &eps,
        &TrialProtocol::reset(0, 0),
        "y",
        uniform_inputs(1),
        false
    )
    .is_err());
}
