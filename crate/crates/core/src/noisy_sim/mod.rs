//! ε-noisy gate simulation.
//!
//! A gate only errs when its output has to change: if the noiseless output
//! equals the gate's previous state it is reproduced exactly, otherwise the
//! switch fails with probability ε and the old state is kept. The Monte
//! Carlo engine runs 64 trials per machine word.
//!
//! Randomness: batch `b` (64 trials) draws its input vectors from ChaCha8
//! stream `2b` and its gate noise from stream `2b + 1` of the master seed,
//! so results do not depend on how batches are scheduled across threads.

mod engine;
mod pmf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{GateKind, LogicNetwork, NetlistError};

pub use engine::{bernoulli_word, Engine};
pub use pmf::{eta_from_bits, BitErrorProfile, ErrorPmf};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("error rate of gate {gate} is {eps}, outside [0, 1]")]
    BadEpsilon { gate: usize, eps: f64 },
    #[error("assignment covers {got} gates, network has {expected}")]
    Coverage { expected: usize, got: usize },
    #[error("protocol mismatch: {0}")]
    Protocol(String),
    #[error("no output word named {0:?}")]
    NoWord(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Derived from (energy, delay) through the device model.
    Physical,
    /// Set directly.
    Abstract,
}

/// Per-gate switching error rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonAssignment {
    pub eps: Vec<f64>,
    pub provenance: Provenance,
}

impl EpsilonAssignment {
    pub fn uniform(net: &LogicNetwork, eps: f64) -> Self {
        Self {
            eps: vec![eps; net.gates.len()],
            provenance: Provenance::Abstract,
        }
    }

    pub fn validate(&self, net: &LogicNetwork) -> Result<(), SimError> {
        if self.eps.len() != net.gates.len() {
            return Err(SimError::Coverage {
                expected: net.gates.len(),
                got: self.eps.len(),
            });
        }
        match self.eps.iter().position(|e| !(0.0..=1.0).contains(e)) {
            Some(gate) => Err(SimError::BadEpsilon {
                gate,
                eps: self.eps[gate],
            }),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum TrialMode {
    /// Settle every gate noiselessly on `reset_vector` (all zeros when
    /// absent), then apply the trial vector once.
    Reset { reset_vector: Option<Vec<bool>> },
    /// Vectors follow each other; every gate keeps its last (possibly
    /// erroneous) output. Each of the 64 lanes is its own stream.
    Streaming { initial: InitialState },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Zeros,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialProtocol {
    pub mode: TrialMode,
    pub trials: u64,
    pub seed: u64,
}

impl TrialProtocol {
    pub fn reset(trials: u64, seed: u64) -> Self {
        Self {
            mode: TrialMode::Reset { reset_vector: None },
            trials,
            seed,
        }
    }

    fn reset_vector(&self, net: &LogicNetwork) -> Result<Option<Vec<bool>>, SimError> {
        match &self.mode {
            TrialMode::Reset { reset_vector } => {
                let v = reset_vector
                    .clone()
                    .unwrap_or_else(|| vec![false; net.primary_inputs.len()]);
                if v.len() != net.primary_inputs.len() {
                    return Err(SimError::Protocol(format!(
                        "reset vector has {} bits, network has {} inputs",
                        v.len(),
                        net.primary_inputs.len()
                    )));
                }
                Ok(Some(v))
            }
            TrialMode::Streaming { .. } => Ok(None),
        }
    }
}

/// Single gate evaluation with the selector semantics: `draw` is a uniform
/// sample in [0, 1) used only when the gate has to switch.
pub fn noisy_gate_step(kind: GateKind, fanins: &[bool], prev: bool, eps: f64, draw: f64) -> bool {
    let clean = kind.eval(fanins);
    if clean == prev || kind.is_const() {
        clean
    } else {
        clean ^ (draw < eps)
    }
}

/// One noisy evaluation from `state` (previous gate outputs, updated in
/// place). Returns output bits after output inversion.
pub fn simulate_step<R: Rng + ?Sized>(
    net: &LogicNetwork,
    eps: &EpsilonAssignment,
    state: &mut [bool],
    input: &[bool],
    rng: &mut R,
) -> Result<Vec<bool>, SimError> {
    if input.len() != net.primary_inputs.len() {
        return Err(NetlistError::InputWidth {
            expected: net.primary_inputs.len(),
            got: input.len(),
        }
        .into());
    }
    let mut buf = [false; 3];
    for g in net.topo_order()? {
        let gate = &net.gates[g];
        for (slot, s) in buf.iter_mut().zip(&gate.fanins) {
            *slot = match *s {
                crate::netlist::Signal::Input { index, inverted } => input[index] ^ inverted,
                crate::netlist::Signal::Gate(f) => state[f],
            };
        }
        let fanins = &buf[..gate.fanins.len()];
        let must_switch = gate.kind.eval(fanins) != state[g];
        let draw = if must_switch && !gate.kind.is_const() {
            rng.gen::<f64>()
        } else {
            1.0
        };
        state[g] = noisy_gate_step(gate.kind, fanins, state[g], eps.eps[g], draw);
    }
    Ok(net
        .primary_outputs
        .iter()
        .map(|o| state[o.driver] ^ o.inverted)
        .collect())
}

/// One trial under a reset protocol: settle on the reset vector, then
/// evaluate `input` noisily. Streaming protocols need state across trials;
/// use [`simulate_step`] for those.
pub fn simulate_trial<R: Rng + ?Sized>(
    net: &LogicNetwork,
    eps: &EpsilonAssignment,
    protocol: &TrialProtocol,
    input: &[bool],
    rng: &mut R,
) -> Result<Vec<bool>, SimError> {
    eps.validate(net)?;
    let reset = protocol
        .reset_vector(net)?
        .ok_or_else(|| SimError::Protocol("simulate_trial needs a reset protocol".into()))?;
    let mut state = net.eval_gates(&reset)?;
    simulate_step(net, eps, &mut state, input, rng)
}

/// Primary-output indices and two's-complement weights of one word, LSB
/// first.
pub fn word_layout(net: &LogicNetwork, word: &str) -> Result<(Vec<usize>, Vec<i64>), SimError> {
    let mut bits: Vec<(u32, usize)> = net
        .primary_outputs
        .iter()
        .enumerate()
        .filter(|(_, o)| o.word == word)
        .map(|(k, o)| (o.bit, k))
        .collect();
    if bits.is_empty() {
        return Err(SimError::NoWord(word.to_string()));
    }
    bits.sort_unstable();
    let idx: Vec<usize> = bits.iter().map(|&(_, k)| k).collect();
    let weights = idx
        .iter()
        .map(|&k| net.primary_outputs[k].weight())
        .collect();
    Ok((idx, weights))
}

/// Bit pattern of a word in one lane (bit i = output bit i).
pub fn lane_pattern(po_words: &[u64], layout: &[usize], lane: usize) -> u64 {
    layout.iter().enumerate().fold(0u64, |acc, (i, &k)| {
        acc | (((po_words[k] >> lane) & 1) << i)
    })
}

pub fn decode_pattern(pattern: u64, weights: &[i64]) -> i64 {
    weights
        .iter()
        .enumerate()
        .filter(|&(i, _)| (pattern >> i) & 1 == 1)
        .map(|(_, &w)| w)
        .sum()
}

/// Output words (per primary output, one lane per bit) after inversion.
pub fn output_lanes(net: &LogicNetwork, values: &[u64]) -> Vec<u64> {
    net.primary_outputs
        .iter()
        .map(|o| values[o.driver] ^ if o.inverted { !0 } else { 0 })
        .collect()
}

/// Correct and noisy output of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub trial: u64,
    pub noisy: i64,
    pub correct: i64,
}

#[derive(Clone, Debug)]
pub struct McOutcome {
    pub pmf: ErrorPmf,
    pub profile: BitErrorProfile,
    /// Present when requested.
    pub samples: Option<Vec<Sample>>,
}

struct BatchResult {
    pmf: ErrorPmf,
    flips: Vec<u64>,
    samples: Vec<Sample>,
}

/// Monte Carlo distribution of η = decode(y_a) − decode(y_o) on output word
/// `word`. `sampler` draws one input vector per trial.
pub fn monte_carlo_error_pmf<S>(
    net: &LogicNetwork,
    eps: &EpsilonAssignment,
    protocol: &TrialProtocol,
    word: &str,
    sampler: S,
    keep_samples: bool,
) -> Result<McOutcome, SimError>
where
    S: Fn(&mut ChaCha8Rng) -> Vec<bool> + Sync,
{
    eps.validate(net)?;
    if protocol.trials == 0 {
        return Err(SimError::Protocol("at least one trial is required".into()));
    }
    let engine = Engine::new(net)?;
    let (layout, weights) = word_layout(net, word)?;
    let l = layout.len();
    let n_inputs = net.primary_inputs.len();
    let batches = protocol.trials.div_ceil(64);
    let reset = protocol.reset_vector(net)?;
    let settled = reset.as_ref().map(|r| engine.settle(r));

    let run_batch = |b: u64, state: &mut Vec<u64>| -> Result<BatchResult, SimError> {
        let mut input_rng = ChaCha8Rng::seed_from_u64(protocol.seed);
        input_rng.set_stream(2 * b);
        let mut noise_rng = ChaCha8Rng::seed_from_u64(protocol.seed);
        noise_rng.set_stream(2 * b + 1);
        let lanes = (protocol.trials - 64 * b).min(64) as usize;
        let mut inputs = vec![0u64; n_inputs];
        for lane in 0..lanes {
            let v = sampler(&mut input_rng);
            if v.len() != n_inputs {
                return Err(NetlistError::InputWidth {
                    expected: n_inputs,
                    got: v.len(),
                }
                .into());
            }
            for (w, &bit) in inputs.iter_mut().zip(&v) {
                *w |= (bit as u64) << lane;
            }
        }
        let mut clean = vec![0u64; engine.gate_count()];
        engine.eval_clean(&inputs, &mut clean);
        if let Some(s) = &settled {
            state.clone_from(s);
        }
        engine.step(&inputs, state, &eps.eps, &mut noise_rng);
        let noisy_po = output_lanes(net, state);
        let clean_po = output_lanes(net, &clean);
        let mut result = BatchResult {
            pmf: ErrorPmf::new(l as u32),
            flips: vec![0; l],
            samples: Vec::new(),
        };
        let active = if lanes == 64 {
            !0u64
        } else {
            (1u64 << lanes) - 1
        };
        for (i, &k) in layout.iter().enumerate() {
            result.flips[i] = ((noisy_po[k] ^ clean_po[k]) & active).count_ones() as u64;
        }
        for lane in 0..lanes {
            let a = decode_pattern(lane_pattern(&noisy_po, &layout, lane), &weights);
            let o = decode_pattern(lane_pattern(&clean_po, &layout, lane), &weights);
            result.pmf.record(a - o);
            if keep_samples {
                result.samples.push(Sample {
                    trial: 64 * b + lane as u64,
                    noisy: a,
                    correct: o,
                });
            }
        }
        Ok(result)
    };

    let results: Vec<BatchResult> = match &protocol.mode {
        TrialMode::Reset { .. } => (0..batches)
            .into_par_iter()
            .map(|b| run_batch(b, &mut Vec::new()))
            .collect::<Result<_, _>>()?,
        TrialMode::Streaming { initial } => {
            let mut state = match initial {
                InitialState::Zeros => vec![0u64; engine.gate_count()],
                InitialState::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(protocol.seed);
                    rng.set_stream(u64::MAX);
                    (0..engine.gate_count()).map(|_| rng.gen()).collect()
                }
            };
            (0..batches)
                .map(|b| run_batch(b, &mut state))
                .collect::<Result<_, _>>()?
        }
    };

    let mut pmf = ErrorPmf::new(l as u32);
    let mut flips = vec![0u64; l];
    let mut samples = keep_samples.then(Vec::new);
    for r in results {
        pmf.merge(&r.pmf);
        for (f, x) in flips.iter_mut().zip(&r.flips) {
            *f += x;
        }
        if let Some(s) = samples.as_mut() {
            s.extend(r.samples);
        }
    }
    let profile = BitErrorProfile::from_counts(&flips, protocol.trials);
    Ok(McOutcome {
        pmf,
        profile,
        samples,
    })
}

/// Decoded output words of every trial, `[word][trial]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordTrace {
    pub words: Vec<String>,
    pub noisy: Vec<Vec<i64>>,
    pub clean: Vec<Vec<i64>>,
}

impl WordTrace {
    pub fn index(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }
}

/// Noisy and noiseless values of several output words, trial by trial.
/// Trial `t` applies `input(t)`; gate noise uses the same per-batch
/// streams as [`monte_carlo_error_pmf`].
pub fn monte_carlo_words<S>(
    net: &LogicNetwork,
    eps: &EpsilonAssignment,
    protocol: &TrialProtocol,
    words: &[&str],
    input: S,
) -> Result<WordTrace, SimError>
where
    S: Fn(u64) -> Vec<bool> + Sync,
{
    eps.validate(net)?;
    if protocol.trials == 0 {
        return Err(SimError::Protocol("at least one trial is required".into()));
    }
    let engine = Engine::new(net)?;
    let layouts: Vec<(Vec<usize>, Vec<i64>)> = words
        .iter()
        .map(|w| word_layout(net, w))
        .collect::<Result<_, _>>()?;
    let n_inputs = net.primary_inputs.len();
    let batches = protocol.trials.div_ceil(64);
    let settled = protocol.reset_vector(net)?.map(|r| engine.settle(&r));

    type Batch = (Vec<Vec<i64>>, Vec<Vec<i64>>);
    let run_batch = |b: u64, state: &mut Vec<u64>| -> Result<Batch, SimError> {
        let mut noise_rng = ChaCha8Rng::seed_from_u64(protocol.seed);
        noise_rng.set_stream(2 * b + 1);
        let lanes = (protocol.trials - 64 * b).min(64) as usize;
        let mut inputs = vec![0u64; n_inputs];
        for lane in 0..lanes {
            let v = input(64 * b + lane as u64);
            if v.len() != n_inputs {
                return Err(NetlistError::InputWidth {
                    expected: n_inputs,
                    got: v.len(),
                }
                .into());
            }
            for (w, &bit) in inputs.iter_mut().zip(&v) {
                *w |= (bit as u64) << lane;
            }
        }
        let mut clean = vec![0u64; engine.gate_count()];
        engine.eval_clean(&inputs, &mut clean);
        if let Some(s) = &settled {
            state.clone_from(s);
        }
        engine.step(&inputs, state, &eps.eps, &mut noise_rng);
        let noisy_po = output_lanes(net, state);
        let clean_po = output_lanes(net, &clean);
        let decode = |po: &[u64]| -> Vec<Vec<i64>> {
            layouts
                .iter()
                .map(|(layout, weights)| {
                    (0..lanes)
                        .map(|lane| decode_pattern(lane_pattern(po, layout, lane), weights))
                        .collect()
                })
                .collect()
        };
        Ok((decode(&noisy_po), decode(&clean_po)))
    };

    let results: Vec<Batch> = match &protocol.mode {
        TrialMode::Reset { .. } => (0..batches)
            .into_par_iter()
            .map(|b| run_batch(b, &mut Vec::new()))
            .collect::<Result<_, _>>()?,
        TrialMode::Streaming { initial } => {
            let mut state = match initial {
                InitialState::Zeros => vec![0u64; engine.gate_count()],
                InitialState::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(protocol.seed);
                    rng.set_stream(u64::MAX);
                    (0..engine.gate_count()).map(|_| rng.gen()).collect()
                }
            };
            (0..batches)
                .map(|b| run_batch(b, &mut state))
                .collect::<Result<_, _>>()?
        }
    };
    let mut trace = WordTrace {
        words: words.iter().map(|w| w.to_string()).collect(),
        noisy: vec![Vec::with_capacity(protocol.trials as usize); words.len()],
        clean: vec![Vec::with_capacity(protocol.trials as usize); words.len()],
    };
    for (noisy, clean) in results {
        for (k, (n, c)) in noisy.into_iter().zip(clean).enumerate() {
            trace.noisy[k].extend(n);
            trace.clean[k].extend(c);
        }
    }
    Ok(trace)
}

/// Uniformly random input vectors.
pub fn uniform_inputs(n_inputs: usize) -> impl Fn(&mut ChaCha8Rng) -> Vec<bool> + Sync {
    move |rng: &mut ChaCha8Rng| (0..n_inputs).map(|_| rng.gen::<bool>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::Signal;

    fn two_inverters() -> LogicNetwork {
        let mut net = LogicNetwork::new();
        let x = net.add_input("x", 0);
        let g0 = net.inv(x, &[]);
        let g1 = net.inv(g0, &[]);
        net.add_output(g1, false, "y", 0, false);
        net
    }

    #[test]
    fn selector_semantics() {
        assert!(noisy_gate_step(GateKind::Buf, &[true], true, 1.0, 0.0));
        assert!(!noisy_gate_step(GateKind::Buf, &[true], false, 1.0, 0.0));
        assert!(noisy_gate_step(GateKind::Buf, &[true], false, 0.3, 0.5));
    }

    #[test]
    fn zero_noise_matches_noiseless() {
        let block = crate::arith_gen::build_rca(4).unwrap();
        let net = &block.network;
        let eps = EpsilonAssignment::uniform(net, 0.0);
        let out = monte_carlo_error_pmf(
            net,
            &eps,
            &TrialProtocol::reset(1000, 1),
            "s",
            uniform_inputs(9),
            false,
        )
        .unwrap();
        assert_eq!(out.pmf.counts.len(), 1);
        assert_eq!(out.pmf.probability(0), 1.0);
    }

    #[test]
    fn no_switch_means_no_error() {
        let net = two_inverters();
        let eps = EpsilonAssignment::uniform(&net, 1.0);
        let proto = TrialProtocol::reset(640, 2);
        let out = monte_carlo_error_pmf(
            &net,
            &eps,
            &proto,
            "y",
            |_: &mut ChaCha8Rng| vec![false],
            false,
        )
        .unwrap();
        assert_eq!(out.pmf.zero_mass(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            simulate_trial(&net, &eps, &proto, &[false], &mut rng).unwrap(),
            vec![false]
        );
    }

    #[test]
    fn forced_switch_fails_at_rate() {
        // Only the second gate is noisy; input 1 forces it to switch.
        let net = two_inverters();
        let eps = EpsilonAssignment {
            eps: vec![0.0, 0.25],
            provenance: Provenance::Abstract,
        };
        let n = 100_000;
        let out = monte_carlo_error_pmf(
            &net,
            &eps,
            &TrialProtocol::reset(n, 7),
            "y",
            |_: &mut ChaCha8Rng| vec![true],
            false,
        )
        .unwrap();
        let rate = 1.0 - out.pmf.zero_mass();
        let se = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((rate - 0.25).abs() < 3.0 * se, "{rate}");
        assert_eq!(out.pmf.counts[&-1] + out.pmf.counts[&0], n);
    }

    #[test]
    fn deterministic_under_seed() {
        let block = crate::arith_gen::build_rca(6).unwrap();
        let net = &block.network;
        let eps = EpsilonAssignment::uniform(net, 0.05);
        let run = || {
            monte_carlo_error_pmf(
                net,
                &eps,
                &TrialProtocol::reset(3000, 11),
                "s",
                uniform_inputs(13),
                false,
            )
            .unwrap()
            .pmf
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn word_trace_follows_trial_index() {
        let block = crate::arith_gen::build_rca(4).unwrap();
        let net = &block.network;
        let input = |t: u64| {
            net.encode_inputs(&[("a", (t % 16) as i64), ("b", 3), ("cin", 0)])
                .unwrap()
        };
        let clean = EpsilonAssignment::uniform(net, 0.0);
        let trace =
            monte_carlo_words(net, &clean, &TrialProtocol::reset(100, 1), &["s"], input).unwrap();
        let want: Vec<i64> = (0..100).map(|t| t % 16 + 3).collect();
        assert_eq!(trace.clean[0], want);
        assert_eq!(trace.noisy[0], want);
        let noisy = EpsilonAssignment::uniform(net, 0.2);
        let a =
            monte_carlo_words(net, &noisy, &TrialProtocol::reset(100, 1), &["s"], input).unwrap();
        assert_eq!(a.clean[0], want);
        assert_ne!(a.noisy[0], want);
        assert_eq!(
            a,
            monte_carlo_words(net, &noisy, &TrialProtocol::reset(100, 1), &["s"], input).unwrap()
        );
    }

    #[test]
    fn scalar_and_parallel_paths_agree_in_law() {
        let mut net = LogicNetwork::new();
        let a = net.add_input("a", 0);
        let b = net.add_input("b", 0);
        let g = net.maj(
            a,
            b,
            Signal::Input {
                index: 0,
                inverted: false,
            },
            &[],
        );
        net.add_output(g, false, "y", 0, false);
        let eps = EpsilonAssignment::uniform(&net, 0.4);
        let proto = TrialProtocol::reset(20_000, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let scalar_errors = (0..20_000)
            .filter(|_| !simulate_trial(&net, &eps, &proto, &[true, true], &mut rng).unwrap()[0])
            .count();
        let mc = monte_carlo_error_pmf(
            &net,
            &eps,
            &proto,
            "y",
            |_: &mut ChaCha8Rng| vec![true, true],
            false,
        )
        .unwrap();
        let diff = scalar_errors as f64 / 20_000.0 - (1.0 - mc.pmf.zero_mass());
        assert!(diff.abs() < 0.02, "{diff}");
    }
}
