use rand::Rng;

use crate::netlist::{GateId, GateKind, LogicNetwork, NetlistError, Signal};

/// Fanin reference resolved for the hot loop.
#[derive(Clone, Copy)]
enum Src {
    Input { index: usize, mask: u64 },
    Gate(GateId),
}

/// Bit-parallel noisy evaluator: 64 independent trials per machine word.
///
/// `state` holds each gate's output from the previous evaluation (the
/// magnet state), one bit per lane. A gate whose noiseless output differs
/// from its state must switch, and fails to with probability ε.
pub struct Engine {
    order: Vec<GateId>,
    kinds: Vec<GateKind>,
    fanins: Vec<[Src; 3]>,
    arity: Vec<u8>,
}

impl Engine {
    pub fn new(net: &LogicNetwork) -> Result<Self, NetlistError> {
        let order = net.topo_order()?;
        let mut fanins = Vec::with_capacity(net.gates.len());
        let mut arity = Vec::with_capacity(net.gates.len());
        for g in &net.gates {
            let mut f = [Src::Gate(0); 3];
            for (slot, s) in f.iter_mut().zip(&g.fanins) {
                *slot = match *s {
                    Signal::Input { index, inverted } => Src::Input {
                        index,
                        mask: if inverted { !0 } else { 0 },
                    },
                    Signal::Gate(id) => Src::Gate(id),
                };
            }
            fanins.push(f);
            arity.push(g.fanins.len() as u8);
        }
        Ok(Self {
            order,
            kinds: net.gates.iter().map(|g| g.kind).collect(),
            fanins,
            arity,
        })
    }

    pub fn gate_count(&self) -> usize {
        self.kinds.len()
    }

    #[inline]
    fn gather(&self, g: GateId, inputs: &[u64], values: &[u64]) -> [u64; 3] {
        let mut w = [0u64; 3];
        for k in 0..self.arity[g] as usize {
            w[k] = match self.fanins[g][k] {
                Src::Input { index, mask } => inputs[index] ^ mask,
                Src::Gate(f) => values[f],
            };
        }
        w
    }

    /// Noiseless evaluation into `values` (one word per gate).
    pub fn eval_clean(&self, inputs: &[u64], values: &mut [u64]) {
        for &g in &self.order {
            let w = self.gather(g, inputs, values);
            values[g] = self.kinds[g].eval_word(&w);
        }
    }

    /// Noiseless state of every gate for one input vector, broadcast to all
    /// lanes.
    pub fn settle(&self, inputs: &[bool]) -> Vec<u64> {
        let words: Vec<u64> = inputs.iter().map(|&b| if b { !0 } else { 0 }).collect();
        let mut values = vec![0; self.kinds.len()];
        self.eval_clean(&words, &mut values);
        values
    }

    /// One noisy evaluation. `state` enters as the previous gate outputs and
    /// leaves as the new ones. `eps[g]` is gate g's switching error rate.
    pub fn step<R: Rng + ?Sized>(
        &self,
        inputs: &[u64],
        state: &mut [u64],
        eps: &[f64],
        rng: &mut R,
    ) {
        for &g in &self.order {
            let kind = self.kinds[g];
            if kind.is_const() {
                state[g] = kind.eval_word(&[]);
                continue;
            }
            let w = self.gather(g, inputs, state);
            let clean = kind.eval_word(&w);
            let must_switch = clean ^ state[g];
            let fail = if must_switch == 0 {
                0
            } else {
                bernoulli_word(rng, eps[g]) & must_switch
            };
            state[g] = clean ^ fail;
        }
    }
}

/// 64 independent Bernoulli(p) bits. Uses geometric gap sampling, so the
/// cost scales with the number of ones rather than with 64.
pub fn bernoulli_word<R: Rng + ?Sized>(rng: &mut R, p: f64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return !0;
    }
    if p > 0.5 {
        return !bernoulli_word(rng, 1.0 - p);
    }
    let log_q = (-p).ln_1p();
    let mut word = 0u64;
    let mut pos = 0u64;
    loop {
        // Number of failures before the next success.
        let u: f64 = 1.0 - rng.gen::<f64>();
        let gap = (u.ln() / log_q).floor();
        if gap >= (64 - pos) as f64 {
            return word;
        }
        pos += gap as u64;
        word |= 1 << pos;
        pos += 1;
        if pos >= 64 {
            return word;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bernoulli_word_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [0.0, 0.01, 0.3, 0.5, 0.8, 1.0] {
            let n = 4000;
            let ones: u32 = (0..n)
                .map(|_| bernoulli_word(&mut rng, p).count_ones())
                .sum();
            let trials = (64 * n) as f64;
            let rate = ones as f64 / trials;
            let se = (p * (1.0 - p) / trials).sqrt();
            assert!((rate - p).abs() <= 4.0 * se + 1e-12, "p={p} rate={rate}");
        }
    }

    #[test]
    fn lanes_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut per_lane = [0u32; 64];
        for _ in 0..20000 {
            let w = bernoulli_word(&mut rng, 0.1);
            for (k, c) in per_lane.iter_mut().enumerate() {
                *c += ((w >> k) & 1) as u32;
            }
        }
        // 20000 draws at 0.1: sd ~ 42.
        assert!(
            per_lane.iter().all(|&c| (1800..2200).contains(&c)),
            "{per_lane:?}"
        );
    }
}
