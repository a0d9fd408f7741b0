use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::stats::Proportion;

/// Empirical distribution of an integer error, kept as exact counts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorPmf {
    pub counts: BTreeMap<i64, u64>,
    pub samples: u64,
    /// Output width l; values lie in (−2^l, 2^l).
    pub bits: u32,
}

impl ErrorPmf {
    pub fn new(bits: u32) -> Self {
        Self {
            counts: BTreeMap::new(),
            samples: 0,
            bits,
        }
    }

    pub fn record(&mut self, value: i64) {
        *self.counts.entry(value).or_insert(0) += 1;
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &ErrorPmf) {
        for (&v, &c) in &other.counts {
            *self.counts.entry(v).or_insert(0) += c;
        }
        self.samples += other.samples;
    }

    pub fn probability(&self, value: i64) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        self.counts.get(&value).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    /// (value, probability) in ascending value order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.samples.max(1) as f64;
        self.counts.iter().map(move |(&v, &c)| (v, c as f64 / n))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, p)| v as f64 * p).sum()
    }

    /// Pr{η = 0}.
    pub fn zero_mass(&self) -> f64 {
        self.probability(0)
    }

    /// CSV with columns value, probability, count.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SimError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["value", "probability", "count"])?;
        for (&v, &c) in &self.counts {
            let p = c as f64 / self.samples.max(1) as f64;
            out.write_record([v.to_string(), format!("{p:.12e}"), c.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`ErrorPmf::write_csv`]. Counts are
    /// authoritative; `bits` is taken from the caller.
    pub fn read_csv<R: Read>(r: R, bits: u32) -> Result<Self, SimError> {
        let mut pmf = ErrorPmf::new(bits);
        for row in csv::Reader::from_reader(r).records() {
            let row = row?;
            let parse = |k: usize| -> Result<i64, SimError> {
                row.get(k)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| SimError::Format(format!("bad PMF row {:?}", row)))
            };
            let (v, c) = (parse(0)?, parse(2)?);
            if c < 0 {
                return Err(SimError::Format(format!("negative count in row {row:?}")));
            }
            *pmf.counts.entry(v).or_insert(0) += c as u64;
            pmf.samples += c as u64;
        }
        Ok(pmf)
    }
}

/// Per-output-bit flip rates Pr{β_i = 1}, LSB first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitErrorProfile {
    pub rates: Vec<Proportion>,
}

impl BitErrorProfile {
    pub fn from_counts(flips: &[u64], trials: u64) -> Self {
        Self {
            rates: flips
                .iter()
                .map(|&f| Proportion::wilson(f, trials, 1.96))
                .collect(),
        }
    }

    /// From paired (noisy, correct) output bit patterns, bit i of each word
    /// being output bit i.
    pub fn from_samples(pairs: &[(u64, u64)], bits: usize) -> Self {
        let mut flips = vec![0u64; bits];
        for &(a, o) in pairs {
            let beta = a ^ o;
            for (i, f) in flips.iter_mut().enumerate() {
                *f += (beta >> i) & 1;
            }
        }
        Self::from_counts(&flips, pairs.len() as u64)
    }

    pub fn rate(&self, bit: usize) -> f64 {
        self.rates[bit].rate
    }
}

/// Error rebuilt from its bitwise decomposition: each flipped bit i moves
/// the value by ±w_i, the sign set by the correct bit (a 0 → 1 flip adds the
/// weight, a 1 → 0 flip removes it). `weights` are the two's-complement bit
/// weights, LSB first.
pub fn eta_from_bits(noisy: u64, correct: u64, weights: &[i64]) -> i64 {
    let beta = noisy ^ correct;
    weights
        .iter()
        .enumerate()
        .filter(|&(i, _)| (beta >> i) & 1 == 1)
        .map(|(i, &w)| if (correct >> i) & 1 == 1 { -w } else { w })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_normalization() {
        let mut pmf = ErrorPmf::new(8);
        for v in [0, 0, 0, 64, -128, 0, 64] {
            pmf.record(v);
        }
        let total: f64 = pmf.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mut buf = Vec::new();
        pmf.write_csv(&mut buf).unwrap();
        let back = ErrorPmf::read_csv(buf.as_slice(), 8).unwrap();
        assert_eq!(back, pmf);
    }

    #[test]
    fn profile_basics() {
        let same = BitErrorProfile::from_samples(&[(5, 5), (9, 9)], 4);
        assert!(same.rates.iter().all(|r| r.rate == 0.0));
        let lsb = BitErrorProfile::from_samples(&[(1, 0), (6, 7), (3, 2)], 4);
        assert_eq!(lsb.rate(0), 1.0);
        assert!((1..4).all(|b| lsb.rate(b) == 0.0));
    }

    #[test]
    fn eta_identity_on_signed_words() {
        // 4-bit two's complement.
        let w = [1, 2, 4, -8];
        let decode = |x: u64| -> i64 { (0..4).filter(|i| (x >> i) & 1 == 1).map(|i| w[i]).sum() };
        for a in 0..16u64 {
            for o in 0..16u64 {
                assert_eq!(eta_from_bits(a, o, &w), decode(a) - decode(o));
            }
        }
    }
}
