use serde::{Deserialize, Serialize};

use super::{Architecture, Dataset, PricePoint, SvmError};
use crate::noisy_sim::{
    monte_carlo_words, EpsilonAssignment, Provenance, TrialMode, TrialProtocol,
};
use crate::sisc::Region;
use crate::stats::Proportion;

const WILSON_Z: f64 = 1.96;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub trials: u64,
    pub seed: u64,
    /// Pin p_FA at this rate by moving the decision threshold on the noisy
    /// scores; `None` keeps the model's own threshold (score ≥ 0).
    pub target_p_fa: Option<f64>,
    /// Evaluate with every gate error-free.
    #[serde(default)]
    pub noiseless: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            trials: 4000,
            seed: 1,
            target_p_fa: Some(0.01),
            noiseless: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMetrics {
    pub p_tp: Proportion,
    pub p_fa: Proportion,
    pub trials: u64,
    /// Decisions are +1 for scores at or above this.
    pub threshold: i64,
}

/// Joules per decision by region, and the decision delay in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    pub main: f64,
    pub estimator: f64,
    /// Fusion stage, or the voter of the redundant style.
    pub fusion: f64,
    pub decision_delay: f64,
}

impl EnergyReport {
    pub fn of(arch: &Architecture) -> Result<Self, SvmError> {
        let main = arch.region_energy(Region::Main);
        let estimator = arch.region_energy(Region::Estimator);
        let fusion = arch.region_energy(Region::Fusion);
        Ok(Self {
            total: arch.assignment.total_energy(),
            main,
            estimator,
            fusion,
            decision_delay: arch.decision_delay()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub metrics: ClassifierMetrics,
    pub energy: EnergyReport,
    /// Trials whose output word differs from the error-free one.
    pub word_errors: u64,
}

/// Smallest integer threshold that lets at most ⌊target·n⌋ of the negative
/// scores through.
pub fn calibrate_threshold(negative_scores: &[i64], target: f64) -> Result<i64, SvmError> {
    if negative_scores.is_empty() {
        return Err(SvmError::Calibration("no negative samples".into()));
    }
    if !(0.0..1.0).contains(&target) {
        return Err(SvmError::Calibration(format!(
            "target p_FA {target} outside [0, 1)"
        )));
    }
    let mut sorted = negative_scores.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let k = (target * sorted.len() as f64).floor() as usize;
    Ok(sorted[k] + 1)
}

/// Monte Carlo accuracy of `arch` on `data`: trial `t` classifies sample
/// `t mod n`, starting from the reset state, with fresh gate noise.
pub fn evaluate(
    arch: &Architecture,
    data: &Dataset,
    cfg: &EvalConfig,
) -> Result<Evaluation, SvmError> {
    if data.is_empty() {
        return Err(SvmError::Data("empty dataset".into()));
    }
    if data.dims() != arch.model.dims() {
        return Err(SvmError::Data(format!(
            "dataset has {} dimensions, model {}",
            data.dims(),
            arch.model.dims()
        )));
    }
    let net = &arch.network;
    let eps = if cfg.noiseless {
        EpsilonAssignment {
            eps: vec![0.0; net.gates.len()],
            provenance: Provenance::Physical,
        }
    } else {
        arch.assignment.epsilons()
    };
    let encoded: Vec<Vec<bool>> = data.features.iter().map(|x| arch.encode(x)).collect();
    let protocol = TrialProtocol {
        mode: TrialMode::Reset {
            reset_vector: Some(arch.reset_vector()),
        },
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let n = data.len() as u64;
    let trace = monte_carlo_words(net, &eps, &protocol, &[arch.output_word.as_str()], |t| {
        encoded[(t % n) as usize].clone()
    })?;
    let (scores, clean) = (&trace.noisy[0], &trace.clean[0]);
    let word_errors = scores.iter().zip(clean).filter(|(a, b)| a != b).count() as u64;
    let label = |t: usize| data.labels[t % data.len()];

    let threshold = match cfg.target_p_fa {
        Some(target) => {
            let negatives: Vec<i64> = (0..scores.len())
                .filter(|&t| !label(t))
                .map(|t| scores[t])
                .collect();
            if !(0..scores.len()).any(label) {
                return Err(SvmError::Calibration("no positive samples".into()));
            }
            calibrate_threshold(&negatives, target)?
        }
        None => 0,
    };
    let (mut pos, mut tp, mut neg, mut fa) = (0u64, 0u64, 0u64, 0u64);
    for (t, &s) in scores.iter().enumerate() {
        let hit = s >= threshold;
        if label(t) {
            pos += 1;
            tp += hit as u64;
        } else {
            neg += 1;
            fa += hit as u64;
        }
    }
    Ok(Evaluation {
        metrics: ClassifierMetrics {
            p_tp: Proportion::wilson(tp, pos, WILSON_Z),
            p_fa: Proportion::wilson(fa, neg, WILSON_Z),
            trials: cfg.trials,
            threshold,
        },
        energy: EnergyReport::of(arch)?,
        word_errors,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps_cp_avg: f64,
    pub evaluation: Evaluation,
}

/// Evaluate a freshly built architecture at each ε_cp_avg of `grid`. Every
/// point reuses the same seed.
pub fn sweep<F>(
    grid: &[f64],
    base: &PricePoint,
    build: F,
    data: &Dataset,
    cfg: &EvalConfig,
) -> Result<Vec<SweepPoint>, SvmError>
where
    F: Fn(&PricePoint) -> Result<Architecture, SvmError>,
{
    if grid.is_empty() {
        return Err(SvmError::Data("empty ε grid".into()));
    }
    grid.iter()
        .map(|&eps| {
            let arch = build(&PricePoint {
                eps_cp_avg: eps,
                ..base.clone()
            })?;
            Ok(SweepPoint {
                eps_cp_avg: eps,
                evaluation: evaluate(&arch, data, cfg)?,
            })
        })
        .collect()
}

/// First ε (in grid order) where p_TP falls more than `drop` below
/// `reference`.
pub fn collapse_eps(points: &[SweepPoint], reference: f64, drop: f64) -> Option<f64> {
    points
        .iter()
        .find(|p| p.evaluation.metrics.p_tp.rate < reference - drop)
        .map(|p| p.eps_cp_avg)
}

/// Total energy at the largest ε of the leading run of grid points whose
/// p_TP meets `target`, with that ε.
pub fn energy_at_target(points: &[SweepPoint], target: f64) -> Option<(f64, f64)> {
    points
        .iter()
        .take_while(|p| p.evaluation.metrics.p_tp.rate >= target)
        .last()
        .map(|p| (p.eps_cp_avg, p.evaluation.energy.total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_bounds_false_alarms() {
        let neg: Vec<i64> = (0..100).collect();
        let t = calibrate_threshold(&neg, 0.05).unwrap();
        assert_eq!(t, 95);
        assert_eq!(neg.iter().filter(|&&s| s >= t).count(), 5);
        assert_eq!(calibrate_threshold(&neg, 0.0).unwrap(), 100);
        assert!(calibrate_threshold(&neg, 1.0).is_err());
        assert!(calibrate_threshold(&[], 0.01).is_err());
        // Ties cannot push p_FA over the target.
        let tied = vec![7; 10];
        assert_eq!(calibrate_threshold(&tied, 0.5).unwrap(), 8);
    }
}
