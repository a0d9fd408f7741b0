use serde::{Deserialize, Serialize};

use super::{Dataset, SvmError, SvmModel};
use crate::arith_gen::{
    bwm_into, constant_word, csa_into, reorder_dimensions, rpe_offset, sign_extend, Bit, Builder,
    Signedness,
};
use crate::delay_shaping::{
    clamp_to_floor, current_redistribute, ipdb_factors, ipdr_schedule, stretch_regions,
    DelayAssignment, IpdrProfile, Pricer, ScheduleReport, DEFAULT_PATH_CAP,
};
use crate::device_model::energy_for_error_rate;
use crate::netlist::{arrival_times, GateKind, LogicNetwork, Signal};
use crate::sisc::{compose_sisc, EcConfig, FusionParams, Region, RegionCounts, TapBank};

const OPERAND_BITS: u32 = 8;
/// The estimator keeps operand bits 3..8, so each tap word sits 6 columns up.
const TAP_SHIFT: u32 = 6;
const TRUNC_MASK: i64 = !7;

/// Device operating point shared by every architecture in a comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    /// ε of a unit-delay gate at the uniform reference current.
    pub eps_cp_avg: f64,
    /// Seconds per delay-factor unit.
    pub unit_delay: f64,
    /// When set, the unit delay is rescaled so the decision delay hits this
    /// target, and every gate is repriced.
    #[serde(default)]
    pub decision_delay: Option<f64>,
}

impl PricePoint {
    pub fn new(eps_cp_avg: f64) -> Self {
        Self {
            eps_cp_avg,
            unit_delay: 1e-9,
            decision_delay: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    Serial,
    Shannon,
    Nmr,
}

/// Order in which dimensions enter the serial accumulator, ascending in the
/// key so the last rows sit nearest the output.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReorderKey {
    None,
    /// Signed weight value.
    #[default]
    Value,
    Magnitude,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShannonConfig {
    pub reorder: ReorderKey,
    /// Move each multiplier's slack from its exit gates into its interior.
    pub stretch: bool,
    pub stretch_max_scale: f64,
    /// Smallest delay factor an exit gate may be left with.
    pub stretch_exit_floor: f64,
    /// Gates whose ε would fall below this spend less energy instead.
    pub eps_floor: f64,
    /// Energy weight of CSA gates in columns the fusion rule corrects,
    /// relative to 1 for the uncorrected columns.
    pub csa_msb_weight: f64,
    /// Energy weight of the lowest `csa_lsb_columns` CSA columns, whose
    /// errors are too small to move a decision.
    pub csa_lsb_weight: f64,
    pub csa_lsb_columns: usize,
    /// Energy weight of multiplier adders in those same low columns,
    /// relative to 1 for the rest of the multiplier.
    pub bwm_lsb_weight: f64,
    /// MSB-boost delay schedule applied after balancing; word `y`.
    pub ipdr: Option<IpdrProfile>,
    /// Peak count for the fusion rule; chosen from the estimator error on
    /// the calibration set when absent.
    pub p_k: Option<u64>,
    pub ec: EcConfig,
}

impl Default for ShannonConfig {
    fn default() -> Self {
        Self {
            reorder: ReorderKey::Value,
            stretch: true,
            stretch_max_scale: 16.0,
            stretch_exit_floor: 1.0,
            eps_floor: 1e-7,
            csa_msb_weight: 0.02,
            csa_lsb_weight: 0.5,
            csa_lsb_columns: 10,
            bwm_lsb_weight: 0.3,
            ipdr: None,
            p_k: None,
            ec: EcConfig::default(),
        }
    }
}

impl ShannonConfig {
    /// No reordering, shaping or redistribution. The main block keeps only
    /// the energy-neutral balancing, with an estimator and fusion stage attached.
    pub fn unshaped() -> Self {
        Self {
            reorder: ReorderKey::None,
            stretch: false,
            eps_floor: 0.0,
            csa_msb_weight: 1.0,
            csa_lsb_weight: 1.0,
            bwm_lsb_weight: 1.0,
            ipdr: None,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmrConfig {
    /// Odd replica count, at least 3.
    pub replicas: usize,
    /// Voter gates run at the EC error rate.
    pub ec: EcConfig,
}

impl Default for NmrConfig {
    fn default() -> Self {
        Self {
            replicas: 3,
            ec: EcConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShannonDetails {
    pub fusion: FusionParams,
    pub counts: RegionCounts,
    /// (estimator + fusion) / main block gates.
    pub ec_ratio: f64,
    pub ec_epsilon: f64,
    pub bias_correction: i64,
    /// Largest |y_e − y_o| on the calibration set.
    pub max_estimator_error: i64,
    /// Interior delay scale of each multiplier, in row order.
    pub stretch_scales: Vec<f64>,
    pub schedule: Option<ScheduleReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
enum Operand {
    Weight,
    Feature,
}

/// A priced classifier network. Row `r` of the datapath multiplies weight
/// input `w{r}` by feature input `x{r}`, which carries dimension
/// `order[r]` of the feature vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub style: Style,
    pub network: LogicNetwork,
    pub assignment: DelayAssignment,
    pub region: Vec<Region>,
    /// Signed word holding w·x + b (or its corrected estimate).
    pub output_word: String,
    pub order: Vec<usize>,
    pub width: u32,
    pub point: PricePoint,
    pub model: SvmModel,
    pub warnings: Vec<String>,
    pub shannon: Option<ShannonDetails>,
    inputs: Vec<(Operand, usize, u32)>,
}

impl Architecture {
    /// Primary-input vector for feature vector `x` (dimension order), with
    /// the weights at their model values.
    pub fn encode(&self, x: &[u8]) -> Vec<bool> {
        self.inputs
            .iter()
            .map(|&(op, row, bit)| {
                let v = match op {
                    Operand::Weight => self.model.w[self.order[row]],
                    Operand::Feature => x[self.order[row]] as i64,
                };
                (v >> bit) & 1 == 1
            })
            .collect()
    }

    /// The idle state between decisions: weights applied, features zero.
    pub fn reset_vector(&self) -> Vec<bool> {
        self.encode(&vec![0; self.model.dims()])
    }

    pub fn gate_count(&self) -> usize {
        self.network.gate_count()
    }

    pub fn region_energy(&self, region: Region) -> f64 {
        self.region
            .iter()
            .zip(&self.assignment.energy)
            .filter(|(r, _)| **r == region)
            .map(|(_, e)| e)
            .sum()
    }

    /// Critical-path delay in seconds. The fusion stage of the Shannon
    /// style is pipelined and left out.
    pub fn decision_delay(&self) -> Result<f64, SvmError> {
        let delays: Vec<f64> = (0..self.network.gates.len())
            .map(|g| {
                if self.style == Style::Shannon && self.region[g] == Region::Fusion {
                    0.0
                } else {
                    self.assignment.delay(g)
                }
            })
            .collect();
        let a = arrival_times(&self.network, &delays)?;
        Ok(self
            .network
            .primary_outputs
            .iter()
            .map(|o| a[o.driver])
            .fold(0.0, f64::max))
    }
}

/// Signed width that holds every score of the model.
fn score_width(model: &SvmModel) -> Result<u32, SvmError> {
    let (lo, hi) = model.score_range();
    let width = (1..=62u32).find(|&l| lo >= -(1i64 << (l - 1)) && hi < (1i64 << (l - 1)));
    width.ok_or_else(|| SvmError::Model("score range needs more than 62 bits".into()))
}

fn row_order(model: &SvmModel, key: ReorderKey) -> Vec<usize> {
    match key {
        ReorderKey::None => (0..model.dims()).collect(),
        ReorderKey::Value => {
            reorder_dimensions(&model.w.iter().map(|&w| w as f64).collect::<Vec<_>>())
        }
        ReorderKey::Magnitude => {
            reorder_dimensions(&model.w.iter().map(|&w| w.abs() as f64).collect::<Vec<_>>())
        }
    }
}

struct Inputs {
    w: Vec<Vec<Signal>>,
    x: Vec<Vec<Signal>>,
}

fn add_inputs(net: &mut LogicNetwork, rows: usize) -> Inputs {
    let mut w = Vec::with_capacity(rows);
    let mut x = Vec::with_capacity(rows);
    for r in 0..rows {
        w.push(net.add_input_word(&format!("w{r}"), OPERAND_BITS));
        x.push(net.add_input_word(&format!("x{r}"), OPERAND_BITS));
    }
    Inputs { w, x }
}

fn input_roles(net: &LogicNetwork) -> Vec<(Operand, usize, u32)> {
    net.primary_inputs
        .iter()
        .map(|pi| {
            let op = if pi.word.starts_with('w') {
                Operand::Weight
            } else {
                Operand::Feature
            };
            let row = pi.word[1..]
                .parse()
                .expect("datapath input words are w<row> / x<row>");
            (op, row, pi.bit)
        })
        .collect()
}

/// One multiplier per row feeding a serial carry-save accumulator that
/// starts from the bias. Returns the `width`-bit sum and each row's raw
/// estimator word.
fn datapath(
    b: &mut Builder<'_>,
    inputs: &Inputs,
    bias: i64,
    width: usize,
) -> (Vec<Bit>, Vec<Vec<Signal>>) {
    let mut operands = vec![constant_word(b, bias, width)];
    let mut taps = Vec::with_capacity(inputs.w.len());
    for (r, (w, x)) in inputs.w.iter().zip(&inputs.x).enumerate() {
        let m = b.scoped("bwm", |b| {
            b.scoped(format!("row{r}"), |b| {
                bwm_into(b, w, x, Signedness::SignedUnsigned)
            })
        });
        let product = if width <= m.product.len() {
            m.product[..width].to_vec()
        } else {
            sign_extend(&m.product, width)
        };
        operands.push(product);
        taps.push(m.rpe);
    }
    let y = b.scoped("csa", |b| csa_into(b, &operands, width, true));
    (y, taps)
}

fn add_word(net: &mut LogicNetwork, bits: &[Bit], word: &str, tags: &[&str]) {
    for (k, bit) in bits.iter().enumerate() {
        let s = match bit {
            Some(s) => *s,
            None => Builder::new(net).zero(),
        };
        let s = match s {
            Signal::Gate(_) => s,
            Signal::Input { .. } => net.add_gate(GateKind::Buf, &[s], tags),
        };
        net.add_output(s, false, word, k as u32, k + 1 == bits.len());
    }
}

/// Build at `point`, rescaling the unit delay when a decision delay is
/// requested. Delay factors do not depend on the unit delay, so one
/// rescale lands on the target.
fn at_point<F>(point: &PricePoint, build: F) -> Result<Architecture, SvmError>
where
    F: Fn(&PricePoint) -> Result<Architecture, SvmError>,
{
    let arch = build(point)?;
    let Some(target) = point.decision_delay else {
        return Ok(arch);
    };
    if !(target > 0.0) {
        return Err(SvmError::Model(format!(
            "decision delay {target} must be positive"
        )));
    }
    let scaled = PricePoint {
        unit_delay: point.unit_delay * target / arch.decision_delay()?,
        ..point.clone()
    };
    let mut arch = build(&scaled)?;
    arch.point = point.clone();
    arch.point.unit_delay = scaled.unit_delay;
    Ok(arch)
}

/// Conventional datapath: every gate at the unit delay and the uniform
/// reference current.
pub fn build_serial(
    model: &SvmModel,
    pricer: &Pricer,
    point: &PricePoint,
) -> Result<Architecture, SvmError> {
    at_point(point, |pt| {
        let width = score_width(model)?;
        let mut net = LogicNetwork::new();
        let inputs = add_inputs(&mut net, model.dims());
        let order: Vec<usize> = (0..model.dims()).collect();
        let mut b = Builder::new(&mut net);
        let (y, _) = datapath(&mut b, &inputs, model.b, width as usize);
        add_word(&mut net, &y, "y", &["csa"]);
        net.prune();
        let unit_current = pricer.current_for(pt.eps_cp_avg, pt.unit_delay)?;
        let assignment = DelayAssignment::at_current(&net, pricer, pt.unit_delay, unit_current)?;
        Ok(Architecture {
            style: Style::Serial,
            region: vec![Region::Main; net.gates.len()],
            inputs: input_roles(&net),
            network: net,
            assignment,
            output_word: "y".into(),
            order,
            width,
            point: pt.clone(),
            model: model.clone(),
            warnings: Vec::new(),
            shannon: None,
        })
    })
}

/// `replicas` serial datapaths on shared inputs with a bitwise majority
/// vote on their outputs. Voter gates are priced at the EC error rate.
pub fn build_nmr(
    model: &SvmModel,
    pricer: &Pricer,
    point: &PricePoint,
    cfg: &NmrConfig,
) -> Result<Architecture, SvmError> {
    let n = cfg.replicas;
    if n < 3 || n % 2 == 0 {
        return Err(SvmError::Model(format!(
            "replica count {n} must be odd and at least 3"
        )));
    }
    at_point(point, |pt| {
        let width = score_width(model)?;
        let mut net = LogicNetwork::new();
        let inputs = add_inputs(&mut net, model.dims());
        let mut b = Builder::new(&mut net);
        let outs: Vec<Vec<Signal>> = (0..n)
            .map(|k| {
                let (y, _) = b.scoped(format!("rep{k}"), |b| {
                    datapath(b, &inputs, model.b, width as usize)
                });
                y.into_iter().map(|bit| b.materialize(bit)).collect()
            })
            .collect();
        // Majority of n bits: popcount + 2^c − (n+1)/2 carries into bit c.
        let c = (usize::BITS - n.leading_zeros()) as usize;
        let threshold = (1i64 << c) - (n as i64 + 1) / 2;
        let voted: Vec<Bit> = b.scoped("vote", |b| {
            (0..width as usize)
                .map(|k| {
                    if n == 3 {
                        return Some(b.gate(
                            GateKind::Maj3,
                            &[outs[0][k], outs[1][k], outs[2][k]],
                            &[],
                        ));
                    }
                    let mut ops: Vec<Vec<Bit>> = outs
                        .iter()
                        .map(|o| {
                            let mut op = vec![None; c + 1];
                            op[0] = Some(o[k]);
                            op
                        })
                        .collect();
                    ops.push(constant_word(b, threshold, c + 1));
                    csa_into(b, &ops, c + 1, false)[c]
                })
                .collect()
        });
        add_word(&mut net, &voted, "y", &["vote"]);
        net.prune();
        let unit_current = pricer.current_for(pt.eps_cp_avg, pt.unit_delay)?;
        let mut assignment =
            DelayAssignment::at_current(&net, pricer, pt.unit_delay, unit_current)?;
        let eps_ec = cfg.ec.ec_epsilon(pt.eps_cp_avg);
        let mut region = vec![Region::Main; net.gates.len()];
        for g in net.gates.iter().filter(|g| g.has_tag("vote")) {
            region[g.id] = Region::Fusion;
            if g.kind.is_const() {
                continue;
            }
            let t = assignment.delay(g.id);
            let e = energy_for_error_rate(&pricer.params, pricer.model, eps_ec, t, g.kind)?;
            assignment.energy[g.id] = e;
            assignment.current[g.id] = pricer.current(g.kind, e, t)?;
            assignment.epsilon[g.id] = pricer.epsilon(g.kind, e, t)?;
        }
        Ok(Architecture {
            style: Style::Nmr,
            region,
            inputs: input_roles(&net),
            network: net,
            assignment,
            output_word: "y".into(),
            order: (0..model.dims()).collect(),
            width,
            point: pt.clone(),
            model: model.clone(),
            warnings: Vec::new(),
            shannon: None,
        })
    })
}

/// Software value of the estimator before its bias correction.
fn raw_estimate(model: &SvmModel, x: &[u8], bank: &TapBank, drop_bits: u32) -> i64 {
    let offset = rpe_offset(Signedness::SignedUnsigned);
    let raw: Vec<i64> = model
        .w
        .iter()
        .zip(x)
        .map(|(&w, &x)| ((w & TRUNC_MASK) * (x as i64 & TRUNC_MASK) >> TAP_SHIFT) - offset)
        .collect();
    bank.estimate(&raw, drop_bits)
}

/// Smallest step of at least 4·max_err, giving the peak count that keeps
/// the estimator error inside a quarter step.
fn auto_peaks(width: u32, max_err: i64) -> u64 {
    let need = (4 * max_err.max(1)) as u64;
    let step_bits = (64 - (need - 1).leading_zeros()).min(width);
    1u64 << (width - step_bits)
}

/// Main block shaped for sparse errors, plus the reduced-precision
/// estimator and fusion stage.
///
/// The main block is the serial datapath with rows reordered, balanced,
/// each multiplier's slack moved into its interior, over-reliable gates
/// brought down to the ε floor, and CSA energy shifted towards the columns
/// fusion cannot correct. `calibration` fixes the estimator's bias and,
/// unless configured, the fusion peak count.
pub fn build_shannon(
    model: &SvmModel,
    pricer: &Pricer,
    point: &PricePoint,
    cfg: &ShannonConfig,
    calibration: &Dataset,
) -> Result<Architecture, SvmError> {
    if calibration.dims() != model.dims() {
        return Err(SvmError::Data(format!(
            "calibration set has {} dimensions, model {}",
            calibration.dims(),
            model.dims()
        )));
    }
    if !(cfg.csa_msb_weight > 0.0 && cfg.csa_lsb_weight > 0.0 && cfg.bwm_lsb_weight > 0.0) {
        return Err(SvmError::Model(
            "CSA energy weights must be positive".into(),
        ));
    }
    let width = score_width(model)?;
    let order = row_order(model, cfg.reorder);
    let drop = cfg.ec.tap_drop_bits;

    let mut bank = TapBank {
        taps: Vec::new(),
        shift: TAP_SHIFT,
        offset: rpe_offset(Signedness::SignedUnsigned),
        bias_correction: 0,
    };
    let rows = model.dims();
    bank.taps = vec![Vec::new(); rows];
    let residual: Vec<i64> = calibration
        .features
        .iter()
        .map(|x| model.score(x) - raw_estimate(model, x, &bank, drop))
        .collect();
    bank.bias_correction =
        (residual.iter().sum::<i64>() as f64 / residual.len() as f64).round() as i64;
    let max_err = residual
        .iter()
        .map(|r| (r - bank.bias_correction).abs())
        .max()
        .unwrap_or(0);
    let p_k = cfg.p_k.unwrap_or_else(|| auto_peaks(width, max_err));
    let fusion = FusionParams::new(width, p_k)?;
    let mut warnings = Vec::new();
    if 2 * max_err >= fusion.step() / 2 {
        warnings.push(format!(
            "estimator error reaches {max_err}, close to half the correction step {}",
            fusion.step()
        ));
    }

    at_point(point, |pt| {
        let hw = SvmModel {
            w: order.iter().map(|&j| model.w[j]).collect(),
            b: model.b,
        };
        let mut full = LogicNetwork::new();
        let inputs = add_inputs(&mut full, rows);
        let mut b = Builder::new(&mut full);
        let (y, taps) = datapath(&mut b, &inputs, hw.b, width as usize);
        add_word(&mut full, &y, "y", &["csa"]);
        // Shape the main block alone: the tap logic is dead once the taps
        // are not outputs.
        let mut core = full.clone();
        let map = core.prune();

        let unit_current = pricer.current_for(pt.eps_cp_avg, pt.unit_delay)?;
        let (mut factors, _) = ipdb_factors(&core, DEFAULT_PATH_CAP)?;
        let base = DelayAssignment::at_current(&core, pricer, pt.unit_delay, unit_current)?;
        let mut schedule = None;
        if let Some(profile) = &cfg.ipdr {
            let (a, report) = ipdr_schedule(
                &core,
                &base.with_factors(&core, pricer, factors)?,
                pricer,
                profile,
            )?;
            factors = a.factor;
            schedule = Some(report);
        }
        let mut scales = Vec::new();
        if cfg.stretch {
            let mut regions = vec![Vec::new(); rows];
            for g in core
                .gates
                .iter()
                .filter(|g| !g.kind.is_const() && g.has_tag("bwm"))
            {
                let row = g
                    .tags
                    .iter()
                    .find_map(|t| t.strip_prefix("row").and_then(|r| r.parse::<usize>().ok()));
                regions[row.expect("multiplier gates carry their row")].push(g.id);
            }
            (factors, scales) = stretch_regions(
                &core,
                &factors,
                &regions,
                cfg.stretch_max_scale,
                cfg.stretch_exit_floor,
            )?;
        }
        let mut shaped = base.with_factors(&core, pricer, factors)?;
        let column = |g: &crate::netlist::Gate| {
            g.tags
                .iter()
                .find_map(|t| t.strip_prefix("col").and_then(|c| c.parse::<usize>().ok()))
        };
        if cfg.bwm_lsb_weight != 1.0 {
            shaped = current_redistribute(&core, &shaped, pricer, |g| {
                if !g.has_tag("bwm") {
                    return None;
                }
                Some(if column(g).is_some_and(|k| k < cfg.csa_lsb_columns) {
                    cfg.bwm_lsb_weight
                } else {
                    1.0
                })
            })?;
        }
        shaped = clamp_to_floor(&core, &shaped, pricer, cfg.eps_floor)?;
        let h = (fusion.l - fusion.s()) as usize;
        shaped = current_redistribute(&core, &shaped, pricer, |g| {
            if !g.has_tag("csa") {
                return None;
            }
            Some(match column(g) {
                Some(k) if k >= h => cfg.csa_msb_weight,
                Some(k) if k < cfg.csa_lsb_columns => cfg.csa_lsb_weight,
                _ => 1.0,
            })
        })?;

        // Carry the shaped points back; tap logic starts at the unit point
        // and is repriced to the EC rate by the composition.
        let mut mb = DelayAssignment::at_current(&full, pricer, pt.unit_delay, unit_current)?;
        for (old, new) in map.iter().enumerate() {
            if let Some(n) = *new {
                mb.factor[old] = shaped.factor[n];
                mb.current[old] = shaped.current[n];
                mb.energy[old] = shaped.energy[n];
                mb.epsilon[old] = shaped.epsilon[n];
            }
        }
        let mut bank = bank.clone();
        bank.taps = taps;
        let sisc = compose_sisc(
            full,
            &mb,
            "y",
            &bank,
            fusion,
            &cfg.ec,
            pricer,
            pt.eps_cp_avg,
        )?;
        let mut arch_warnings = warnings.clone();
        arch_warnings.extend(sisc.warnings);
        Ok(Architecture {
            style: Style::Shannon,
            inputs: input_roles(&sisc.network),
            region: sisc.region,
            network: sisc.network,
            assignment: sisc.assignment,
            output_word: "y_hat".into(),
            order: order.clone(),
            width,
            point: pt.clone(),
            model: model.clone(),
            warnings: arch_warnings,
            shannon: Some(ShannonDetails {
                fusion,
                counts: sisc.counts,
                ec_ratio: sisc.ec_ratio,
                ec_epsilon: sisc.ec_epsilon,
                bias_correction: bank.bias_correction,
                max_estimator_error: max_err,
                stretch_scales: scales,
                schedule,
            }),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_covers_the_score_range() {
        let m = SvmModel::new(vec![127], 0).unwrap();
        // 127·255 = 32385 < 2^15.
        assert_eq!(score_width(&m).unwrap(), 16);
        // [-32641, 32384] still fits 16 bits; two -128 weights reach -65280.
        let m = SvmModel::new(vec![-128, 127], -1).unwrap();
        assert_eq!(score_width(&m).unwrap(), 16);
        let m = SvmModel::new(vec![-128, -128], 0).unwrap();
        assert_eq!(score_width(&m).unwrap(), 17);
    }

    #[test]
    fn peak_count_leaves_headroom() {
        // Error 100 needs a step of at least 400, so 512 in a 16-bit word.
        assert_eq!(auto_peaks(16, 100), 128);
        assert_eq!(auto_peaks(8, 1000), 1);
    }
}
