use std::fs::File;

use rayon::prelude::*;

use super::{
    derive_seed, Artifacts, Cell, Command, ExperimentConfig, GateSel, HarnessError, Table,
};
use crate::arith_gen::build_rca;
use crate::delay_shaping::{ipdb, ipdr_schedule, is_balanced, DelayAssignment, Pricer};
use crate::device_model::{
    closed_form_error_rate, fp_error_rate_at, iso_k_error_rate, llg_monte_carlo, supply_current,
    DeviceParams, DriveCondition, FpConfig, LlgConfig,
};
use crate::netlist::{GateKind, LogicNetwork};
use crate::noisy_sim::{monte_carlo_error_pmf, uniform_inputs, ErrorPmf, TrialProtocol};
use crate::sisc::{check_sparsity_condition, fuse_wrapping, lattice_mass, FusionParams};
use crate::svm_bench::{
    build_nmr, build_serial, build_shannon, collapse_eps, energy_at_target, evaluate, fit_centroid,
    sweep, synth_dataset, Architecture, Dataset, EvalConfig, PricePoint, Style, SvmError, SvmModel,
};

/// Run one pipeline in memory.
pub fn execute(command: Command, config: &ExperimentConfig) -> Result<Artifacts, HarnessError> {
    config.validate()?;
    match command {
        Command::Contours => contours(config),
        Command::Fp => fp(config),
        Command::Llg => llg(config),
        Command::Shape => shape(config),
        Command::FuseCheck => fuse_check(config),
        Command::Svm => svm(config),
    }
}

fn contours(config: &ExperimentConfig) -> Result<Artifacts, HarnessError> {
    let params = config.device_params()?;
    let sec = &config.contours;
    let kind = match sec.gate {
        GateSel::Inv => GateKind::Inv,
        GateSel::Maj => GateKind::Maj3,
    };
    let mut t = Table::new(
        "contours",
        &[
            "delay_s",
            "energy_kt",
            "energy_j",
            "current_a",
            "overdrive",
            "epsilon_closed_form",
            "epsilon_iso_k",
        ],
    );
    let mut below = 0;
    for delay in sec.delays.points("contours.delays")? {
        for e_kt in sec.energies_kt.points("contours.energies_kt")? {
            let energy = e_kt * params.kt();
            let current = supply_current(&params, energy, delay, kind)?;
            let i = current / params.i_crit;
            let closed = if i > 1.0 {
                Some(closed_form_error_rate(
                    &params,
                    &DriveCondition::new(i, delay),
                )?)
            } else {
                below += 1;
                None
            };
            t.push(vec![
                delay.into(),
                e_kt.into(),
                energy.into(),
                current.into(),
                i.into(),
                closed.into(),
                iso_k_error_rate(&params, i * delay).into(),
            ]);
        }
    }
    let mut notes = Vec::new();
    if below > 0 {
        notes.push(format!(
            "{below} grid points have overdrive <= 1; their closed-form column is empty"
        ));
    }
    Ok(Artifacts {
        tables: vec![t],
        notes,
    })
}

fn drive_at(
    params: &DeviceParams,
    p: &super::DrivePoint,
) -> Result<(DeviceParams, DriveCondition), HarnessError> {
    let q = params.clone().with_barrier_kt(p.barrier_kt);
    q.validate()?;
    let t_g = p.tau / q.tau_rate();
    Ok((q, DriveCondition::new(p.i, t_g)))
}

fn fp_config(config: &ExperimentConfig) -> FpConfig {
    FpConfig {
        grid_size: config.fp.grid_size,
        dt: config.fp.dt,
        scheme: config.fp.scheme,
    }
}

fn fp(config: &ExperimentConfig) -> Result<Artifacts, HarnessError> {
    let params = config.device_params()?;
    let fp_cfg = fp_config(config);
    let rows: Vec<Vec<Cell>> = config
        .fp
        .points
        .par_iter()
        .map(|p| {
            let (q, drive) = drive_at(&params, p)?;
            let eps_fp = fp_error_rate_at(&q, &drive, &fp_cfg)?;
            let eps_cf = closed_form_error_rate(&q, &drive).ok();
            Ok(vec![
                p.barrier_kt.into(),
                p.i.into(),
                p.tau.into(),
                drive.t_g.into(),
                eps_fp.into(),
                eps_cf.into(),
            ])
        })
        .collect::<Result<_, HarnessError>>()?;
    let mut t = Table::new(
        "fp",
        &[
            "barrier_kt",
            "overdrive",
            "tau",
            "t_g",
            "epsilon_fp",
            "epsilon_closed_form",
        ],
    );
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Artifacts {
        tables: vec![t],
        notes: Vec::new(),
    })
}

fn llg(config: &ExperimentConfig) -> Result<Artifacts, HarnessError> {
    let params = config.device_params()?;
    let sec = &config.llg;
    let trials = config.trials_or(sec.trials);
    let llg_cfg = LlgConfig {
        steps_per_gate: sec.steps_per_gate,
        max_step: sec.max_step,
        ..LlgConfig::default()
    };
    let fp_cfg = fp_config(config);
    let seed = config.seed();
    let rows: Vec<(Vec<Cell>, Option<f64>)> = sec
        .points
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let (q, drive) = drive_at(&params, p)?;
            let est = llg_monte_carlo(
                &q,
                &drive,
                trials as usize,
                derive_seed(seed, &format!("llg/{k}")),
                &llg_cfg,
            )?;
            let (eps_fp, z) = if sec.compare_fp {
                let e = fp_error_rate_at(&q, &drive, &fp_cfg)?;
                // Binomial standard error under the Fokker-Planck value.
                let se = (e * (1.0 - e) / trials as f64).sqrt();
                (Some(e), Some((est.epsilon - e) / se))
            } else {
                (None, None)
            };
            let row = vec![
                p.barrier_kt.into(),
                p.i.into(),
                p.tau.into(),
                drive.t_g.into(),
                trials.into(),
                est.epsilon.into(),
                est.std_error().into(),
                eps_fp.into(),
                z.into(),
            ];
            Ok((row, z))
        })
        .collect::<Result<_, HarnessError>>()?;
    let mut t = Table::new(
        "llg",
        &[
            "barrier_kt",
            "overdrive",
            "tau",
            "t_g",
            "trials",
            "epsilon_llg",
            "std_error",
            "epsilon_fp",
            "z",
        ],
    );
    let max_z = rows
        .iter()
        .filter_map(|(_, z)| z.map(f64::abs))
        .fold(None, |m: Option<f64>, z| Some(m.map_or(z, |m| m.max(z))));
    rows.into_iter().for_each(|(r, _)| t.push(r));
    let notes = max_z
        .map(|z| vec![format!("largest |z| between LLG and Fokker-Planck: {z:.2}")])
        .unwrap_or_default();
    Ok(Artifacts {
        tables: vec![t],
        notes,
    })
}

fn pmf_table(name: &str, pmf: &ErrorPmf) -> Table {
    let mut t = Table::new(name, &["value", "probability", "count"]);
    for (&v, &c) in &pmf.counts {
        t.push(vec![
            v.into(),
            (c as f64 / pmf.samples.max(1) as f64).into(),
            c.into(),
        ]);
    }
    t
}

/// Delay factors of each full-adder stage, one row per stage.
fn stage_rows(net: &LogicNetwork, a: &DelayAssignment, variant: &str, width: usize, t: &mut Table) {
    for stage in 0..width {
        let scope = format!("FA{stage}");
        let role = |r: &str| -> Cell {
            net.gates
                .iter()
                .find(|g| g.has_tag(&scope) && g.has_tag(r))
                .map(|g| a.factor[g.id])
                .into()
        };
        t.push(vec![
            variant.into(),
            stage.into(),
            role("m1"),
            role("i1"),
            role("m2"),
            role("m3"),
        ]);
    }
}

fn shape(config: &ExperimentConfig) -> Result<Artifacts, HarnessError> {
    let sec = &config.shape;
    let pricer = Pricer::new(config.device_params()?, config.mode.error_model());
    let net = build_rca(sec.width)?.network;
    let word = sec.ipdr.word.as_str();
    let bits = net
        .primary_outputs
        .iter()
        .filter(|po| po.word == word)
        .count();
    if sec.ipdr.msb_bits == 0 || sec.ipdr.msb_bits >= bits {
        return Err(HarnessError::Config(format!(
            "shape.ipdr.msb_bits must lie in 1..{bits}"
        )));
    }
    let uniform = DelayAssignment::uniform(&net, &pricer, sec.unit_delay, sec.eps_cp_avg)?;
    let balanced = ipdb(&net, &pricer, sec.unit_delay, uniform.unit_current)?;
    let (redistributed, schedule) = ipdr_schedule(&net, &balanced, &pricer, &sec.ipdr)?;

    let protocol = TrialProtocol::reset(
        config.trials_or(sec.trials),
        derive_seed(config.seed(), "shape"),
    );
    let step = 1i64 << (bits - sec.ipdr.msb_bits);
    let mut tables = Vec::new();
    let mut notes = Vec::new();
    let mut summary = Table::new(
        "shape_summary",
        &[
            "variant",
            "energy_j",
            "t_cp",
            "zero_mass",
            "sparsity",
            "mean_error",
            "msb_lsb_ratio",
            "sparsity_condition",
        ],
    );
    let mut rates = Table::new(
        "bit_error_rates",
        &["variant", "bit", "rate", "low", "high"],
    );
    let mut delays = Table::new("delays", &["variant", "stage", "m1", "i1", "m2", "m3"]);
    for (name, a) in [
        ("uniform", &uniform),
        ("ipdb", &balanced),
        ("ipdr", &redistributed),
    ] {
        let mc = monte_carlo_error_pmf(
            &net,
            &a.epsilons(),
            &protocol,
            word,
            uniform_inputs(net.primary_inputs.len()),
            false,
        )?;
        let check = check_sparsity_condition(&mc.profile, sec.ipdr.msb_bits, sec.ratio_min)?;
        let t_cp = is_balanced(&net, &a.factor)?.t_cp;
        summary.push(vec![
            name.into(),
            a.total_energy().into(),
            t_cp.into(),
            mc.pmf.zero_mass().into(),
            lattice_mass(&mc.pmf, step).into(),
            mc.pmf.mean().into(),
            check.margin.into(),
            check.pass.into(),
        ]);
        for (bit, r) in mc.profile.rates.iter().enumerate() {
            rates.push(vec![
                name.into(),
                bit.into(),
                r.rate.into(),
                r.low.into(),
                r.high.into(),
            ]);
        }
        if name != "uniform" {
            stage_rows(&net, a, name, sec.width, &mut delays);
        }
        tables.push(pmf_table(&format!("pmf_{name}"), &mc.pmf));
    }
    if let Some(reason) = schedule.stopped {
        notes.push(format!("I-PDR schedule stopped early: {reason}"));
    }
    tables.extend([summary, rates, delays]);
    Ok(Artifacts { tables, notes })
}

fn fuse_check(config: &ExperimentConfig) -> Result<Artifacts, HarnessError> {
    let sec = &config.fuse_check;
    let params = FusionParams::new(sec.l, sec.p_k)?;
    let half = 1i64 << (sec.l - 1);
    if sec.y_max >= half || sec.y_max < 0 || sec.e_max < 0 {
        return Err(HarnessError::Config(format!(
            "fuse_check.y_max must lie in 0..{half} and e_max be >= 0"
        )));
    }
    let wrap = |v: i64| {
        let m = v.rem_euclid(2 * half);
        if m >= half {
            m - 2 * half
        } else {
            m
        }
    };
    let mut per_eta = Table::new("fuse_check", &["eta", "cases", "exact", "fraction"]);
    let mut failures = Table::new("fuse_failures", &["y_o", "eta", "e", "y_hat"]);
    let (mut total, mut exact_total) = (0u64, 0u64);
    for &eta in &sec.etas {
        let (mut cases, mut exact) = (0u64, 0u64);
        for y_o in -sec.y_max..=sec.y_max {
            for e in -sec.e_max..=sec.e_max {
                let f = fuse_wrapping(wrap(y_o + eta), wrap(y_o + e), &params);
                cases += 1;
                if f.y_hat == y_o {
                    exact += 1;
                } else if failures.rows.len() < 100 {
                    failures.push(vec![y_o.into(), eta.into(), e.into(), f.y_hat.into()]);
                }
            }
        }
        per_eta.push(vec![
            eta.into(),
            cases.into(),
            exact.into(),
            (exact as f64 / cases as f64).into(),
        ]);
        total += cases;
        exact_total += exact;
    }
    let mut notes = vec![format!(
        "{exact_total} of {total} cases exact (step {})",
        params.step()
    )];
    if 2 * sec.e_max >= params.step() {
        notes.push(format!(
            "e_max {} reaches half the correction step; misses are expected",
            sec.e_max
        ));
    }
    Ok(Artifacts {
        tables: vec![per_eta, failures],
        notes,
    })
}

fn svm_inputs(config: &ExperimentConfig) -> Result<(Dataset, SvmModel), HarnessError> {
    let sec = &config.svm;
    let open = |p: &std::path::Path| {
        File::open(p).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))
    };
    let (data, fitted) = match &sec.data_file {
        None => {
            let (d, m) = synth_dataset(&sec.synth)?;
            (d, Some(m))
        }
        Some(path) => (
            Dataset::read_csv(open(path)?, &path.display().to_string())?,
            None,
        ),
    };
    let model = match (&sec.model_file, fitted) {
        (Some(path), _) => SvmModel::read_csv(open(path)?)?,
        (None, Some(m)) => m,
        (None, None) => fit_centroid(&data)?,
    };
    Ok((data, model))
}

fn svm(config: &ExperimentConfig) -> Result<Artifacts, HarnessError> {
    let sec = &config.svm;
    let (data, model) = svm_inputs(config)?;
    let pricer = Pricer::new(config.device_params()?, config.mode.error_model());
    let grid = sec.eps_grid.points("svm.eps_grid")?;
    let base = PricePoint {
        eps_cp_avg: grid[0],
        unit_delay: sec.unit_delay,
        decision_delay: sec.decision_delay,
    };
    let eval = EvalConfig {
        trials: config.trials_or(sec.trials),
        seed: derive_seed(config.seed(), "svm"),
        target_p_fa: sec.target_p_fa,
        noiseless: false,
    };
    let build = |style: Style, p: &PricePoint| -> Result<Architecture, SvmError> {
        match style {
            Style::Serial => build_serial(&model, &pricer, p),
            Style::Shannon => build_shannon(&model, &pricer, p, &sec.shannon, &data),
            Style::Nmr => build_nmr(&model, &pricer, p, &sec.nmr),
        }
    };

    let mut runs = Vec::new();
    for &style in &sec.styles {
        let reference = build(style, &base)?;
        let clean = evaluate(
            &reference,
            &data,
            &EvalConfig {
                noiseless: true,
                ..eval.clone()
            },
        )?;
        let points = sweep(&grid, &base, |p| build(style, p), &data, &eval)?;
        runs.push((style, reference, clean.metrics.p_tp.rate, points));
    }
    let target = sec.accuracy_target.unwrap_or_else(|| {
        let serial = runs
            .iter()
            .find(|r| r.0 == Style::Serial)
            .unwrap_or(&runs[0]);
        serial.2 - sec.collapse_drop
    });

    let mut sweep_t = Table::new(
        "svm_sweep",
        &[
            "style",
            "eps_cp_avg",
            "p_tp",
            "p_tp_low",
            "p_tp_high",
            "p_fa",
            "threshold",
            "word_errors",
            "energy_total_j",
            "energy_main_j",
            "energy_estimator_j",
            "energy_fusion_j",
            "decision_delay_s",
        ],
    );
    let mut summary = Table::new(
        "svm_summary",
        &[
            "style",
            "gates",
            "clean_p_tp",
            "collapse_eps",
            "accuracy_target",
            "eps_at_target",
            "energy_at_target_j",
            "ec_ratio",
        ],
    );
    let mut notes = Vec::new();
    for (style, reference, clean, points) in &runs {
        let name = style_name(*style);
        for p in points {
            let (m, e) = (&p.evaluation.metrics, &p.evaluation.energy);
            sweep_t.push(vec![
                name.into(),
                p.eps_cp_avg.into(),
                m.p_tp.rate.into(),
                m.p_tp.low.into(),
                m.p_tp.high.into(),
                m.p_fa.rate.into(),
                m.threshold.into(),
                p.evaluation.word_errors.into(),
                e.total.into(),
                e.main.into(),
                e.estimator.into(),
                e.fusion.into(),
                e.decision_delay.into(),
            ]);
        }
        let at = energy_at_target(points, target);
        summary.push(vec![
            name.into(),
            reference.gate_count().into(),
            (*clean).into(),
            collapse_eps(points, *clean, sec.collapse_drop).into(),
            target.into(),
            at.map(|a| a.0).into(),
            at.map(|a| a.1).into(),
            reference.shannon.as_ref().map(|s| s.ec_ratio).into(),
        ]);
        notes.extend(reference.warnings.iter().map(|w| format!("{name}: {w}")));
    }
    Ok(Artifacts {
        tables: vec![sweep_t, summary],
        notes,
    })
}

fn style_name(style: Style) -> &'static str {
    match style {
        Style::Serial => "serial",
        Style::Shannon => "shannon",
        Style::Nmr => "nmr",
    }
}
