use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::delay_shaping::IpdrProfile;
use crate::device_model::{DeviceParams, ErrorModel, TimeScheme};
use crate::svm_bench::{NmrConfig, ShannonConfig, Style, SynthConfig};

/// One experiment file. Every section has defaults, so a file only needs
/// the keys it changes; `seed` has no default and must come from the file
/// or the command line.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    /// Overrides every section's own trial count.
    pub trials: Option<u64>,
    pub mode: Mode,
    pub device: DeviceSection,
    pub output: OutputSection,
    pub contours: ContoursSection,
    pub fp: FpSection,
    pub llg: LlgSection,
    pub shape: ShapeSection,
    pub fuse_check: FuseCheckSection,
    pub svm: SvmSection,
}

/// `physical` prices gates with the closed form; `abstract` parameterizes
/// by ε directly, with ε constant along constant energy·delay.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Physical,
    #[default]
    Abstract,
}

impl Mode {
    pub fn error_model(self) -> ErrorModel {
        match self {
            Mode::Physical => ErrorModel::ClosedForm,
            Mode::Abstract => ErrorModel::IsoK,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceSection {
    /// Key/value parameter file; built-in parameters when absent.
    pub params_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: vec![Format::Csv],
        }
    }
}

/// Explicit values, or `per_decade` log-spaced points from `from` to `to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Log { from: f64, to: f64, per_decade: u32 },
}

impl Grid {
    pub fn points(&self, what: &str) -> Result<Vec<f64>, HarnessError> {
        let bad = |msg: String| HarnessError::Config(format!("{what}: {msg}"));
        let pts = match *self {
            Grid::Values(ref v) => v.clone(),
            Grid::Log {
                from,
                to,
                per_decade,
            } => {
                if !(from > 0.0 && to >= from && to.is_finite()) {
                    return Err(bad(format!(
                        "log grid needs 0 < from <= to, got {from}..{to}"
                    )));
                }
                if per_decade == 0 {
                    return Err(bad("per_decade must be at least 1".into()));
                }
                let n = ((to / from).log10() * per_decade as f64 + 1e-9).floor() as i32;
                (0..=n)
                    .map(|k| from * 10f64.powf(k as f64 / per_decade as f64))
                    .collect()
            }
        };
        if pts.is_empty() {
            return Err(bad("grid is empty".into()));
        }
        if let Some(v) = pts.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(bad(format!(
                "grid values must be positive and finite, got {v}"
            )));
        }
        Ok(pts)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateSel {
    #[default]
    Inv,
    Maj,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContoursSection {
    /// Gate energies in units of kT.
    pub energies_kt: Grid,
    /// Gate on-times in seconds.
    pub delays: Grid,
    pub gate: GateSel,
}

impl Default for ContoursSection {
    fn default() -> Self {
        Self {
            energies_kt: Grid::Log {
                from: 100.0,
                to: 1e5,
                per_decade: 10,
            },
            delays: Grid::Values(vec![0.5e-9, 1e-9, 2e-9, 5e-9]),
            gate: GateSel::Inv,
        }
    }
}

/// A drive point given as barrier height, overdrive and on-time in units
/// of the relaxation time 1/r (t_g = tau / r).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivePoint {
    pub barrier_kt: f64,
    pub i: f64,
    pub tau: f64,
}

pub fn default_drive_points() -> Vec<DrivePoint> {
    [
        (20.0, 3.0, 0.8),
        (20.0, 3.0, 1.0),
        (20.0, 5.0, 0.4),
        (20.0, 5.0, 0.6),
        (40.0, 3.0, 1.0),
        (40.0, 3.0, 1.3),
        (40.0, 5.0, 0.6),
        (40.0, 5.0, 0.8),
    ]
    .into_iter()
    .map(|(barrier_kt, i, tau)| DrivePoint { barrier_kt, i, tau })
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FpSection {
    pub points: Vec<DrivePoint>,
    pub grid_size: usize,
    pub dt: f64,
    pub scheme: TimeScheme,
}

impl Default for FpSection {
    fn default() -> Self {
        Self {
            points: default_drive_points(),
            grid_size: 512,
            dt: 1e-3,
            scheme: TimeScheme::Implicit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlgSection {
    pub points: Vec<DrivePoint>,
    pub trials: u64,
    pub steps_per_gate: usize,
    pub max_step: f64,
    /// Also solve Fokker-Planck at each point and report the z-score.
    pub compare_fp: bool,
}

impl Default for LlgSection {
    fn default() -> Self {
        Self {
            points: default_drive_points(),
            trials: 10_000,
            steps_per_gate: 2000,
            max_step: 0.01,
            compare_fp: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapeSection {
    pub width: usize,
    pub eps_cp_avg: f64,
    pub unit_delay: f64,
    pub trials: u64,
    pub ipdr: IpdrProfile,
    /// MSB/LSB flip-rate ratio the sparsity condition asks for.
    pub ratio_min: f64,
}

impl Default for ShapeSection {
    fn default() -> Self {
        Self {
            width: 15,
            eps_cp_avg: 0.1,
            unit_delay: 1e-9,
            trials: 100_000,
            ipdr: IpdrProfile {
                word: "s".into(),
                msb_bits: 8,
                speedup: 0.8,
                fast_head: 0,
                min_factor: 0.3,
                steps: 4,
            },
            ratio_min: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FuseCheckSection {
    pub l: u32,
    pub p_k: u64,
    /// Correct outputs span [-y_max, y_max].
    pub y_max: i64,
    /// Estimator errors span [-e_max, e_max].
    pub e_max: i64,
    pub etas: Vec<i64>,
}

impl Default for FuseCheckSection {
    fn default() -> Self {
        Self {
            l: 8,
            p_k: 4,
            y_max: 100,
            e_max: 31,
            etas: vec![0, 64, -64, 128, -128],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSection {
    pub styles: Vec<Style>,
    pub eps_grid: Grid,
    pub trials: u64,
    pub unit_delay: f64,
    /// Hold every architecture to this decision delay in seconds.
    pub decision_delay: Option<f64>,
    pub target_p_fa: Option<f64>,
    /// Accuracy collapse: p_TP more than this below the noiseless value.
    pub collapse_drop: f64,
    /// p_TP at which energies are compared; noiseless serial p_TP minus
    /// `collapse_drop` when absent.
    pub accuracy_target: Option<f64>,
    /// CSV of weights and bias; fitted to the data when absent.
    pub model_file: Option<PathBuf>,
    /// CSV of features and labels; synthetic when absent.
    pub data_file: Option<PathBuf>,
    pub synth: SynthConfig,
    pub shannon: ShannonConfig,
    pub nmr: NmrConfig,
}

impl Default for SvmSection {
    fn default() -> Self {
        Self {
            styles: vec![Style::Serial, Style::Shannon, Style::Nmr],
            eps_grid: Grid::Log {
                from: 1e-6,
                to: 1e-1,
                per_decade: 2,
            },
            trials: 4000,
            unit_delay: 1e-9,
            decision_delay: None,
            target_p_fa: Some(0.01),
            collapse_drop: 0.05,
            accuracy_target: None,
            model_file: None,
            data_file: None,
            synth: SynthConfig::default(),
            shannon: ShannonConfig::default(),
            nmr: NmrConfig::default(),
        }
    }
}

/// Parsed configuration plus the keys nothing reads.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub unused_keys: Vec<String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Loaded, HarnessError> {
        let raw: toml::Value =
            toml::from_str(text).map_err(|e| HarnessError::Config(format!("TOML: {e}")))?;
        let config: ExperimentConfig = raw
            .clone()
            .try_into()
            .map_err(|e| HarnessError::Config(format!("{e}")))?;
        let echo =
            toml::Value::try_from(&config).map_err(|e| HarnessError::Config(e.to_string()))?;
        let mut unused_keys = Vec::new();
        unused(&raw, &echo, "", &mut unused_keys);
        Ok(Loaded {
            config,
            unused_keys,
        })
    }

    pub fn load(path: &Path) -> Result<Loaded, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Checks that do not depend on which subcommand runs.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.seed.is_none() {
            return Err(HarnessError::Config(
                "seed is mandatory (set `seed` or pass --seed)".into(),
            ));
        }
        if self.trials == Some(0) {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.output.formats.is_empty() {
            return Err(HarnessError::Config("output.formats is empty".into()));
        }
        for file in [
            &self.device.params_file,
            &self.svm.model_file,
            &self.svm.data_file,
        ]
        .into_iter()
        .flatten()
        {
            if !file.is_file() {
                return Err(HarnessError::Config(format!(
                    "referenced file {} does not exist",
                    file.display()
                )));
            }
        }
        self.contours.energies_kt.points("contours.energies_kt")?;
        self.contours.delays.points("contours.delays")?;
        self.svm.eps_grid.points("svm.eps_grid")?;
        if self.fp.points.is_empty() || self.llg.points.is_empty() {
            return Err(HarnessError::Config(
                "fp.points and llg.points must not be empty".into(),
            ));
        }
        if self.svm.styles.is_empty() {
            return Err(HarnessError::Config("svm.styles is empty".into()));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated config has a seed")
    }

    /// The section's own count unless the top-level override is set.
    pub fn trials_or(&self, section: u64) -> u64 {
        self.trials.unwrap_or(section)
    }

    pub fn device_params(&self) -> Result<DeviceParams, HarnessError> {
        match &self.device.params_file {
            None => Ok(DeviceParams::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
                DeviceParams::from_kv_text(&text)
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
            }
        }
    }
}

/// Keys present in `raw` but absent from the re-serialized config.
fn unused(raw: &toml::Value, echo: &toml::Value, prefix: &str, out: &mut Vec<String>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match (raw, echo) {
        (toml::Value::Table(r), toml::Value::Table(e)) => {
            for (k, v) in r {
                match e.get(k) {
                    Some(ev) => unused(v, ev, &join(k), out),
                    None => out.push(join(k)),
                }
            }
        }
        (toml::Value::Array(r), toml::Value::Array(e)) => {
            for (i, (rv, ev)) in r.iter().zip(e).enumerate() {
                unused(rv, ev, &format!("{prefix}[{i}]"), out);
            }
        }
        _ => {}
    }
}
