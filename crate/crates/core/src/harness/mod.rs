//! Batch experiment runner: a TOML config selects parameters, a subcommand
//! selects the pipeline, and each run leaves data tables plus a manifest
//! that is enough to regenerate them.
//!
//! All randomness comes from the config seed. Each consumer draws from its
//! own substream, [`derive_seed`]`(seed, label)`, so adding a new consumer
//! never shifts the numbers an existing one sees.

mod config;
mod runners;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{
    default_drive_points, ContoursSection, DeviceSection, DrivePoint, ExperimentConfig, Format,
    FpSection, FuseCheckSection, GateSel, Grid, LlgSection, Loaded, Mode, OutputSection,
    ShapeSection, SvmSection,
};
pub use runners::execute;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{module}: {message}")]
    Module {
        module: &'static str,
        message: String,
    },
    #[error("writing {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl HarnessError {
    /// 1 for configuration problems, 2 for everything that fails later.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}

macro_rules! module_error {
    ($($ty:path => $name:literal),* $(,)?) => {$(
        impl From<$ty> for HarnessError {
            fn from(e: $ty) -> Self {
                HarnessError::Module { module: $name, message: e.to_string() }
            }
        }
    )*};
}

module_error! {
    crate::device_model::DeviceError => "device_model",
    crate::netlist::NetlistError => "netlist",
    crate::noisy_sim::SimError => "noisy_sim",
    crate::delay_shaping::ShapeError => "delay_shaping",
    crate::arith_gen::ArithError => "arith_gen",
    crate::sisc::SiscError => "sisc",
    crate::svm_bench::SvmError => "svm_bench",
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// ε over a grid of gate energy and delay.
    Contours,
    /// Fokker-Planck switching error at chosen drive points.
    Fp,
    /// Stochastic LLG Monte Carlo, optionally against Fokker-Planck.
    Llg,
    /// Error PMFs of the ripple-carry adder under uniform, I-PDB and I-PDR delays.
    Shape,
    /// Brute-force check of the fusion rule.
    FuseCheck,
    /// Accuracy and energy sweeps of the classifier architectures.
    Svm,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Contours => "contours",
            Command::Fp => "fp",
            Command::Llg => "llg",
            Command::Shape => "shape",
            Command::FuseCheck => "fuse-check",
            Command::Svm => "svm",
        }
    }
}

/// SplitMix64 finalizer applied to `seed` xor the FNV-1a hash of `label`.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = (seed ^ h).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    /// Shortest round-trip form; scientific outside [1e-4, 1e6).
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if *v == 0.0 || (1e-4..1e6).contains(&v.abs()) => format!("{v}"),
            Cell::Float(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => (*v).into(),
            Cell::Float(v) => {
                serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into)
            }
            Cell::Text(s) => s.clone().into(),
            Cell::Bool(b) => (*b).into(),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// A named result table, written as `<name>.csv` or `<name>.json`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width for table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory write")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(Cell::json))
                    .collect();
                obj.into()
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("tables always serialize") + "\n"
    }
}

/// What a pipeline produced, before anything touches the disk.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    /// Findings worth surfacing next to the data, such as a failed check.
    pub notes: Vec<String>,
}

impl Artifacts {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: Command,
    pub version: String,
    pub seed: u64,
    pub wall_time_s: f64,
    /// The effective configuration, overrides applied.
    pub config: ExperimentConfig,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub files: Vec<PathBuf>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    std::fs::write(path, bytes).map_err(|e| HarnessError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Validate, execute and write every table in each requested format, then
/// `config.toml` (the effective config) and `manifest.json`.
pub fn run(
    command: Command,
    config: &ExperimentConfig,
    warnings: &[String],
) -> Result<RunReport, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let artifacts = execute(command, config)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let dir = &config.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Output {
        path: dir.clone(),
        message: e.to_string(),
    })?;
    let mut files = Vec::new();
    for table in &artifacts.tables {
        for &format in &config.output.formats {
            let path = dir.join(format!("{}.{}", table.name, format.extension()));
            match format {
                Format::Csv => write_file(&path, &table.to_csv())?,
                Format::Json => write_file(&path, table.to_json().as_bytes())?,
            }
            files.push(path);
        }
    }
    let config_path = dir.join("config.toml");
    write_file(&config_path, config.to_toml()?.as_bytes())?;

    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed(),
        wall_time_s,
        config: config.clone(),
        outputs: files
            .iter()
            .map(|p| {
                p.file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned()
            })
            .collect(),
        notes: artifacts.notes,
        warnings: warnings.to_vec(),
    };
    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| HarnessError::Output {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;
    write_file(&manifest_path, (text + "\n").as_bytes())?;
    files.push(config_path);
    Ok(RunReport {
        manifest,
        manifest_path,
        files,
    })
}

/// Repeat the run a manifest describes, writing into `out` instead of the
/// original directory when given.
pub fn rerun(manifest_path: &Path, out: Option<&Path>) -> Result<RunReport, HarnessError> {
    let manifest = Manifest::read(manifest_path)?;
    let mut config = manifest.config;
    if let Some(dir) = out {
        config.output.dir = dir.to_path_buf();
    }
    run(manifest.command, &config, &[])
}
