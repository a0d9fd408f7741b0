use std::path::Path;
use std::process::Command as Process;

use asl_sisc::harness::{rerun, run, Command, ExperimentConfig, Format, Grid, HarnessError};

fn config_in(dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        seed: Some(1),
        ..ExperimentConfig::default()
    };
    c.output.dir = dir.to_path_buf();
    c.shape.trials = 20_000;
    c
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].to_string())
        .collect()
}

#[test]
fn config_round_trips_through_toml() {
    let mut c = ExperimentConfig {
        seed: Some(9),
        trials: Some(500),
        ..ExperimentConfig::default()
    };
    c.contours.delays = Grid::Log {
        from: 1e-10,
        to: 1e-8,
        per_decade: 3,
    };
    c.fuse_check.etas = vec![-3, 5];
    c.output.formats = vec![Format::Csv, Format::Json];
    for cfg in [ExperimentConfig::default(), c] {
        let loaded = ExperimentConfig::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(loaded.config, cfg);
        assert!(loaded.unused_keys.is_empty(), "{:?}", loaded.unused_keys);
    }
}

#[test]
fn unknown_keys_are_reported_not_fatal() {
    let loaded =
        ExperimentConfig::parse("seed = 3\nbogus = 1\n[shape]\nwidth = 8\nwidht = 9\n").unwrap();
    assert_eq!(loaded.config.shape.width, 8);
    let keys = loaded.unused_keys.join(" ");
    assert!(keys.contains("bogus") && keys.contains("widht"), "{keys}");
}

#[test]
fn invalid_configs_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let base = config_in(dir.path());
    let mut no_seed = base.clone();
    no_seed.seed = None;
    let mut empty_grid = base.clone();
    empty_grid.svm.eps_grid = Grid::Values(vec![]);
    let mut missing_file = base.clone();
    missing_file.device.params_file = Some(dir.path().join("nope.toml"));
    let mut zero_trials = base.clone();
    zero_trials.trials = Some(0);
    for cfg in [no_seed, empty_grid, missing_file, zero_trials] {
        let err = run(Command::Contours, &cfg, &[]).unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)), "{err}");
        assert_eq!(err.exit_code(), 1);
    }
    assert!(ExperimentConfig::parse("seed = \"one\"").is_err());
}

#[test]
fn shape_runs_repeat_byte_for_byte() {
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    let first = run(Command::Shape, &config_in(a.path()), &[]).unwrap();
    run(Command::Shape, &config_in(b.path()), &[]).unwrap();
    rerun(&first.manifest_path, Some(c.path())).unwrap();
    for name in &first.manifest.outputs {
        let reference = read(&a.path().join(name));
        assert_eq!(reference, read(&b.path().join(name)), "{name}");
        assert_eq!(reference, read(&c.path().join(name)), "{name}");
    }
    let summary = read(&a.path().join("shape_summary.csv"));
    assert_eq!(column(&summary, "variant"), ["uniform", "ipdb", "ipdr"]);
    let mut other = config_in(b.path());
    other.seed = Some(2);
    run(Command::Shape, &other, &[]).unwrap();
    assert_ne!(
        read(&a.path().join("pmf_ipdr.csv")),
        read(&b.path().join("pmf_ipdr.csv"))
    );
}

#[test]
fn contours_fall_with_energy() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config_in(dir.path());
    cfg.output.formats = vec![Format::Json];
    let report = run(Command::Contours, &cfg, &[]).unwrap();
    let rows: Vec<serde_json::Value> =
        serde_json::from_str(&read(&dir.path().join("contours.json"))).unwrap();
    assert!(report.files.iter().any(|f| f.ends_with("contours.json")));
    for delay in [0.5e-9, 5e-9] {
        let eps: Vec<f64> = rows
            .iter()
            .filter(|r| r["delay_s"].as_f64() == Some(delay))
            .map(|r| r["epsilon_iso_k"].as_f64().unwrap())
            .collect();
        assert_eq!(eps.len(), 31);
        assert!(eps.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn fuse_check_finds_no_failures() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(Command::FuseCheck, &config_in(dir.path()), &[]).unwrap();
    let table = read(&dir.path().join("fuse_check.csv"));
    assert!(column(&table, "fraction").iter().all(|f| f == "1"));
    assert_eq!(
        column(&read(&dir.path().join("fuse_failures.csv")), "eta").len(),
        0
    );
    assert_eq!(report.manifest.seed, 1);
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_asl-sisc");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "seed = 4\nextra = true\n[fuse_check]\ny_max = 20\n").unwrap();
    let out = dir.path().join("out");

    let ok = Process::new(bin)
        .args(["fuse-check", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(String::from_utf8_lossy(&ok.stderr).contains("extra"));
    assert!(out.join("manifest.json").exists());

    // Repeating from the manifest reproduces the tables.
    let again = dir.path().join("again");
    let st = Process::new(bin)
        .args(["fuse-check", "--config"])
        .arg(out.join("manifest.json"))
        .arg("--out")
        .arg(&again)
        .output()
        .unwrap();
    assert!(st.status.success());
    assert_eq!(
        read(&out.join("fuse_check.csv")),
        read(&again.join("fuse_check.csv"))
    );

    let no_seed = Process::new(bin)
        .args(["contours", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(no_seed.status.code(), Some(1));

    // A run that reaches the pipeline and fails there: a file as output dir.
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let bad_out = Process::new(bin)
        .args(["contours", "--seed", "1", "--out"])
        .arg(&blocker)
        .output()
        .unwrap();
    assert_eq!(
        bad_out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&bad_out.stderr)
    );
}
