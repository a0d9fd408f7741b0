use std::path::PathBuf;
use std::process::ExitCode;

use asl_sisc::harness::{run, Command, ExperimentConfig, Format, HarnessError, Manifest};
use clap::Parser;

/// Experiment runner for the spintronic stochastic-logic toolkit.
///
/// Exit status: 0 on success, 1 for configuration errors, 2 for failures
/// during the run.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML config, or a manifest.json from an earlier run to repeat it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides every trial count in the config.
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (replaces the configured list).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn load(cli: &Cli) -> Result<(ExperimentConfig, Vec<String>), HarnessError> {
    let (mut config, unused) = match &cli.config {
        None => (ExperimentConfig::default(), Vec::new()),
        Some(path) if path.extension().is_some_and(|e| e == "json") => {
            (Manifest::read(path)?.config, Vec::new())
        }
        Some(path) => {
            let loaded = ExperimentConfig::load(path)?;
            (loaded.config, loaded.unused_keys)
        }
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if cli.trials.is_some() {
        config.trials = cli.trials;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    if let Some(f) = cli.format {
        config.output.formats = vec![f];
    }
    let warnings = unused
        .into_iter()
        .map(|k| format!("unused config key `{k}`"))
        .collect();
    Ok((config, warnings))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|(config, warnings)| {
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        run(cli.command, &config, &warnings)
    });
    match result {
        Ok(report) => {
            for note in &report.manifest.notes {
                eprintln!("note: {note}");
            }
            for f in &report.files {
                println!("{}", f.display());
            }
            println!("{}", report.manifest_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
