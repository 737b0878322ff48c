//! Command-line driver: loads an experiment config, runs one command on a
//! dedicated thread pool and writes the CSV/PGM outputs, the resolved
//! config and a run report.
//!
//! Exit codes: 0 success, 1 failed checks, 2 configuration or parameter
//! errors, 3 numerical or I/O failures.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

pub use commands::{execute, Check, CliError, Command, Outcome};
pub use config::{ConfigError, ExperimentConfig};

#[derive(Debug, Clone, Parser)]
#[command(name = "qrlab", version, about = "Normal, Bloch and Yosida quasiregular map experiments")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON experiment config; optional for `acceptance`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for one per core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub wall_time_s: f64,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub summary: std::collections::BTreeMap<String, serde_json::Value>,
}

/// Config with the command-line overrides applied.
pub fn resolve_config(args: &Args) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match (&args.config, args.command) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, Command::Acceptance) => ExperimentConfig::bare(),
        (None, _) => return config::invalid("missing --config"),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn write_outputs(dir: &Path, cfg: &ExperimentConfig, outcome: &Outcome) -> std::io::Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let echo = serde_json::to_string_pretty(cfg).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("config.json"), echo + "\n")?;
    written.push("config.json".to_string());
    for t in &outcome.tables {
        output::write_csv(t, &dir.join(t.file_name()))?;
        written.push(t.file_name());
    }
    if let Some((name, bytes)) = &outcome.pgm {
        std::fs::write(dir.join(name), bytes)?;
        written.push(name.clone());
    }
    Ok(written)
}

fn emit_report(report: &RunReport, dir: Option<&Path>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
    match dir {
        Some(d) => std::fs::write(d.join("report.json"), text + "\n"),
        None => {
            eprintln!("{text}");
            Ok(())
        }
    }
}

/// Runs one command and returns the process exit code.
pub fn run(args: &Args) -> i32 {
    let start = Instant::now();
    let mut report = RunReport {
        command: args.command,
        wall_time_s: 0.0,
        seed: args.seed.unwrap_or(0),
        outputs: Vec::new(),
        checks: Vec::new(),
        exit_code: 0,
        error: None,
        summary: Default::default(),
    };
    let fail = |mut report: RunReport, e: CliError| {
        eprintln!("error: {e}");
        report.exit_code = e.exit_code();
        report.error = Some(e.to_string());
        report.wall_time_s = start.elapsed().as_secs_f64();
        let _ = emit_report(&report, None);
        report.exit_code
    };

    let cfg = match resolve_config(args) {
        Ok(c) => c,
        Err(e) => return fail(report, e.into()),
    };
    report.seed = cfg.seed;
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.threads).build() {
        Ok(p) => p,
        Err(e) => return fail(report, CliError::Io(std::io::Error::other(e))),
    };
    let outcome = match pool.install(|| execute(args.command, &cfg)) {
        Ok(o) => o,
        Err(e) => return fail(report, e),
    };
    for line in &outcome.stdout {
        println!("{line}");
    }
    if let Some(dir) = &cfg.out {
        match write_outputs(dir, &cfg, &outcome) {
            Ok(w) => report.outputs = w,
            Err(e) => return fail(report, e.into()),
        }
    }
    report.exit_code = if outcome.all_checks_pass() { 0 } else { 1 };
    report.checks = outcome.checks;
    report.summary = outcome.summary;
    report.wall_time_s = start.elapsed().as_secs_f64();
    if let Err(e) = emit_report(&report, cfg.out.as_deref()) {
        return fail(report, e.into());
    }
    report.exit_code
}
