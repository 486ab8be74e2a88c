//! Runs the laboratory experiments from flat configs and writes their reports.

pub mod config;
pub mod experiments;
pub mod registry;

use std::fmt::Write as _;
use std::path::Path;

use schatten_core::{LabError, SingularSpectrum, Verdict};
use serde_json::{json, Value};
use thiserror::Error;

pub use config::ExperimentConfig;
pub use experiments::Outcome;

/// Environment variable capping worker threads.
pub const THREADS_VAR: &str = "SCHATTEN_LAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{experiment}: {source}")]
    Lab {
        experiment: String,
        #[source]
        source: LabError,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lab { .. } | CliError::Io { .. } => 1,
        }
    }
}

pub fn exit_code(status: Verdict) -> i32 {
    match status {
        Verdict::Consistent => 0,
        Verdict::Violated => 3,
        Verdict::Inconclusive => 4,
    }
}

/// Rendered output files of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub status: Verdict,
    pub report_json: String,
    pub spectrum_csv: String,
    pub plotdata_csv: String,
}

/// Worker threads allowed by the environment (at least one).
pub fn thread_limit() -> Result<usize, CliError> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR}=`{v}` is not a positive integer"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs the configured experiment and renders its outputs without touching the file system.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let entry = registry::find(&config.experiment)?;
    let params = experiments::Params::new(&config.params);
    let outcome = (entry.run)(&params, config.seed).map_err(|e| match e {
        CliError::Lab {
            source: LabError::Parameter(msg),
            ..
        } => CliError::Usage(msg),
        other => other,
    })?;
    let report = json!({
        "experiment": entry.name,
        "citation": entry.citation,
        "seed": config.seed,
        "parameters": config.params,
        "status": outcome.status,
        "result": outcome.result,
    });
    let mut report_json = serde_json::to_string_pretty(&report).expect("report values serialize");
    report_json.push('\n');
    Ok(RunOutput {
        status: outcome.status,
        report_json,
        spectrum_csv: spectrum_csv(outcome.spectrum.as_ref()),
        plotdata_csv: plotdata_csv(outcome.spectrum.as_ref()),
    })
}

fn spectrum_csv(s: Option<&SingularSpectrum>) -> String {
    let mut out = String::from("k,s_k\n");
    for (i, v) in s.map(|s| s.values()).unwrap_or_default().iter().enumerate() {
        let _ = writeln!(out, "{},{v}", i + 1);
    }
    out
}

fn plotdata_csv(s: Option<&SingularSpectrum>) -> String {
    let mut out = String::from("log_k,log_s_k\n");
    for (x, y) in s.map(|s| s.log_log_pairs()).unwrap_or_default() {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

/// Writes `report.json`, `spectrum.csv` and `plotdata.csv` into `dir`.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for (name, text) in [
        ("report.json", &out.report_json),
        ("spectrum.csv", &out.spectrum_csv),
        ("plotdata.csv", &out.plotdata_csv),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io(&path))?;
    }
    Ok(())
}

/// Helper for experiment results that are plain JSON objects.
pub(crate) fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result values serialize")
}
