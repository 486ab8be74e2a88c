use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use schatten_cli::config::{parse_overrides, ExperimentConfig};
use schatten_cli::{execute, exit_code, registry, thread_limit, write_outputs, CliError};

/// Run a Schatten-class experiment and write report.json, spectrum.csv and plotdata.csv.
///
/// Experiment parameters are given as --key=value; `schatten-lab list` shows
/// the available experiments.
#[derive(Debug, Parser)]
#[command(name = "schatten-lab", version)]
struct Cli {
    /// Experiment name, or `list`.
    experiment: Option<String>,
    /// Flat key = value config file; command-line parameters override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

const RESERVED: &[&str] = &["config", "out", "seed", "help", "version"];

/// Splits `--key=value` experiment parameters from the arguments clap handles.
fn split_args(args: Vec<String>) -> (Vec<String>, Vec<String>) {
    let mut clap_args = Vec::new();
    let mut params = Vec::new();
    for (i, arg) in args.into_iter().enumerate() {
        let param = i > 0
            && arg
                .strip_prefix("--")
                .and_then(|body| body.split_once('='))
                .is_some_and(|(key, _)| !RESERVED.contains(&key));
        if param {
            params.push(arg);
        } else {
            clap_args.push(arg);
        }
    }
    (clap_args, params)
}

fn run() -> Result<i32, CliError> {
    let (clap_args, params) = split_args(std::env::args().collect());
    let cli = match Cli::try_parse_from(clap_args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return Ok(code);
        }
    };
    thread_limit()?;
    if cli.experiment.as_deref() == Some("list") {
        print!("{}", registry::listing());
        return Ok(0);
    }
    if cli.experiment.is_none() && cli.config.is_none() {
        return Err(CliError::Usage(
            "name an experiment or pass --config (try `schatten-lab list`)".into(),
        ));
    }
    let overrides = parse_overrides(&params)?;
    let config = ExperimentConfig::resolve(
        cli.experiment.as_deref(),
        cli.config.as_deref(),
        overrides,
        cli.seed,
        cli.out,
    )?;
    let output = execute(&config)?;
    write_outputs(&config.output_dir, &output)?;
    let status = serde_json::to_value(output.status).expect("status serializes");
    println!(
        "{}: {} ({})",
        config.experiment,
        status.as_str().unwrap_or("?"),
        config.output_dir.join("report.json").display()
    );
    Ok(exit_code(output.status))
}

fn main() -> ExitCode {
    let code = run().unwrap_or_else(|e| {
        eprintln!("schatten-lab: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
