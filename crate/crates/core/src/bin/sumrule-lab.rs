use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use sumrule_lab::cli::{emit_report, run_job, JobConfig};
use sumrule_lab::{par, Error};

#[derive(Parser)]
#[command(name = "sumrule-lab", version, about = "Scattering data and sum-rule checks from a JSON job file")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task in a job config and write the reports.
    Run {
        config: PathBuf,
        /// Output directory (overrides output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cut-off momentum; also the top of the phase grid.
        #[arg(long = "k-max")]
        k_max: Option<f64>,
        /// ODE relative tolerance.
        #[arg(long = "ode-tol")]
        ode_tol: Option<f64>,
    },
}

const CONFIG_ERROR: u8 = 2;

fn run(config: PathBuf, out: Option<PathBuf>, k_max: Option<f64>, ode_tol: Option<f64>) -> anyhow::Result<u8> {
    let mut job = JobConfig::load(&config)?;
    job.apply_overrides(out, k_max, ode_tol);
    let report = run_job(&job)?;
    let dir = job.output_dir.clone().unwrap_or_else(|| PathBuf::from("sumrule-out"));
    let files = emit_report(&job, &report, &dir).with_context(|| format!("writing reports to {}", dir.display()))?;
    print!("{}", std::fs::read_to_string(dir.join("summary.txt"))?);
    eprintln!("wrote {} file(s) to {}", files.len(), dir.display());
    Ok(report.exit_code() as u8)
}

fn main() -> ExitCode {
    par::init_threads(None);
    let Command::Run { config, out, k_max, ode_tol } = Args::parse().command;
    match run(config, out, k_max, ode_tol) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let config_error = matches!(e.downcast_ref::<Error>(), Some(Error::Config(_)));
            ExitCode::from(if config_error { CONFIG_ERROR } else { 1 })
        }
    }
}
