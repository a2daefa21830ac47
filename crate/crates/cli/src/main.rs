use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qgeom_cli::{
    cmd_correlate, cmd_gamma_check, cmd_simulate, cmd_theorem_sweep, to_csv_rows, to_json_string, CorrelateArgs,
    GammaCheckArgs, OutputFormat, SimulateArgs, StateSpec, SweepArgs,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qgeom", version, about = "Correlations of sequential quantum measurements")]
struct Cli {
    /// Output format for the report on stdout.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact two-time correlation E_rho(O1, O2).
    Correlate {
        /// First-measured observable, e.g. "0.5*XZ - YY".
        #[arg(long)]
        o1: String,
        /// Second observable.
        #[arg(long)]
        o2: String,
        /// maximally-mixed | pure:k | random:seed
        #[arg(long, default_value = "maximally-mixed")]
        state: StateSpec,
    },
    /// Decide whether the span of the given observables is a gamma-space.
    /// Exits 0 when it is, 2 when it is not.
    GammaCheck {
        /// Basis element; repeat for each one.
        #[arg(long = "basis", required = true)]
        basis: Vec<String>,
        #[arg(long, default_value_t = 16)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Simulate alternating measurements of r.sigma and s.sigma on one qubit.
    Simulate {
        /// Bloch vector "x,y,z".
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "maximally-mixed")]
        init: StateSpec,
        /// Directory receiving trace.csv and estimate.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the gamma-space decision on random subspaces plus a positive control.
    TheoremSweep {
        #[arg(long)]
        dim_space: usize,
        #[arg(long)]
        matrix_dim: usize,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long, default_value_t = 50)]
        subspaces: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn emit<T: Serialize>(report: &T, format: OutputFormat) -> anyhow::Result<()> {
    let text = match format {
        OutputFormat::Json => to_json_string(report)?,
        OutputFormat::Csv => to_csv_rows(report)?,
    };
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Correlate { o1, o2, state } => {
            emit(&cmd_correlate(&CorrelateArgs { o1, o2, state })?, cli.format)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::GammaCheck { basis, trials, seed } => {
            let report = cmd_gamma_check(&GammaCheckArgs { basis, trials, seed })?;
            emit(&report, cli.format)?;
            Ok(if report.is_gamma { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Simulate { r, s, steps, seed, init, out } => {
            emit(&cmd_simulate(&SimulateArgs { r, s, steps, seed, init, out })?, cli.format)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::TheoremSweep { dim_space, matrix_dim, trials, subspaces, seed } => {
            let report = cmd_theorem_sweep(&SweepArgs { dim_space, matrix_dim, trials, subspaces, seed })?;
            emit(&report, cli.format)?;
            let control_failed = report.positive_control.as_ref().is_some_and(|c| !c.is_gamma);
            Ok(if control_failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
