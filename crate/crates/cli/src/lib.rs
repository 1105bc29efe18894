//! Command-line front end for hyperwalk experiments.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, failed spectral check),
//! 2 usage or parameter error, 3 integrator abort.

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod run;
pub mod spec;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperwalk_core::{verify_perturbative_spectrum, WalkParams};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::figures::FigureArgs;
use crate::output::{resolve_output, sidecar_path, write_json, Table};
use crate::run::{execute, network_report, RunOutput};
use crate::spec::{Model, RunSpec, WalkArgs};
use crate::sweep::{GroupReport, SweepArgs};

#[derive(Parser, Debug)]
#[command(
    name = "hyperwalk",
    version,
    about = "Decoherent quantum walks on the hypercube"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evolve one model and write its time series
    Run(RunArgs),
    /// Write the data behind one of the four figures
    ReproduceFigure(FigureArgs),
    /// Repeat a run over values of d, lambda or omega
    Sweep(SweepArgs),
    /// Check the perturbative superoperator spectrum and print a JSON report
    Spectrum(SpectrumArgs),
    /// Evolve a qubit network in the single-excitation sector
    Network(NetworkArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// CSV destination (stdout when omitted); a JSON sidecar is written next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long)]
    pub lambda: f64,
    /// JSON destination (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Noise {
    Independent,
    Collective,
}

#[derive(Args, Debug)]
pub struct NetworkArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(long, value_enum, default_value_t = Noise::Independent)]
    pub noise: Noise,
    /// Add the e^{t/T1}-rescaled target population
    #[arg(long)]
    pub rescale: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunSidecar<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    spec: &'a RunSpec,
    columns: &'a [String],
    rows: usize,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct SweepSidecar<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    axis: &'static str,
    groups: &'a [GroupReport],
    columns: &'a [String],
    rows: usize,
}

fn emit_table(table: &Table, out: Option<&PathBuf>) -> CliResult<Option<PathBuf>> {
    match out {
        Some(path) => {
            let path = resolve_output(path);
            table.write_to(&path)?;
            Ok(Some(path))
        }
        None => {
            table.write(std::io::stdout().lock())?;
            Ok(None)
        }
    }
}

fn emit_run(
    command: &str,
    spec: &RunSpec,
    output: &RunOutput,
    out: Option<&PathBuf>,
) -> CliResult<()> {
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = emit_table(&output.table, out)? {
        let sidecar = RunSidecar {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            spec,
            columns: &output.table.columns,
            rows: output.table.rows.len(),
            warnings: &output.warnings,
        };
        write_json(&sidecar_path(&path), &sidecar)?;
    }
    Ok(())
}

fn run_command(args: &RunArgs) -> CliResult<()> {
    let spec = args.walk.resolve()?;
    let output = execute(&spec)?;
    emit_run("run", &spec, &output, args.out.as_ref())
}

fn network_command(args: &NetworkArgs) -> CliResult<()> {
    let model = match args.noise {
        Noise::Independent => Model::NetworkIndependent,
        Noise::Collective => Model::NetworkCollective,
    };
    let mut walk = args.walk.clone();
    match walk.model {
        Some(m) if m != model => {
            return Err(CliError::usage(format!(
                "--model {} conflicts with --noise; omit --model for the network command",
                m.name()
            )))
        }
        _ => walk.model = Some(model),
    }
    let spec = walk.resolve()?;
    let output = network_report(&spec, args.rescale)?;
    emit_run("network", &spec, &output, args.out.as_ref())
}

fn spectrum_command(args: &SpectrumArgs) -> CliResult<()> {
    let params = WalkParams::new(args.d, args.omega, args.lambda)?;
    let report = verify_perturbative_spectrum(&params)?;
    match &args.out {
        Some(path) => write_json(&resolve_output(path), &report)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &report)?;
            writeln!(stdout)?;
        }
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "spectral check failed: max mismatch {:e} exceeds {:e}",
            report.max_mismatch, report.tolerance
        )))
    }
}

fn sweep_command(args: &SweepArgs) -> CliResult<()> {
    let result = sweep::sweep(args)?;
    for group in &result.groups {
        if let Some(err) = &group.error {
            eprintln!("error: {}={}: {err}", args.axis.name(), group.input);
        }
        for w in &group.warnings {
            eprintln!("warning: {}={}: {w}", args.axis.name(), group.input);
        }
    }
    if let Some(table) = &result.table {
        if let Some(path) = emit_table(table, args.out.as_ref())? {
            let sidecar = SweepSidecar {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command: "sweep",
                axis: args.axis.name(),
                groups: &result.groups,
                columns: &table.columns,
                rows: table.rows.len(),
            };
            write_json(&sidecar_path(&path), &sidecar)?;
        }
    }
    match result.failure {
        Some(err) => Err(err),
        None => Ok(()),
    }
}

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run(args) => run_command(args),
        Command::ReproduceFigure(args) => {
            for path in figures::reproduce(args)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Sweep(args) => sweep_command(args),
        Command::Spectrum(args) => spectrum_command(args),
        Command::Network(args) => network_command(args),
    }
}

/// Parses `args` and runs the command, mapping failures to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = match err {
                CliError::Usage(_) => "usage error",
                CliError::Integrator(_) => "integrator abort",
                CliError::Runtime(_) => "error",
            };
            eprintln!("{kind}: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
