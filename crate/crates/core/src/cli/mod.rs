//! The `noondiff` command set: experiment descriptors in, curve CSV,
//! plot data and JSON reports out.
//!
//! Exit codes: 0 success, 2 input error (usage, schema, unreadable CSV,
//! degenerate fit), 3 physics guard (Δ < δ, repeated gradients, negative
//! D and the like).

mod commands;
mod descriptor;
mod io;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub use commands::{
    compare, fit_csv, simulate, spectrum, CompareReport, CurveComparison, LScalingCheck, Provenance, RunReport,
    SpectrumStage,
};
pub use descriptor::{
    DiffusionDescriptor, ExperimentDescriptor, FitDescriptor, InitialState, NuclideDescriptor, SequenceKind,
    SweepDescriptor, SystemDescriptor, TimingDescriptor,
};
pub use io::{read_curve_csv, write_curve_csv, write_dat, CsvCurve};

use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PHYSICS: i32 = 3;

/// Whether a curve is computed in closed form or by walker simulation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Analytic,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliErrorKind {
    Input,
    /// No resolvable attenuation; reported as an input error.
    Degenerate,
    Physics,
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: CliErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            kind: CliErrorKind::Input,
            message: message.into(),
        }
    }

    pub fn physics(err: Error) -> Self {
        Self::from(err)
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            CliErrorKind::Input | CliErrorKind::Degenerate => EXIT_INPUT,
            CliErrorKind::Physics => EXIT_PHYSICS,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let kind = match err {
            Error::DegenerateCurve(_) => CliErrorKind::Degenerate,
            _ => CliErrorKind::Physics,
        };
        Self {
            kind,
            message: err.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "noondiff", version, about = "Simulate and fit NOON-state and single-quantum diffusion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the gradient sweep of a descriptor and fit it.
    Simulate(SimulateArgs),
    /// Fit a curve CSV.
    Fit(FitArgs),
    /// Run and compare two descriptors.
    Compare(CompareArgs),
    /// Stick spectrum of the control channel.
    Spectrum(SpectrumArgs),
    /// Stokes-Einstein diffusion constant.
    Stokes(StokesArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    descriptor: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    csv: PathBuf,
    /// Descriptor or run report supplying timing, q_γ and fit settings.
    #[arg(long)]
    descriptor: Option<PathBuf>,
    #[arg(long, conflicts_with = "descriptor")]
    little_delta_s: Option<f64>,
    #[arg(long, conflicts_with = "descriptor")]
    big_delta_s: Option<f64>,
    /// Gradient-weighted order, rad s^-1 T^-1.
    #[arg(long, conflicts_with = "descriptor")]
    q_gamma: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for fit.json; the JSON goes to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    LogLinear,
    NonlinearLs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Exactly two descriptors.
    #[arg(long, num_args = 1, required = true)]
    descriptor: Vec<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    descriptor: PathBuf,
    #[arg(long, value_enum, default_value = "thermal")]
    stage: SpectrumStage,
    /// Directory for spectrum.csv; the CSV goes to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StokesArgs {
    /// Kelvin.
    #[arg(long)]
    temperature: f64,
    /// Pa s.
    #[arg(long)]
    viscosity: f64,
    /// Stokes radius, m.
    #[arg(long)]
    radius: f64,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => commands::cmd_simulate(&a.descriptor, &a.output, a.mode, a.seed),
        Command::Fit(a) => {
            let method = a.method.map(|m| match m {
                MethodArg::LogLinear => crate::estimator::FitMethod::LogLinear,
                MethodArg::NonlinearLs => crate::estimator::FitMethod::NonlinearLs,
            });
            let source = match (a.descriptor, a.little_delta_s, a.big_delta_s, a.q_gamma) {
                (Some(p), ..) => commands::TimingSource::Descriptor(p),
                (None, Some(little_delta), Some(big_delta), Some(q_gamma)) => commands::TimingSource::Flags {
                    little_delta,
                    big_delta,
                    q_gamma,
                },
                _ => {
                    return Err(CliError::input(
                        "fit needs --descriptor or all of --little-delta-s, --big-delta-s and --q-gamma",
                    ))
                }
            };
            commands::cmd_fit(&a.csv, source, method, a.bootstrap, a.seed, a.output.as_deref())
        }
        Command::Compare(a) => {
            if a.descriptor.len() != 2 {
                return Err(CliError::input(format!(
                    "compare takes exactly two --descriptor flags, got {}",
                    a.descriptor.len()
                )));
            }
            commands::cmd_compare(&a.descriptor[0], &a.descriptor[1], a.output.as_deref(), a.mode, a.seed)
        }
        Command::Spectrum(a) => commands::cmd_spectrum(&a.descriptor, a.stage, a.output.as_deref()),
        Command::Stokes(a) => commands::cmd_stokes(a.temperature, a.viscosity, a.radius),
    }
}
