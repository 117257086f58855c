//! `kinfp`: runs the kinetic Fokker–Planck toolkit from JSON configs.

mod commands;
mod config;
mod error;
mod expr;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use config::{read_config, resolve_common, Overrides};
use error::{classify, invalid, render, Kind};
use report::Output;

#[derive(Debug, Parser)]
#[command(name = "kinfp", version, about = "Kinetic Fokker-Planck numerics: checks, solvers and probes")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON config file for the subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Phase-space dimension (1 or 2).
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Leave the creation time out of reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Output directory; beats KINFP_OUT and the config file.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_name = "LEVEL")]
    log_level: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mass, semigroup, indicator scaling and residual checks of the Green function.
    GreenCheck,
    /// Kinetic Hölder seminorm of a sampled field.
    Holder,
    /// Linear kinetic Fokker-Planck solve.
    SolveLinear,
    /// Nonlinear toy model run with diagnostics.
    SolveToy,
    /// Picard iteration for the toy model on a short interval.
    Picard,
    /// Schauder ratio on manufactured solutions across grid levels.
    SchauderProbe(SchauderArgs),
    /// Gradient bound ratio on a seeded batch of sources.
    GradientProbe(GradientArgs),
    /// Decay of Taylor remainders against kinetic weights.
    DecayProbe(DecayArgs),
    /// Interpolation inequality constants of a sampled field.
    InterpCheck,
}

#[derive(Debug, Args)]
struct SchauderArgs {
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
}

#[derive(Debug, Args)]
struct GradientArgs {
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    per_axis: Option<usize>,
}

#[derive(Debug, Args)]
struct DecayArgs {
    #[arg(long)]
    per_axis: Option<usize>,
}

fn push<T: Into<Value>>(keys: &mut Vec<(&'static str, Value)>, name: &'static str, v: Option<T>) {
    if let Some(v) = v {
        keys.push((name, v.into()));
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GreenCheck => "green-check",
            Command::Holder => "holder",
            Command::SolveLinear => "solve-linear",
            Command::SolveToy => "solve-toy",
            Command::Picard => "picard",
            Command::SchauderProbe(_) => "schauder-probe",
            Command::GradientProbe(_) => "gradient-probe",
            Command::DecayProbe(_) => "decay-probe",
            Command::InterpCheck => "interp-check",
        }
    }

    fn flag_keys(&self) -> Vec<(&'static str, Value)> {
        let mut keys = Vec::new();
        match self {
            Command::SchauderProbe(a) => {
                push(&mut keys, "cases", a.cases);
                push(&mut keys, "alpha", a.alpha);
                push(&mut keys, "levels", a.levels);
            }
            Command::GradientProbe(a) => {
                push(&mut keys, "cases", a.cases);
                push(&mut keys, "per_axis", a.per_axis);
            }
            Command::DecayProbe(a) => push(&mut keys, "per_axis", a.per_axis),
            _ => {}
        }
        keys
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut map = read_config(cli.common.config.as_deref())?;
    let overrides = Overrides {
        dim: cli.common.dim,
        seed: cli.common.seed,
        out_dir: cli.common.out_dir.clone(),
        log_level: cli.common.log_level.clone(),
        keys: cli.command.flag_keys(),
    };
    let env_out = std::env::var_os("KINFP_OUT").filter(|s| !s.is_empty()).map(PathBuf::from);
    let common = resolve_common(&mut map, &overrides, env_out)?;

    env_logger::Builder::new()
        .parse_filters(&common.log_level)
        .target(env_logger::Target::Stderr)
        .init();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(invalid("threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }

    let out = Output::new(cli.command.name(), common, !cli.common.no_timestamp);
    use commands::*;
    match cli.command {
        Command::GreenCheck => green::run(out, map),
        Command::Holder => holder::run_holder(out, map),
        Command::SolveLinear => linear::run(out, map),
        Command::SolveToy => toy::run(out, map),
        Command::Picard => toy::run_picard(out, map),
        Command::SchauderProbe(_) => probes::run_schauder(out, map),
        Command::GradientProbe(_) => probes::run_gradient(out, map),
        Command::DecayProbe(_) => probes::run_decay(out, map),
        Command::InterpCheck => holder::run_interp(out, map),
    }
}

fn clap_failure(e: clap::Error) -> ExitCode {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        _ => {}
    }
    let argument = match e.get(ContextKind::InvalidArg) {
        Some(ContextValue::String(s)) => Some(s.clone()),
        _ => None,
    };
    let rendered = e.render().to_string();
    let message = rendered
        .lines()
        .next()
        .unwrap_or("invalid arguments")
        .trim_start_matches("error: ")
        .to_string();
    eprintln!("{}", render(Kind::Validation, &message, argument.as_deref()));
    ExitCode::from(Kind::Validation.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => return clap_failure(e),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = classify(&e);
            eprintln!("{}", render(kind, &format!("{e:#}"), None));
            ExitCode::from(kind.exit_code() as u8)
        }
    }
}
