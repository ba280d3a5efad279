//! Command-line front end: system files in, validation and joining reports out.

pub mod commands;
pub mod files;
pub mod names;
pub mod output;
pub mod suite;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ncjoin_core::numerics::DEFAULT_TOL;
use ncjoin_core::ValidationReport;
use thiserror::Error;

pub use output::Report;

pub const TOL_ENV: &str = "NCJOIN_TOL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid system")]
    Invalid(ValidationReport),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "ncjoin", version, about = "Joinings of finite-dimensional W*-dynamical systems")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a system file.
    Validate { path: PathBuf },
    /// Report the fixed point algebra and the ergodicity verdict.
    Ergodic { path: PathBuf },
    /// Build the mirror identity system and joining from the fixed point factor.
    Mirror {
        path: PathBuf,
        /// Directory to write system_b.json and joining.json into.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Search the joinings of two systems.
    JoinSearch {
        a: PathBuf,
        b: PathBuf,
        /// Pin Re ω(a ⊗ b) = t. Repeatable.
        #[arg(long, num_args = 3, value_names = ["A", "B", "T"], allow_negative_numbers = true)]
        pin: Vec<String>,
        /// Feasible range of Re ω(a ⊗ b) around the product value. Repeatable.
        #[arg(long = "max-dev", num_args = 2, value_names = ["A", "B"])]
        max_dev: Vec<String>,
        /// Grid steps per side before bisection.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long, default_value_t = ncjoin_core::solver::SEARCH_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = ncjoin_core::solver::MAX_ITER)]
        max_iter: usize,
        /// Write the joining found under --pin to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Check a joining file against two systems.
    Verify {
        a: PathBuf,
        b: PathBuf,
        joining: PathBuf,
        /// Invariance versus P_ω U_g = V_g P_ω.
        #[arg(long)]
        prop24: bool,
        /// Fixed space of P_ω for ergodic A and identity B.
        #[arg(long)]
        prop36: bool,
        /// Product test and averaging profile for ergodic A and identity B.
        #[arg(long)]
        thm37: bool,
        #[arg(long, default_value_t = 32)]
        horizon: usize,
    },
    /// Run every fixture under a directory.
    Suite {
        #[arg(long, default_value = "fixtures")]
        fixtures: PathBuf,
    },
}

/// Tolerance and the directory relative paths are resolved against.
#[derive(Clone, Debug)]
pub struct Context {
    pub tol: f64,
    pub base: PathBuf,
}

impl Context {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            base: PathBuf::new(),
        }
    }

    /// Default tolerance, overridden by `NCJOIN_TOL`.
    pub fn from_env() -> Result<Self, CliError> {
        let tol = match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|t| t.is_finite() && *t > 0.0)
                .ok_or_else(|| CliError::Usage(format!("{TOL_ENV}={s:?} is not a positive number")))?,
            Err(_) => DEFAULT_TOL,
        };
        Ok(Self::new(tol))
    }

    pub fn with_base(&self, base: &Path) -> Self {
        Self {
            tol: self.tol,
            base: base.to_path_buf(),
        }
    }

    pub fn path(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }
}

pub struct Outcome {
    pub report: Report,
    pub exit: i32,
}

impl Outcome {
    pub fn from_report(report: Report) -> Self {
        let exit = if report.passed { 0 } else { 1 };
        Self { report, exit }
    }

    pub fn from_error(command: &str, args: &[String], err: CliError) -> Self {
        let mut report = Report::new(command, args);
        match err {
            CliError::Invalid(checks) => {
                report.add_checks(checks);
                report.passed = false;
                Self { report, exit: 1 }
            }
            other => {
                report.passed = false;
                report.artifact("error", other.to_string());
                Self { report, exit: 2 }
            }
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Validate { .. } => "validate",
        Command::Ergodic { .. } => "ergodic",
        Command::Mirror { .. } => "mirror",
        Command::JoinSearch { .. } => "join-search",
        Command::Verify { .. } => "verify",
        Command::Suite { .. } => "suite",
    }
}

/// Runs a parsed command. `args` is echoed into the report.
pub fn dispatch(cmd: &Command, args: &[String], ctx: &Context) -> Outcome {
    let name = command_name(cmd);
    let args = match args.first() {
        Some(first) if first == name => &args[1..],
        _ => args,
    };
    let result = match cmd {
        Command::Validate { path } => commands::validate(&ctx.path(path), args, ctx),
        Command::Ergodic { path } => commands::ergodic(&ctx.path(path), args, ctx),
        Command::Mirror { path, emit } => commands::mirror(&ctx.path(path), emit.as_deref(), args, ctx),
        Command::JoinSearch {
            a,
            b,
            pin,
            max_dev,
            grid,
            tol,
            seed,
            max_iter,
            emit,
        } => {
            let opts = ncjoin_core::solver::SearchOptions {
                seed: *seed,
                max_iter: *max_iter,
                tol: *tol,
            };
            let search = commands::SearchArgs {
                pins: pin.chunks(3).map(|c| (c[0].clone(), c[1].clone(), c[2].clone())).collect(),
                probes: max_dev.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect(),
                grid: *grid,
                opts,
                emit: emit.clone(),
            };
            commands::join_search(&ctx.path(a), &ctx.path(b), &search, args, ctx)
        }
        Command::Verify {
            a,
            b,
            joining,
            prop24,
            prop36,
            thm37,
            horizon,
        } => {
            let flags = commands::VerifyFlags {
                prop24: *prop24,
                prop36: *prop36,
                thm37: *thm37,
                horizon: *horizon,
            };
            commands::verify(&ctx.path(a), &ctx.path(b), &ctx.path(joining), &flags, args, ctx)
        }
        Command::Suite { fixtures } => Ok(suite::run_suite(&ctx.path(fixtures), args, ctx)),
    };
    match result {
        Ok(report) => Outcome::from_report(report),
        Err(e) => Outcome::from_error(name, args, e),
    }
}

/// Parses `args` (without the program name) and runs them.
pub fn execute(args: &[String], ctx: &Context) -> Outcome {
    let argv = std::iter::once("ncjoin".to_string()).chain(args.iter().cloned());
    match Cli::try_parse_from(argv) {
        Ok(cli) => dispatch(&cli.command, &strip_format(args), ctx),
        Err(e) => Outcome::from_error("usage", args, CliError::Usage(e.to_string())),
    }
}

/// Arguments without `--format`, so both output forms echo the same command.
pub fn strip_format(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--format" {
            skip = true;
            continue;
        }
        if a.starts_with("--format=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
    }
}
