//! `antenna`: batch front end for the antenna-core solvers.
//!
//! Every subcommand reads one JSON config (or a named preset), writes one
//! CSV or JSON table and, when writing to a file, a sibling
//! `<output>.manifest.json`. Exit status is 0 on success, 2 for bad input
//! or an unwritable output, 3 when a solver fails.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use antenna_core::config::{load_config, Config, ConfigError, OutputFormat};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use output::{canonical, manifest_path, sha256_hex, write_atomic, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("solver failed: {0}")]
    Solver(antenna_core::Error),
}

impl From<antenna_core::Error> for CliError {
    fn from(e: antenna_core::Error) -> Self {
        match e {
            // bad parameter values are an input problem, not a solver failure
            antenna_core::Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Solver(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "antenna", version, about = "Spectra and nonlinear response of cantilever-array beam resonators")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file (SI units).
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a built-in device instead of a config file.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Grid {
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Beam mode shapes: n, beta, u, phi.
    Modes {
        #[arg(long)]
        n_max: Option<usize>,
        /// Samples of u on [0, 1].
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Cantilever kernel T(gamma), or the shape chi(v) with --shape.
    Kernel {
        #[command(flatten)]
        grid: Grid,
        /// Tabulate chi(v) on [0, 1] for this gamma instead.
        #[arg(long, value_name = "GAMMA")]
        shape: Option<f64>,
    },
    /// Continuum spectrum of a uniform or alternating array.
    Spectrum {
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Roots gamma_{n,k} while one parameter varies.
    Sweep {
        /// lambda, nu, N or epsilon.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Galerkin spectrum for any profile, including tabulated and discrete.
    Galerkin {
        #[arg(long)]
        basis_size: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Two-mode nonlinear model.
    #[command(subcommand)]
    Nonlinear(Nonlinear),
}

#[derive(Debug, Subcommand)]
pub enum Nonlinear {
    /// Overlap integrals and effective constants as JSON.
    Coeffs,
    /// Coupled steady states over a detuning grid.
    Response {
        /// Detuning sweep of the fundamental (rad/s).
        #[command(flatten)]
        sigma1: Grid,
        /// Fixed detuning of the collective mode (rad/s).
        #[arg(long, allow_negative_numbers = true)]
        sigma2: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Modes { .. } => "modes",
            Command::Kernel { .. } => "kernel",
            Command::Spectrum { .. } => "spectrum",
            Command::Sweep { .. } => "sweep",
            Command::Galerkin { .. } => "galerkin",
            Command::Nonlinear(Nonlinear::Coeffs) => "nonlinear coeffs",
            Command::Nonlinear(Nonlinear::Response { .. }) => "nonlinear response",
        }
    }
}

fn load(common: &Common) -> Result<Config, CliError> {
    let mut config = match (&common.config, &common.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => Config::from_preset(name)?,
        (None, None) => return Err(CliError::Usage("no configuration: pass --config PATH or --preset NAME".into())),
    };
    if let Some(f) = common.format {
        config.output.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(p) = &common.output {
        config.output.path = Some(p.clone());
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let mut config = load(&cli.common)?;
    commands::apply_overrides(&mut config, &cli.command)?;
    // where the result goes is not part of what was computed
    let mut hashed = config.clone();
    hashed.output.path = None;
    let config_sha256 = sha256_hex(hashed.to_json().as_bytes());
    let out = commands::dispatch(&config, &cli.command)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }

    let body = out.body.as_bytes();
    let path = config.output.path.clone();
    let manifest = RunManifest {
        tool: "antenna",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name().into(),
        config_sha256,
        output: path.clone(),
        output_sha256: sha256_hex(body),
        format: match out.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        },
        rows: out.rows,
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings: out.warnings,
        provenance: config.provenance(),
    };
    match &path {
        Some(p) => {
            write_atomic(p, body)?;
            write_atomic(&manifest_path(p), canonical(&manifest).as_bytes())?;
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Output { path: "stdout".into(), message: e.to_string() })?;
        }
    }
    eprintln!("{}", manifest.summary().lines().filter(|l| !l.starts_with("warning:")).collect::<Vec<_>>().join("\n"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
