#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ssrr_core::certificate::{certify_candidate, CertifyOptions, RootChoice, DEFAULT_EPSILON, DEFAULT_GRID};
use ssrr_core::diagnostic::{minimum_report, GridField};
use ssrr_core::polar::{polar_trace, solve_deflection};
use ssrr_core::reflection::{solve_reflection_on, sweep_transitions, Scenario, DEFAULT_POLAR_SAMPLES};
use ssrr_core::Error;

mod config;
mod svg;

use config::{BetaSpec, GridSpec, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Physics(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Physics(m) | CliError::Io(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::GammaOutOfRange(_)
            | Error::NonPositiveDensity(_)
            | Error::InvalidInput(_)
            | Error::TooFewSamples { .. }
            | Error::Parse { .. } => CliError::Config(e.to_string()),
            _ => CliError::Physics(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ssrr",
    version,
    about = "Shock polars, regular reflection and strong-type certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the shock polar at `xi_r`; CSV, plus SVG with --svg.
    Polar(Common),
    /// Reflected shocks at `xi_r` for the wall in the config; JSON list.
    Reflect(Common),
    /// Non-existence certificate for the strong-type reflection; JSON.
    Certify(Common),
    /// Root counts over a (deflection, Mach) grid and the transition loci; CSV.
    Sweep(Common),
    /// Minimum-principle checks on a sampled potential; JSON verdict.
    Diagnose(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG plot of the polar (polar only).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Polar samples per side.
    #[arg(long)]
    samples: Option<usize>,
    /// Subsolution amplitude.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Subsolution exponent, `auto` or a value in (0, 1).
    #[arg(long)]
    beta: Option<BetaSpec>,
    /// Sample grid `NxM`: radial x angular for certify, tau x Mach for sweep.
    #[arg(long)]
    grid: Option<GridSpec>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Loci CSV output (sweep only).
    #[arg(long)]
    loci: Option<PathBuf>,
    /// SSRR-FIELD input (diagnose only).
    #[arg(long)]
    field: Option<PathBuf>,
    /// Root to certify: `strong` or `weak`.
    #[arg(long, value_parser = parse_root)]
    root: Option<RootChoice>,
}

fn parse_root(s: &str) -> Result<RootChoice, String> {
    match s {
        "strong" => Ok(RootChoice::Strong),
        "weak" => Ok(RootChoice::Weak),
        _ => Err(format!("expected `strong` or `weak`, got {s:?}")),
    }
}

impl Common {
    fn config(&self) -> Result<RunConfig, CliError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("--config is required".into()))?;
        RunConfig::load(path)
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s.into_bytes()
}

fn cmd_polar(a: &Common) -> Result<(), CliError> {
    let cfg = a.config()?;
    let up = cfg.reflected_upstream()?;
    let xi = cfg.xi_r()?;
    let samples = a.samples.or(cfg.samples).unwrap_or(DEFAULT_POLAR_SAMPLES);
    let polar = polar_trace(&up, xi, samples)?;
    let mut buf = Vec::new();
    polar.write_csv(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    write_output(a.out.as_deref(), &buf)?;
    if let Some(path) = &a.svg {
        let wall = cfg.wall_dir()?;
        let roots = match wall {
            Some(w) => solve_deflection(&polar, up.z(xi).angle_to(w))?,
            None => Vec::new(),
        };
        write_output(Some(path), svg::polar_svg(&polar, &roots, wall).as_bytes())?;
    }
    Ok(())
}

fn cmd_reflect(a: &Common) -> Result<(), CliError> {
    let cfg = a.config()?;
    let rc = cfg.reflection()?;
    let samples = a.samples.or(cfg.samples).unwrap_or(DEFAULT_POLAR_SAMPLES);
    let polar = polar_trace(&rc.upstream, rc.xi_r, samples)?;
    let sols = solve_reflection_on(&rc, &polar)?;
    write_output(a.out.as_deref(), &json_line(&sols))
}

fn cmd_certify(a: &Common) -> Result<(), CliError> {
    let cfg = a.config()?;
    let rc = cfg.reflection()?;
    let GridSpec(n_r, n_phi) = a.grid.or(cfg.grid).unwrap_or(GridSpec(DEFAULT_GRID, DEFAULT_GRID));
    let beta = match a.beta.or(cfg.beta).unwrap_or(BetaSpec::Auto) {
        BetaSpec::Auto => None,
        BetaSpec::Value(b) => Some(b),
    };
    let opts = CertifyOptions {
        root: a.root.or(cfg.root).unwrap_or_default(),
        epsilon: a.epsilon.or(cfg.epsilon).unwrap_or(DEFAULT_EPSILON),
        beta,
        n_r,
        n_phi,
    };
    let cert = certify_candidate(&rc, &opts)?;
    write_output(a.out.as_deref(), &json_line(&cert))
}

fn cmd_sweep(a: &Common) -> Result<(), CliError> {
    let cfg = a.config()?;
    let grid = cfg.sweep_grid(a.grid)?;
    let table = sweep_transitions(cfg.scenario.unwrap_or(Scenario::ClassicalRr), cfg.gas()?.gamma(), &grid)?;
    let mut buf = Vec::new();
    table
        .write_sweep_csv(&mut buf)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_output(a.out.as_deref(), &buf)?;
    let loci_path = a.loci.clone().or_else(|| {
        a.out.as_ref().map(|p| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            p.with_file_name(format!("{stem}_loci.csv"))
        })
    });
    if let Some(p) = loci_path {
        let mut buf = Vec::new();
        table
            .write_loci_csv(&mut buf)
            .map_err(|e| CliError::Io(e.to_string()))?;
        write_output(Some(&p), &buf)?;
    }
    Ok(())
}

fn cmd_diagnose(a: &Common) -> Result<(), CliError> {
    let path = match &a.field {
        Some(p) => p.clone(),
        None => a
            .config()?
            .field
            .ok_or_else(|| CliError::Config("field: pass --field or set it in the config".into()))?,
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let field = GridField::from_text(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    write_output(a.out.as_deref(), &json_line(&minimum_report(&field)))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (Command::Polar(a) | Command::Reflect(a) | Command::Certify(a) | Command::Sweep(a) | Command::Diagnose(a)) =
        &cli.command;
    if let Some(n) = a.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    match &cli.command {
        Command::Polar(a) => cmd_polar(a),
        Command::Reflect(a) => cmd_reflect(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Diagnose(a) => cmd_diagnose(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
