//! `fbint`: experiment harness for feedback integrators. Runs single cells
//! and step-size sweeps over the benchmark problems, estimates Lipschitz
//! constants from unity-gain probe trajectories, and exposes the property
//! check suites. Records are emitted as CSV; divergence is data, not an
//! error exit.

mod commands;
mod config;
mod csvout;
mod error;
mod exec;
mod methods;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::{
    check_command, effective_configs, estimate_command, flags_to_config, presets_command,
    run_experiments, EstimateOptions,
};
use error::CliError;
use feedback_integrators::problems::ProblemKind;
use feedback_integrators::HessNorm;

#[derive(Parser)]
#[command(
    name = "fbint",
    version,
    about = "Feedback-integrator experiment harness",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one (problem, method, h) cell and emit its CSV record.
    Run(ExperimentArgs),
    /// Run a step-size sweep across methods and emit one record per cell.
    Sweep(ExperimentArgs),
    /// Estimate the Lipschitz constant of grad V from a unity-gain probe run.
    #[command(name = "estimate-lipschitz")]
    EstimateLipschitz(EstimateArgs),
    /// Run the orthogonality / gradient / Hessian property suites.
    Check(CheckArgs),
    /// List the shipped experiment presets.
    Presets,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Problem: rigid_body, kepler or perturbed_kepler.
    #[arg(long)]
    problem: Option<String>,
    /// Method name, optionally with a gain suffix (feedback_euler:unity).
    /// Repeat or comma-separate for sweeps.
    #[arg(long = "method", value_delimiter = ',')]
    methods: Vec<String>,
    /// Default gain for feedback methods: unity, fixed, inverse-hl, adaptive.
    #[arg(long)]
    gain: Option<String>,
    /// Gain value for --gain fixed.
    #[arg(long)]
    alpha: Option<f64>,
    /// Lipschitz constant for --gain inverse-hl (problem default when omitted).
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Adaptive safety factor (> 1).
    #[arg(long)]
    c: Option<f64>,
    /// Adaptive Hessian-norm clip (> 0).
    #[arg(long)]
    hmin: Option<f64>,
    /// Adaptive gain update period in time units.
    #[arg(long = "t-update")]
    t_update: Option<f64>,
    /// Step size; repeat or comma-separate for explicit sweep grids.
    #[arg(long = "h", value_delimiter = ',')]
    h: Vec<f64>,
    /// Log-uniform step-size range LO:HI (with --points-per-decade).
    #[arg(long = "h-range", value_parser = parse_h_range)]
    h_range: Option<(f64, f64)>,
    /// Grid density for --h-range (default 3).
    #[arg(long = "points-per-decade")]
    points_per_decade: Option<u32>,
    /// Integration horizon in time units.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Integration horizon in orbital periods (Kepler only).
    #[arg(long)]
    periods: Option<f64>,
    /// Trajectory storage stride (metrics are never thinned).
    #[arg(long)]
    stride: Option<usize>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed recorded with the experiment (checks are the consumer).
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel cells for sweeps; --jobs 1 gives identical CSV content.
    #[arg(long)]
    jobs: Option<usize>,
    /// Start from a shipped preset (see `fbint presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Config file: one TOML table per experiment; flags override.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the full benchmark horizons and step ranges instead of desk scale.
    #[arg(long = "full-scale")]
    full_scale: bool,
}

#[derive(Args)]
struct EstimateArgs {
    /// Problem: rigid_body, kepler or perturbed_kepler.
    #[arg(long)]
    problem: String,
    /// Probe step size (default 1e-4).
    #[arg(long = "h")]
    h: Option<f64>,
    /// Probe window in time units (default: one period of the problem).
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Hessian norm: frobenius or spectral (both when omitted).
    #[arg(long, value_parser = parse_norm)]
    norm: Option<HessNorm>,
}

#[derive(Args)]
struct CheckArgs {
    /// Problem to check (all three when omitted).
    #[arg(long)]
    problem: Option<String>,
    /// Seed for the random domain states.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn parse_h_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| "expected LO:HI, e.g. 1e-3:1e-1".to_string())?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

fn parse_norm(s: &str) -> Result<HessNorm, String> {
    match s {
        "frobenius" => Ok(HessNorm::Frobenius),
        "spectral" => Ok(HessNorm::Spectral),
        _ => Err("expected 'frobenius' or 'spectral'".to_string()),
    }
}

fn parse_problem(s: &str) -> Result<ProblemKind, CliError> {
    ProblemKind::parse(s).ok_or_else(|| {
        CliError::config(format!(
            "unknown problem '{s}' (expected rigid_body, kepler or perturbed_kepler)"
        ))
    })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => experiment(args, true),
        Command::Sweep(args) => experiment(args, false),
        Command::EstimateLipschitz(args) => {
            let opts = EstimateOptions {
                problem: parse_problem(&args.problem)?,
                h_probe: args.h,
                window: args.t_end,
                norm: args.norm,
            };
            estimate_command(&opts)
        }
        Command::Check(args) => {
            let problem = args.problem.as_deref().map(parse_problem).transpose()?;
            check_command(problem, args.seed)
        }
        Command::Presets => presets_command(),
    }
}

fn experiment(args: ExperimentArgs, single_cell: bool) -> Result<(), CliError> {
    let flags = flags_to_config(
        args.problem,
        args.methods,
        args.gain,
        args.alpha,
        args.lipschitz,
        args.c,
        args.hmin,
        args.t_update,
        args.h,
        args.h_range,
        args.points_per_decade,
        args.t_end,
        args.periods,
        args.stride,
        args.out,
        args.seed,
        args.jobs,
    );
    let tables = effective_configs(
        args.preset.as_deref(),
        args.config.as_deref(),
        &flags,
        args.full_scale,
    )?;
    run_experiments(&tables, single_cell)
}

fn main() {
    // Behave like a normal unix filter when piped into head & co.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
