//! Subcommand drivers: run, sweep, estimate-lipschitz, check, presets.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use feedback_integrators::checks::{
    gradient_consistency_check, hessian_symmetry_check, orthogonality_check,
};
use feedback_integrators::problems::{build_problem, ProblemBundle, ProblemKind};
use feedback_integrators::{estimate_lipschitz, HessNorm, DEFAULT_PROBE_H};

use crate::config::{parse_config_file, preset, ExperimentConfig, PRESET_NAMES};
use crate::csvout;
use crate::error::CliError;
use crate::exec::execute_plan;
use crate::methods::resolve_plan;

/// Sample counts for the check suites (matching the acceptance protocol).
const ORTHOGONALITY_SAMPLES: usize = 1000;
const GRADIENT_SAMPLES: usize = 100;
const HESSIAN_SAMPLES: usize = 100;

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, content)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
        }
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(())
}

/// Assembles the effective configuration: problem defaults < preset <
/// config file < command-line flags.
pub fn effective_configs(
    preset_name: Option<&str>,
    config_path: Option<&Path>,
    flags: &ExperimentConfig,
    full_scale: bool,
) -> Result<BTreeMap<String, ExperimentConfig>, CliError> {
    let base = match preset_name {
        Some(name) => preset(name, full_scale).ok_or_else(|| {
            CliError::config(format!(
                "unknown preset '{name}' (available: {})",
                PRESET_NAMES.join(", ")
            ))
        })?,
        None => ExperimentConfig::default(),
    };
    let mut tables: BTreeMap<String, ExperimentConfig> = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            let parsed = parse_config_file(&text)?;
            if parsed.is_empty() {
                return Err(CliError::config("config file defines no experiments"));
            }
            parsed
                .into_iter()
                .map(|(name, cfg)| (name, base.clone().merged_with(&cfg)))
                .collect()
        }
        None => {
            let mut m = BTreeMap::new();
            m.insert("experiment".to_string(), base);
            m
        }
    };
    for cfg in tables.values_mut() {
        *cfg = cfg.clone().merged_with(flags);
        if full_scale {
            cfg.full_scale = Some(true);
        }
    }
    Ok(tables)
}

/// `run` and `sweep`: run expects exactly one (method, h) cell.
pub fn run_experiments(
    tables: &BTreeMap<String, ExperimentConfig>,
    single_cell: bool,
) -> Result<(), CliError> {
    if tables.len() > 1 {
        for (name, cfg) in tables {
            if cfg.out.is_none() {
                return Err(CliError::config(format!(
                    "experiment '{name}' needs an 'out' path when running multiple experiments"
                )));
            }
        }
    }
    for (name, cfg) in tables {
        let plan = resolve_plan(cfg).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("experiment '{name}': {m}")),
            other => other,
        })?;
        if single_cell && (plan.cells.len() != 1 || plan.h_values.len() != 1) {
            return Err(CliError::config(
                "run executes exactly one method at one step size; use sweep for grids",
            ));
        }
        let bundle: ProblemBundle = build_problem(plan.problem);
        let results = execute_plan(&bundle, &plan)?;
        let table = csvout::table(&bundle, &results);
        write_output(plan.out.as_deref(), &table)?;
        for r in &results {
            eprintln!(
                "{} {} h={:e}: steps={} max_V={:.3e} diverged={}",
                bundle.kind.name(),
                r.cell.method.name(),
                r.h,
                r.record.steps,
                r.record.max_v,
                r.record.diverged
            );
        }
    }
    Ok(())
}

pub struct EstimateOptions {
    pub problem: ProblemKind,
    pub h_probe: Option<f64>,
    pub window: Option<f64>,
    pub norm: Option<HessNorm>,
}

pub fn estimate_command(opts: &EstimateOptions) -> Result<(), CliError> {
    let bundle = build_problem(opts.problem);
    let h_probe = opts.h_probe.unwrap_or(DEFAULT_PROBE_H);
    let window = opts.window.unwrap_or(bundle.reference.probe_window);
    if window <= 0.0 || !window.is_finite() {
        return Err(CliError::config(format!("probe window must be positive, got {window}")));
    }
    if h_probe <= 0.0 || !h_probe.is_finite() {
        return Err(CliError::config(format!("probe step must be positive, got {h_probe}")));
    }
    println!("problem: {}", bundle.kind.name());
    println!("window: {window}  probe_h: {h_probe}  gain: unity");
    let norms: &[HessNorm] = match opts.norm {
        Some(HessNorm::Frobenius) => &[HessNorm::Frobenius],
        Some(HessNorm::Spectral) => &[HessNorm::Spectral],
        None => &[HessNorm::Frobenius, HessNorm::Spectral],
    };
    for &norm in norms {
        let label = match norm {
            HessNorm::Frobenius => "frobenius",
            HessNorm::Spectral => "spectral",
        };
        match estimate_lipschitz(
            bundle.system.as_ref(),
            &bundle.lyapunov,
            &bundle.initial_state,
            h_probe,
            window,
            norm,
        ) {
            Ok(est) => println!(
                "{label}: L = {}  hess_norm range [{}, {}]  samples = {}",
                csvout::format_f64(est.max),
                csvout::format_f64(est.min),
                csvout::format_f64(est.max),
                est.samples
            ),
            Err(e) => {
                return Err(CliError::config(format!("{label} probe failed: {e}")));
            }
        }
    }
    Ok(())
}

pub fn check_command(problem: Option<ProblemKind>, seed: u64) -> Result<(), CliError> {
    let problems: Vec<ProblemKind> = match problem {
        Some(p) => vec![p],
        None => ProblemKind::ALL.to_vec(),
    };
    let mut failures = Vec::new();
    for kind in problems {
        let bundle = build_problem(kind);
        println!("checking {} (seed {seed})", kind.name());
        let reports = [
            orthogonality_check(
                bundle.system.as_ref(),
                &bundle.lyapunov,
                seed,
                ORTHOGONALITY_SAMPLES,
            ),
            gradient_consistency_check(
                bundle.system.as_ref(),
                &bundle.lyapunov,
                seed,
                GRADIENT_SAMPLES,
            ),
            hessian_symmetry_check(
                bundle.system.as_ref(),
                &bundle.lyapunov,
                seed,
                HESSIAN_SAMPLES,
            ),
        ];
        for report in reports {
            let status = if report.passed() { "ok" } else { "FAIL" };
            println!(
                "  {:<22} worst residual {:.3e} (tolerance {:.0e}, {} states): {status}",
                report.name, report.worst, report.tolerance, report.samples
            );
            if !report.passed() {
                if let Some(state) = &report.worst_state {
                    println!("    offending state: {:?}", state.as_slice());
                }
                failures.push(format!("{} on {}", report.name, kind.name()));
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failures.join(", ")))
    }
}

pub fn presets_command() -> Result<(), CliError> {
    for name in PRESET_NAMES {
        let cfg = preset(name, false).expect("shipped preset");
        println!("[{name}]");
        let body = toml::to_string(&cfg)
            .map_err(|e| CliError::Io(format!("cannot render preset: {e}")))?;
        for line in body.lines() {
            println!("{line}");
        }
        println!();
    }
    Ok(())
}

/// Shared flag surface of `run` and `sweep`, converted to a config overlay.
#[allow(clippy::too_many_arguments)]
pub fn flags_to_config(
    problem: Option<String>,
    methods: Vec<String>,
    gain: Option<String>,
    alpha: Option<f64>,
    lipschitz: Option<f64>,
    c: Option<f64>,
    hmin: Option<f64>,
    t_update: Option<f64>,
    h: Vec<f64>,
    h_range: Option<(f64, f64)>,
    points_per_decade: Option<u32>,
    t_end: Option<f64>,
    periods: Option<f64>,
    stride: Option<usize>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    jobs: Option<usize>,
) -> ExperimentConfig {
    ExperimentConfig {
        problem,
        methods,
        gain,
        alpha,
        lipschitz,
        c,
        hmin,
        t_update,
        h: if h.is_empty() { None } else { Some(h) },
        h_range: h_range.map(|(lo, hi)| [lo, hi]),
        points_per_decade,
        t_end,
        periods,
        stride,
        out,
        seed,
        jobs,
        full_scale: None,
    }
}
