//! Cell execution and sweeps. Cells are independent (problem definitions are
//! immutable and shared); sweeps may run them in parallel and the output
//! ordering is fixed by sort key, so `--jobs` never changes the CSV content.

use rayon::prelude::*;

use feedback_integrators::baselines::{
    run_stormer_verlet_kepler, run_stormer_verlet_perturbed, run_strang_splitting,
};
use feedback_integrators::problems::{
    Kepler, PerturbedKepler, ProblemBundle, ProblemKind, RigidBody,
};
use feedback_integrators::{integrate, RunConfig, RunRecord, Stepper};

use crate::error::CliError;
use crate::methods::{MethodCell, MethodKind, ResolvedPlan};

#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: MethodCell,
    pub h: f64,
    pub alpha_desc: String,
    pub record: RunRecord,
}

/// Runs one (method, h) cell of the plan's problem.
pub fn execute_cell(
    bundle: &ProblemBundle,
    cell: &MethodCell,
    h: f64,
    t_end: f64,
    stride: Option<usize>,
) -> Result<CellResult, CliError> {
    let mut cfg = RunConfig::new(h, t_end);
    cfg.stride = stride;
    let x0 = &bundle.initial_state;
    let lyap = &bundle.lyapunov;
    let (_trajectory, record) = match cell.method {
        MethodKind::Euler => {
            integrate(bundle.system.as_ref(), lyap, Stepper::Euler, None, x0, &cfg, &mut [])?
        }
        MethodKind::Rk4 => {
            integrate(bundle.system.as_ref(), lyap, Stepper::Rk4, None, x0, &cfg, &mut [])?
        }
        MethodKind::FeedbackEuler | MethodKind::AdaptiveFeedback => integrate(
            bundle.system.as_ref(),
            lyap,
            Stepper::Euler,
            cell.gain.as_ref(),
            x0,
            &cfg,
            &mut [],
        )?,
        MethodKind::FeedbackRk4 => integrate(
            bundle.system.as_ref(),
            lyap,
            Stepper::Rk4,
            cell.gain.as_ref(),
            x0,
            &cfg,
            &mut [],
        )?,
        MethodKind::StrangSplitting => {
            let rb = RigidBody::standard();
            run_strang_splitting(&rb, lyap, x0, &cfg, &mut [])?
        }
        MethodKind::StormerVerlet => match bundle.kind {
            ProblemKind::Kepler => {
                let sys = Kepler::standard();
                run_stormer_verlet_kepler(&sys, lyap, x0, &cfg, &mut [])?
            }
            ProblemKind::PerturbedKepler => {
                let sys = PerturbedKepler::standard();
                run_stormer_verlet_perturbed(&sys, lyap, x0, &cfg, &mut [])?
            }
            ProblemKind::RigidBody => {
                unreachable!("compatibility is validated before execution")
            }
        },
    };
    Ok(CellResult {
        cell: cell.clone(),
        h,
        alpha_desc: cell.alpha_desc(h),
        record,
    })
}

/// Executes every (method, h) cell of the plan, `jobs` at a time, and sorts
/// results by (method, alpha_desc, h) for deterministic output.
pub fn execute_plan(bundle: &ProblemBundle, plan: &ResolvedPlan) -> Result<Vec<CellResult>, CliError> {
    let mut grid: Vec<(MethodCell, f64)> = Vec::new();
    for cell in &plan.cells {
        for &h in &plan.h_values {
            grid.push((cell.clone(), h));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| CliError::config(format!("cannot build thread pool: {e}")))?;
    let mut results: Vec<CellResult> = pool.install(|| {
        grid.par_iter()
            .map(|(cell, h)| execute_cell(bundle, cell, *h, plan.t_end, plan.stride))
            .collect::<Result<Vec<_>, _>>()
    })?;
    results.sort_by(|a, b| {
        a.cell
            .method
            .name()
            .cmp(b.cell.method.name())
            .then(a.h.partial_cmp(&b.h).expect("grid steps are finite"))
            .then_with(|| a.alpha_desc.cmp(&b.alpha_desc))
    });
    Ok(results)
}
