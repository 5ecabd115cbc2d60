//! CSV assembly. Floats are serialized with 17 significant digits so records
//! round-trip exactly; byte determinism (modulo the cpu_seconds column) is a
//! tested contract.

use feedback_integrators::problems::ProblemBundle;

use crate::exec::CellResult;

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header for one problem's records; deviation columns follow the order the
/// system declares its integrals and constraints.
pub fn header(bundle: &ProblemBundle) -> String {
    let mut cols = vec!["problem".into(), "method".into(), "h".into(), "alpha_desc".into(), "max_V".into()];
    for integral in bundle.system.integrals() {
        cols.push(format!("dev_{}", integral.name()));
    }
    for constraint in bundle.system.constraints() {
        cols.push(format!("dev_{}", constraint.name()));
    }
    cols.extend(["steps".into(), "cpu_seconds".into(), "diverged".into(), "divergence_step".into()]);
    cols.join(",")
}

pub fn row(bundle: &ProblemBundle, result: &CellResult) -> String {
    let rec = &result.record;
    let mut cols = vec![
        bundle.kind.name().to_string(),
        result.cell.method.name().to_string(),
        format_f64(result.h),
        result.alpha_desc.clone(),
        format_f64(rec.max_v),
    ];
    for (_, dev) in &rec.deviations {
        cols.push(format_f64(*dev));
    }
    cols.push(rec.steps.to_string());
    cols.push(format_f64(rec.cpu_seconds));
    cols.push(rec.diverged.to_string());
    cols.push(rec.divergence_step.map(|s| s.to_string()).unwrap_or_default());
    cols.join(",")
}

pub fn table(bundle: &ProblemBundle, results: &[CellResult]) -> String {
    let mut out = String::new();
    out.push_str(&header(bundle));
    out.push('\n');
    for r in results {
        out.push_str(&row(bundle, r));
        out.push('\n');
    }
    out
}
