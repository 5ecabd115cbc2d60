//! Method names, gain resolution, the method/problem compatibility matrix,
//! and resolution of an [`ExperimentConfig`] into a concrete run plan.

use feedback_integrators::problems::{ProblemKind, ProblemReference};
use feedback_integrators::GainPolicy;

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodKind {
    Euler,
    Rk4,
    FeedbackEuler,
    FeedbackRk4,
    AdaptiveFeedback,
    StrangSplitting,
    StormerVerlet,
}

impl MethodKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "euler" => Some(Self::Euler),
            "rk4" => Some(Self::Rk4),
            "feedback_euler" => Some(Self::FeedbackEuler),
            "feedback_rk4" => Some(Self::FeedbackRk4),
            "adaptive_feedback" => Some(Self::AdaptiveFeedback),
            "strang_splitting" => Some(Self::StrangSplitting),
            "stormer_verlet" => Some(Self::StormerVerlet),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Euler => "euler",
            Self::Rk4 => "rk4",
            Self::FeedbackEuler => "feedback_euler",
            Self::FeedbackRk4 => "feedback_rk4",
            Self::AdaptiveFeedback => "adaptive_feedback",
            Self::StrangSplitting => "strang_splitting",
            Self::StormerVerlet => "stormer_verlet",
        }
    }

    pub fn takes_gain(self) -> bool {
        matches!(self, Self::FeedbackEuler | Self::FeedbackRk4 | Self::AdaptiveFeedback)
    }

    pub fn compatible_with(self, problem: ProblemKind) -> bool {
        match self {
            Self::StrangSplitting => problem == ProblemKind::RigidBody,
            Self::StormerVerlet => {
                matches!(problem, ProblemKind::Kepler | ProblemKind::PerturbedKepler)
            }
            _ => true,
        }
    }
}

/// Gain settings gathered from flags/config, resolved per feedback method.
#[derive(Clone, Copy, Debug)]
pub struct GainSettings {
    pub lipschitz: f64,
    pub alpha: Option<f64>,
    pub c: f64,
    pub h_min: f64,
    pub t_update: f64,
}

impl GainSettings {
    fn from_config(cfg: &ExperimentConfig, reference: &ProblemReference) -> Self {
        Self {
            lipschitz: cfg.lipschitz.unwrap_or(reference.lipschitz),
            alpha: cfg.alpha,
            c: cfg.c.unwrap_or(1.1),
            h_min: cfg.hmin.unwrap_or(1e-10),
            t_update: cfg.t_update.unwrap_or(reference.t_update),
        }
    }

    fn policy(&self, name: &str) -> Result<GainPolicy, CliError> {
        match name {
            "unity" => Ok(GainPolicy::Unity),
            "fixed" => {
                let alpha = self.alpha.ok_or_else(|| {
                    CliError::config("gain 'fixed' requires --alpha")
                })?;
                Ok(GainPolicy::Fixed(alpha))
            }
            "inverse_hl" | "inverse-hl" => Ok(GainPolicy::InverseHL(self.lipschitz)),
            "adaptive" => Ok(GainPolicy::Adaptive {
                c: self.c,
                h_min: self.h_min,
                t_update: self.t_update,
            }),
            other => Err(CliError::config(format!(
                "unknown gain '{other}' (expected unity, fixed, inverse-hl or adaptive)"
            ))),
        }
    }
}

/// One (method, gain) combination of a sweep; paired with each grid `h`.
#[derive(Clone, Debug)]
pub struct MethodCell {
    pub method: MethodKind,
    pub gain: Option<GainPolicy>,
}

impl MethodCell {
    /// The `alpha_desc` CSV column: how the gain resolves for step size `h`.
    /// Kept comma-free so records stay strictly columnar.
    pub fn alpha_desc(&self, h: f64) -> String {
        match &self.gain {
            None => "-".to_string(),
            Some(GainPolicy::Unity) => "unity(alpha=1)".to_string(),
            Some(GainPolicy::Fixed(a)) => format!("fixed(alpha={a})"),
            Some(GainPolicy::InverseHL(l)) => {
                format!("inverse_hl(L={l};alpha={})", 1.0 / (h * l))
            }
            Some(GainPolicy::Adaptive { c, h_min, t_update }) => {
                format!("adaptive(c={c};hmin={h_min:e};t_update={t_update})")
            }
        }
    }
}

/// Parses `name[:gain]` into a method cell using the experiment's gain
/// settings, enforcing the method/problem compatibility matrix.
pub fn parse_method(
    spec: &str,
    problem: ProblemKind,
    default_gain: Option<&str>,
    settings: &GainSettings,
) -> Result<MethodCell, CliError> {
    let (name, suffix) = match spec.split_once(':') {
        Some((n, g)) => (n, Some(g)),
        None => (spec, None),
    };
    let method = MethodKind::parse(name).ok_or_else(|| {
        CliError::config(format!(
            "unknown method '{name}' (expected euler, rk4, feedback_euler, feedback_rk4, \
             adaptive_feedback, strang_splitting or stormer_verlet)"
        ))
    })?;
    if !method.compatible_with(problem) {
        return Err(CliError::config(format!(
            "method '{}' is not defined for problem '{}'",
            method.name(),
            problem.name()
        )));
    }
    if !method.takes_gain() {
        if suffix.is_some() {
            return Err(CliError::config(format!(
                "method '{}' does not take a gain",
                method.name()
            )));
        }
        return Ok(MethodCell { method, gain: None });
    }
    let gain = match method {
        MethodKind::AdaptiveFeedback => {
            if let Some(g) = suffix {
                if g != "adaptive" {
                    return Err(CliError::config(
                        "adaptive_feedback always uses the adaptive gain",
                    ));
                }
            }
            settings.policy("adaptive")?
        }
        _ => {
            let name = suffix.or(default_gain).unwrap_or("inverse_hl");
            let policy = settings.policy(name)?;
            if policy.is_adaptive() && method == MethodKind::FeedbackRk4 {
                return Err(CliError::config(
                    "adaptive gain is defined for Euler's method only; \
                     feedback_rk4 takes unity, fixed or inverse-hl",
                ));
            }
            policy
        }
    };
    gain.validate()?;
    Ok(MethodCell { method, gain: Some(gain) })
}

/// Log-uniform grid `10^(k/p)` covering `[lo, hi]`, ascending.
pub fn decade_grid(lo: f64, hi: f64, points_per_decade: u32) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(CliError::config("h range bounds must be positive"));
    }
    if lo > hi {
        return Err(CliError::config("h range must satisfy lo <= hi"));
    }
    if points_per_decade == 0 {
        return Err(CliError::config("points per decade must be positive"));
    }
    let p = points_per_decade as f64;
    let k_lo = (p * lo.log10() - 1e-9).ceil() as i64;
    let k_hi = (p * hi.log10() + 1e-9).floor() as i64;
    let grid: Vec<f64> = (k_lo..=k_hi).map(|k| 10f64.powf(k as f64 / p)).collect();
    if grid.is_empty() {
        return Err(CliError::config("h range contains no grid points"));
    }
    Ok(grid)
}

/// A fully validated experiment ready to execute.
pub struct ResolvedPlan {
    pub problem: ProblemKind,
    pub cells: Vec<MethodCell>,
    pub h_values: Vec<f64>,
    pub t_end: f64,
    pub stride: Option<usize>,
    pub jobs: usize,
    pub out: Option<std::path::PathBuf>,
}

/// Validates an experiment configuration into a plan. Everything here runs
/// before any numerics.
pub fn resolve_plan(cfg: &ExperimentConfig) -> Result<ResolvedPlan, CliError> {
    let problem_name = cfg
        .problem
        .as_deref()
        .ok_or_else(|| CliError::config("no problem selected (--problem or --preset)"))?;
    let problem = ProblemKind::parse(problem_name).ok_or_else(|| {
        CliError::config(format!(
            "unknown problem '{problem_name}' (expected rigid_body, kepler or perturbed_kepler)"
        ))
    })?;
    let reference = problem.reference();
    if cfg.methods.is_empty() {
        return Err(CliError::config("no methods selected (--method)"));
    }
    let settings = GainSettings::from_config(cfg, &reference);
    let cells = cfg
        .methods
        .iter()
        .map(|m| parse_method(m, problem, cfg.gain.as_deref(), &settings))
        .collect::<Result<Vec<_>, _>>()?;

    let h_values = match (&cfg.h, &cfg.h_range) {
        (Some(values), _) if !values.is_empty() => {
            for h in values {
                if *h <= 0.0 || !h.is_finite() {
                    return Err(CliError::config(format!("step size must be positive, got {h}")));
                }
            }
            let mut v = values.clone();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        }
        (_, Some([lo, hi])) => decade_grid(*lo, *hi, cfg.points_per_decade.unwrap_or(3))?,
        _ => return Err(CliError::config("no step size selected (--h or --h-range)")),
    };

    let full = cfg.full_scale.unwrap_or(false);
    let t_end = match (cfg.t_end, cfg.periods) {
        (Some(t), _) => t,
        (None, Some(p)) => {
            let period = reference.period.ok_or_else(|| {
                CliError::config(format!(
                    "problem '{}' has no orbital period; use --t-end",
                    problem.name()
                ))
            })?;
            p * period
        }
        (None, None) => {
            if full {
                reference.full_horizon
            } else {
                reference.desk_horizon
            }
        }
    };
    if t_end < 0.0 || !t_end.is_finite() {
        return Err(CliError::config(format!("t_end must be nonnegative, got {t_end}")));
    }
    if cfg.stride == Some(0) {
        return Err(CliError::config("stride must be positive"));
    }
    let jobs = cfg.jobs.unwrap_or(1);
    if jobs == 0 {
        return Err(CliError::config("jobs must be positive"));
    }

    Ok(ResolvedPlan {
        problem,
        cells,
        h_values,
        t_end,
        stride: cfg.stride,
        jobs,
        out: cfg.out.clone(),
    })
}
