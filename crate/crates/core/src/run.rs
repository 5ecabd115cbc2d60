//! The trajectory-driving loop: fixed-step integration with per-step metric
//! accumulation, divergence detection, and observer callbacks.

use std::time::Instant;

use crate::error::Error;
use crate::gain::{adaptive_gain, block_length, GainPolicy};
use crate::lyapunov::LyapunovFunction;
use crate::state::{StateVector, Trajectory};
use crate::stepper::{step_into, StepScratch, Stepper};
use crate::system::{Constraint, Integral, SurrogateField, System};

/// Per-step callback. Observers are pure accumulators invoked synchronously
/// every step; metric accumulation in the loop itself is never thinned.
///
/// `on_step` receives the 1-based step index, the time `step * h`, the new
/// state, and the gain used to produce it (0 for raw and baseline methods).
pub trait Observer {
    fn on_start(&mut self, _x0: &StateVector) {}
    fn on_step(&mut self, _step: usize, _t: f64, _x: &StateVector, _alpha: f64) {}
}

/// Fixed-step run parameters.
#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub h: f64,
    pub t_end: f64,
    /// Trajectory thinning stride; `None` selects [`Trajectory::default_stride`].
    pub stride: Option<usize>,
    /// A state with `V` above this halts the run with the divergence flag set.
    pub divergence_threshold: f64,
}

impl RunConfig {
    pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e6;

    pub fn new(h: f64, t_end: f64) -> Self {
        Self {
            h,
            t_end,
            stride: None,
            divergence_threshold: Self::DEFAULT_DIVERGENCE_THRESHOLD,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = Some(stride);
        self
    }

    fn validate(&self) -> Result<usize, Error> {
        if self.h <= 0.0 || !self.h.is_finite() {
            return Err(Error::config(format!("step size must be positive, got {}", self.h)));
        }
        if self.t_end < 0.0 || !self.t_end.is_finite() {
            return Err(Error::config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.divergence_threshold.is_nan() || self.divergence_threshold <= 0.0 {
            return Err(Error::config("divergence threshold must be positive"));
        }
        if self.stride == Some(0) {
            return Err(Error::config("trajectory stride must be positive"));
        }
        let ratio = self.t_end / self.h;
        if ratio >= 1e15 {
            return Err(Error::config(format!(
                "step count ceil({}/{}) does not fit in the step counter",
                self.t_end, self.h
            )));
        }
        Ok(if self.t_end == 0.0 { 0 } else { ratio.ceil() as usize })
    }
}

/// Per-run metrics: worst Lyapunov value, per-integral worst deviation from
/// the initial value (Euclidean norm for vector integrals), step count, wall
/// time of the stepping loop, and the divergence flag.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub max_v: f64,
    /// `(name, max_k |F(x_k) - F(x_0)|)` for each integral and constraint,
    /// in the order the system declares them.
    pub deviations: Vec<(String, f64)>,
    /// Completed steps (equals `ceil(t_end/h)` for a non-divergent run).
    pub steps: usize,
    /// Monotonic wall time around the stepping loop only.
    pub cpu_seconds: f64,
    pub diverged: bool,
    /// 1-based index of the first offending step when `diverged`.
    pub divergence_step: Option<usize>,
}

impl RunRecord {
    pub fn deviation(&self, name: &str) -> Option<f64> {
        self.deviations
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| *d)
    }

    /// Largest per-integral deviation across all tracked quantities.
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().map(|(_, d)| *d).fold(0.0, f64::max)
    }
}

enum MetricSource {
    Integral(Integral),
    Constraint(Constraint),
}

struct MetricEntry {
    name: String,
    reference: Vec<f64>,
    scratch: Vec<f64>,
    max_dev: f64,
    source: MetricSource,
}

impl MetricEntry {
    fn update(&mut self, x: &[f64]) {
        match &self.source {
            MetricSource::Integral(i) => i.value_into(x, &mut self.scratch),
            MetricSource::Constraint(c) => c.value_into(x, &mut self.scratch),
        }
        let dev = self
            .scratch
            .iter()
            .zip(&self.reference)
            .map(|(v, r)| (v - r) * (v - r))
            .sum::<f64>()
            .sqrt();
        if dev > self.max_dev {
            self.max_dev = dev;
        }
    }
}

fn metric_entries(system: &dyn System, x0: &[f64]) -> Vec<MetricEntry> {
    let mut entries = Vec::new();
    for integral in system.integrals() {
        let mut scratch = vec![0.0; integral.dim()];
        integral.value_into(x0, &mut scratch);
        entries.push(MetricEntry {
            name: integral.name().to_string(),
            reference: scratch.clone(),
            scratch,
            max_dev: 0.0,
            source: MetricSource::Integral(integral.clone()),
        });
    }
    for constraint in system.constraints() {
        let mut scratch = vec![0.0; constraint.dim()];
        constraint.value_into(x0, &mut scratch);
        entries.push(MetricEntry {
            name: constraint.name().to_string(),
            reference: scratch.clone(),
            scratch,
            max_dev: 0.0,
            source: MetricSource::Constraint(constraint.clone()),
        });
    }
    entries
}

/// A one-step map driven by the run loop. `prepare` is called before each
/// step (adaptive gain updates happen there) and returns the gain that the
/// following `advance` will use, for observer reporting.
pub trait StepMap {
    fn prepare(&mut self, _step: usize, _x: &[f64]) -> Result<f64, Error> {
        Ok(0.0)
    }
    fn advance(&mut self, x: &[f64], h: f64, out: &mut [f64]) -> Result<(), Error>;
}

struct FixedGainMap<'a> {
    field: SurrogateField<'a>,
    stepper: Stepper,
    scratch: StepScratch,
}

impl StepMap for FixedGainMap<'_> {
    fn prepare(&mut self, _step: usize, _x: &[f64]) -> Result<f64, Error> {
        Ok(self.field.alpha())
    }
    fn advance(&mut self, x: &[f64], h: f64, out: &mut [f64]) -> Result<(), Error> {
        step_into(self.stepper, &mut self.field, x, h, &mut self.scratch, out)
    }
}

struct AdaptiveGainMap<'a> {
    field: SurrogateField<'a>,
    lyapunov: &'a LyapunovFunction,
    scratch: StepScratch,
    h: f64,
    c: f64,
    h_min: f64,
    block: usize,
}

impl StepMap for AdaptiveGainMap<'_> {
    fn prepare(&mut self, step: usize, x: &[f64]) -> Result<f64, Error> {
        if step.is_multiple_of(self.block) {
            let alpha = adaptive_gain(self.lyapunov, x, self.h, self.c, self.h_min)?;
            self.field.set_alpha(alpha);
        }
        Ok(self.field.alpha())
    }
    fn advance(&mut self, x: &[f64], h: f64, out: &mut [f64]) -> Result<(), Error> {
        step_into(Stepper::Euler, &mut self.field, x, h, &mut self.scratch, out)
    }
}

/// Advances `ceil(t_end/h)` fixed steps of the surrogate (or raw) system.
///
/// `gain: None` integrates the raw field; a non-adaptive policy is resolved
/// once at run start; the adaptive policy recomputes the gain blockwise
/// (Euler only; pairing it with RK4 is a configuration error).
///
/// Divergence - a non-finite entry, a domain exit inside a step, or
/// `V(x_k)` above the configured threshold - halts the run and returns the
/// partial trajectory with the record flagged; it is not an `Err`.
pub fn integrate(
    system: &dyn System,
    lyapunov: &LyapunovFunction,
    stepper: Stepper,
    gain: Option<&GainPolicy>,
    x0: &StateVector,
    cfg: &RunConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<(Trajectory, RunRecord), Error> {
    if let Some(policy) = gain {
        policy.validate()?;
        if policy.is_adaptive() && stepper != Stepper::Euler {
            return Err(Error::config(
                "adaptive gain is defined for Euler's method only",
            ));
        }
    }
    match gain {
        Some(&GainPolicy::Adaptive { c, h_min, t_update }) => {
            let mut map = AdaptiveGainMap {
                field: SurrogateField::new(system, lyapunov, 0.0),
                lyapunov,
                scratch: StepScratch::new(system.dim()),
                h: cfg.h,
                c,
                h_min,
                block: block_length(t_update, cfg.h),
            };
            run_loop(system, lyapunov, &mut map, x0, cfg, observers)
        }
        Some(policy) => {
            let alpha = crate::gain::resolve_fixed_gain(policy, cfg.h)?;
            let mut map = FixedGainMap {
                field: SurrogateField::new(system, lyapunov, alpha),
                stepper,
                scratch: StepScratch::new(system.dim()),
            };
            run_loop(system, lyapunov, &mut map, x0, cfg, observers)
        }
        None => {
            let mut map = FixedGainMap {
                field: SurrogateField::new(system, lyapunov, 0.0),
                stepper,
                scratch: StepScratch::new(system.dim()),
            };
            run_loop(system, lyapunov, &mut map, x0, cfg, observers)
        }
    }
}

/// Shared driver used by [`integrate`] and the baseline methods.
pub fn run_loop(
    system: &dyn System,
    lyapunov: &LyapunovFunction,
    map: &mut dyn StepMap,
    x0: &StateVector,
    cfg: &RunConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<(Trajectory, RunRecord), Error> {
    let n_steps = cfg.validate()?;
    if x0.dim() != system.dim() {
        return Err(Error::config(format!(
            "initial state has dimension {}, system expects {}",
            x0.dim(),
            system.dim()
        )));
    }
    if lyapunov.dim() != system.dim() {
        return Err(Error::config("Lyapunov function dimension mismatch"));
    }
    if !x0.is_finite() {
        return Err(Error::config("initial state has non-finite entries"));
    }
    if !system.in_domain(x0) {
        return Err(Error::config("initial state is outside the problem domain"));
    }

    let stride = cfg.stride.unwrap_or_else(|| Trajectory::default_stride(n_steps));
    let mut trajectory =
        Trajectory::with_capacity(cfg.h, stride, n_steps / stride + 2);
    trajectory.push(0, x0.clone());

    let mut metrics = metric_entries(system, x0);
    let mut max_v = lyapunov.value(x0);

    for obs in observers.iter_mut() {
        obs.on_start(x0);
    }

    let mut x = x0.clone();
    let mut next = StateVector::zeros(system.dim());
    let mut diverged = false;
    let mut divergence_step = None;
    let mut completed = 0usize;

    let timer = Instant::now();
    for k in 0..n_steps {
        let step_result = map
            .prepare(k, &x)
            .and_then(|alpha| map.advance(&x, cfg.h, next.as_mut_slice()).map(|()| alpha));
        let alpha = match step_result {
            Ok(alpha) if next.is_finite() => alpha,
            _ => {
                diverged = true;
                divergence_step = Some(k + 1);
                break;
            }
        };

        let v = lyapunov.value(&next);
        if v > max_v {
            max_v = v;
        }
        for entry in &mut metrics {
            entry.update(&next);
        }
        completed = k + 1;
        if (k + 1) % stride == 0 {
            trajectory.push(k + 1, next.clone());
        }
        let t = (k + 1) as f64 * cfg.h;
        for obs in observers.iter_mut() {
            obs.on_step(k + 1, t, &next, alpha);
        }
        if v > cfg.divergence_threshold {
            diverged = true;
            divergence_step = Some(k + 1);
            break;
        }
        std::mem::swap(&mut x, &mut next);
    }
    let cpu_seconds = timer.elapsed().as_secs_f64();

    let record = RunRecord {
        max_v,
        deviations: metrics.into_iter().map(|e| (e.name, e.max_dev)).collect(),
        steps: completed,
        cpu_seconds,
        diverged,
        divergence_step,
    };
    Ok((trajectory, record))
}
