//! Feedback-gain policies: unity, fixed, the optimal fixed gain `1/(hL)`,
//! the blockwise adaptive gain, and the trajectory-based Lipschitz estimate
//! that backs the fixed-gain choice.

use crate::error::Error;
use crate::lyapunov::{HessNorm, LyapunovFunction};
use crate::run::{integrate, Observer, RunConfig, RunRecord};
use crate::state::{StateVector, Trajectory};
use crate::stepper::{euler_step_into, StepScratch, Stepper};
use crate::system::{SurrogateField, System};

/// How the gain multiplying the feedback term is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum GainPolicy {
    /// `alpha = 1`.
    Unity,
    /// A caller-supplied positive constant.
    Fixed(f64),
    /// `alpha = 1/(h L)`, resolved once the step size is known.
    InverseHL(f64),
    /// Blockwise adaptive gain `alpha = 1/(c h max(||grad^2 V||_F, h_min))`,
    /// recomputed every `ceil(t_update/h)` steps and held constant within
    /// each block. Euler only.
    Adaptive { c: f64, h_min: f64, t_update: f64 },
}

impl GainPolicy {
    pub fn validate(&self) -> Result<(), Error> {
        match *self {
            GainPolicy::Unity => Ok(()),
            GainPolicy::Fixed(alpha) => {
                if alpha > 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config(format!("fixed gain must be positive, got {alpha}")))
                }
            }
            GainPolicy::InverseHL(l) => {
                if l > 0.0 && l.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config(format!("Lipschitz constant must be positive, got {l}")))
                }
            }
            GainPolicy::Adaptive { c, h_min, t_update } => {
                if c <= 1.0 || !c.is_finite() {
                    return Err(Error::config(format!("adaptive scale must satisfy c > 1, got {c}")));
                }
                if h_min <= 0.0 || !h_min.is_finite() {
                    return Err(Error::config(format!("adaptive clip must be positive, got {h_min}")));
                }
                if t_update <= 0.0 || !t_update.is_finite() {
                    return Err(Error::config(format!(
                        "gain update period must be positive, got {t_update}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, GainPolicy::Adaptive { .. })
    }
}

/// Resolves a non-adaptive policy to its constant gain for step size `h`.
///
/// The adaptive policy has no single gain; passing it here is a misuse error
/// (it needs the blockwise driver).
pub fn resolve_fixed_gain(policy: &GainPolicy, h: f64) -> Result<f64, Error> {
    policy.validate()?;
    match *policy {
        GainPolicy::Unity => Ok(1.0),
        GainPolicy::Fixed(alpha) => Ok(alpha),
        GainPolicy::InverseHL(l) => Ok(1.0 / (h * l)),
        GainPolicy::Adaptive { .. } => Err(Error::config(
            "adaptive gain has no fixed resolution; use the blockwise adaptive driver",
        )),
    }
}

/// The adaptive gain `A(x) = 1/(c h B)` with `B = max(||grad^2 V(x)||_F, h_min)`.
///
/// The denominator is grouped as `h * (c * B)` so that on constant-curvature
/// problems the result is bit-identical to `resolve_fixed_gain(InverseHL(c*B), h)`.
pub fn adaptive_gain(
    lyapunov: &LyapunovFunction,
    x: &[f64],
    h: f64,
    c: f64,
    h_min: f64,
) -> Result<f64, Error> {
    let b = lyapunov.hess_norm_frobenius(x)?.max(h_min);
    Ok(1.0 / (h * (c * b)))
}

/// Number of steps per adaptive block, `n = ceil(t_update / h)`.
pub fn block_length(t_update: f64, h: f64) -> usize {
    debug_assert!(t_update > 0.0 && h > 0.0);
    ((t_update / h).ceil() as usize).max(1)
}

/// Result of the unity-gain probe: extremes of `||grad^2 V||` observed along
/// the trajectory, sampled every 0.01 time units.
#[derive(Clone, Copy, Debug)]
pub struct LipschitzEstimate {
    /// Maximum observed Hessian norm; the Lipschitz estimate `L`.
    pub max: f64,
    /// Minimum observed Hessian norm (the other end of the reported range).
    pub min: f64,
    /// Number of Hessian-norm samples taken.
    pub samples: usize,
}

/// Default probe step size used by the CLI and the paper-reproduction tests.
pub const DEFAULT_PROBE_H: f64 = 1e-4;

/// Sampling interval (in time units) for the Hessian norm during the probe.
const PROBE_SAMPLE_INTERVAL: f64 = 1e-2;

/// Estimates the Lipschitz constant of `grad V` by running the unity-gain
/// Euler feedback integrator for one window and recording the extreme values
/// of `||grad^2 V||` along the trajectory.
///
/// Divergence of the probe (non-finite state or `V` above the divergence
/// threshold) aborts the estimate and reports the partial maximum.
pub fn estimate_lipschitz(
    system: &dyn System,
    lyapunov: &LyapunovFunction,
    x0: &StateVector,
    h_probe: f64,
    window: f64,
    norm: HessNorm,
) -> Result<LipschitzEstimate, Error> {
    if h_probe <= 0.0 || !h_probe.is_finite() {
        return Err(Error::config(format!("probe step must be positive, got {h_probe}")));
    }
    if window <= 0.0 || !window.is_finite() {
        return Err(Error::config(format!("probe window must be positive, got {window}")));
    }
    if x0.dim() != system.dim() {
        return Err(Error::config("initial state dimension mismatch"));
    }

    let n_steps = (window / h_probe).ceil() as usize;
    let sample_stride = ((PROBE_SAMPLE_INTERVAL / h_probe).ceil() as usize).max(1);
    let divergence_threshold = RunConfig::DEFAULT_DIVERGENCE_THRESHOLD;

    let mut field = SurrogateField::new(system, lyapunov, 1.0);
    let mut scratch = StepScratch::new(system.dim());
    let mut x = x0.clone();
    let mut next = StateVector::zeros(system.dim());

    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut samples = 0usize;
    let mut sample = |state: &[f64], max: &mut f64, min: &mut f64| -> Result<(), Error> {
        let value = lyapunov.hess_norm(state, norm)?;
        if value > *max {
            *max = value;
        }
        if value < *min {
            *min = value;
        }
        samples += 1;
        Ok(())
    };

    sample(&x, &mut max, &mut min)?;
    for k in 0..n_steps {
        let failed = euler_step_into(&mut field, &x, h_probe, &mut scratch, &mut next).is_err()
            || !next.is_finite()
            || lyapunov.value(&next) > divergence_threshold;
        if failed {
            return Err(Error::EstimationFailed {
                step: k + 1,
                partial_max: if max.is_finite() { max } else { f64::NAN },
            });
        }
        std::mem::swap(&mut x, &mut next);
        if (k + 1) % sample_stride == 0 {
            sample(&x, &mut max, &mut min)?;
        }
    }

    Ok(LipschitzEstimate { max, min, samples })
}

/// Runs Euler feedback integration with the blockwise adaptive gain: the gain
/// is recomputed from the current state every `n = ceil(t_update/h)` steps and
/// held constant within each block.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_driver(
    system: &dyn System,
    lyapunov: &LyapunovFunction,
    x0: &StateVector,
    h: f64,
    c: f64,
    h_min: f64,
    t_update: f64,
    t_end: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<(Trajectory, RunRecord), Error> {
    let policy = GainPolicy::Adaptive { c, h_min, t_update };
    let cfg = RunConfig::new(h, t_end);
    integrate(system, lyapunov, Stepper::Euler, Some(&policy), x0, &cfg, observers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn unity_resolves_to_one() {
        for h in [1e-6, 1e-3, 0.1, 2.0] {
            assert_eq!(resolve_fixed_gain(&GainPolicy::Unity, h).unwrap(), 1.0);
        }
    }

    #[test]
    fn inverse_hl_matches_formula_arithmetic() {
        // L from the Kepler benchmark, h = 1e-3.
        let alpha = resolve_fixed_gain(&GainPolicy::InverseHL(515.4), 1e-3).unwrap();
        assert_eq!(alpha, 1.0 / (1e-3 * 515.4));
        assert_relative_eq!(alpha, 1.9402405898331393, max_relative = 1e-15);
        // L from the rigid-body benchmark, h = 1e-4.
        let alpha = resolve_fixed_gain(&GainPolicy::InverseHL(1986.0), 1e-4).unwrap();
        assert_eq!(alpha, 1.0 / (1e-4 * 1986.0));
        assert_relative_eq!(alpha, 5.035246727089627, max_relative = 1e-15);
    }

    #[test]
    fn adaptive_cannot_be_resolved_as_fixed() {
        let policy = GainPolicy::Adaptive { c: 1.1, h_min: 1e-10, t_update: 0.1 };
        assert!(matches!(resolve_fixed_gain(&policy, 1e-3), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_policies_are_rejected() {
        assert!(GainPolicy::Fixed(0.0).validate().is_err());
        assert!(GainPolicy::Fixed(-2.0).validate().is_err());
        assert!(GainPolicy::InverseHL(0.0).validate().is_err());
        assert!(GainPolicy::Adaptive { c: 1.0, h_min: 1e-10, t_update: 0.1 }.validate().is_err());
        assert!(GainPolicy::Adaptive { c: 1.1, h_min: 0.0, t_update: 0.1 }.validate().is_err());
        assert!(GainPolicy::Adaptive { c: 1.1, h_min: 1e-10, t_update: 0.0 }.validate().is_err());
    }

    #[test]
    fn block_length_examples() {
        assert_eq!(block_length(0.1, 1e-3), 100);
        assert_eq!(block_length(0.1, 3e-3), 34);
        assert_eq!(block_length(30.0, 1e-4), 300_000);
        // t_update <= h degenerates to the per-step update.
        assert_eq!(block_length(1e-4, 1e-3), 1);
    }

    proptest! {
        #[test]
        fn inverse_hl_is_monotone_in_l_and_h(
            l1 in 1e-3..1e6f64, factor in 1.0001..100.0f64, h in 1e-7..1e-1f64
        ) {
            let a1 = resolve_fixed_gain(&GainPolicy::InverseHL(l1), h).unwrap();
            let a2 = resolve_fixed_gain(&GainPolicy::InverseHL(l1 * factor), h).unwrap();
            prop_assert!(a2 < a1);
            let a3 = resolve_fixed_gain(&GainPolicy::InverseHL(l1), h * factor).unwrap();
            prop_assert!(a3 < a1);
        }

        #[test]
        fn block_length_is_minimal_cover(t in 1e-6..1e3f64, h in 1e-7..1.0f64) {
            let n = block_length(t, h);
            let ratio = t / h;
            prop_assert!(n as f64 >= ratio);
            prop_assert!((n as f64) - 1.0 < ratio);
        }
    }
}
