//! Seeded property-check suites backing the `check` command: orthogonality
//! of the feedback direction against the flow, analytic-vs-finite-difference
//! gradient consistency, and Hessian symmetry.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lyapunov::{fd_gradient, LyapunovFunction};
use crate::state::StateVector;
use crate::system::System;

/// `|<grad V, f>| <= tol * (1 + |grad V| |f|)` at random domain states.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;
/// Analytic gradient vs central differences of `V`, norm-relative.
pub const GRADIENT_TOL: f64 = 1e-6;
/// `||H - H^T||_F <= tol * ||H||_F` for the raw finite-difference Hessian.
pub const HESSIAN_SYMMETRY_TOL: f64 = 1e-3;
/// Frobenius norm must dominate the spectral estimate up to this relative slack.
pub const FROBENIUS_DOMINANCE_TOL: f64 = 1e-6;

/// Outcome of one property suite: the worst normalized residual seen, the
/// tolerance it is held to, and the state achieving it (echoed on failure so
/// the case can be reproduced).
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: &'static str,
    pub samples: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub worst_state: Option<StateVector>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.worst.is_finite() && self.worst <= self.tolerance
    }
}

fn worst_over_samples(
    name: &'static str,
    system: &dyn System,
    seed: u64,
    samples: usize,
    tolerance: f64,
    mut residual: impl FnMut(&StateVector) -> f64,
) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut worst_state = None;
    for _ in 0..samples {
        let x = system.sample_domain_state(&mut rng);
        let r = residual(&x);
        if !r.is_finite() {
            return CheckReport {
                name,
                samples,
                worst: f64::INFINITY,
                tolerance,
                worst_state: Some(x),
            };
        }
        if r > worst {
            worst = r;
            worst_state = Some(x.clone());
        }
    }
    CheckReport {
        name,
        samples,
        worst,
        tolerance,
        worst_state,
    }
}

/// (A1): the feedback direction is orthogonal to the flow everywhere on the
/// domain, `<grad V(x), f(x)> = 0`, checked as a normalized residual.
pub fn orthogonality_check(
    system: &dyn System,
    lyapunov: &LyapunovFunction,
    seed: u64,
    samples: usize,
) -> CheckReport {
    let n = system.dim();
    let mut grad = vec![0.0; n];
    let mut f = vec![0.0; n];
    worst_over_samples(
        "orthogonality",
        system,
        seed,
        samples,
        ORTHOGONALITY_TOL,
        |x| {
            lyapunov.gradient_into(x, &mut grad);
            if system.field(x, &mut f).is_err() {
                return f64::INFINITY;
            }
            let inner: f64 = grad.iter().zip(&f).map(|(a, b)| a * b).sum();
            let gn = grad.iter().map(|a| a * a).sum::<f64>().sqrt();
            let fn_ = f.iter().map(|a| a * a).sum::<f64>().sqrt();
            inner.abs() / (1.0 + gn * fn_)
        },
    )
}

/// Analytic gradient against central finite differences of `V`.
pub fn gradient_consistency_check(
    system: &dyn System,
    lyapunov: &LyapunovFunction,
    seed: u64,
    samples: usize,
) -> CheckReport {
    let n = system.dim();
    let mut grad = vec![0.0; n];
    worst_over_samples(
        "gradient_consistency",
        system,
        seed,
        samples,
        GRADIENT_TOL,
        |x| {
            lyapunov.gradient_into(x, &mut grad);
            let fd = fd_gradient(lyapunov, x);
            let diff = grad
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let gn = grad.iter().map(|a| a * a).sum::<f64>().sqrt();
            diff / gn.max(1.0)
        },
    )
}

/// Symmetry of the raw finite-difference Hessian, `||H - H^T||_F / ||H||_F`.
pub fn hessian_symmetry_check(
    system: &dyn System,
    lyapunov: &LyapunovFunction,
    seed: u64,
    samples: usize,
) -> CheckReport {
    let n = system.dim();
    worst_over_samples(
        "hessian_symmetry",
        system,
        seed,
        samples,
        HESSIAN_SYMMETRY_TOL,
        |x| {
            let h = match lyapunov.hessian_fd(x) {
                Ok(h) => h,
                Err(_) => return f64::INFINITY,
            };
            let mut asym2 = 0.0;
            let mut norm2 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let d = h[i * n + j] - h[j * n + i];
                    asym2 += d * d;
                    norm2 += h[i * n + j] * h[i * n + j];
                }
            }
            if norm2 == 0.0 {
                0.0
            } else {
                (asym2 / norm2).sqrt()
            }
        },
    )
}

/// `||H||_F >= ||H||_2` (power-iteration estimate) up to relative slack,
/// which is what makes the Frobenius substitution in the gain rule safe.
pub fn frobenius_dominance_check(
    system: &dyn System,
    lyapunov: &LyapunovFunction,
    seed: u64,
    samples: usize,
) -> CheckReport {
    worst_over_samples(
        "frobenius_dominance",
        system,
        seed,
        samples,
        FROBENIUS_DOMINANCE_TOL,
        |x| {
            let frob = match lyapunov.hess_norm_frobenius(x) {
                Ok(v) => v,
                Err(_) => return f64::INFINITY,
            };
            let spectral = match lyapunov.hess_norm_spectral(x) {
                Ok(v) => v,
                Err(_) => return f64::INFINITY,
            };
            if spectral == 0.0 {
                0.0
            } else {
                ((spectral - frob) / spectral).max(0.0)
            }
        },
    )
}

/// The three suites run by the `check` command, in report order.
pub fn standard_checks(
    system: &dyn System,
    lyapunov: &LyapunovFunction,
    seed: u64,
    samples: usize,
) -> Vec<CheckReport> {
    vec![
        orthogonality_check(system, lyapunov, seed, samples),
        gradient_consistency_check(system, lyapunov, seed, samples),
        hessian_symmetry_check(system, lyapunov, seed, samples),
    ]
}
