//! Feedback integrators: fixed-step numerical integration that preserves
//! first integrals and manifold constraints by augmenting the vector field
//! with a stabilizing gradient-feedback term.
//!
//! Instead of integrating `xdot = f(x)` directly, the library integrates the
//! surrogate system `xdot = f(x) - alpha grad V(x)`, where `V` is a
//! sums-of-squares Lyapunov function built from the system's first integrals
//! (plus an optional manifold penalty). `V` vanishes exactly on the set of
//! states with the correct integral values, so the feedback term is inactive
//! there and pushes drifting iterates back toward it.
//!
//! The crate provides:
//!
//! - explicit Euler and classical RK4 steppers over arbitrary vector fields
//!   ([`euler_step`], [`rk4_step`], [`integrate`]);
//! - Lyapunov construction with analytic gradients and finite-difference
//!   Hessian norms ([`build_sos_lyapunov`], [`LyapunovFunction`]);
//! - gain policies: unity, fixed, the optimal `1/(hL)` rule, and a blockwise
//!   adaptive gain, plus the trajectory-based Lipschitz estimate
//!   ([`GainPolicy`], [`estimate_lipschitz`]);
//! - three benchmark problems (free rigid body on SO(3), Kepler, perturbed
//!   Kepler) with their canonical parameters ([`problems`]);
//! - two structure-preserving baselines (Strang splitting, Stoermer-Verlet)
//!   ([`baselines`]);
//! - seeded property-check suites ([`checks`]).

pub mod baselines;
pub mod checks;
mod error;
pub mod gain;
mod linalg;
pub mod lyapunov;
pub mod problems;
mod run;
mod state;
mod stepper;
mod system;

pub use error::Error;
pub use gain::{
    adaptive_driver, adaptive_gain, block_length, estimate_lipschitz, resolve_fixed_gain,
    GainPolicy, LipschitzEstimate, DEFAULT_PROBE_H,
};
pub use lyapunov::{
    build_sos_lyapunov, fd_gradient, orthogonality_penalty, HessNorm, LyapunovFunction,
    OrthogonalityPenalty,
};
pub use run::{integrate, run_loop, Observer, RunConfig, RunRecord, StepMap};
pub use state::{StateVector, Trajectory};
pub use stepper::{euler_step, rk4_step, Stepper};
pub use system::{Constraint, Integral, RawField, SurrogateField, System, VectorField};
