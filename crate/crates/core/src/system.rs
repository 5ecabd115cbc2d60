//! Dynamical systems, their first integrals, and evaluatable vector fields.

use std::sync::Arc;

use rand::RngCore;

use crate::error::Error;
use crate::lyapunov::LyapunovFunction;
use crate::state::StateVector;

type EvalFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A (possibly vector-valued) first integral of a dynamical system.
///
/// `value` writes the `dim` components of the integral; `jacobian` writes the
/// `dim x n` Jacobian row-major, where `n` is the state dimension. Both
/// closures are shared so an integral can be used simultaneously by a system
/// definition and a Lyapunov function built from it.
#[derive(Clone)]
pub struct Integral {
    name: String,
    dim: usize,
    value: Arc<EvalFn>,
    jacobian: Arc<EvalFn>,
}

impl Integral {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        value: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        jacobian: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            value: Arc::new(value),
            jacobian: Arc::new(jacobian),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of components of the integral's value.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        (self.value)(x, out);
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.value_into(x, &mut out);
        out
    }

    /// Row-major `dim x n` Jacobian into `out` (`out.len() == dim * n`).
    pub fn jacobian_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim * x.len());
        (self.jacobian)(x, out);
    }
}

impl std::fmt::Debug for Integral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Integral")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

/// A conserved residual tracked for run metrics but not part of the
/// sums-of-squares Lyapunov terms (e.g. the rigid-body orthogonality defect
/// `vec(R^T R - I)`, whose Lyapunov contribution enters through the penalty).
#[derive(Clone)]
pub struct Constraint {
    name: String,
    dim: usize,
    value: Arc<EvalFn>,
}

impl Constraint {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        value: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            value: Arc::new(value),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        (self.value)(x, out);
    }
}

impl std::fmt::Debug for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Constraint")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

/// A dynamical system extended to an open subset of `R^n`.
///
/// Implementations are immutable after construction and shareable across
/// concurrent runs; all evaluation goes through `&self`.
pub trait System: Send + Sync {
    /// Short identifier (`rigid_body`, `kepler`, `perturbed_kepler`).
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    /// Evaluates the extended vector field `f(x)` into `out`.
    ///
    /// Returns [`Error::DomainExit`] when `x` is outside the open set the
    /// extension is defined on (e.g. at the Kepler collision singularity).
    fn field(&self, x: &[f64], out: &mut [f64]) -> Result<(), Error>;

    /// Membership in the open domain `U`.
    fn in_domain(&self, x: &[f64]) -> bool;

    fn integrals(&self) -> &[Integral];

    fn constraints(&self) -> &[Constraint] {
        &[]
    }

    /// Draws a random state from the domain, for the property-check suites.
    /// States are sampled off the invariant manifold on purpose.
    fn sample_domain_state(&self, rng: &mut dyn RngCore) -> StateVector;
}

/// Anything a one-step method can integrate.
///
/// Evaluation takes `&mut self` so implementations can keep scratch buffers.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&mut self, x: &[f64], out: &mut [f64]) -> Result<(), Error>;
}

/// The surrogate vector field `Y(x) = f(x) - alpha * grad V(x)`.
///
/// With `alpha = 0` this evaluates the raw field. On the attractor set the
/// gradient vanishes and the surrogate coincides with `f` exactly.
pub struct SurrogateField<'a> {
    system: &'a dyn System,
    lyapunov: &'a LyapunovFunction,
    alpha: f64,
    grad: Vec<f64>,
}

impl<'a> SurrogateField<'a> {
    pub fn new(system: &'a dyn System, lyapunov: &'a LyapunovFunction, alpha: f64) -> Self {
        assert_eq!(system.dim(), lyapunov.dim());
        let n = system.dim();
        Self {
            system,
            lyapunov,
            alpha,
            grad: vec![0.0; n],
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }
}

impl VectorField for SurrogateField<'_> {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn eval(&mut self, x: &[f64], out: &mut [f64]) -> Result<(), Error> {
        self.system.field(x, out)?;
        if self.alpha != 0.0 {
            self.lyapunov.gradient_into(x, &mut self.grad);
            for (o, g) in out.iter_mut().zip(&self.grad) {
                *o -= self.alpha * g;
            }
        }
        Ok(())
    }
}

/// Adapter exposing a raw [`System`] field as a [`VectorField`].
pub struct RawField<'a>(pub &'a dyn System);

impl VectorField for RawField<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&mut self, x: &[f64], out: &mut [f64]) -> Result<(), Error> {
        self.0.field(x, out)
    }
}
