//! Fixed-step one-step methods.

use crate::error::Error;
use crate::state::StateVector;
use crate::system::VectorField;

/// One-step method applied to a (possibly feedback-augmented) vector field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stepper {
    Euler,
    Rk4,
}

impl Stepper {
    pub fn name(self) -> &'static str {
        match self {
            Stepper::Euler => "euler",
            Stepper::Rk4 => "rk4",
        }
    }
}

/// Scratch buffers for in-place stepping; one per run, reused every step.
pub(crate) struct StepScratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl StepScratch {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }
}

pub(crate) fn euler_step_into<F: VectorField + ?Sized>(
    field: &mut F,
    x: &[f64],
    h: f64,
    scratch: &mut StepScratch,
    out: &mut [f64],
) -> Result<(), Error> {
    field.eval(x, &mut scratch.k1)?;
    for i in 0..x.len() {
        out[i] = x[i] + h * scratch.k1[i];
    }
    Ok(())
}

pub(crate) fn rk4_step_into<F: VectorField + ?Sized>(
    field: &mut F,
    x: &[f64],
    h: f64,
    scratch: &mut StepScratch,
    out: &mut [f64],
) -> Result<(), Error> {
    let n = x.len();
    field.eval(x, &mut scratch.k1)?;
    for ((tmp, xi), k) in scratch.tmp.iter_mut().zip(x).zip(&scratch.k1) {
        *tmp = xi + 0.5 * h * k;
    }
    field.eval(&scratch.tmp, &mut scratch.k2)?;
    for ((tmp, xi), k) in scratch.tmp.iter_mut().zip(x).zip(&scratch.k2) {
        *tmp = xi + 0.5 * h * k;
    }
    field.eval(&scratch.tmp, &mut scratch.k3)?;
    for ((tmp, xi), k) in scratch.tmp.iter_mut().zip(x).zip(&scratch.k3) {
        *tmp = xi + h * k;
    }
    field.eval(&scratch.tmp, &mut scratch.k4)?;
    for i in 0..n {
        out[i] = x[i]
            + h / 6.0 * (scratch.k1[i] + 2.0 * scratch.k2[i] + 2.0 * scratch.k3[i] + scratch.k4[i]);
    }
    Ok(())
}

pub(crate) fn step_into<F: VectorField + ?Sized>(
    stepper: Stepper,
    field: &mut F,
    x: &[f64],
    h: f64,
    scratch: &mut StepScratch,
    out: &mut [f64],
) -> Result<(), Error> {
    match stepper {
        Stepper::Euler => euler_step_into(field, x, h, scratch, out),
        Stepper::Rk4 => rk4_step_into(field, x, h, scratch, out),
    }
}

/// Explicit Euler update `x + h Y(x)` of the supplied field.
pub fn euler_step<F: VectorField + ?Sized>(
    field: &mut F,
    x: &StateVector,
    h: f64,
) -> Result<StateVector, Error> {
    let mut scratch = StepScratch::new(x.dim());
    let mut out = StateVector::zeros(x.dim());
    euler_step_into(field, x, h, &mut scratch, out.as_mut_slice())?;
    if !out.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(out)
}

/// Classical 4-stage Runge-Kutta update of the supplied field.
pub fn rk4_step<F: VectorField + ?Sized>(
    field: &mut F,
    x: &StateVector,
    h: f64,
) -> Result<StateVector, Error> {
    let mut scratch = StepScratch::new(x.dim());
    let mut out = StateVector::zeros(x.dim());
    rk4_step_into(field, x, h, &mut scratch, out.as_mut_slice())?;
    if !out.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(out)
}
