//! Free rigid body motion extended from SO(3) x R^3 to R^{3x3} x R^3.
//!
//! State layout: rotation matrix `R` flattened row-major in entries 0..9,
//! body angular velocity `Omega` in entries 9..12. The extended dynamics are
//! `Rdot = R hat(Omega)`, `Omegadot = I^{-1}((I Omega) x Omega)`; kinetic
//! energy and spatial angular momentum are first integrals.

use rand::{Rng, RngCore};

use crate::error::Error;
use crate::linalg::{cross3, det3, hat3, matmul3, rotation_from_axis_angle};
use crate::lyapunov::{build_sos_lyapunov, LyapunovFunction, OrthogonalityPenalty};
use crate::state::StateVector;
use crate::system::{Constraint, Integral, System};

/// Extended free rigid body with a positive-diagonal inertia tensor.
pub struct RigidBody {
    inertia: [f64; 3],
    integrals: Vec<Integral>,
    constraints: Vec<Constraint>,
}

impl RigidBody {
    pub const DIM: usize = 12;

    /// Lyapunov weights `(k0, k1, k2)`: orthogonality penalty, energy,
    /// spatial momentum.
    pub const WEIGHTS: (f64, f64, f64) = (50.0, 100.0, 50.0);

    pub fn new(inertia: [f64; 3]) -> Self {
        assert!(inertia.iter().all(|i| *i > 0.0), "inertia must be positive");
        let energy = Integral::new(
            "E",
            1,
            move |x, out| {
                let w = &x[9..12];
                out[0] = 0.5
                    * (inertia[0] * w[0] * w[0]
                        + inertia[1] * w[1] * w[1]
                        + inertia[2] * w[2] * w[2]);
            },
            move |x, jac| {
                jac.fill(0.0);
                let w = &x[9..12];
                for k in 0..3 {
                    jac[9 + k] = inertia[k] * w[k];
                }
            },
        );
        let momentum = {
            Integral::new(
                "pi",
                3,
                move |x, out| {
                    let (r, w) = (&x[..9], &x[9..12]);
                    let iw = [inertia[0] * w[0], inertia[1] * w[1], inertia[2] * w[2]];
                    for i in 0..3 {
                        out[i] = r[3 * i] * iw[0] + r[3 * i + 1] * iw[1] + r[3 * i + 2] * iw[2];
                    }
                },
                move |x, jac| {
                    // pi_i = sum_k R_ik (I Omega)_k:
                    // d pi_i / d R_jk = delta_ij (I Omega)_k, d pi / d Omega = R I.
                    jac.fill(0.0);
                    let (r, w) = (&x[..9], &x[9..12]);
                    let iw = [inertia[0] * w[0], inertia[1] * w[1], inertia[2] * w[2]];
                    let n = Self::DIM;
                    for i in 0..3 {
                        for k in 0..3 {
                            jac[i * n + 3 * i + k] = iw[k];
                            jac[i * n + 9 + k] = r[3 * i + k] * inertia[k];
                        }
                    }
                },
            )
        };
        let orthogonality = Constraint::new("orth", 9, |x, out| {
            let r = &x[..9];
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        acc += r[3 * k + i] * r[3 * k + j];
                    }
                    out[3 * i + j] = if i == j { acc - 1.0 } else { acc };
                }
            }
        });
        Self {
            inertia,
            integrals: vec![energy, momentum],
            constraints: vec![orthogonality],
        }
    }

    /// The benchmark configuration `I = diag(3, 2, 1)`.
    pub fn standard() -> Self {
        Self::new([3.0, 2.0, 1.0])
    }

    pub fn inertia(&self) -> [f64; 3] {
        self.inertia
    }

    /// `R = I`, `Omega = (1, 1, 1)`; for the standard inertia this gives
    /// `E = 3` and `pi = (3, 2, 1)`.
    pub fn initial_state() -> StateVector {
        StateVector::new(vec![
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, //
            0.0, 0.0, 1.0, //
            1.0, 1.0, 1.0,
        ])
    }

    /// Sums-of-squares Lyapunov function anchored at `x_init` with the
    /// benchmark weights and the orthogonality penalty on the `R` block.
    pub fn lyapunov(&self, x_init: &[f64]) -> LyapunovFunction {
        let (k0, k1, k2) = Self::WEIGHTS;
        build_sos_lyapunov(
            &[
                (self.integrals[0].clone(), k1),
                (self.integrals[1].clone(), k2),
            ],
            x_init,
            Some(OrthogonalityPenalty { offset: 0, weight: k0 }),
        )
        .expect("benchmark weights are positive")
    }
}

impl System for RigidBody {
    fn name(&self) -> &'static str {
        "rigid_body"
    }

    fn dim(&self) -> usize {
        Self::DIM
    }

    fn field(&self, x: &[f64], out: &mut [f64]) -> Result<(), Error> {
        let (r, w) = (&x[..9], &x[9..12]);
        if det3(r) <= 0.0 {
            return Err(Error::domain_exit(format!("det(R) = {} <= 0", det3(r))));
        }
        let rdot = matmul3(r, &hat3(w));
        out[..9].copy_from_slice(&rdot);
        let iw = [
            self.inertia[0] * w[0],
            self.inertia[1] * w[1],
            self.inertia[2] * w[2],
        ];
        let torque = cross3(&iw, w);
        for k in 0..3 {
            out[9 + k] = torque[k] / self.inertia[k];
        }
        Ok(())
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        det3(&x[..9]) > 0.0
    }

    fn integrals(&self) -> &[Integral] {
        &self.integrals
    }

    fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn sample_domain_state(&self, rng: &mut dyn RngCore) -> StateVector {
        loop {
            let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let mut axis = [0.0; 3];
            loop {
                for a in &mut axis {
                    *a = rng.random_range(-1.0..1.0);
                }
                let n = crate::linalg::norm3(&axis);
                if n > 1e-3 {
                    axis.iter_mut().for_each(|a| *a /= n);
                    break;
                }
            }
            let w = [axis[0] * angle, axis[1] * angle, axis[2] * angle];
            let mut state = vec![0.0; Self::DIM];
            let rot = rotation_from_axis_angle(&w);
            // Off-manifold perturbation of the rotation block; stays in the
            // domain det(R) > 0 with overwhelming probability.
            for (dst, r) in state[..9].iter_mut().zip(rot) {
                *dst = r + rng.random_range(-0.05..0.05);
            }
            for dst in &mut state[9..12] {
                *dst = rng.random_range(-2.0..2.0);
            }
            let state = StateVector::new(state);
            if self.in_domain(&state) {
                return state;
            }
        }
    }
}
