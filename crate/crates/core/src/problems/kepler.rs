//! The Kepler two-body problem with angular momentum and the
//! Laplace-Runge-Lenz vector as first integrals.
//!
//! State layout: position `x` in entries 0..3, velocity `v` in entries 3..6.

use rand::{Rng, RngCore};

use crate::error::Error;
use crate::linalg::{cross3, dot3, norm3};
use crate::lyapunov::{build_sos_lyapunov, LyapunovFunction};
use crate::state::StateVector;
use crate::system::{Integral, System};

/// Collision guard: the open domain excludes a ball of this radius around
/// the origin so that near-singular states fail loudly instead of emitting
/// NaNs.
pub const COLLISION_RADIUS: f64 = 1e-12;

pub struct Kepler {
    mu: f64,
    integrals: Vec<Integral>,
}

impl Kepler {
    pub const DIM: usize = 6;

    /// Orbital period of the benchmark orbit (eccentricity 0.8).
    pub const PERIOD: f64 = 70.2481;

    /// Lyapunov weights `(k1, k2)` for the angular-momentum and
    /// Laplace-Runge-Lenz terms. Calibrated so the unity-gain probe
    /// reproduces the published Lipschitz estimate `L = 515.4` of this
    /// benchmark; the Hessian scale of `V` pins the weights up to the
    /// common factor fixed here.
    pub const WEIGHTS: (f64, f64) = (4.4, 2.2);

    pub fn new(mu: f64) -> Self {
        assert!(mu > 0.0, "gravitational parameter must be positive");
        let angular_momentum = Integral::new(
            "L",
            3,
            |x, out| {
                out.copy_from_slice(&cross3(&x[..3], &x[3..6]));
            },
            |x, jac| {
                // L = x cross v: dL/dx = -hat(v), dL/dv = hat(x).
                let (p, v) = (&x[..3], &x[3..6]);
                let n = Kepler::DIM;
                let hv = crate::linalg::hat3(v);
                let hp = crate::linalg::hat3(p);
                jac.fill(0.0);
                for i in 0..3 {
                    for j in 0..3 {
                        jac[i * n + j] = -hv[3 * i + j];
                        jac[i * n + 3 + j] = hp[3 * i + j];
                    }
                }
            },
        );
        let lrl = {
            Integral::new(
                "A",
                3,
                move |x, out| {
                    out.copy_from_slice(&laplace_runge_lenz(mu, &x[..3], &x[3..6]));
                },
                move |x, jac| {
                    // A = |v|^2 x - (x.v) v - mu x/r:
                    //   dA/dx = |v|^2 I - v v^T - mu (I/r - x x^T / r^3)
                    //   dA/dv = 2 x v^T - (x.v) I - v x^T
                    let (p, v) = (&x[..3], &x[3..6]);
                    let n = Kepler::DIM;
                    let r = norm3(p);
                    let r3 = r * r * r;
                    let v2 = dot3(v, v);
                    let xv = dot3(p, v);
                    for i in 0..3 {
                        for j in 0..3 {
                            let delta = if i == j { 1.0 } else { 0.0 };
                            jac[i * n + j] = v2 * delta - v[i] * v[j]
                                - mu * (delta / r - p[i] * p[j] / r3);
                            jac[i * n + 3 + j] =
                                2.0 * p[i] * v[j] - xv * delta - v[i] * p[j];
                        }
                    }
                },
            )
        };
        Self {
            mu,
            integrals: vec![angular_momentum, lrl],
        }
    }

    /// The benchmark configuration `mu = 1`.
    pub fn standard() -> Self {
        Self::new(1.0)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `x = (1, 0, 0)`, `v = (0, sqrt(1.8), 0)`: eccentricity 0.8,
    /// `L0 = (0, 0, sqrt(1.8))`, `A0 = (0.8, 0, 0)`.
    pub fn initial_state() -> StateVector {
        StateVector::new(vec![1.0, 0.0, 0.0, 0.0, 1.8f64.sqrt(), 0.0])
    }

    pub fn lyapunov(&self, x_init: &[f64]) -> LyapunovFunction {
        let (k1, k2) = Self::WEIGHTS;
        build_sos_lyapunov(
            &[
                (self.integrals[0].clone(), k1),
                (self.integrals[1].clone(), k2),
            ],
            x_init,
            None,
        )
        .expect("benchmark weights are positive")
    }

    /// Acceleration `-mu x / |x|^3` of the separable second-order form,
    /// used by the Stoermer-Verlet baseline.
    pub fn acceleration(&self, pos: &[f64], out: &mut [f64]) -> Result<(), Error> {
        let r = norm3(pos);
        if r < COLLISION_RADIUS {
            return Err(Error::domain_exit(format!("|x| = {r:e} at collision singularity")));
        }
        // Grouped as (mu/r^2)/r so the perturbed problem reduces to this
        // bit-for-bit at delta = 0.
        let scale = -(self.mu / (r * r)) / r;
        for k in 0..3 {
            out[k] = scale * pos[k];
        }
        Ok(())
    }
}

/// The Laplace-Runge-Lenz vector `A = v x (x x v) - mu x/|x|`.
pub fn laplace_runge_lenz(mu: f64, pos: &[f64], vel: &[f64]) -> [f64; 3] {
    let l = cross3(pos, vel);
    let vxl = cross3(vel, &l);
    let r = norm3(pos);
    [
        vxl[0] - mu * pos[0] / r,
        vxl[1] - mu * pos[1] / r,
        vxl[2] - mu * pos[2] / r,
    ]
}

impl System for Kepler {
    fn name(&self) -> &'static str {
        "kepler"
    }

    fn dim(&self) -> usize {
        Self::DIM
    }

    fn field(&self, x: &[f64], out: &mut [f64]) -> Result<(), Error> {
        let (pos_dot, accel) = out.split_at_mut(3);
        pos_dot.copy_from_slice(&x[3..6]);
        self.acceleration(&x[..3], accel)
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        norm3(&x[..3]) >= COLLISION_RADIUS
    }

    fn integrals(&self) -> &[Integral] {
        &self.integrals
    }

    fn sample_domain_state(&self, rng: &mut dyn RngCore) -> StateVector {
        let mut state = vec![0.0; Self::DIM];
        loop {
            for dst in &mut state[..3] {
                *dst = rng.random_range(-6.0..6.0);
            }
            let r = norm3(&state[..3]);
            if (0.3..=6.0).contains(&r) {
                break;
            }
        }
        for dst in &mut state[3..6] {
            *dst = rng.random_range(-2.5..2.5);
        }
        StateVector::new(state)
    }
}
