//! Structure-preserving reference methods: Strang splitting for the free
//! rigid body and Stoermer-Verlet for the Kepler family.

use crate::error::Error;
use crate::linalg::{axis_rotation3, matmul3, rotate_about_axis3};
use crate::lyapunov::LyapunovFunction;
use crate::problems::{Kepler, PerturbedKepler, RigidBody};
use crate::run::{run_loop, Observer, RunConfig, RunRecord, StepMap};
use crate::state::{StateVector, Trajectory};

/// Axis sequence of the symmetric composition, as `(axis, fraction of h)`
/// stages applied left to right. The default is the palindromic
/// `1(h/2), 2(h/2), 3(h), 2(h/2), 1(h/2)`.
#[derive(Clone, Debug)]
pub struct SplittingScheme {
    stages: Vec<(usize, f64)>,
}

impl Default for SplittingScheme {
    fn default() -> Self {
        Self {
            stages: vec![(0, 0.5), (1, 0.5), (2, 1.0), (1, 0.5), (0, 0.5)],
        }
    }
}

impl SplittingScheme {
    pub fn stages(&self) -> &[(usize, f64)] {
        &self.stages
    }

    /// Time symmetry requires the stage list to read the same in both
    /// directions, fractions included.
    pub fn is_palindromic(&self) -> bool {
        let n = self.stages.len();
        (0..n / 2).all(|i| self.stages[i] == self.stages[n - 1 - i])
    }
}

/// Exact flow of the sub-Hamiltonian `H_i = pi_i^2 / (2 I_i)` for time `t`,
/// acting on the rigid-body state layout (`R` row-major in 0..9, `Omega` in
/// 9..12).
///
/// With `pi = I Omega` and constant rate `omega = pi_i / I_i`, the body
/// momentum rotates about axis `e_i` through `-omega t`, `Omega` is recovered
/// as `I^{-1} pi`, and `R` is post-multiplied by the rotation about `e_i`
/// through `+omega t`. Each application conserves `pi_i` (hence `H_i`) and
/// `|pi|` up to rounding, and leaves the spatial momentum `R I Omega`
/// unchanged in exact arithmetic.
pub fn rigid_body_axis_flow(state: &mut [f64], axis: usize, t: f64, inertia: &[f64; 3]) {
    debug_assert!(axis < 3);
    let mut pi = [
        inertia[0] * state[9],
        inertia[1] * state[10],
        inertia[2] * state[11],
    ];
    let omega = pi[axis] / inertia[axis];
    let angle = omega * t;
    rotate_about_axis3(&mut pi, axis, -angle);
    for k in 0..3 {
        state[9 + k] = pi[k] / inertia[k];
    }
    let rot = axis_rotation3(axis, angle);
    let r_new = matmul3(&state[..9], &rot);
    state[..9].copy_from_slice(&r_new);
}

/// One step of the symmetric Strang composition for the free rigid body.
pub fn strang_splitting_step(state: &[f64], h: f64, inertia: &[f64; 3]) -> StateVector {
    strang_splitting_step_with(state, h, inertia, &SplittingScheme::default())
}

pub fn strang_splitting_step_with(
    state: &[f64],
    h: f64,
    inertia: &[f64; 3],
    scheme: &SplittingScheme,
) -> StateVector {
    let mut out = StateVector::from(state);
    for &(axis, fraction) in scheme.stages() {
        rigid_body_axis_flow(&mut out, axis, fraction * h, inertia);
    }
    out
}

/// One kick-drift-kick Stoermer-Verlet step for a separable second-order
/// system. The state is `(q, v)` split in halves; `accel` maps positions to
/// accelerations.
pub fn stormer_verlet_step(
    state: &[f64],
    h: f64,
    mut accel: impl FnMut(&[f64], &mut [f64]) -> Result<(), Error>,
) -> Result<StateVector, Error> {
    debug_assert!(state.len().is_multiple_of(2));
    let d = state.len() / 2;
    let mut out = StateVector::from(state);
    let mut a = vec![0.0; d];
    accel(&state[..d], &mut a)?;
    let (q, v) = out.as_mut_slice().split_at_mut(d);
    // v_half = v + (h/2) a(q)
    for k in 0..d {
        v[k] += 0.5 * h * a[k];
    }
    // q' = q + h v_half
    for k in 0..d {
        q[k] += h * v[k];
    }
    // v' = v_half + (h/2) a(q')
    accel(q, &mut a)?;
    for k in 0..d {
        v[k] += 0.5 * h * a[k];
    }
    Ok(out)
}

/// The baseline methods benchmarked against the feedback integrators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    /// Rigid body only.
    StrangSplitting,
    /// Kepler family only.
    StormerVerlet,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::StrangSplitting => "strang_splitting",
            Baseline::StormerVerlet => "stormer_verlet",
        }
    }
}

struct StrangMap {
    inertia: [f64; 3],
    scheme: SplittingScheme,
}

impl StepMap for StrangMap {
    fn advance(&mut self, x: &[f64], h: f64, out: &mut [f64]) -> Result<(), Error> {
        let next = strang_splitting_step_with(x, h, &self.inertia, &self.scheme);
        out.copy_from_slice(&next);
        Ok(())
    }
}

type AccelFn<'a> = Box<dyn FnMut(&[f64], &mut [f64]) -> Result<(), Error> + 'a>;

struct VerletMap<'a> {
    accel: AccelFn<'a>,
}

impl StepMap for VerletMap<'_> {
    fn advance(&mut self, x: &[f64], h: f64, out: &mut [f64]) -> Result<(), Error> {
        let next = stormer_verlet_step(x, h, &mut self.accel)?;
        out.copy_from_slice(&next);
        Ok(())
    }
}

/// Runs the Strang splitting baseline through the common metric-collecting
/// loop (the Lyapunov function is evaluated for metrics only; no feedback).
pub fn run_strang_splitting(
    system: &RigidBody,
    lyapunov: &LyapunovFunction,
    x0: &StateVector,
    cfg: &RunConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<(Trajectory, RunRecord), Error> {
    let mut map = StrangMap {
        inertia: system.inertia(),
        scheme: SplittingScheme::default(),
    };
    run_loop(system, lyapunov, &mut map, x0, cfg, observers)
}

pub fn run_stormer_verlet_kepler(
    system: &Kepler,
    lyapunov: &LyapunovFunction,
    x0: &StateVector,
    cfg: &RunConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<(Trajectory, RunRecord), Error> {
    let mut map = VerletMap {
        accel: Box::new(|q: &[f64], out: &mut [f64]| system.acceleration(q, out)),
    };
    run_loop(system, lyapunov, &mut map, x0, cfg, observers)
}

pub fn run_stormer_verlet_perturbed(
    system: &PerturbedKepler,
    lyapunov: &LyapunovFunction,
    x0: &StateVector,
    cfg: &RunConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<(Trajectory, RunRecord), Error> {
    let mut map = VerletMap {
        accel: Box::new(|q: &[f64], out: &mut [f64]| system.acceleration(q, out)),
    };
    run_loop(system, lyapunov, &mut map, x0, cfg, observers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot3;
    use crate::system::System;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    fn body_momentum(state: &[f64], inertia: &[f64; 3]) -> [f64; 3] {
        [
            inertia[0] * state[9],
            inertia[1] * state[10],
            inertia[2] * state[11],
        ]
    }

    fn sub_hamiltonian(state: &[f64], inertia: &[f64; 3], axis: usize) -> f64 {
        let pi = body_momentum(state, inertia);
        pi[axis] * pi[axis] / (2.0 * inertia[axis])
    }

    #[test]
    fn default_scheme_is_palindromic() {
        assert!(SplittingScheme::default().is_palindromic());
    }

    #[test]
    fn axis_flow_at_zero_time_is_identity() {
        let inertia = [3.0, 2.0, 1.0];
        let orig: Vec<f64> = RigidBody::initial_state().to_vec();
        for axis in 0..3 {
            let mut state = orig.clone();
            rigid_body_axis_flow(&mut state, axis, 0.0, &inertia);
            assert_eq!(state, orig);
        }
    }

    #[test]
    fn axis_flow_conserves_its_hamiltonian_and_momentum_norm() {
        let inertia = [3.0, 2.0, 1.0];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut state: Vec<f64> = (0..12).map(|_| rng.random_range(-1.5..1.5)).collect();
            for axis in 0..3 {
                let h_before = sub_hamiltonian(&state, &inertia, axis);
                let pi_before = body_momentum(&state, &inertia);
                let n_before = dot3(&pi_before, &pi_before);
                rigid_body_axis_flow(&mut state, axis, 0.37, &inertia);
                let h_after = sub_hamiltonian(&state, &inertia, axis);
                let pi_after = body_momentum(&state, &inertia);
                let n_after = dot3(&pi_after, &pi_after);
                let ulp = f64::EPSILON;
                assert!((h_after - h_before).abs() <= 8.0 * ulp * h_before.abs().max(1.0));
                assert!((n_after - n_before).abs() <= 8.0 * ulp * n_before.abs().max(1.0));
            }
        }
    }

    #[test]
    fn axis_aligned_momentum_is_fixed_and_rotates_r() {
        let inertia = [3.0, 2.0, 1.0];
        let mut state = vec![0.0; 12];
        state[..9].copy_from_slice(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        state[9] = 0.5; // pi = (1.5, 0, 0) along e_1
        let t = 0.8;
        let omega = inertia[0] * state[9] / inertia[0];
        rigid_body_axis_flow(&mut state, 0, t, &inertia);
        assert_eq!(&state[9..12], &[0.5, 0.0, 0.0]);
        let expected = axis_rotation3(0, omega * t);
        for i in 0..9 {
            assert_abs_diff_eq!(state[i], expected[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn strang_step_preserves_spatial_momentum_to_rounding() {
        let inertia = [3.0, 2.0, 1.0];
        let x = RigidBody::initial_state();
        let rb = RigidBody::standard();
        let pi0 = rb.integrals()[1].value(&x);
        let next = strang_splitting_step(&x, 1e-2, &inertia);
        let pi1 = rb.integrals()[1].value(&next);
        for k in 0..3 {
            assert_abs_diff_eq!(pi0[k], pi1[k], epsilon = 1e-13);
        }
    }

    #[test]
    fn verlet_free_drift() {
        let state = [1.0, 2.0, 3.0, 0.5, -0.5, 0.25];
        let next = stormer_verlet_step(&state, 0.1, |_q, out| {
            out.fill(0.0);
            Ok(())
        })
        .unwrap();
        assert_eq!(next[0], 1.0 + 0.1 * 0.5);
        assert_eq!(next[1], 2.0 - 0.1 * 0.5);
        assert_eq!(next[2], 3.0 + 0.1 * 0.25);
        assert_eq!(&next[3..6], &state[3..6]);
    }

    #[test]
    fn verlet_harmonic_oscillator_hand_values() {
        // a(q) = -q, q = 1, v = 0, h = 0.1:
        //   v_half = -0.05, q' = 0.995, v' = -0.05 + 0.05*(-0.995) = -0.09975.
        let state = [1.0, 0.0];
        let next = stormer_verlet_step(&state, 0.1, |q, out| {
            out[0] = -q[0];
            Ok(())
        })
        .unwrap();
        assert_relative_eq!(next[0], 0.995, max_relative = 1e-15);
        assert_relative_eq!(next[1], -0.09975, max_relative = 1e-15);
    }

    #[test]
    fn verlet_round_trip_reversibility() {
        let kepler = Kepler::standard();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let accel = |q: &[f64], out: &mut [f64]| kepler.acceleration(q, out);
        for _ in 0..100 {
            let orig = kepler.sample_domain_state(&mut rng);
            let h = 0.05;
            let fwd = stormer_verlet_step(&orig, h, accel).unwrap();
            let mut flipped = fwd.clone();
            for k in 3..6 {
                flipped[k] = -flipped[k];
            }
            let back = stormer_verlet_step(&flipped, h, accel).unwrap();
            let scale = orig.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for k in 0..6 {
                let expect = if k < 3 { back[k] } else { -back[k] };
                assert!(
                    (expect - orig[k]).abs() <= 8.0 * f64::EPSILON * scale,
                    "component {k}: {} vs {}",
                    expect,
                    orig[k]
                );
            }
        }
    }

    #[test]
    fn strang_global_energy_error_is_second_order() {
        let rb = RigidBody::standard();
        let x0 = RigidBody::initial_state();
        let lyap = rb.lyapunov(&x0);
        let err = |h: f64| {
            let cfg = RunConfig::new(h, 10.0);
            let (_t, rec) = run_strang_splitting(&rb, &lyap, &x0, &cfg, &mut []).unwrap();
            rec.deviation("E").unwrap()
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!(
            (2.8..=5.2).contains(&ratio),
            "expected ratio 4 +- 30%, got {ratio}"
        );
    }

    #[test]
    fn strang_spatial_momentum_has_no_secular_drift() {
        // Spatial momentum deviation over [0, 100] at h = 1e-3 stays at
        // round-off level: the late-window maximum is at most twice the
        // early-window maximum.
        struct WindowedDev<'a> {
            rb: &'a RigidBody,
            reference: Vec<f64>,
            early: f64,
            late: f64,
        }
        impl Observer for WindowedDev<'_> {
            fn on_step(&mut self, _s: usize, t: f64, x: &StateVector, _a: f64) {
                let pi = self.rb.integrals()[1].value(x);
                let dev = pi
                    .iter()
                    .zip(&self.reference)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if t <= 50.0 {
                    self.early = self.early.max(dev);
                } else {
                    self.late = self.late.max(dev);
                }
            }
        }
        let rb = RigidBody::standard();
        let x0 = RigidBody::initial_state();
        let lyap = rb.lyapunov(&x0);
        let mut obs = WindowedDev {
            rb: &rb,
            reference: rb.integrals()[1].value(&x0),
            early: 0.0,
            late: 0.0,
        };
        let cfg = RunConfig::new(1e-3, 100.0);
        let (_t, rec) = run_strang_splitting(&rb, &lyap, &x0, &cfg, &mut [&mut obs]).unwrap();
        assert!(!rec.diverged);
        assert!(obs.early > 0.0);
        assert!(
            obs.late <= 2.0 * obs.early,
            "late-window dev {} vs early-window dev {}",
            obs.late,
            obs.early
        );
    }

    #[test]
    fn strang_one_step_local_error_is_third_order() {
        // One Strang step vs an RK4 reference at h_ref = h/100.
        let rb = RigidBody::standard();
        let x0 = RigidBody::initial_state();
        let lyap = rb.lyapunov(&x0);
        let h = 1e-3;
        let one = strang_splitting_step(&x0, h, &rb.inertia());
        let cfg = RunConfig::new(h / 100.0, h);
        let (traj, _rec) = crate::run::integrate(
            &rb,
            &lyap,
            crate::stepper::Stepper::Rk4,
            None,
            &x0,
            &cfg,
            &mut [],
        )
        .unwrap();
        let reference = traj.last_state().unwrap();
        let diff: f64 = one
            .iter()
            .zip(reference.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 10.0 * h * h * h, "local error {diff:e} > 10 h^3");
    }
}
