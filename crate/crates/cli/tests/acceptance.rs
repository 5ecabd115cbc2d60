//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with --nocapture to see them). Tolerances are pinned in the
//! constants below.

use std::collections::HashSet;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use feedback_integrators::baselines::{
    rigid_body_axis_flow, run_stormer_verlet_kepler, run_strang_splitting, stormer_verlet_step,
};
use feedback_integrators::checks::{
    gradient_consistency_check, hessian_symmetry_check, orthogonality_check,
};
use feedback_integrators::problems::{build_problem, Kepler, ProblemKind, RigidBody};
use feedback_integrators::{
    block_length, estimate_lipschitz, integrate, GainPolicy, HessNorm, LyapunovFunction, Observer,
    RunConfig, RunRecord, StateVector, Stepper, System, Trajectory, DEFAULT_PROBE_H,
};

const SEED: u64 = 42;

fn pass(criterion: &str, detail: String) {
    println!("[acceptance {criterion}] PASS: {detail}");
}

fn within_pct(value: f64, target: f64, pct: f64) -> bool {
    (value - target).abs() <= pct / 100.0 * target.abs()
}

fn run_kepler(gain: &GainPolicy, h: f64, periods: f64) -> (Trajectory, RunRecord) {
    let b = build_problem(ProblemKind::Kepler);
    let cfg = RunConfig::new(h, periods * Kepler::PERIOD);
    integrate(
        b.system.as_ref(),
        &b.lyapunov,
        Stepper::Euler,
        Some(gain),
        &b.initial_state,
        &cfg,
        &mut [],
    )
    .unwrap()
}

/// 1. (A1) orthogonality of the feedback direction against the flow at 1000
///    seeded random domain states per problem, residual <= 1e-9 normalized.
#[test]
fn acceptance_01_orthogonality() {
    let mut details = Vec::new();
    for kind in ProblemKind::ALL {
        let b = build_problem(kind);
        let report = orthogonality_check(b.system.as_ref(), &b.lyapunov, SEED, 1000);
        assert!(
            report.passed(),
            "[acceptance 1] FAIL: {} worst residual {:e} > {:e}",
            kind.name(),
            report.worst,
            report.tolerance
        );
        details.push(format!("{} {:.2e}", kind.name(), report.worst));
    }
    pass("1", format!("orthogonality residuals: {}", details.join(", ")));
}

/// 2. Analytic gradient vs central differences (<= 1e-6 relative) and
///    finite-difference Hessian asymmetry (<= 1e-3 relative), 100 states.
#[test]
fn acceptance_02_gradient_hessian_consistency() {
    let mut details = Vec::new();
    for kind in ProblemKind::ALL {
        let b = build_problem(kind);
        let grad = gradient_consistency_check(b.system.as_ref(), &b.lyapunov, SEED, 100);
        assert!(
            grad.passed(),
            "[acceptance 2] FAIL: {} gradient residual {:e}",
            kind.name(),
            grad.worst
        );
        let hess = hessian_symmetry_check(b.system.as_ref(), &b.lyapunov, SEED, 100);
        assert!(
            hess.passed(),
            "[acceptance 2] FAIL: {} hessian asymmetry {:e}",
            kind.name(),
            hess.worst
        );
        details.push(format!("{} grad {:.1e} asym {:.1e}", kind.name(), grad.worst, hess.worst));
    }
    pass("2", details.join(", "));
}

/// 3. Exact-flow conservation oracle: RK4 at h = 1e-5 over [0, 10] keeps
///    every tracked first integral within 1e-7 of its initial value.
#[test]
fn acceptance_03_exact_flow_conservation() {
    let mut details = Vec::new();
    for kind in ProblemKind::ALL {
        let b = build_problem(kind);
        let cfg = RunConfig::new(1e-5, 10.0);
        let (_t, rec) = integrate(
            b.system.as_ref(),
            &b.lyapunov,
            Stepper::Rk4,
            None,
            &b.initial_state,
            &cfg,
            &mut [],
        )
        .unwrap();
        assert!(!rec.diverged);
        for (name, dev) in &rec.deviations {
            assert!(
                *dev <= 1e-7,
                "[acceptance 3] FAIL: {} dev_{name} = {dev:e} > 1e-7",
                kind.name()
            );
        }
        details.push(format!("{} worst {:.1e}", kind.name(), rec.max_deviation()));
    }
    pass("3", details.join(", "));
}

/// 4. Kepler period: an RK4 reference returns within 1e-3 (position norm)
///    of the initial state at t = 70.2481.
#[test]
fn acceptance_04_kepler_period_return() {
    let b = build_problem(ProblemKind::Kepler);
    let cfg = RunConfig::new(1e-4, Kepler::PERIOD);
    let (traj, rec) = integrate(
        b.system.as_ref(),
        &b.lyapunov,
        Stepper::Rk4,
        None,
        &b.initial_state,
        &cfg,
        &mut [],
    )
    .unwrap();
    assert!(!rec.diverged);
    let last = traj.last_state().unwrap();
    let dpos: f64 = (0..3)
        .map(|i| (last[i] - b.initial_state[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(
        dpos <= 1e-3,
        "[acceptance 4] FAIL: |x(T) - x_I| = {dpos:e} > 1e-3"
    );
    pass("4", format!("|x(T) - x_I| = {dpos:.3e}"));
}

/// 5. Lipschitz reproduction within +-5% of the published values:
///    Kepler 515.4 and perturbed 148.03 (Frobenius), rigid-body Frobenius
///    range within [2334.63, 2412.56] +- 5% (and spectral L 1986 +- 5%).
#[test]
fn acceptance_05_lipschitz_reproduction() {
    let kepler = build_problem(ProblemKind::Kepler);
    let est = estimate_lipschitz(
        kepler.system.as_ref(),
        &kepler.lyapunov,
        &kepler.initial_state,
        DEFAULT_PROBE_H,
        kepler.reference.probe_window,
        HessNorm::Frobenius,
    )
    .unwrap();
    assert!(
        within_pct(est.max, 515.4, 5.0),
        "[acceptance 5] FAIL: kepler L = {} not within 5% of 515.4",
        est.max
    );
    let kepler_l = est.max;

    let perturbed = build_problem(ProblemKind::PerturbedKepler);
    let est = estimate_lipschitz(
        perturbed.system.as_ref(),
        &perturbed.lyapunov,
        &perturbed.initial_state,
        DEFAULT_PROBE_H,
        perturbed.reference.probe_window,
        HessNorm::Frobenius,
    )
    .unwrap();
    assert!(
        within_pct(est.max, 148.03, 5.0),
        "[acceptance 5] FAIL: perturbed L = {} not within 5% of 148.03",
        est.max
    );
    let perturbed_l = est.max;

    let rigid = build_problem(ProblemKind::RigidBody);
    let frob = estimate_lipschitz(
        rigid.system.as_ref(),
        &rigid.lyapunov,
        &rigid.initial_state,
        DEFAULT_PROBE_H,
        rigid.reference.probe_window,
        HessNorm::Frobenius,
    )
    .unwrap();
    assert!(
        within_pct(frob.min, 2334.63, 5.0),
        "[acceptance 5] FAIL: rigid Frobenius min = {} not within 5% of 2334.63",
        frob.min
    );
    assert!(
        within_pct(frob.max, 2412.56, 5.0),
        "[acceptance 5] FAIL: rigid Frobenius max = {} not within 5% of 2412.56",
        frob.max
    );
    let spec = estimate_lipschitz(
        rigid.system.as_ref(),
        &rigid.lyapunov,
        &rigid.initial_state,
        DEFAULT_PROBE_H,
        rigid.reference.probe_window,
        HessNorm::Spectral,
    )
    .unwrap();
    assert!(
        within_pct(spec.max, 1986.0, 5.0),
        "[acceptance 5] FAIL: rigid spectral L = {} not within 5% of 1986.0",
        spec.max
    );
    pass(
        "5",
        format!(
            "kepler L {kepler_l:.1}, perturbed L {perturbed_l:.2}, rigid frobenius [{:.1}, {:.1}] spectral {:.1}",
            frob.min, frob.max, spec.max
        ),
    );
}

/// 6a. Unity gain at h = 1e-2 diverges within 10 periods.
#[test]
fn acceptance_06a_unity_diverges_at_coarse_step() {
    let (_t, rec) = run_kepler(&GainPolicy::Unity, 1e-2, 10.0);
    assert!(
        rec.diverged,
        "[acceptance 6a] FAIL: unity gain at h=1e-2 did not diverge"
    );
    pass("6a", format!("unity h=1e-2 diverged at step {:?}", rec.divergence_step));
}

/// 6b. Unity gain at h = 1e-3 either diverges or its max integral deviation
///     is >= 10x that of alpha = 1/(hL) at the same h.
///
/// Expected to fail: at h = 1e-3 the optimal gain 1/(h*515.4) = 1.94 is only
/// 1.94x unity, so the measured gap is ~2x, not 10x; the orders-of-magnitude
/// gap opens at smaller h (see acceptance_06d for the h = 1e-4 variant).
#[test]
fn acceptance_06b_unity_gap_at_desk_step() {
    let (_t, unity) = run_kepler(&GainPolicy::Unity, 1e-3, 10.0);
    let (_t, invhl) = run_kepler(&GainPolicy::InverseHL(515.4), 1e-3, 10.0);
    let ratio = unity.max_deviation() / invhl.max_deviation();
    assert!(
        unity.diverged || ratio >= 10.0,
        "[acceptance 6b] FAIL: unity at h=1e-3 did not diverge and deviation ratio = {ratio:.2} < 10"
    );
    pass("6b", format!("deviation ratio {ratio:.2}"));
}

/// 6c. 1/(hL) and the adaptive gain both complete 10 periods at h = 1e-3
///     without divergence.
#[test]
fn acceptance_06c_stabilized_gains_complete() {
    let (_t, invhl) = run_kepler(&GainPolicy::InverseHL(515.4), 1e-3, 10.0);
    assert!(
        !invhl.diverged,
        "[acceptance 6c] FAIL: 1/(hL) diverged at h=1e-3"
    );
    let adaptive = GainPolicy::Adaptive { c: 1.1, h_min: 1e-10, t_update: 0.1 };
    let (_t, ad) = run_kepler(&adaptive, 1e-3, 10.0);
    assert!(
        !ad.diverged,
        "[acceptance 6c] FAIL: adaptive gain diverged at h=1e-3"
    );
    pass(
        "6c",
        format!("1/(hL) max_V {:.2e}, adaptive max_V {:.2e}", invhl.max_v, ad.max_v),
    );
}

/// 6d. Supplementary (not a stated criterion): the unity vs 1/(hL) gap does
///     reach 10x at h = 1e-4, where the optimal gain is 19.4x unity.
#[test]
fn acceptance_06d_unity_gap_at_small_step() {
    let (_t, unity) = run_kepler(&GainPolicy::Unity, 1e-4, 10.0);
    let (_t, invhl) = run_kepler(&GainPolicy::InverseHL(515.4), 1e-4, 10.0);
    let ratio = unity.max_deviation() / invhl.max_deviation();
    assert!(
        unity.diverged || ratio >= 10.0,
        "[acceptance 6d] FAIL: deviation ratio at h=1e-4 = {ratio:.2} < 10"
    );
    pass("6d", format!("deviation ratio {ratio:.2} at h=1e-4"));
}

struct PeriodMax<'a> {
    lyapunov: &'a LyapunovFunction,
    period: f64,
    buckets: Vec<f64>,
}

impl Observer for PeriodMax<'_> {
    fn on_step(&mut self, _step: usize, t: f64, x: &StateVector, _alpha: f64) {
        let idx = (t / self.period) as usize;
        if self.buckets.len() <= idx {
            self.buckets.resize(idx + 1, 0.0);
        }
        let v = self.lyapunov.value(x);
        if v > self.buckets[idx] {
            self.buckets[idx] = v;
        }
    }
}

/// 7. Positive invariance at desk scale: with alpha = 1/(hL) at h = 1e-3,
///    max V over periods 2..10 is at most 10x max V over period 1.
#[test]
fn acceptance_07_no_secular_growth_of_v() {
    let b = build_problem(ProblemKind::Kepler);
    let mut obs = PeriodMax {
        lyapunov: &b.lyapunov,
        period: Kepler::PERIOD,
        buckets: Vec::new(),
    };
    let cfg = RunConfig::new(1e-3, 10.0 * Kepler::PERIOD);
    let (_t, rec) = integrate(
        b.system.as_ref(),
        &b.lyapunov,
        Stepper::Euler,
        Some(&GainPolicy::InverseHL(515.4)),
        &b.initial_state,
        &cfg,
        &mut [&mut obs],
    )
    .unwrap();
    assert!(!rec.diverged);
    assert!(obs.buckets.len() >= 10);
    let first = obs.buckets[0];
    let later = obs.buckets[1..10].iter().cloned().fold(0.0, f64::max);
    assert!(
        later <= 10.0 * first,
        "[acceptance 7] FAIL: max V periods 2-10 = {later:e} > 10x period 1 = {first:e}"
    );
    pass("7", format!("period-1 max V {first:.3e}, periods 2-10 max V {later:.3e}"));
}

struct AdaptiveAudit<'a> {
    lyapunov: &'a LyapunovFunction,
    prev: StateVector,
    h: f64,
    c: f64,
    h_min: f64,
    block: usize,
    worst_identity: f64,
    alphas: Vec<f64>,
}

impl Observer for AdaptiveAudit<'_> {
    fn on_start(&mut self, x0: &StateVector) {
        self.prev = x0.clone();
    }
    fn on_step(&mut self, step: usize, _t: f64, x: &StateVector, alpha: f64) {
        if (step - 1).is_multiple_of(self.block) {
            // The gain for this block was computed from the pre-step state.
            let b = self
                .lyapunov
                .hess_norm_frobenius(&self.prev)
                .unwrap()
                .max(self.h_min);
            let residual = (self.h * alpha * self.c * b - 1.0).abs();
            if residual > self.worst_identity {
                self.worst_identity = residual;
            }
        }
        self.alphas.push(alpha);
        self.prev = x.clone();
    }
}

/// 8. Adaptive identity: |h A c max(||grad^2 V||_F, H_min) - 1| <= 4 eps_m at
///    every gain-update step; alpha is bit-constant within blocks;
///    n = ceil(T_update/h) exactly.
#[test]
fn acceptance_08_adaptive_identity() {
    let b = build_problem(ProblemKind::Kepler);
    let (h, c, h_min, t_update) = (1e-3, 1.1, 1e-10, 0.1);
    let n = block_length(t_update, h);
    assert_eq!(n, 100, "[acceptance 8] FAIL: ceil(0.1/1e-3) must be exactly 100");
    let mut audit = AdaptiveAudit {
        lyapunov: &b.lyapunov,
        prev: b.initial_state.clone(),
        h,
        c,
        h_min,
        block: n,
        worst_identity: 0.0,
        alphas: Vec::new(),
    };
    let cfg = RunConfig::new(h, 2.0);
    let policy = GainPolicy::Adaptive { c, h_min, t_update };
    let (_t, rec) = integrate(
        b.system.as_ref(),
        &b.lyapunov,
        Stepper::Euler,
        Some(&policy),
        &b.initial_state,
        &cfg,
        &mut [&mut audit],
    )
    .unwrap();
    assert!(!rec.diverged);
    assert!(
        audit.worst_identity <= 4.0 * f64::EPSILON,
        "[acceptance 8] FAIL: identity residual {:e} > 4 eps",
        audit.worst_identity
    );
    let mut blocks = 0;
    for chunk in audit.alphas.chunks(n) {
        blocks += 1;
        for a in chunk {
            assert_eq!(
                a.to_bits(),
                chunk[0].to_bits(),
                "[acceptance 8] FAIL: gain not bit-constant within block {blocks}"
            );
        }
    }
    pass(
        "8",
        format!(
            "identity residual {:.2e} over {blocks} blocks of n = {n}",
            audit.worst_identity
        ),
    );
}

/// 9. Baseline orders: global error ratio 4 +- 30% under h -> h/2 at t = 10
///    for both baselines; exact per-application conservation of each Strang
///    sub-flow (<= 8 ulp); Stoermer-Verlet round-trip reversibility
///    (<= 8 ulp per step pair).
#[test]
fn acceptance_09_baseline_orders() {
    // Strang splitting: energy-deviation ratio under step halving.
    let rb = RigidBody::standard();
    let bundle = build_problem(ProblemKind::RigidBody);
    let strang_err = |h: f64| {
        let cfg = RunConfig::new(h, 10.0);
        let (_t, rec) =
            run_strang_splitting(&rb, &bundle.lyapunov, &bundle.initial_state, &cfg, &mut [])
                .unwrap();
        rec.deviation("E").unwrap()
    };
    let strang_ratio = strang_err(1e-2) / strang_err(5e-3);
    assert!(
        (2.8..=5.2).contains(&strang_ratio),
        "[acceptance 9] FAIL: Strang error ratio {strang_ratio:.3} outside 4 +- 30%"
    );

    // Stoermer-Verlet on Kepler: Hamiltonian-deviation ratio.
    struct MaxH {
        reference: f64,
        worst: f64,
    }
    impl Observer for MaxH {
        fn on_step(&mut self, _s: usize, _t: f64, x: &StateVector, _a: f64) {
            let v2: f64 = x[3..6].iter().map(|v| v * v).sum();
            let r: f64 = x[..3].iter().map(|v| v * v).sum::<f64>().sqrt();
            let d = (0.5 * v2 - 1.0 / r - self.reference).abs();
            if d > self.worst {
                self.worst = d;
            }
        }
    }
    let kepler = Kepler::standard();
    let kb = build_problem(ProblemKind::Kepler);
    let sv_err = |h: f64| {
        let x0 = &kb.initial_state;
        let v2: f64 = x0[3..6].iter().map(|v| v * v).sum();
        let mut obs = MaxH { reference: 0.5 * v2 - 1.0, worst: 0.0 };
        let cfg = RunConfig::new(h, 10.0);
        run_stormer_verlet_kepler(&kepler, &kb.lyapunov, x0, &cfg, &mut [&mut obs]).unwrap();
        obs.worst
    };
    let sv_ratio = sv_err(1e-3) / sv_err(5e-4);
    assert!(
        (2.8..=5.2).contains(&sv_ratio),
        "[acceptance 9] FAIL: Stoermer-Verlet error ratio {sv_ratio:.3} outside 4 +- 30%"
    );

    // Per-application conservation of each axis sub-flow.
    let inertia = rb.inertia();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..100 {
        let mut state: Vec<f64> = (0..12).map(|_| rng.random_range(-1.5..1.5)).collect();
        for axis in 0..3 {
            let pi_before: Vec<f64> = (0..3).map(|k| inertia[k] * state[9 + k]).collect();
            let h_before = pi_before[axis] * pi_before[axis] / (2.0 * inertia[axis]);
            let n_before: f64 = pi_before.iter().map(|p| p * p).sum();
            rigid_body_axis_flow(&mut state, axis, 0.25, &inertia);
            let pi_after: Vec<f64> = (0..3).map(|k| inertia[k] * state[9 + k]).collect();
            let h_after = pi_after[axis] * pi_after[axis] / (2.0 * inertia[axis]);
            let n_after: f64 = pi_after.iter().map(|p| p * p).sum();
            assert!(
                (h_after - h_before).abs() <= 8.0 * f64::EPSILON * h_before.abs().max(1.0),
                "[acceptance 9] FAIL: sub-flow Hamiltonian drift"
            );
            assert!(
                (n_after - n_before).abs() <= 8.0 * f64::EPSILON * n_before.abs().max(1.0),
                "[acceptance 9] FAIL: sub-flow momentum-norm drift"
            );
        }
    }

    // Stoermer-Verlet round-trip reversibility.
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
                "[acceptance 9] FAIL: reversibility residual in component {k}"
            );
        }
    }
    pass(
        "9",
        format!("strang ratio {strang_ratio:.3}, verlet ratio {sv_ratio:.3}, ulp checks ok"),
    );
}

fn strip_cpu_column(csv: &str) -> String {
    let mut lines = csv.lines();
    let header = lines.next().expect("csv has a header");
    let cpu_idx = header
        .split(',')
        .position(|c| c == "cpu_seconds")
        .expect("cpu_seconds column present");
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let kept: Vec<&str> = cols
            .iter()
            .enumerate()
            .filter_map(|(i, c)| (i != cpu_idx).then_some(*c))
            .collect();
        out.push_str(&kept.join(","));
        out.push('\n');
    }
    out
}

/// 10. Determinism: repeated sweeps with the same config produce
///     byte-identical CSV (excluding cpu_seconds) at --jobs 1 and --jobs 4.
#[test]
fn acceptance_10_sweep_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = |jobs: &str, name: &str| -> String {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_fbint"))
            .args([
                "sweep",
                "--problem",
                "kepler",
                "--method",
                "feedback_euler:unity,feedback_euler:inverse_hl,adaptive_feedback,stormer_verlet",
                "--h-range",
                "1e-3:1e-1",
                "--points-per-decade",
                "3",
                "--periods",
                "10",
                "--seed",
                "42",
                "--jobs",
                jobs,
                "--out",
            ])
            .arg(&out)
            .status()
            .expect("sweep runs");
        assert!(status.success(), "[acceptance 10] FAIL: sweep exited {status}");
        std::fs::read_to_string(&out).unwrap()
    };
    let first = sweep("1", "a.csv");
    let second = sweep("1", "b.csv");
    let third = sweep("4", "c.csv");
    // Every requested cell appears exactly once: 4 methods x 7 grid points.
    assert_eq!(first.lines().count(), 1 + 4 * 7);
    let distinct: HashSet<&str> = first.lines().skip(1).collect();
    assert_eq!(distinct.len(), 4 * 7);
    let a = strip_cpu_column(&first);
    let b = strip_cpu_column(&second);
    let c = strip_cpu_column(&third);
    assert_eq!(a, b, "[acceptance 10] FAIL: repeated --jobs 1 sweeps differ");
    assert_eq!(a, c, "[acceptance 10] FAIL: --jobs 4 sweep differs from --jobs 1");
    pass("10", format!("{} identical records at jobs 1 and 4", 4 * 7));
}
