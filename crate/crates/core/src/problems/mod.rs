//! The three benchmark problems with their first integrals, canonical
//! initial data, Lyapunov weights and reference parameters.

pub mod kepler;
pub mod perturbed_kepler;
pub mod rigid_body;

pub use kepler::Kepler;
pub use perturbed_kepler::PerturbedKepler;
pub use rigid_body::RigidBody;

use std::sync::Arc;

use crate::lyapunov::LyapunovFunction;
use crate::state::StateVector;
use crate::system::System;

/// Benchmark parameters: the published Lipschitz estimate, adaptive-gain
/// update period, Lipschitz probe window, and integration horizons.
#[derive(Clone, Copy, Debug)]
pub struct ProblemReference {
    /// Lipschitz estimate of `grad V` used by the `1/(hL)` gain.
    pub lipschitz: f64,
    /// Default adaptive gain update period.
    pub t_update: f64,
    /// One-period window for the unity-gain Lipschitz probe.
    pub probe_window: f64,
    /// Horizon for desk-scale runs (CI-sized).
    pub desk_horizon: f64,
    /// Full benchmark horizon.
    pub full_horizon: f64,
    /// Orbital period, when the horizon is naturally counted in periods.
    pub period: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    RigidBody,
    Kepler,
    PerturbedKepler,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [
        ProblemKind::RigidBody,
        ProblemKind::Kepler,
        ProblemKind::PerturbedKepler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::RigidBody => "rigid_body",
            ProblemKind::Kepler => "kepler",
            ProblemKind::PerturbedKepler => "perturbed_kepler",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rigid_body" => Some(ProblemKind::RigidBody),
            "kepler" => Some(ProblemKind::Kepler),
            "perturbed_kepler" => Some(ProblemKind::PerturbedKepler),
            _ => None,
        }
    }

    pub fn reference(self) -> ProblemReference {
        match self {
            ProblemKind::RigidBody => ProblemReference {
                lipschitz: 1986.0,
                t_update: 30.0,
                probe_window: 30.0,
                desk_horizon: 100.0,
                full_horizon: 1000.0,
                period: None,
            },
            ProblemKind::Kepler => ProblemReference {
                lipschitz: 515.4,
                t_update: 0.1,
                probe_window: Kepler::PERIOD,
                desk_horizon: 10.0 * Kepler::PERIOD,
                full_horizon: 1000.0 * Kepler::PERIOD,
                period: Some(Kepler::PERIOD),
            },
            ProblemKind::PerturbedKepler => ProblemReference {
                lipschitz: 148.03,
                t_update: 0.1,
                probe_window: PerturbedKepler::HORIZON,
                desk_horizon: PerturbedKepler::HORIZON,
                full_horizon: PerturbedKepler::HORIZON,
                period: None,
            },
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemKind::parse(s).ok_or_else(|| {
            format!("unknown problem '{s}' (expected rigid_body, kepler or perturbed_kepler)")
        })
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A benchmark problem assembled with its canonical initial state and the
/// Lyapunov function anchored there. Shareable across concurrent runs.
pub struct ProblemBundle {
    pub kind: ProblemKind,
    pub system: Arc<dyn System>,
    pub lyapunov: LyapunovFunction,
    pub initial_state: StateVector,
    pub reference: ProblemReference,
}

/// Builds the named benchmark with its canonical parameters.
pub fn build_problem(kind: ProblemKind) -> ProblemBundle {
    match kind {
        ProblemKind::RigidBody => {
            let system = RigidBody::standard();
            let x0 = RigidBody::initial_state();
            let lyapunov = system.lyapunov(&x0);
            ProblemBundle {
                kind,
                system: Arc::new(system),
                lyapunov,
                initial_state: x0,
                reference: kind.reference(),
            }
        }
        ProblemKind::Kepler => {
            let system = Kepler::standard();
            let x0 = Kepler::initial_state();
            let lyapunov = system.lyapunov(&x0);
            ProblemBundle {
                kind,
                system: Arc::new(system),
                lyapunov,
                initial_state: x0,
                reference: kind.reference(),
            }
        }
        ProblemKind::PerturbedKepler => {
            let system = PerturbedKepler::standard();
            let x0 = PerturbedKepler::initial_state();
            let lyapunov = system.lyapunov(&x0);
            ProblemBundle {
                kind,
                system: Arc::new(system),
                lyapunov,
                initial_state: x0,
                reference: kind.reference(),
            }
        }
    }
}
