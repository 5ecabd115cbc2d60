//! Flat state vectors and stored trajectories.

use std::ops::{Deref, DerefMut};

/// State of a dynamical system embedded in `R^n`, stored as a flat `f64` array.
///
/// The dimension is fixed at construction and equals the owning system's
/// dimension for the lifetime of a run. Entries are allowed to become
/// non-finite during stepping; [`StateVector::is_finite`] is how the
/// integration loop detects that and flags divergence instead of silently
/// propagating NaNs.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    data: Vec<f64>,
}

impl StateVector {
    pub fn new(data: Vec<f64>) -> Self {
        assert!(!data.is_empty(), "state vector must have positive dimension");
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(data: Vec<f64>) -> Self {
        Self::new(data)
    }
}

impl From<&[f64]> for StateVector {
    fn from(data: &[f64]) -> Self {
        Self::new(data.to_vec())
    }
}

impl Deref for StateVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.data
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Uniformly spaced snapshot of a fixed-step run.
///
/// States are stored every `stride` steps starting from the initial state, so
/// `times[i] = i * h * stride`. Metric accumulation in the run loop is never
/// thinned; the stride only bounds storage.
#[derive(Clone, Debug)]
pub struct Trajectory {
    h: f64,
    stride: usize,
    times: Vec<f64>,
    states: Vec<StateVector>,
}

impl Trajectory {
    pub(crate) fn with_capacity(h: f64, stride: usize, cap: usize) -> Self {
        Self {
            h,
            stride,
            times: Vec::with_capacity(cap),
            states: Vec::with_capacity(cap),
        }
    }

    pub(crate) fn push(&mut self, step: usize, state: StateVector) {
        debug_assert!(step.is_multiple_of(self.stride));
        self.times.push(step as f64 * self.h);
        self.states.push(state);
    }

    /// Stride used by the default storage policy: every step up to 10^6
    /// stored points, thinned beyond that.
    pub fn default_stride(n_steps: usize) -> usize {
        n_steps.div_ceil(1_000_000).max(1)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn last_state(&self) -> Option<&StateVector> {
        self.states.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finiteness_detects_nan_and_inf() {
        let mut x = StateVector::new(vec![1.0, 2.0, 3.0]);
        assert!(x.is_finite());
        x[1] = f64::NAN;
        assert!(!x.is_finite());
        x[1] = f64::INFINITY;
        assert!(!x.is_finite());
    }

    #[test]
    fn default_stride_keeps_at_most_a_million_points() {
        assert_eq!(Trajectory::default_stride(0), 1);
        assert_eq!(Trajectory::default_stride(1_000), 1);
        assert_eq!(Trajectory::default_stride(1_000_000), 1);
        assert_eq!(Trajectory::default_stride(1_000_001), 2);
        assert_eq!(Trajectory::default_stride(10_000_000), 10);
    }

    #[test]
    fn trajectory_times_are_uniform() {
        let mut t = Trajectory::with_capacity(0.5, 2, 4);
        t.push(0, StateVector::zeros(1));
        t.push(2, StateVector::zeros(1));
        t.push(4, StateVector::zeros(1));
        assert_eq!(t.times(), &[0.0, 1.0, 2.0]);
        assert_eq!(t.len(), 3);
        for w in t.times().windows(2) {
            assert!(w[1] > w[0]);
            assert_eq!(w[1] - w[0], t.h() * t.stride() as f64);
        }
    }
}
