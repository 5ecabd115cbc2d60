//! Sums-of-squares Lyapunov functions built from first integrals.
//!
//! `V(x) = sum_j (k_j/2) |F_j(x) - F_j(x_I)|^2 + penalty(x)`, where the
//! optional penalty is the rotation-block orthogonality term
//! `(k_0/4) ||R^T R - I||_F^2`. The gradient is assembled analytically via
//! the chain rule; the Hessian norm needed for gain selection is obtained by
//! central finite differences of that gradient.

use crate::error::Error;
use crate::state::StateVector;
use crate::system::Integral;

/// Matrix norm used for `||grad^2 V||`.
///
/// Frobenius is the default used for gain computation; the spectral norm
/// (power iteration on the symmetrized finite-difference Hessian) is the
/// theoretical quantity and is kept behind this switch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HessNorm {
    Frobenius,
    Spectral,
}

/// Orthogonality penalty `(k0/4) ||R^T R - I||_F^2` on a 3x3 rotation block
/// stored row-major at `offset..offset+9` of the state.
#[derive(Clone, Copy, Debug)]
pub struct OrthogonalityPenalty {
    pub offset: usize,
    pub weight: f64,
}

impl OrthogonalityPenalty {
    pub fn value(&self, x: &[f64]) -> f64 {
        let r = &x[self.offset..self.offset + 9];
        orthogonality_penalty(r, self.weight).0
    }

    pub fn add_gradient(&self, x: &[f64], grad: &mut [f64]) {
        let r = &x[self.offset..self.offset + 9];
        let (_, g) = orthogonality_penalty(r, self.weight);
        for (dst, src) in grad[self.offset..self.offset + 9].iter_mut().zip(g) {
            *dst += src;
        }
    }
}

/// Value and gradient of `(k0/4) ||R^T R - I||_F^2` for a row-major 3x3 `r`.
///
/// The gradient with respect to `R` is `k0 * R (R^T R - I)`, returned
/// flattened in the same row-major layout.
pub fn orthogonality_penalty(r: &[f64], k0: f64) -> (f64, [f64; 9]) {
    assert_eq!(r.len(), 9);
    // s = R^T R - I, symmetric.
    let mut s = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for k in 0..3 {
                acc += r[3 * k + i] * r[3 * k + j];
            }
            s[3 * i + j] = if i == j { acc - 1.0 } else { acc };
        }
    }
    let frob2: f64 = s.iter().map(|v| v * v).sum();
    let value = 0.25 * k0 * frob2;
    // grad = k0 * R * s
    let mut grad = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for k in 0..3 {
                acc += r[3 * i + k] * s[3 * k + j];
            }
            grad[3 * i + j] = k0 * acc;
        }
    }
    (value, grad)
}

struct SosTerm {
    integral: Integral,
    weight: f64,
    reference: Vec<f64>,
}

/// A nonnegative function vanishing exactly on the attractor set of a run.
pub struct LyapunovFunction {
    dim: usize,
    terms: Vec<SosTerm>,
    penalty: Option<OrthogonalityPenalty>,
}

/// Builds `V(x) = sum_j (k_j/2)|F_j(x) - F_j(x_init)|^2 + penalty(x)`.
///
/// References are evaluated here, through the same code path used later,
/// so `V(x_init) = 0` and `grad V(x_init) = 0` hold exactly in floating
/// point. Nonpositive weights are rejected.
pub fn build_sos_lyapunov(
    terms: &[(Integral, f64)],
    x_init: &[f64],
    penalty: Option<OrthogonalityPenalty>,
) -> Result<LyapunovFunction, Error> {
    let dim = x_init.len();
    if dim == 0 {
        return Err(Error::config("initial state must have positive dimension"));
    }
    if let Some(p) = &penalty {
        if p.weight <= 0.0 || !p.weight.is_finite() {
            return Err(Error::config(format!(
                "penalty weight must be positive, got {}",
                p.weight
            )));
        }
        if p.offset + 9 > dim {
            return Err(Error::config("penalty block exceeds state dimension"));
        }
    }
    let mut built = Vec::with_capacity(terms.len());
    for (integral, weight) in terms {
        if *weight <= 0.0 || !weight.is_finite() {
            return Err(Error::config(format!(
                "weight for integral '{}' must be positive, got {weight}",
                integral.name()
            )));
        }
        built.push(SosTerm {
            integral: integral.clone(),
            weight: *weight,
            reference: integral.value(x_init),
        });
    }
    Ok(LyapunovFunction {
        dim,
        terms: built,
        penalty,
    })
}

impl LyapunovFunction {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Named weights of the sums-of-squares terms (penalty weight included
    /// under the name `penalty` when present).
    pub fn weights(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .terms
            .iter()
            .map(|t| (t.integral.name().to_string(), t.weight))
            .collect();
        if let Some(p) = &self.penalty {
            out.push(("penalty".to_string(), p.weight));
        }
        out
    }

    /// Stored reference value `F_j(x_init)` for the named integral.
    pub fn reference(&self, name: &str) -> Option<&[f64]> {
        self.terms
            .iter()
            .find(|t| t.integral.name() == name)
            .map(|t| t.reference.as_slice())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let max_m = self.terms.iter().map(|t| t.integral.dim()).max().unwrap_or(0);
        let mut scratch = vec![0.0; max_m];
        let mut v = 0.0;
        for term in &self.terms {
            let m = term.integral.dim();
            let out = &mut scratch[..m];
            term.integral.value_into(x, out);
            let mut dev2 = 0.0;
            for (val, rf) in out.iter().zip(&term.reference) {
                let d = val - rf;
                dev2 += d * d;
            }
            v += 0.5 * term.weight * dev2;
        }
        if let Some(p) = &self.penalty {
            v += p.value(x);
        }
        v
    }

    /// Analytic gradient `sum_j k_j J_j^T (F_j(x) - F_j(x_init)) + grad penalty`.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        out.fill(0.0);
        let n = self.dim;
        let max_m = self.terms.iter().map(|t| t.integral.dim()).max().unwrap_or(0);
        let mut scratch = vec![0.0; max_m + max_m * n];
        for term in &self.terms {
            let m = term.integral.dim();
            let (dev, jac) = scratch.split_at_mut(max_m);
            let dev = &mut dev[..m];
            let jac = &mut jac[..m * n];
            term.integral.value_into(x, dev);
            for (d, rf) in dev.iter_mut().zip(&term.reference) {
                *d -= rf;
            }
            term.integral.jacobian_into(x, jac);
            for i in 0..m {
                let coeff = term.weight * dev[i];
                if coeff != 0.0 {
                    let row = &jac[i * n..(i + 1) * n];
                    for (o, j) in out.iter_mut().zip(row) {
                        *o += coeff * j;
                    }
                }
            }
        }
        if let Some(p) = &self.penalty {
            p.add_gradient(x, out);
        }
    }

    pub fn gradient(&self, x: &[f64]) -> StateVector {
        let mut out = StateVector::zeros(self.dim);
        self.gradient_into(x, out.as_mut_slice());
        out
    }

    /// Raw (unsymmetrized) finite-difference Hessian, row-major `n x n`.
    ///
    /// Column `i` is `(grad V(x + d_i e_i) - grad V(x - d_i e_i)) / (2 d_i)`
    /// with `d_i = eps_m^(1/3) * max(1, |x_i|)`.
    pub fn hessian_fd(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        let n = self.dim;
        let delta_scale = f64::EPSILON.cbrt();
        let mut h = vec![0.0; n * n];
        let mut xp = x.to_vec();
        let mut gp = vec![0.0; n];
        let mut gm = vec![0.0; n];
        for i in 0..n {
            let delta = delta_scale * x[i].abs().max(1.0);
            let orig = xp[i];
            xp[i] = orig + delta;
            self.gradient_into(&xp, &mut gp);
            xp[i] = orig - delta;
            self.gradient_into(&xp, &mut gm);
            xp[i] = orig;
            let inv = 1.0 / (2.0 * delta);
            for j in 0..n {
                let entry = (gp[j] - gm[j]) * inv;
                if !entry.is_finite() {
                    return Err(Error::HessianEvaluation);
                }
                h[j * n + i] = entry;
            }
        }
        Ok(h)
    }

    pub fn hess_norm(&self, x: &[f64], norm: HessNorm) -> Result<f64, Error> {
        match norm {
            HessNorm::Frobenius => self.hess_norm_frobenius(x),
            HessNorm::Spectral => self.hess_norm_spectral(x),
        }
    }

    /// Frobenius norm of the symmetrized finite-difference Hessian.
    pub fn hess_norm_frobenius(&self, x: &[f64]) -> Result<f64, Error> {
        let n = self.dim;
        let h = self.hessian_fd(x)?;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s = 0.5 * (h[i * n + j] + h[j * n + i]);
                acc += s * s;
            }
        }
        Ok(acc.sqrt())
    }

    /// Spectral norm estimate: 50 power iterations on the symmetrized
    /// finite-difference Hessian, with a deterministic start vector.
    pub fn hess_norm_spectral(&self, x: &[f64]) -> Result<f64, Error> {
        let n = self.dim;
        let raw = self.hessian_fd(x)?;
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = 0.5 * (raw[i * n + j] + raw[j * n + i]);
            }
        }
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
        let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= vn);
        let mut w = vec![0.0; n];
        let mut norm = 0.0;
        for _ in 0..50 {
            for i in 0..n {
                w[i] = h[i * n..(i + 1) * n]
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| a * b)
                    .sum();
            }
            norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Ok(0.0);
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / norm;
            }
        }
        Ok(norm)
    }
}

impl std::fmt::Debug for LyapunovFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LyapunovFunction")
            .field("dim", &self.dim)
            .field("weights", &self.weights())
            .finish()
    }
}

/// Central finite differences of `V` itself, the independent oracle used by
/// the gradient-consistency checks.
pub fn fd_gradient(v: &LyapunovFunction, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta_scale = f64::EPSILON.cbrt();
    let mut g = vec![0.0; n];
    let mut xp = x.to_vec();
    for i in 0..n {
        let delta = delta_scale * x[i].abs().max(1.0);
        let orig = xp[i];
        xp[i] = orig + delta;
        let vp = v.value(&xp);
        xp[i] = orig - delta;
        let vm = v.value(&xp);
        xp[i] = orig;
        g[i] = (vp - vm) / (2.0 * delta);
    }
    g
}
