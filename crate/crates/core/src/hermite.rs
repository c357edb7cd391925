//! Hermite polynomials, oscillator eigenfunctions and Gauss–Hermite quadrature.
//!
//! Physicists' convention throughout: weight `e^{-q²}` and
//! `H_{n+1}(q) = 2q H_n(q) - 2n H_{n-1}(q)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest degree accepted by the three-term recurrences.
pub const MAX_DEGREE: usize = 200;

/// Largest Gauss–Hermite order accepted by [`gauss_hermite`].
pub const MAX_ORDER: usize = 300;

/// Physicists' Hermite polynomial `H_n(q)`.
pub fn hermite_poly(n: usize, q: f64) -> Result<f64> {
    check_degree(n)?;
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * q;
    for k in 1..n {
        let next = 2.0 * q * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Normalized oscillator eigenfunction of frequency `omega` (unit mass, ℏ = 1):
/// `φ_n(q) = (ω/π)^{1/4} (2ⁿ n!)^{-1/2} H_n(√ω q) e^{-ωq²/2}`.
///
/// Evaluated with the normalized recurrence so that large `n` neither
/// overflows nor loses the Gaussian envelope.
pub fn ho_eigenfunction(n: usize, omega: f64, q: f64) -> Result<f64> {
    check_degree(n)?;
    Ok(*ho_eigenfunctions(n, omega, q)?.last().expect("n + 1 values"))
}

/// All of `φ_0 … φ_n` at one point.
pub fn ho_eigenfunctions(n: usize, omega: f64, q: f64) -> Result<Vec<f64>> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    Ok(ho_values_unchecked(n, omega, q))
}

pub(crate) fn ho_values_unchecked(n: usize, omega: f64, q: f64) -> Vec<f64> {
    let y = omega.sqrt() * q;
    let mut out = Vec::with_capacity(n + 1);
    out.push((omega / PI).powf(0.25) * (-0.5 * y * y).exp());
    if n >= 1 {
        out.push(2f64.sqrt() * y * out[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * y * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// First derivative of the unit-frequency eigenfunction,
/// `φ_n' = √(n/2) φ_{n-1} − √((n+1)/2) φ_{n+1}`.
pub fn ho_eigenfunction_derivative(n: usize, q: f64) -> Result<f64> {
    check_degree(n)?;
    let phi = ho_values_unchecked(n + 1, 1.0, q);
    let lower = if n > 0 { (n as f64 / 2.0).sqrt() * phi[n - 1] } else { 0.0 };
    Ok(lower - ((n as f64 + 1.0) / 2.0).sqrt() * phi[n + 1])
}

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        Err(Error::DegreeTooLarge { degree: n, max: MAX_DEGREE })
    } else {
        Ok(())
    }
}

/// Gauss–Hermite nodes and weights for the weight function `e^{-q²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ e^{-q²} f(q) dq`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `∫ e^{-α q²} f(q) dq` for `α > 0`, by rescaling the nodes.
    pub fn integrate_scaled<F: FnMut(f64) -> f64>(&self, alpha: f64, mut f: F) -> f64 {
        let s = alpha.sqrt();
        self.integrate(|x| f(x / s)) / s
    }

    /// Complex-valued counterpart of [`QuadratureRule::integrate_scaled`].
    pub fn integrate_scaled_complex<F: FnMut(f64) -> Complex64>(&self, alpha: f64, mut f: F) -> Complex64 {
        let s = alpha.sqrt();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x / s) * w)
            .sum::<Complex64>()
            / s
    }
}

/// Gauss–Hermite rule from the eigen-decomposition of the Jacobi matrix.
///
/// Nodes are the Jacobi eigenvalues (symmetrized pairwise); weights come from
/// the Christoffel function `w_i = 1 / Σ_k p_k(x_i)²` evaluated with the
/// orthonormal recurrence, which keeps full relative accuracy in the tails.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::QuadratureOrder(order));
    }
    if order == 1 {
        return Ok(QuadratureRule { nodes: vec![0.0], weights: vec![PI.sqrt()] });
    }
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let off = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let mut raw: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    raw.sort_by(f64::total_cmp);

    let mut nodes = vec![0.0; order];
    for i in 0..order {
        nodes[i] = 0.5 * (raw[i] - raw[order - 1 - i]);
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let phi = ho_values_unchecked(order - 1, 1.0, x);
            let christoffel: f64 = phi.iter().map(|v| v * v).sum();
            (-x * x).exp() / christoffel
        })
        .collect();
    for i in 0..order / 2 {
        let w = 0.5 * (weights[i] + weights[order - 1 - i]);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    Ok(QuadratureRule { nodes, weights })
}
