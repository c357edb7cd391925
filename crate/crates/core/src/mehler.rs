//! Harmonic-oscillator propagators (Mehler kernels) for unit mass, ℏ = 1.
//!
//! Position space, frequency ω:
//! `K(x_out, x_in; t) = (ω / 2πi sin ωt)^{1/2} exp(iω((x_in² + x_out²) cos ωt − 2 x_in x_out) / (2 sin ωt))`.
//!
//! In momentum space `H = p²/2 + ω²x²/2` is again an oscillator in the
//! variable `p` with mass `1/ω²` and the same frequency, so
//! `K̃(p_out, p_in; t) = (1 / 2πiω sin ωt)^{1/2} exp(i((p_in² + p_out²) cos ωt − 2 p_in p_out) / (2ω sin ωt))`.
//!
//! The square root follows the Maslov continuation in `t`: the phase
//! `e^{−iπ/4}` on `(0, π/ω)` drops by `π/2` at every caustic.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::I;

/// `(1 / 2πi sin ωt)^{1/2}` on the Maslov branch.
fn inverse_sqrt_factor(omega: f64, t: f64) -> Result<Complex64> {
    let s = (omega * t).sin();
    if s.abs() < 1e-13 || t == 0.0 {
        return Err(Error::Caustic(t));
    }
    let tau = omega * t.abs();
    let crossings = (tau / PI).floor();
    let phase = -PI / 4.0 - crossings * PI / 2.0;
    let mag = 1.0 / (2.0 * PI * s.abs()).sqrt();
    let z = Complex64::from_polar(mag, phase);
    Ok(if t < 0.0 { z.conj() } else { z })
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("omega must be positive, got {omega}")))
    }
}

/// Exponent of the position-space kernel.
pub fn position_exponent(omega: f64, t: f64, x_out: Complex64, x_in: Complex64) -> Complex64 {
    let (s, c) = (omega * t).sin_cos();
    I * omega * ((x_in * x_in + x_out * x_out) * c - 2.0 * x_in * x_out) / (2.0 * s)
}

/// Position-space propagator `⟨x_out, t | x_in, 0⟩`.
pub fn position_kernel(omega: f64, t: f64, x_out: Complex64, x_in: Complex64) -> Result<Complex64> {
    check_omega(omega)?;
    let pref = inverse_sqrt_factor(omega, t)? * omega.sqrt();
    Ok(pref * position_exponent(omega, t, x_out, x_in).exp())
}

/// Exponent of the momentum-space kernel.
pub fn momentum_exponent(omega: f64, t: f64, p_out: Complex64, p_in: Complex64) -> Complex64 {
    let (s, c) = (omega * t).sin_cos();
    I * ((p_in * p_in + p_out * p_out) * c - 2.0 * p_in * p_out) / (2.0 * omega * s)
}

/// Momentum-space propagator `⟨p_out, t | p_in, 0⟩`.
pub fn momentum_kernel(omega: f64, t: f64, p_out: Complex64, p_in: Complex64) -> Result<Complex64> {
    check_omega(omega)?;
    let pref = inverse_sqrt_factor(omega, t)? / omega.sqrt();
    Ok(pref * momentum_exponent(omega, t, p_out, p_in).exp())
}
