//! The free higher-derivative scalar field
//! `ℒ = −½ φ(□ + m1²)(□ + m2²)φ` and its reduction to PU oscillators.
//!
//! Masses replace frequencies in the transformation coefficients, each plane
//! wave `e^{ikx}` is a PU oscillator with `ω_i = √(k² + m_i²)`, and
//! `ψ1 = i(aφ + b□φ)`, `ψ2 = cφ + b□φ` relabel the field pointwise.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pais_uhlenbeck::{Branch, PUParams, TransformCoefficients};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    m1: f64,
    m2: f64,
}

impl FieldParams {
    pub fn new(m1: f64, m2: f64) -> Result<Self> {
        if !(m1.is_finite() && m2.is_finite()) || m2 < 0.0 {
            return Err(Error::InvalidParams(format!("masses must be finite with m2 >= 0, got ({m1}, {m2})")));
        }
        if m1 == m2 {
            return Err(Error::DegenerateFrequencies(m1, m2));
        }
        if m1 < m2 {
            return Err(Error::InvalidParams(format!("expected m1 > m2, got ({m1}, {m2})")));
        }
        Ok(Self { m1, m2 })
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }
}

/// `φ` and `□φ` at one spacetime point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub phi: Complex64,
    pub box_phi: Complex64,
}

/// `a/m2² = b = c/m1² = ±(m1² − m2²)^{−1/2}`.
pub fn field_coefficients(params: &FieldParams, branch: Branch) -> TransformCoefficients {
    let b = branch.sign() / (params.m1 * params.m1 - params.m2 * params.m2).sqrt();
    TransformCoefficients { a: params.m2 * params.m2 * b, b, c: params.m1 * params.m1 * b, branch }
}

/// The PU oscillator of the plane wave with wavenumber `k`.
pub fn mode_reduce(params: &FieldParams, k: f64) -> Result<PUParams> {
    PUParams::new((k * k + params.m1 * params.m1).sqrt(), (k * k + params.m2 * params.m2).sqrt())
}

/// `(ψ1, ψ2) = (i(aφ + b□φ), cφ + b□φ)`.
pub fn psi_map(coeffs: &TransformCoefficients, sample: &FieldSample) -> (Complex64, Complex64) {
    let TransformCoefficients { a, b, c, .. } = *coeffs;
    (Complex64::i() * (a * sample.phi + b * sample.box_phi), c * sample.phi + b * sample.box_phi)
}

/// Inverse of [`psi_map`]: `φ = b(ψ2 + iψ1)`, `□φ = −(icψ1 + aψ2)`.
pub fn psi_inverse(coeffs: &TransformCoefficients, psi1: Complex64, psi2: Complex64) -> FieldSample {
    let TransformCoefficients { a, b, c, .. } = *coeffs;
    let i = Complex64::i();
    FieldSample { phi: b * (psi2 + i * psi1), box_phi: -(i * c * psi1 + a * psi2) }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticResiduals {
    /// `max|(φφ*)² − (c−a)^{−4}(ψ1² + ψ2²)²|`.
    pub plus: f64,
    /// `max|(φφ*)² + (c−a)^{−4}(ψ1² + ψ2²)²|`.
    pub minus: f64,
}

impl QuarticResiduals {
    /// The sign whose residual is below `tol`, if exactly one is.
    pub fn vanishing_sign(&self, tol: f64) -> Option<i8> {
        match (self.plus < tol, self.minus < tol) {
            (true, false) => Some(1),
            (false, true) => Some(-1),
            _ => None,
        }
    }
}

/// Compares `(φφ*)²` with `σ(c−a)^{−4}(ψ1² + ψ2²)²` for both signs on real
/// `(ψ1, ψ2)` samples.
pub fn quartic_identity_check(coeffs: &TransformCoefficients, samples: &[(f64, f64)]) -> QuarticResiduals {
    let k = (coeffs.c - coeffs.a).powi(-4);
    let mut out = QuarticResiduals { plus: 0.0, minus: 0.0 };
    for &(p1, p2) in samples {
        let phi = psi_inverse(coeffs, Complex64::new(p1, 0.0), Complex64::new(p2, 0.0)).phi;
        let lhs = (phi * phi.conj()).re.powi(2);
        let rhs = k * (p1 * p1 + p2 * p2).powi(2);
        out.plus = out.plus.max((lhs - rhs).abs());
        out.minus = out.minus.max((lhs + rhs).abs());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pais_uhlenbeck::{decoupling_residual, pu_spectrum, solve_coefficients, xi_levels, TwoModeBasis};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coefficients_match_mechanical_case() {
        let f = FieldParams::new(2.0, 1.0).unwrap();
        let k = field_coefficients(&f, Branch::Plus);
        assert_abs_diff_eq!(k.a, 0.5773503, epsilon = 1e-7);
        assert_abs_diff_eq!(k.c, 2.3094011, epsilon = 1e-7);
        assert_abs_diff_eq!(k.b * k.b * 3.0, 1.0, epsilon = 1e-12);
        assert!(matches!(FieldParams::new(1.0, 1.0), Err(Error::DegenerateFrequencies(_, _))));
        assert!(FieldParams::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn mode_reduction() {
        let f = FieldParams::new(2.0, 1.0).unwrap();
        let rest = mode_reduce(&f, 0.0).unwrap();
        assert_eq!((rest.omega1(), rest.omega2()), (2.0, 1.0));
        let p = mode_reduce(&f, 2.0).unwrap();
        assert_abs_diff_eq!(p.omega1(), 2.8284271, epsilon = 1e-7);
        assert_abs_diff_eq!(p.omega2(), 2.2360680, epsilon = 1e-7);
    }

    #[test]
    fn reduced_modes_decouple() {
        let f = FieldParams::new(2.0, 1.0).unwrap();
        let basis = TwoModeBasis::new(10, 10).unwrap();
        for k in [0.0, 0.5, 1.0, 2.0] {
            let p = mode_reduce(&f, k).unwrap();
            let c = solve_coefficients(&p, Branch::Plus).unwrap();
            assert!(c.identity_residual(&p) < 1e-12);
            assert!(decoupling_residual(&p, &c, &basis).unwrap() < 1e-10);
            let ev = pu_spectrum(&p, &c, &basis, 4).unwrap();
            for (got, want) in ev.iter().zip(xi_levels(&p, 4)) {
                assert_abs_diff_eq!(*got, want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn psi_round_trip() {
        let k = field_coefficients(&FieldParams::new(3.0, 0.5).unwrap(), Branch::Plus);
        let zero = FieldSample { phi: Complex64::new(0.0, 0.0), box_phi: Complex64::new(0.0, 0.0) };
        assert_eq!(psi_map(&k, &zero), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let s = FieldSample {
                phi: Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                box_phi: Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            };
            let (p1, p2) = psi_map(&k, &s);
            let back = psi_inverse(&k, p1, p2);
            assert!((back.phi - s.phi).norm() < 1e-12 && (back.box_phi - s.box_phi).norm() < 1e-12);
        }
        let phi = psi_inverse(&k, Complex64::new(0.4, 0.0), Complex64::new(-1.1, 0.0)).phi;
        assert_abs_diff_eq!((phi * phi.conj()).re, k.b * k.b * (0.16 + 1.21), epsilon = 1e-14);
    }

    #[test]
    fn quartic_sign() {
        let k = field_coefficients(&FieldParams::new(2.0, 1.0).unwrap(), Branch::Plus);
        let samples = [(0.3, -0.8), (1.5, 0.2), (-0.7, -0.7)];
        let r = quartic_identity_check(&k, &samples);
        assert!(r.plus < 1e-12);
        assert!(r.minus > 1e-3);
        assert_eq!(r.vanishing_sign(1e-12), Some(1));
        let zero = quartic_identity_check(&k, &[(0.0, 0.0)]);
        assert_eq!((zero.plus, zero.minus), (0.0, 0.0));
    }
}
