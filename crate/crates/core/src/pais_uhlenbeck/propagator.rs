//! Propagator of the PU oscillator in the `|x, Π_z⟩` basis.
//!
//! On the real sector `x = α + iβ`, `Π_z = γ + iϱ` with `bγ = aα`, `bϱ = cβ`
//! the oscillator variables are real, `ξ1 = β/b`, `ξ2 = α/b`, and the measure
//! `dμ_PU` reduces to `dξ1 dξ2 / (2π)²`. The out-arguments of the kernel are
//! the literal values `(x′*, Π_z′*)` of the bra.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{PUParams, TransformCoefficients};
use crate::error::{Error, Result};
use crate::gaussian::{gaussian_integral, gaussian_integral_limit, Affine, ExponentBuilder, GaussianForm};
use crate::mehler;
use crate::operator::I;

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientSet {
    /// The seven closed forms exactly as displayed.
    Printed,
    /// `F, J, M, N` scaled by `ω1ω2`, which makes the exponent equal to the
    /// sum of the two oscillator exponents in the `ξ` variables.
    Canonical,
}

/// `D, F, G, J, K, M, N` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PUPropagatorCoeffs {
    pub t: f64,
    pub d: f64,
    pub f: f64,
    pub g: f64,
    pub j: f64,
    pub k: f64,
    pub m: f64,
    pub n: f64,
    pub set: CoefficientSet,
}

impl PUPropagatorCoeffs {
    pub fn printed(params: &PUParams, t: f64) -> Self {
        let (w1, w2) = (params.omega1(), params.omega2());
        let (s1, c1) = (w1 * t).sin_cos();
        let (s2, c2) = (w2 * t).sin_cos();
        Self {
            t,
            d: (w1 * w1 - w2 * w2) * s1 * s2,
            f: w1 * s1 + w2 * s2,
            g: -w2 * s1 - w1 * s2,
            j: -w1 * s1 * c2 + w2 * s2 * c1,
            k: w2 * s1 * c2 - w1 * s2 * c1,
            m: -w1.powi(3) * s1 - w2.powi(3) * s2,
            n: w1.powi(3) * s1 * c2 - w2.powi(3) * s2 * c1,
            set: CoefficientSet::Printed,
        }
    }

    pub fn canonical(params: &PUParams, t: f64) -> Self {
        let p = Self::printed(params, t);
        let w = params.omega1() * params.omega2();
        Self { f: w * p.f, j: w * p.j, m: w * p.m, n: w * p.n, set: CoefficientSet::Canonical, ..p }
    }

    pub fn with_set(params: &PUParams, t: f64, set: CoefficientSet) -> Self {
        match set {
            CoefficientSet::Printed => Self::printed(params, t),
            CoefficientSet::Canonical => Self::canonical(params, t),
        }
    }

    pub fn values(&self) -> [f64; 7] {
        [self.d, self.f, self.g, self.j, self.k, self.m, self.n]
    }

    fn require_regular(&self) -> Result<()> {
        if self.d.abs() < 1e-12 {
            Err(Error::Caustic(self.t))
        } else {
            Ok(())
        }
    }
}

/// Kernel arguments `(x, Π_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: Complex64,
    pub pi_z: Complex64,
}

impl PhasePoint {
    pub fn new(x: Complex64, pi_z: Complex64) -> Self {
        Self { x, pi_z }
    }
}

fn exponent_terms(k: &PUPropagatorCoeffs, b: &mut ExponentBuilder, x: &Affine, pz: &Affine, xo: &Affine, pzo: &Affine) {
    let s = I / k.d;
    b.add_product(s * k.f, xo, pz)
        .add_product(s * k.f, x, pzo)
        .add_product(s * k.g, pz, pzo)
        .add_product(s * k.j, xo, pzo)
        .add_product(s * k.j, x, pz)
        .add_product(s * (k.k / 2.0), pzo, pzo)
        .add_product(s * (k.k / 2.0), pz, pz)
        .add_product(s * k.m, x, xo)
        .add_product(s * (k.n / 2.0), xo, xo)
        .add_product(s * (k.n / 2.0), x, x);
}

/// The kernel `exp{(i/D)[F(x_out Π_in + x_in Π_out) + G Π_in Π_out
/// + J(x_out Π_out + x_in Π_in) + K(Π_out² + Π_in²)/2 + M x_in x_out
/// + N(x_out² + x_in²)/2]}` evaluated with the printed coefficients.
pub fn pu_propagator_kernel(params: &PUParams, t: f64, input: PhasePoint, output: PhasePoint) -> Result<Complex64> {
    pu_propagator_kernel_with(&PUPropagatorCoeffs::printed(params, t), input, output)
}

pub fn pu_propagator_kernel_with(coeffs: &PUPropagatorCoeffs, input: PhasePoint, output: PhasePoint) -> Result<Complex64> {
    coeffs.require_regular()?;
    let mut b = ExponentBuilder::new(1);
    let k = |z: Complex64| Affine::constant(1, z);
    exponent_terms(coeffs, &mut b, &k(input.x), &k(input.pi_z), &k(output.x), &k(output.pi_z));
    Ok(b.build()?.c0().exp())
}

/// `(2π)² Π_i (ω_i / 2πi sin ω_i t)^{1/2}`, the normalization the kernel needs
/// for the measure `dμ_PU`.
pub fn pu_propagator_prefactor(params: &PUParams, t: f64) -> Result<Complex64> {
    let zero = re(0.0);
    let k1 = mehler::position_kernel(params.omega1(), t, zero, zero)?;
    let k2 = mehler::position_kernel(params.omega2(), t, zero, zero)?;
    Ok(4.0 * PI * PI * k1 * k2)
}

/// `⟨P1, P2 | x, Π_z⟩ = exp[(ax − bΠ_z)P1 + (−icx + ibΠ_z)P2]`.
pub fn pu_basis_change(coeffs: &TransformCoefficients, x: Complex64, pi_z: Complex64, p1: f64, p2: f64) -> Complex64 {
    basis_change_exponent(coeffs, x, pi_z, p1, p2).exp()
}

fn basis_change_exponent(coeffs: &TransformCoefficients, x: Complex64, pi_z: Complex64, p1: f64, p2: f64) -> Complex64 {
    let TransformCoefficients { a, b, c, .. } = *coeffs;
    (a * x - b * pi_z) * p1 + (-I * c * x + I * b * pi_z) * p2
}

/// The real-sector point with oscillator coordinates `(ξ1, ξ2)`:
/// `x = b(ξ2 + iξ1)`, `Π_z = aξ2 + icξ1`.
pub fn real_sector_point(coeffs: &TransformCoefficients, xi1: f64, xi2: f64) -> PhasePoint {
    let TransformCoefficients { a, b, c, .. } = *coeffs;
    PhasePoint::new(Complex64::new(b * xi2, b * xi1), Complex64::new(a * xi2, c * xi1))
}

// x and Π_z of the real-sector point at variables (iξ1, iξ2), and their
// conjugates, as affine forms.
struct SectorForms {
    x: Affine,
    pi_z: Affine,
    x_conj: Affine,
    pi_z_conj: Affine,
}

fn sector_forms(coeffs: &TransformCoefficients, n: usize, i1: usize, i2: usize) -> SectorForms {
    let TransformCoefficients { a, b, c, .. } = *coeffs;
    let v1 = |s: Complex64| Affine::var(n, i1, s);
    let v2 = |s: Complex64| Affine::var(n, i2, s);
    SectorForms {
        x: v2(re(b)).plus(&v1(I * b)),
        pi_z: v2(re(a)).plus(&v1(I * c)),
        x_conj: v2(re(b)).plus(&v1(-I * b)),
        pi_z_conj: v2(re(a)).plus(&v1(-I * c)),
    }
}

fn add_basis_change(coeffs: &TransformCoefficients, b: &mut ExponentBuilder, x: &Affine, pz: &Affine, p1: f64, p2: f64) {
    let TransformCoefficients { a, b: bb, c, .. } = *coeffs;
    b.add_linear(re(a * p1) + (-I * c * p2), x).add_linear(re(-bb * p1) + I * bb * p2, pz);
}

/// Integrand of `∫dμ′∫dμ ⟨P′|x′⟩ K(x′*, Π_z′*; x, Π_z) ⟨x|P⟩` on the real
/// sector, in the variables `(ξ1, ξ2, ξ1′, ξ2′)`, with its constant factor.
pub fn pu_relation_form(
    params: &PUParams,
    transform: &TransformCoefficients,
    coeffs: &PUPropagatorCoeffs,
    p_in: [f64; 2],
    p_out: [f64; 2],
) -> Result<(GaussianForm, Complex64)> {
    coeffs.require_regular()?;
    let n = 4;
    let inner = sector_forms(transform, n, 0, 1);
    let outer = sector_forms(transform, n, 2, 3);
    let mut b = ExponentBuilder::new(n);
    add_basis_change(transform, &mut b, &outer.x, &outer.pi_z, p_out[0], p_out[1]);
    exponent_terms(coeffs, &mut b, &inner.x, &inner.pi_z, &outer.x_conj, &outer.pi_z_conj);
    // ⟨x|P⟩ = conj⟨P|x⟩ = exp[(ax* − bΠ_z*)P1 + (icx* − ibΠ_z*)P2] on the real sector
    let TransformCoefficients { a, b: bb, c, .. } = *transform;
    b.add_linear(re(a * p_in[0]) + I * c * p_in[1], &inner.x_conj)
        .add_linear(re(-bb * p_in[0]) - I * bb * p_in[1], &inner.pi_z_conj);
    let prefactor = pu_propagator_prefactor(params, coeffs.t)? / (2.0 * PI).powi(4);
    Ok((b.build()?, prefactor))
}

/// `Π_i K̃_{ω_i}(P_i′, P_i; t)`, the oscillator propagator in momentum space.
pub fn factorized_momentum_kernel(params: &PUParams, t: f64, p_in: [f64; 2], p_out: [f64; 2]) -> Result<Complex64> {
    let k1 = mehler::momentum_kernel(params.omega1(), t, re(p_out[0]), re(p_in[0]))?;
    let k2 = mehler::momentum_kernel(params.omega2(), t, re(p_out[1]), re(p_in[1]))?;
    Ok(k1 * k2)
}

/// The contraction of the kernel with the change-of-basis kernels, as the
/// δ → 0 limit of the regularized Gaussian integral.
pub fn pu_relation_lhs(
    params: &PUParams,
    transform: &TransformCoefficients,
    coeffs: &PUPropagatorCoeffs,
    p_in: [f64; 2],
    p_out: [f64; 2],
) -> Result<Complex64> {
    let (form, pref) = pu_relation_form(params, transform, coeffs, p_in, p_out)?;
    Ok(gaussian_integral_limit(&form)? * pref)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PURelationResidual {
    /// Max relative residual with [`CoefficientSet::Canonical`].
    pub canonical: f64,
    /// Max relative residual with [`CoefficientSet::Printed`]; `None` when the
    /// printed kernel grows along the real sector and the contraction diverges.
    pub printed: Option<f64>,
}

/// Compares the contracted kernel with the factorized oscillator propagator
/// at each `(P1, P2, P1′, P2′)` sample.
pub fn pu_propagator_relation_check(
    params: &PUParams,
    transform: &TransformCoefficients,
    t: f64,
    samples: &[[f64; 4]],
) -> Result<PURelationResidual> {
    let mut out = PURelationResidual { canonical: 0.0, printed: Some(0.0) };
    for s in samples {
        let (p_in, p_out) = ([s[0], s[1]], [s[2], s[3]]);
        let oracle = factorized_momentum_kernel(params, t, p_in, p_out)?;
        let canonical = PUPropagatorCoeffs::canonical(params, t);
        let lhs = pu_relation_lhs(params, transform, &canonical, p_in, p_out)?;
        out.canonical = out.canonical.max((lhs - oracle).norm() / oracle.norm());
        let printed = PUPropagatorCoeffs::printed(params, t);
        out.printed = match pu_relation_lhs(params, transform, &printed, p_in, p_out) {
            Ok(lhs) => out.printed.map(|r| r.max((lhs - oracle).norm() / oracle.norm())),
            Err(Error::NonConvergentForm { .. }) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(out)
}

/// Largest violation of `bγ = aα`, `bϱ = cβ` over real-sector points.
pub fn measure_support_residual(coeffs: &TransformCoefficients, points: &[(f64, f64)]) -> f64 {
    let TransformCoefficients { a, b, c, .. } = *coeffs;
    points.iter().fold(0.0f64, |worst, &(xi1, xi2)| {
        let p = real_sector_point(coeffs, xi1, xi2);
        let (alpha, beta, gamma, rho) = (p.x.re, p.x.im, p.pi_z.re, p.pi_z.im);
        worst.max((b * gamma - a * alpha).abs()).max((b * rho - c * beta).abs())
    })
}

/// `|∫dμ K(x′*, Π_z′*; x, Π_z) g − g(ξ′)|` for the test state
/// `g = exp(−(ξ1² + ξ2²)/2 + ξ1/2)`, maximized over `targets` in `ξ′`.
pub fn pu_delta_limit_error(
    params: &PUParams,
    transform: &TransformCoefficients,
    t: f64,
    targets: &[(f64, f64)],
) -> Result<f64> {
    let coeffs = PUPropagatorCoeffs::canonical(params, t);
    coeffs.require_regular()?;
    let pref = pu_propagator_prefactor(params, t)? / (4.0 * PI * PI);
    let g = |xi1: f64, xi2: f64| (-(xi1 * xi1 + xi2 * xi2) / 2.0 + xi1 / 2.0).exp();
    let mut worst: f64 = 0.0;
    for &(t1, t2) in targets {
        let out = real_sector_point(transform, t1, t2);
        let inner = sector_forms(transform, 2, 0, 1);
        let v1 = Affine::var(2, 0, re(1.0));
        let v2 = Affine::var(2, 1, re(1.0));
        let mut b = ExponentBuilder::new(2);
        let k = |z: Complex64| Affine::constant(2, z);
        exponent_terms(&coeffs, &mut b, &inner.x, &inner.pi_z, &k(out.x.conj()), &k(out.pi_z.conj()));
        b.add_product(re(-0.5), &v1, &v1).add_product(re(-0.5), &v2, &v2).add_linear(re(0.5), &v1);
        let value = gaussian_integral(&b.build()?, 0.0)? * pref;
        worst = worst.max((value - re(g(t1, t2))).norm());
    }
    Ok(worst)
}
