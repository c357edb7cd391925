//! The complex harmonic oscillator `L = q̇²/2 − q²/2 − iε q q̇`.
//!
//! Its Hamiltonian `Ĥ_C = p̂²/2 + (1−ε²) q̂²/2 + (iε/2){p̂, q̂}` is similar to the
//! ordinary oscillator through `e^{εq²/2}`, has eigenfunctions
//! `ψ_n = e^{εq²/2} φ_n` with `E_n = n + ½`, and is hermitian in
//! `L²(ℝ, e^{−εq²} dq)`.
//!
//! Two conventions exist for the momentum-space propagator. The closed form
//! with coefficients `A, B, C` solves the Schrödinger equation of `Ĥ_C` in the
//! representation `q̂ = i∂_p`; contracting the oscillator propagator with the
//! change-of-basis kernel `⟨P|p⟩` instead produces the same closed form with
//! `ε → −ε`. See [`KernelConvention`].

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{gaussian_integral, gaussian_integral_limit, Affine, ExponentBuilder, GaussianForm};
use crate::hermite::{gauss_hermite, ho_values_unchecked, QuadratureRule};
use crate::mehler;
use crate::operator::{annihilation, eigenvalues, CMatrix, OperatorMatrix, I};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexOscParams {
    pub epsilon: f64,
    pub basis_size: usize,
    pub quadrature_order: usize,
}

impl ComplexOscParams {
    pub fn new(epsilon: f64, basis_size: usize, quadrature_order: usize) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::Domain("epsilon must be finite".into()));
        }
        if basis_size < 2 {
            return Err(Error::InvalidParams(format!("basis size must be >= 2, got {basis_size}")));
        }
        if quadrature_order < 2 * basis_size {
            return Err(Error::InvalidParams(format!(
                "quadrature order {quadrature_order} must be at least twice the basis size {basis_size}"
            )));
        }
        Ok(Self { epsilon, basis_size, quadrature_order })
    }

    /// Basis size `n` with quadrature order `2n`.
    pub fn with_basis(epsilon: f64, basis_size: usize) -> Result<Self> {
        Self::new(epsilon, basis_size, 2 * basis_size)
    }

    fn require_normalizable(&self) -> Result<()> {
        if self.epsilon.abs() < 1.0 {
            Ok(())
        } else {
            Err(Error::NonNormalizable(self.epsilon))
        }
    }

    fn rule(&self) -> Result<QuadratureRule> {
        gauss_hermite(self.quadrature_order)
    }
}

/// Matrix of `Ĥ_C` in the unit-frequency oscillator basis.
///
/// With `q = (a + a†)/√2`, `p = i(a† − a)/√2` the symmetric ordering gives
/// `(iε/2){p, q} = (ε/2)(a² − a†²)`; every term is assembled from exact
/// ladder elements, so the truncation is exact entrywise.
pub fn hc_matrix(params: &ComplexOscParams) -> Result<OperatorMatrix> {
    let n = params.basis_size;
    if n < 4 {
        return Err(Error::InvalidParams(format!("hc_matrix needs basis size >= 4, got {n}")));
    }
    let eps = params.epsilon;
    let a = exact_square_ops(n);
    let number = CMatrix::from_fn(n, n, |r, col| if r == col { c(r as f64) } else { c(0.0) });
    let ho = &number + CMatrix::identity(n, n) * c(0.5);
    let q2 = (&a.a2 + &a.ad2 + &number * c(2.0) + CMatrix::identity(n, n)) * c(0.5);
    let h = ho - q2 * c(eps * eps / 2.0) + (&a.a2 - &a.ad2) * c(eps / 2.0);
    OperatorMatrix::new("H_C", 1.0, h)
}

/// `{p̂, q̂}` in the unit-frequency basis, `i(a†² − a²)`.
pub fn pq_anticommutator(n: usize) -> CMatrix {
    let a = exact_square_ops(n);
    (&a.ad2 - &a.a2) * I
}

struct SquareOps {
    a2: CMatrix,
    ad2: CMatrix,
}

// a² with ⟨n|a²|n+2⟩ = √((n+1)(n+2)), independent of truncation.
fn exact_square_ops(n: usize) -> SquareOps {
    let a2 = CMatrix::from_fn(n, n, |r, col| {
        if col == r + 2 {
            c(((r + 1) as f64 * (r + 2) as f64).sqrt())
        } else {
            c(0.0)
        }
    });
    let ad2 = a2.adjoint();
    SquareOps { a2, ad2 }
}

/// The lowest `count` eigenvalues of the truncated `Ĥ_C`, taken from the half
/// of the spectrum nearest the real axis and sorted by real part.
///
/// Only the lowest quarter of a truncated non-normal spectrum is trusted.
pub fn hc_spectrum(params: &ComplexOscParams, count: usize) -> Result<Vec<Complex64>> {
    let n = params.basis_size;
    if count > n / 4 {
        return Err(Error::InvalidParams(format!("count {count} exceeds the trusted N/4 = {} levels", n / 4)));
    }
    let h = hc_matrix(params)?;
    let mut ev = eigenvalues(h.entries());
    ev.sort_by(|a, b| a.im.abs().total_cmp(&b.im.abs()));
    ev.truncate(n / 2);
    ev.sort_by(|a, b| a.re.total_cmp(&b.re));
    ev.truncate(count);
    Ok(ev)
}

/// `ψ_n(q) = e^{εq²/2} φ_n(q)`.
pub fn psi_n(params: &ComplexOscParams, n: usize, q: f64) -> Result<Complex64> {
    params.require_normalizable()?;
    let phi = crate::hermite::ho_eigenfunction(n, 1.0, q)?;
    Ok(c((0.5 * params.epsilon * q * q).exp() * phi))
}

/// Uniform grid on `[−L, L]` with spacing `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub spacing: f64,
}

impl GridSpec {
    pub const DEFAULT: GridSpec = GridSpec { half_width: 8.0, spacing: 1e-2 };

    pub fn points(&self) -> Vec<f64> {
        let n = (2.0 * self.half_width / self.spacing).round() as usize;
        (0..=n).map(|k| -self.half_width + k as f64 * self.spacing).collect()
    }

    /// Below the resolution at which the residual tolerances are meaningful.
    pub fn is_coarse(&self) -> bool {
        self.half_width < 8.0 || self.spacing > 1e-2 + 1e-15
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchrodingerResidual {
    /// Residual with Richardson-extrapolated (fourth-order) derivatives.
    pub residual: f64,
    /// Residual with plain second-order central differences.
    pub second_order: f64,
    pub coarse_grid: bool,
}

/// Max over the interior grid of
/// `|ψ″ − 2εqψ′ − ((1−ε²)q² + ε − 2E_n)ψ|` with `E_n = n + ½`.
pub fn schrodinger_residual(params: &ComplexOscParams, n: usize, grid: GridSpec) -> Result<SchrodingerResidual> {
    schrodinger_residual_at_energy(params, n, n as f64 + 0.5, grid)
}

/// As [`schrodinger_residual`] with an arbitrary trial energy.
pub fn schrodinger_residual_at_energy(
    params: &ComplexOscParams,
    n: usize,
    energy: f64,
    grid: GridSpec,
) -> Result<SchrodingerResidual> {
    params.require_normalizable()?;
    if grid.spacing.is_nan() || grid.spacing <= 0.0 || grid.half_width.is_nan() || grid.half_width <= 2.0 * grid.spacing {
        return Err(Error::InvalidParams("grid spacing must be positive and smaller than the half width".into()));
    }
    let eps = params.epsilon;
    let h = grid.spacing;
    let qs = grid.points();
    let psi: Vec<f64> = qs.iter().map(|&q| psi_n(params, n, q).map(|z| z.re)).collect::<Result<_>>()?;

    let mut plain: f64 = 0.0;
    let mut extrapolated: f64 = 0.0;
    for k in 2..qs.len() - 2 {
        let q = qs[k];
        let d1h = (psi[k + 1] - psi[k - 1]) / (2.0 * h);
        let d2h = (psi[k + 1] - 2.0 * psi[k] + psi[k - 1]) / (h * h);
        let d1w = (psi[k + 2] - psi[k - 2]) / (4.0 * h);
        let d2w = (psi[k + 2] - 2.0 * psi[k] + psi[k - 2]) / (4.0 * h * h);
        let d1 = (4.0 * d1h - d1w) / 3.0;
        let d2 = (4.0 * d2h - d2w) / 3.0;
        let potential = (1.0 - eps * eps) * q * q + eps - 2.0 * energy;
        plain = plain.max((d2h - 2.0 * eps * q * d1h - potential * psi[k]).abs());
        extrapolated = extrapolated.max((d2 - 2.0 * eps * q * d1 - potential * psi[k]).abs());
    }
    Ok(SchrodingerResidual { residual: extrapolated, second_order: plain, coarse_grid: grid.is_coarse() })
}

// Values e^{-εq²}ψ_mψ_n / e^{-q²} = e^{q²} φ_m φ_n at the quadrature nodes.
fn mu_weighted_products(params: &ComplexOscParams, nmax: usize) -> Result<DMatrix<f64>> {
    params.require_normalizable()?;
    let rule = params.rule()?;
    let eps = params.epsilon;
    let mut g = DMatrix::<f64>::zeros(nmax + 1, nmax + 1);
    for (&q, &w) in rule.nodes().iter().zip(rule.weights()) {
        let envelope = (0.5 * eps * q * q).exp();
        let psi: Vec<f64> = ho_values_unchecked(nmax, 1.0, q).iter().map(|v| v * envelope).collect();
        let weight = w * (q * q).exp() * (-eps * q * q).exp();
        for r in 0..=nmax {
            for col in r..=nmax {
                g[(r, col)] += weight * psi[r] * psi[col];
            }
        }
    }
    for r in 0..=nmax {
        for col in 0..r {
            g[(r, col)] = g[(col, r)];
        }
    }
    Ok(g)
}

/// `⟨n|m⟩_μ = ∫ e^{−εq²} ψ_n* ψ_m dq`.
pub fn mu_inner(params: &ComplexOscParams, n: usize, m: usize) -> Result<Complex64> {
    let g = mu_weighted_products(params, n.max(m))?;
    Ok(c(g[(n, m)]))
}

/// All `⟨n|m⟩_μ` for `n, m ≤ nmax`.
pub fn mu_gram(params: &ComplexOscParams, nmax: usize) -> Result<DMatrix<f64>> {
    mu_weighted_products(params, nmax)
}

#[derive(Debug, Clone, PartialEq)]
pub struct L2Gram {
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

/// Gram matrix `∫ ψ_n ψ_m dq` in the unweighted measure, with its smallest
/// eigenvalue.
pub fn l2_gram(params: &ComplexOscParams, nmax: usize) -> Result<L2Gram> {
    params.require_normalizable()?;
    let rule = params.rule()?;
    let eps = params.epsilon;
    let alpha = 1.0 - eps;
    let s = alpha.sqrt();
    let mut g = DMatrix::<f64>::zeros(nmax + 1, nmax + 1);
    // ∫ e^{εq²} φ_m φ_n dq = ∫ e^{−αq²} [e^{q²} φ_m φ_n] dq with q = x/√α
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let q = x / s;
        let phi = ho_values_unchecked(nmax, 1.0, q);
        let weight = w / s * (q * q).exp();
        for r in 0..=nmax {
            for col in r..=nmax {
                g[(r, col)] += weight * phi[r] * phi[col];
            }
        }
    }
    for r in 0..=nmax {
        for col in 0..r {
            g[(r, col)] = g[(col, r)];
        }
    }
    let min_eigenvalue = g.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    Ok(L2Gram { matrix: g, min_eigenvalue })
}

/// How derivatives are taken in [`similarity_check_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// `max_n max_q |e^{−εq²/2} Ĥ_C (e^{εq²/2} φ_n) − Ĥ_HO φ_n|` with analytic
/// derivatives on the default grid.
pub fn similarity_check(params: &ComplexOscParams, indices: &[usize]) -> Result<f64> {
    similarity_check_with(params, indices, GridSpec::DEFAULT, DerivativeMode::Analytic)
}

pub fn similarity_check_with(
    params: &ComplexOscParams,
    indices: &[usize],
    grid: GridSpec,
    mode: DerivativeMode,
) -> Result<f64> {
    params.require_normalizable()?;
    let eps = params.epsilon;
    let h = grid.spacing;
    let nmax = indices.iter().copied().max().unwrap_or(0);
    if nmax > crate::hermite::MAX_DEGREE {
        return Err(Error::DegreeTooLarge { degree: nmax, max: crate::hermite::MAX_DEGREE });
    }
    let phi_at = |q: f64| ho_values_unchecked(nmax + 1, 1.0, q);
    let mut worst: f64 = 0.0;
    for q in grid.points() {
        let phi = phi_at(q);
        let (phi_m, phi_p) = match mode {
            DerivativeMode::Analytic => (Vec::new(), Vec::new()),
            DerivativeMode::FiniteDifference => (phi_at(q - h), phi_at(q + h)),
        };
        let g = (0.5 * eps * q * q).exp();
        let gm = (0.5 * eps * (q - h) * (q - h)).exp();
        let gp = (0.5 * eps * (q + h) * (q + h)).exp();
        for &n in indices {
            let nf = n as f64;
            let (psi, dpsi, d2psi, d2phi) = match mode {
                DerivativeMode::Analytic => {
                    let lower = if n > 0 { (nf / 2.0).sqrt() * phi[n - 1] } else { 0.0 };
                    let dphi = lower - ((nf + 1.0) / 2.0).sqrt() * phi[n + 1];
                    let d2phi = (q * q - 2.0 * nf - 1.0) * phi[n];
                    let psi = g * phi[n];
                    let dpsi = g * (eps * q * phi[n] + dphi);
                    let d2psi = g * ((eps + eps * eps * q * q) * phi[n] + 2.0 * eps * q * dphi + d2phi);
                    (psi, dpsi, d2psi, d2phi)
                }
                DerivativeMode::FiniteDifference => {
                    let (pm, p0, pp) = (gm * phi_m[n], g * phi[n], gp * phi_p[n]);
                    let d2phi = (phi_p[n] - 2.0 * phi[n] + phi_m[n]) / (h * h);
                    (p0, (pp - pm) / (2.0 * h), (pp - 2.0 * p0 + pm) / (h * h), d2phi)
                }
            };
            let hc_psi = -0.5 * d2psi + 0.5 * (1.0 - eps * eps) * q * q * psi + 0.5 * eps * psi + eps * q * dpsi;
            let hho_phi = -0.5 * d2phi + 0.5 * q * q * phi[n];
            worst = worst.max((hc_psi / g - hho_phi).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealityResiduals {
    /// `‖q̂ − q̂‡‖_max` with `‡` the adjoint in `L²(ℝ, dμ)`.
    pub position: f64,
    /// `‖p̂‡ − p̂ − 2iεq̂‖_max`.
    pub momentum: f64,
    /// `‖p̂ − p̂†‖_max` with the plain conjugate transpose.
    pub naive_momentum_asymmetry: f64,
}

/// Reality conditions `q‡ = q`, `p‡ = p + 2iεq` in the ψ basis, on the interior
/// half block (indices below `N/2`).
///
/// Matrix elements `⟨ψ_k, A ψ_n⟩_μ` and the Gram matrix are computed by
/// quadrature; the representation of `A` is `G⁻¹M_A` and that of its
/// μ-adjoint is `G⁻¹M_A†`.
pub fn reality_conditions_check(params: &ComplexOscParams) -> Result<RealityResiduals> {
    params.require_normalizable()?;
    let n = params.basis_size;
    if n < 8 {
        return Err(Error::InvalidParams(format!("reality check needs basis size >= 8, got {n}")));
    }
    let eps = params.epsilon;
    let rule = params.rule()?;
    let mut gram = CMatrix::zeros(n, n);
    let mut mq = CMatrix::zeros(n, n);
    let mut mp = CMatrix::zeros(n, n);
    for (&q, &w) in rule.nodes().iter().zip(rule.weights()) {
        let phi = ho_values_unchecked(n, 1.0, q);
        let g = (0.5 * eps * q * q).exp();
        let weight = w * (q * q).exp() * (-eps * q * q).exp();
        let psi: Vec<f64> = (0..n).map(|k| g * phi[k]).collect();
        let dpsi: Vec<f64> = (0..n)
            .map(|k| {
                let kf = k as f64;
                let lower = if k > 0 { (kf / 2.0).sqrt() * phi[k - 1] } else { 0.0 };
                g * (eps * q * phi[k] + lower - ((kf + 1.0) / 2.0).sqrt() * phi[k + 1])
            })
            .collect();
        for r in 0..n {
            for col in 0..n {
                let base = weight * psi[r];
                gram[(r, col)] += c(base * psi[col]);
                mq[(r, col)] += c(base * q * psi[col]);
                mp[(r, col)] += -I * (base * dpsi[col]);
            }
        }
    }
    let ginv = gram.clone().try_inverse().ok_or(Error::DegenerateForm)?;
    let q_rep = &ginv * &mq;
    let q_adj = &ginv * mq.adjoint();
    let p_rep = &ginv * &mp;
    let p_adj = &ginv * mp.adjoint();

    let half = n / 2;
    let block_max = |m: &CMatrix| {
        let mut best: f64 = 0.0;
        for r in 0..half {
            for col in 0..half {
                best = best.max(m[(r, col)].norm());
            }
        }
        best
    };
    Ok(RealityResiduals {
        position: block_max(&(&q_rep - &q_adj)),
        momentum: block_max(&(&p_adj - &p_rep - &q_rep * (I * 2.0 * eps))),
        naive_momentum_asymmetry: block_max(&(&mp - mp.adjoint())),
    })
}

/// Coefficients `A, B, C` of the momentum-space propagator at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorABC {
    pub t: f64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

/// Which sign of `ε` enters the closed-form kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelConvention {
    /// Closed form as printed: solves `i∂_t K = Ĥ_C K` with `q̂ = i∂_p`.
    Printed,
    /// `ε → −ε`: the kernel obtained by contracting the oscillator propagator
    /// with `⟨P|p⟩`, consistent with the completeness measure `μ(p, p*)`.
    BasisChange,
}

impl KernelConvention {
    fn effective(self, epsilon: f64) -> f64 {
        match self {
            KernelConvention::Printed => epsilon,
            KernelConvention::BasisChange => -epsilon,
        }
    }
}

/// `A = (2πi)^{−1/2} s^{−1/2}`, `B = cos t − iε sin t`, `C = 2s` with
/// `s = (ε²+1) sin t + 2iε cos t`.
///
/// The square root of `s` is continued in `t` from `t = 0`; at `ε = 0` this is
/// the Maslov branch of the oscillator kernel.
pub fn propagator_abc(epsilon: f64, t: f64) -> Result<PropagatorABC> {
    let (sin, cos) = t.sin_cos();
    let s = Complex64::new((epsilon * epsilon + 1.0) * sin, 2.0 * epsilon * cos);
    if s.norm() < 1e-13 {
        return Err(Error::Caustic(t));
    }
    let theta = continuous_arg(epsilon, t, s);
    let a = Complex64::from_polar((2.0 * PI * s.norm()).sqrt().recip(), -PI / 4.0 - theta / 2.0);
    Ok(PropagatorABC { t, a, b: Complex64::new(cos, -epsilon * sin), c: s * 2.0 })
}

// Continuous argument of s(t) along [0, t]. s crosses the negative real axis
// at t = 3π/2 + 2πm (forward) and t = −π/2 − 2πm (backward).
fn continuous_arg(epsilon: f64, t: f64, s: Complex64) -> f64 {
    let principal = s.arg();
    if epsilon == 0.0 {
        // Real s: argument kπ with k = ⌊t/π⌋ for t > 0.
        return if t > 0.0 { PI * (t / PI).floor() } else { -PI * ((-t / PI).floor() + 1.0) };
    }
    let crossings = if t >= 0.0 {
        ((t - 1.5 * PI) / (2.0 * PI)).floor() + 1.0
    } else {
        ((-t - 0.5 * PI) / (2.0 * PI)).floor() + 1.0
    }
    .max(0.0);
    let direction = if t >= 0.0 { -epsilon.signum() } else { epsilon.signum() };
    principal + 2.0 * PI * direction * crossings
}

/// Printed closed-form kernel `A exp(i(B(p_in² + p_out²) − 2 p_in p_out)/C)`.
pub fn propagator_kernel(epsilon: f64, t: f64, p_in: Complex64, p_out: Complex64) -> Result<Complex64> {
    propagator_kernel_with(KernelConvention::Printed, epsilon, t, p_in, p_out)
}

pub fn propagator_kernel_with(
    convention: KernelConvention,
    epsilon: f64,
    t: f64,
    p_in: Complex64,
    p_out: Complex64,
) -> Result<Complex64> {
    let abc = propagator_abc(convention.effective(epsilon), t)?;
    Ok(abc.a * kernel_exponent(&abc, p_in, p_out).exp())
}

fn kernel_exponent(abc: &PropagatorABC, p_in: Complex64, p_out: Complex64) -> Complex64 {
    I * (abc.b * (p_in * p_in + p_out * p_out) - 2.0 * p_in * p_out) / abc.c
}

fn kernel_terms(abc: &PropagatorABC, b: &mut ExponentBuilder, p_in: &Affine, p_out: &Affine) {
    let k = I / abc.c;
    b.add_product(k * abc.b, p_in, p_in)
        .add_product(k * abc.b, p_out, p_out)
        .add_product(k * -2.0, p_in, p_out);
}

fn require_positive_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("epsilon must be positive here, got {epsilon}")))
    }
}

/// `⟨P|p⟩ = (2πε)^{−1/2} exp(−(p − P)²/(2ε))`.
pub fn basis_change_kernel(epsilon: f64, p: Complex64, big_p: f64) -> Result<Complex64> {
    require_positive_epsilon(epsilon)?;
    let d = p - big_p;
    Ok((-(d * d) / (2.0 * epsilon)).exp() / (2.0 * PI * epsilon).sqrt())
}

/// `(2πε)^{−1} ∫dP dP' exp(−((p_out − P')² + (p_in − P)²)/(2ε)) ⟨P', t|P, 0⟩`,
/// evaluated in closed form by the Gaussian engine.
pub fn relation_rhs(epsilon: f64, t: f64, p_in: Complex64, p_out: Complex64) -> Result<Complex64> {
    require_positive_epsilon(epsilon)?;
    // variables x = (P', P)
    let big_p_out = Affine::var(2, 0, c(1.0));
    let big_p_in = Affine::var(2, 1, c(1.0));
    let d_out = Affine::constant(2, p_out).plus(&big_p_out.clone().times(c(-1.0)));
    let d_in = Affine::constant(2, p_in).plus(&big_p_in.clone().times(c(-1.0)));
    let (sin, cos) = t.sin_cos();
    let mut b = ExponentBuilder::new(2);
    b.add_product(c(-0.5 / epsilon), &d_out, &d_out)
        .add_product(c(-0.5 / epsilon), &d_in, &d_in)
        .add_product(I * cos / (2.0 * sin), &big_p_out, &big_p_out)
        .add_product(I * cos / (2.0 * sin), &big_p_in, &big_p_in)
        .add_product(-I / sin, &big_p_out, &big_p_in);
    let mehler_prefactor = mehler::momentum_kernel(1.0, t, c(0.0), c(0.0))?;
    Ok(gaussian_integral(&b.build()?, 0.0)? * mehler_prefactor / (2.0 * PI * epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationResidual {
    /// Max relative residual against the basis-change convention.
    pub residual: f64,
    /// Same comparison against the printed closed form.
    pub printed_residual: f64,
}

/// Compares the closed-form kernel with [`relation_rhs`] at the sample
/// `(p_in, p_out)` pairs.
pub fn propagator_relation_check(epsilon: f64, t: f64, samples: &[(f64, f64)]) -> Result<RelationResidual> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let mut out = RelationResidual { residual: 0.0, printed_residual: 0.0 };
    for &(p_in, p_out) in samples {
        let rhs = relation_rhs(epsilon, t, c(p_in), c(p_out))?;
        let bc = propagator_kernel_with(KernelConvention::BasisChange, epsilon, t, c(p_in), c(p_out))?;
        let pr = propagator_kernel_with(KernelConvention::Printed, epsilon, t, c(p_in), c(p_out))?;
        out.residual = out.residual.max((bc - rhs).norm() / bc.norm());
        out.printed_residual = out.printed_residual.max((pr - rhs).norm() / pr.norm());
    }
    Ok(out)
}

/// Equal-time contraction `∫dP ⟨p_out*|P⟩⟨P|p_in⟩`, the `t = 0` limit of
/// [`relation_rhs`].
pub fn equal_time_contraction(epsilon: f64, p_in: Complex64, p_out: Complex64) -> Result<Complex64> {
    require_positive_epsilon(epsilon)?;
    let big_p = Affine::var(1, 0, c(1.0));
    let d_out = Affine::constant(1, p_out).plus(&big_p.clone().times(c(-1.0)));
    let d_in = Affine::constant(1, p_in).plus(&big_p.times(c(-1.0)));
    let mut b = ExponentBuilder::new(1);
    b.add_product(c(-0.5 / epsilon), &d_out, &d_out).add_product(c(-0.5 / epsilon), &d_in, &d_in);
    Ok(gaussian_integral(&b.build()?, 0.0)? / (2.0 * PI * epsilon))
}

/// `μ(p, p*) = (πε)^{−1/2} exp((p − p*)²/(4ε))`; for `p = u + iv` this is
/// `(πε)^{−1/2} e^{−v²/ε}`.
pub fn completeness_measure(epsilon: f64, p: Complex64) -> Result<f64> {
    require_positive_epsilon(epsilon)?;
    let d = p - p.conj();
    Ok(((d * d) / (4.0 * epsilon)).exp().re / (PI * epsilon).sqrt())
}

// Terms of ln μ + ln⟨P'|p⟩ + ln⟨p*|P⟩ in the variables (u, v) at indices
// (iu, iv) of an n-variable exponent; the measure's prefactor is returned.
fn completeness_terms(
    epsilon: f64,
    b: &mut ExponentBuilder,
    n: usize,
    (iu, iv): (usize, usize),
    big_p_out: &Affine,
    big_p_in: &Affine,
) -> Complex64 {
    let u = Affine::var(n, iu, c(1.0));
    let v = Affine::var(n, iv, c(1.0));
    let p = u.clone().plus(&v.clone().times(I));
    let pbar = u.plus(&v.clone().times(-I));
    let d_out = p.plus(&big_p_out.clone().times(c(-1.0)));
    let d_in = pbar.plus(&big_p_in.clone().times(c(-1.0)));
    b.add_product(c(-1.0 / epsilon), &v, &v)
        .add_product(c(-0.5 / epsilon), &d_out, &d_out)
        .add_product(c(-0.5 / epsilon), &d_in, &d_in);
    c(1.0 / ((PI * epsilon).sqrt() * 2.0 * PI * epsilon))
}

/// `∫dP f(P) ∫du dv μ ⟨P'|p⟩⟨p*|P⟩` for `f(P) = e^{−P²}`, which completeness
/// says equals `f(P')`. Returns the largest deviation over `test_points`.
///
/// The `v` direction carries no damping of its own, so the integral is taken
/// as the δ → 0 limit of the regularized form.
pub fn completeness_check(epsilon: f64, test_points: &[f64]) -> Result<f64> {
    require_positive_epsilon(epsilon)?;
    let mut worst: f64 = 0.0;
    for &target in test_points {
        let v = completeness_contraction(epsilon, target)?;
        worst = worst.max((v - c((-target * target).exp())).norm());
    }
    Ok(worst)
}

/// The contraction of [`completeness_check`] at one point `P'`.
pub fn completeness_contraction(epsilon: f64, target: f64) -> Result<Complex64> {
    require_positive_epsilon(epsilon)?;
    // variables (u, v, P)
    let big_p = Affine::var(3, 2, c(1.0));
    let mut b = ExponentBuilder::new(3);
    let pref = completeness_terms(epsilon, &mut b, 3, (0, 1), &Affine::constant(3, c(target)), &big_p);
    b.add_product(c(-1.0), &big_p, &big_p);
    Ok(gaussian_integral_limit(&b.build()?)? * pref)
}

/// `∫d²p μ(p, p*) K(p_out; p, t2) K(p*; p_in, t1)` with the basis-change
/// kernel, which the group property says equals `K(p_out; p_in, t1 + t2)`.
pub fn compose_through_measure(epsilon: f64, t1: f64, t2: f64, p_in: Complex64, p_out: Complex64) -> Result<Complex64> {
    require_positive_epsilon(epsilon)?;
    let eff = KernelConvention::BasisChange.effective(epsilon);
    let first = propagator_abc(eff, t1)?;
    let second = propagator_abc(eff, t2)?;
    let n = 2;
    let u = Affine::var(n, 0, c(1.0));
    let v = Affine::var(n, 1, c(1.0));
    let p = u.clone().plus(&v.clone().times(I));
    let pbar = u.plus(&v.clone().times(-I));
    let mut b = ExponentBuilder::new(n);
    b.add_product(c(-1.0 / epsilon), &v, &v);
    kernel_terms(&second, &mut b, &p, &Affine::constant(n, p_out));
    kernel_terms(&first, &mut b, &Affine::constant(n, p_in), &pbar);
    let form = b.build()?;
    let value = integrate_form(&form)?;
    Ok(value * first.a * second.a / (PI * epsilon).sqrt())
}

fn integrate_form(form: &GaussianForm) -> Result<Complex64> {
    match gaussian_integral(form, 0.0) {
        Err(Error::NonConvergentForm { .. }) => gaussian_integral_limit(form),
        other => other,
    }
}

/// `|∫dp K(p_out; p, t) f(p) − f(p_out)|` for `f(p) = e^{−p²}` with the
/// basis-change kernel; tends to zero as `(t, ε) → 0`.
pub fn delta_limit_error(epsilon: f64, t: f64, p_out: f64) -> Result<f64> {
    require_positive_epsilon(epsilon)?;
    let abc = propagator_abc(KernelConvention::BasisChange.effective(epsilon), t)?;
    let p = Affine::var(1, 0, c(1.0));
    let mut b = ExponentBuilder::new(1);
    kernel_terms(&abc, &mut b, &p, &Affine::constant(1, c(p_out)));
    b.add_product(c(-1.0), &p, &p);
    let value = gaussian_integral(&b.build()?, 0.0)? * abc.a;
    Ok((value - c((-p_out * p_out).exp())).norm())
}

/// Matrix of `p̂` in the ψ basis with the plain conjugate transpose, for
/// inspecting its non-hermiticity. Equal to `P_HO − iε Q_HO`.
pub fn momentum_in_psi_basis(params: &ComplexOscParams) -> CMatrix {
    let n = params.basis_size;
    let a = annihilation(n);
    let ad = a.adjoint();
    let q = (&a + &ad) * c(std::f64::consts::FRAC_1_SQRT_2);
    let p = (&ad - &a) * (I * std::f64::consts::FRAC_1_SQRT_2);
    p - q * (I * params.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::ho_eigenfunction;
    use crate::operator::max_abs;
    use approx::assert_abs_diff_eq;

    fn params(eps: f64, n: usize) -> ComplexOscParams {
        ComplexOscParams::with_basis(eps, n).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ComplexOscParams::new(0.3, 10, 19).is_err());
        assert!(ComplexOscParams::new(0.3, 1, 19).is_err());
        assert!(ComplexOscParams::new(f64::NAN, 10, 20).is_err());
        assert!(ComplexOscParams::new(1.5, 10, 20).is_ok());
    }

    #[test]
    fn hc_reduces_to_oscillator() {
        let h = hc_matrix(&params(0.0, 12)).unwrap();
        for k in 0..12 {
            assert_abs_diff_eq!(h.entries()[(k, k)].re, k as f64 + 0.5, epsilon = 1e-15);
        }
        let off = h.entries() - CMatrix::from_diagonal(&h.entries().diagonal());
        assert_eq!(max_abs(&off), 0.0);
        assert!(hc_matrix(&params(0.0, 3)).is_err());
    }

    #[test]
    fn hc_antihermitian_part() {
        let eps = 0.3;
        let h = hc_matrix(&params(eps, 20)).unwrap();
        let anti = (h.entries() - h.entries().adjoint()) * c(0.5);
        let expected = pq_anticommutator(20) * (I * eps / 2.0);
        assert!(max_abs(&(anti - expected)) < 1e-12);
        assert!(max_abs(&(h.entries() - h.entries().adjoint())) > 0.1);
    }

    #[test]
    fn anticommutator_matches_ladder_products_on_interior() {
        let (q, p) = crate::operator::ladder_matrices(10, 1.0).unwrap();
        let prod = p.anticommutator(&q);
        let exact = pq_anticommutator(10);
        let idx: Vec<usize> = (0..9).collect();
        let diff = prod.block(&idx) - OperatorMatrix::derived("x", 1.0, exact).block(&idx);
        assert!(max_abs(&diff) < 1e-13);
    }

    #[test]
    fn spectrum_is_real_and_shifted_oscillator() {
        for &eps in &[0.1, 0.3, 0.6] {
            let ev = hc_spectrum(&params(eps, 40), 10).unwrap();
            for (k, e) in ev.iter().enumerate() {
                assert!((e.re - (k as f64 + 0.5)).abs() < 1e-6, "ε={eps} k={k} {e}");
                assert!(e.im.abs() < 1e-6, "ε={eps} k={k} {e}");
            }
        }
        assert!(hc_spectrum(&params(0.3, 40), 11).is_err());
    }

    #[test]
    fn psi_values() {
        let p0 = params(0.0, 4);
        for &q in &[-1.0, 0.2, 2.5] {
            assert_eq!(psi_n(&p0, 2, q).unwrap().re, ho_eigenfunction(2, 1.0, q).unwrap());
        }
        assert_abs_diff_eq!(psi_n(&params(0.5, 4), 0, 0.0).unwrap().re, PI.powf(-0.25), epsilon = 1e-15);
        assert!(matches!(psi_n(&params(1.0, 4), 0, 0.0), Err(Error::NonNormalizable(_))));
        assert!(psi_n(&params(-1.2, 4), 0, 0.0).is_err());
    }

    #[test]
    fn schrodinger_residuals() {
        let g = GridSpec::DEFAULT;
        let r = schrodinger_residual(&params(0.0, 4), 0, g).unwrap();
        assert!(r.residual < 1e-5 && !r.coarse_grid);
        assert!(r.second_order < 1e-4);

        let r = schrodinger_residual(&params(0.4, 4), 1, g).unwrap();
        assert!(r.residual < 1e-4);
        let fine = schrodinger_residual(&params(0.4, 4), 1, GridSpec { half_width: 8.0, spacing: 5e-3 }).unwrap();
        let ratio = r.second_order / fine.second_order;
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");

        let r = schrodinger_residual(&params(0.3, 4), 3, g).unwrap();
        assert!(r.residual < 1e-6, "{}", r.residual);

        let off = schrodinger_residual_at_energy(&params(0.4, 4), 1, 1.6, g).unwrap();
        assert!(off.residual > 1e-2);

        let coarse = schrodinger_residual(&params(0.2, 4), 0, GridSpec { half_width: 6.0, spacing: 0.05 }).unwrap();
        assert!(coarse.coarse_grid);
    }

    #[test]
    fn mu_orthonormality() {
        for &eps in &[0.0, 0.1, 0.3, 0.6, -0.4] {
            let g = mu_gram(&params(eps, 16), 15).unwrap();
            let dev = (g - DMatrix::<f64>::identity(16, 16)).abs().max();
            assert!(dev < 1e-10, "ε={eps}: {dev}");
        }
        assert_abs_diff_eq!(mu_inner(&params(0.3, 8), 3, 5).unwrap().norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mu_inner(&params(0.3, 8), 4, 4).unwrap().re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn l2_gram_structure() {
        let id = l2_gram(&params(0.0, 12), 10).unwrap();
        assert!((id.matrix - DMatrix::<f64>::identity(11, 11)).abs().max() < 1e-12);

        let g = l2_gram(&params(0.3, 12), 10).unwrap();
        assert!((&g.matrix - g.matrix.transpose()).abs().max() == 0.0);
        for eps in [0.3, -0.5, 0.8] {
            let g = l2_gram(&params(eps, 12), 10).unwrap();
            assert!(g.matrix[(0, 1)].abs() < 1e-14);
        }
        // ∫ e^{εq²} φ_0² dq = (1 − ε)^{−1/2}
        assert_abs_diff_eq!(g.matrix[(0, 0)], 1.0 / (1.0f64 - 0.3).sqrt(), epsilon = 1e-12);
        assert!(l2_gram(&params(1.0, 12), 10).is_err());
    }

    #[test]
    fn similarity_transformation() {
        assert!(similarity_check(&params(0.0, 8), &[0, 1, 2, 3]).unwrap() < 1e-12);
        let idx: Vec<usize> = (0..=6).collect();
        assert!(similarity_check(&params(0.4, 8), &idx).unwrap() < 1e-6);

        let coarse = GridSpec { half_width: 8.0, spacing: 2e-2 };
        let fine = GridSpec { half_width: 8.0, spacing: 1e-2 };
        let rc = similarity_check_with(&params(0.4, 8), &[2], coarse, DerivativeMode::FiniteDifference).unwrap();
        let rf = similarity_check_with(&params(0.4, 8), &[2], fine, DerivativeMode::FiniteDifference).unwrap();
        assert!((rc / rf - 4.0).abs() < 0.3, "{rc} {rf}");
    }

    #[test]
    fn reality_conditions() {
        let r0 = reality_conditions_check(&params(0.0, 16)).unwrap();
        assert!(r0.position < 1e-12 && r0.momentum < 1e-12);
        let r = reality_conditions_check(&params(0.3, 40)).unwrap();
        assert!(r.position < 1e-8 && r.momentum < 1e-8, "{r:?}");
        assert!(r.naive_momentum_asymmetry > 0.3);
        assert!(reality_conditions_check(&params(0.3, 6)).is_err());
    }

    #[test]
    fn naive_momentum_matches_closed_form() {
        let p = params(0.3, 12);
        let r = reality_conditions_check(&p).unwrap();
        let m = OperatorMatrix::derived("p", 1.0, momentum_in_psi_basis(&p));
        let half: Vec<usize> = (0..6).collect();
        let asym = m.block(&half) - m.adjoint().block(&half);
        assert_abs_diff_eq!(max_abs(&asym), r.naive_momentum_asymmetry, epsilon = 1e-10);
    }

    #[test]
    fn abc_closed_forms() {
        let v = propagator_abc(0.0, PI / 2.0).unwrap();
        assert_abs_diff_eq!(v.b.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((v.c - c(2.0)).norm(), 0.0, epsilon = 1e-15);
        let expect_a = 1.0 / (2.0 * PI * I).sqrt();
        assert_abs_diff_eq!((v.a - expect_a).norm(), 0.0, epsilon = 1e-15);

        assert!(matches!(propagator_abc(0.0, PI), Err(Error::Caustic(_))));
        for &eps in &[-0.4, 0.0, 0.25, 0.9] {
            let z = propagator_abc(eps, 0.0);
            if eps == 0.0 {
                assert!(z.is_err());
                continue;
            }
            let z = z.unwrap();
            assert_eq!(z.b, c(1.0));
            assert_eq!(z.c, Complex64::new(0.0, 4.0 * eps));
        }
    }

    #[test]
    fn abc_amplitude_is_continuous_in_time() {
        for &eps in &[0.2, -0.2] {
            let mut prev = propagator_abc(eps, 0.01).unwrap().a;
            let mut t = 0.01;
            while t < 14.0 {
                t += 0.01;
                let cur = propagator_abc(eps, t).unwrap().a;
                assert!((cur - prev).norm() < 0.05, "jump at t={t}, ε={eps}");
                prev = cur;
            }
        }
    }

    #[test]
    fn kernel_symmetry() {
        let a = propagator_kernel(0.3, 0.9, Complex64::new(0.2, 0.1), c(-0.7)).unwrap();
        let b = propagator_kernel(0.3, 0.9, c(-0.7), Complex64::new(0.2, 0.1)).unwrap();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn basis_change_kernel_properties() {
        let rule = gauss_hermite(60).unwrap();
        for &eps in &[0.05f64, 0.3] {
            for &p in &[-0.4, 1.1] {
                // ∫⟨P|p⟩dP = 1 with P = p + √(2ε) s
                let s = (2.0 * eps).sqrt();
                let total = rule.integrate(|x| basis_change_kernel(eps, c(p), p + s * x).unwrap().re * (x * x).exp()) * s;
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
                let peak = basis_change_kernel(eps, c(p), p).unwrap().re;
                assert!(peak > basis_change_kernel(eps, c(p), p + 0.01).unwrap().re);
                assert!(peak > basis_change_kernel(eps, c(p), p - 0.01).unwrap().re);
            }
        }
        assert!(basis_change_kernel(0.0, c(0.0), 0.0).is_err());
        assert!(basis_change_kernel(-0.1, c(0.0), 0.0).is_err());
    }

    #[test]
    fn basis_change_kernel_is_delta_sequence() {
        // ∫⟨P|p⟩ cos(P) dP = cos(p) e^{−ε/2}
        let rule = gauss_hermite(60).unwrap();
        let mut prev = f64::INFINITY;
        for &eps in &[0.1f64, 0.01, 0.001] {
            let s = (2.0 * eps).sqrt();
            let p = 0.3;
            let v = rule.integrate(|x| basis_change_kernel(eps, c(p), p + s * x).unwrap().re * (p + s * x).cos() * (x * x).exp()) * s;
            assert_abs_diff_eq!(v, p.cos() * (-eps / 2.0).exp(), epsilon = 1e-12);
            let err = (v - p.cos()).abs();
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn equal_time_limit() {
        for &(pi, po) in &[(0.2, -0.5), (1.0, 0.4)] {
            let contraction = equal_time_contraction(0.3, c(pi), c(po)).unwrap();
            let k0 = propagator_kernel_with(KernelConvention::BasisChange, 0.3, 0.0, c(pi), c(po)).unwrap();
            assert!((contraction - k0).norm() < 1e-13);
        }
    }

    #[test]
    fn relation_check_rejects_bad_epsilon() {
        assert!(propagator_relation_check(0.0, 0.7, &[(0.0, 0.1)]).is_err());
        assert!(propagator_relation_check(1.0, 0.7, &[(0.0, 0.1)]).is_err());
        assert!(propagator_relation_check(0.3, 0.7, &[(0.0, 0.1)]).is_ok());
    }

    #[test]
    fn measure_exponent_identity() {
        for &(u, v) in &[(0.3, 0.7), (-1.0, 0.2)] {
            let p = Complex64::new(u, v);
            let eps: f64 = 0.3;
            let d = p - p.conj();
            assert_abs_diff_eq!(((d * d) / (4.0 * eps)).re, -v * v / eps, epsilon = 1e-15);
            assert_abs_diff_eq!(((d * d) / (4.0 * eps)).im, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(
                completeness_measure(eps, p).unwrap(),
                (-v * v / eps).exp() / (PI * eps).sqrt(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn kernel_reduces_to_mehler() {
        for &(t, pi, po) in &[(0.5, 0.3, -0.2), (2.0, 1.0, 0.4), (3.5, -0.7, 0.9), (5.5, 0.1, 0.1), (-1.2, 0.6, -0.4)] {
            let k = propagator_kernel(0.0, t, c(pi), c(po)).unwrap();
            let m = crate::mehler::momentum_kernel(1.0, t, c(po), c(pi)).unwrap();
            assert!((k - m).norm() < 1e-12 * m.norm(), "t={t}");
        }
    }

    #[test]
    fn relation_and_group_property() {
        let r = propagator_relation_check(0.3, 0.7, &[(0.2, -0.4), (1.0, 0.3), (-0.8, -0.1)]).unwrap();
        assert!(r.residual < 1e-12);
        assert!(r.printed_residual > 0.1);
        for &eps in &[0.1, 0.3, 0.6] {
            let composed = compose_through_measure(eps, 0.4, 0.5, c(0.2), c(-0.3)).unwrap();
            let direct = propagator_kernel_with(KernelConvention::BasisChange, eps, 0.9, c(0.2), c(-0.3)).unwrap();
            assert!((composed - direct).norm() < 1e-12 * direct.norm());
        }
    }

    #[test]
    fn completeness_and_delta_limit() {
        assert!(completeness_check(0.3, &[0.0, 0.5, -1.0]).unwrap() < 1e-12);
        let errs: Vec<f64> = [0.5f64, 0.2, 0.1, 0.05].iter().map(|&t| delta_limit_error(t.powi(3), t, 0.4).unwrap()).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(errs[3] < 0.05);
    }
}
