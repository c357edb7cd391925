//! Closed-form Gaussian integrals over `ℝⁿ` with complex quadratic forms.
//!
//! `∫ dⁿx exp(−½ xᵀ M x + Jᵀ x + c₀) = (2π)^{n/2} det(M)^{−1/2} exp(½ Jᵀ M⁻¹ J + c₀)`
//!
//! For `Re M` positive definite every eigenvalue of `M` lies in the open right
//! half-plane, so the product of principal square roots of the eigenvalues is
//! the branch reached continuously from the identity along `(1−s)I + sM`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{eigenvalues, CMatrix};

pub type CVector = DVector<Complex64>;

/// Regularization ladder for [`gaussian_integral_richardson`].
pub const RICHARDSON_DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

const SYMMETRY_TOL: f64 = 1e-12;
const SEMIDEFINITE_TOL: f64 = 1e-12;

/// Exponent `−½ xᵀ M x + Jᵀ x + c₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianForm {
    m: CMatrix,
    j: CVector,
    c0: Complex64,
}

impl GaussianForm {
    pub fn new(m: CMatrix, j: CVector, c0: Complex64) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || !m.is_square() || j.len() != n {
            return Err(Error::InvalidParams(format!(
                "gaussian form shape mismatch: M is {}x{}, J has {}",
                m.nrows(),
                m.ncols(),
                j.len()
            )));
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for r in 0..n {
            for c in 0..r {
                if (m[(r, c)] - m[(c, r)]).norm() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidParams("quadratic coefficient matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self { m, j, c0 })
    }

    pub fn dim(&self) -> usize {
        self.j.len()
    }

    pub fn m(&self) -> &CMatrix {
        &self.m
    }

    pub fn j(&self) -> &CVector {
        &self.j
    }

    pub fn c0(&self) -> Complex64 {
        self.c0
    }

    /// Value of the exponent at a real point.
    pub fn exponent(&self, x: &[f64]) -> Complex64 {
        let n = self.dim();
        let mut quad = Complex64::new(0.0, 0.0);
        let mut lin = Complex64::new(0.0, 0.0);
        for r in 0..n {
            lin += self.j[r] * x[r];
            for c in 0..n {
                quad += self.m[(r, c)] * x[r] * x[c];
            }
        }
        -0.5 * quad + lin + self.c0
    }
}

/// Incremental builder for quadratic exponents written as sums of products of
/// affine forms in `n` real variables.
#[derive(Debug, Clone)]
pub struct ExponentBuilder {
    n: usize,
    quad: CMatrix,
    lin: CVector,
    constant: Complex64,
}

/// Affine form `Σ coeffs_k x_k + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub coeffs: Vec<Complex64>,
    pub constant: Complex64,
}

impl Affine {
    pub fn constant(n: usize, value: Complex64) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); n], constant: value }
    }

    /// `scale · x_k`.
    pub fn var(n: usize, k: usize, scale: Complex64) -> Self {
        let mut a = Self::constant(n, Complex64::new(0.0, 0.0));
        a.coeffs[k] = scale;
        a
    }

    pub fn plus(mut self, other: &Affine) -> Self {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        self.constant += other.constant;
        self
    }

    pub fn times(mut self, s: Complex64) -> Self {
        for a in self.coeffs.iter_mut() {
            *a *= s;
        }
        self.constant *= s;
        self
    }
}

impl ExponentBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            quad: CMatrix::zeros(n, n),
            lin: CVector::zeros(n),
            constant: Complex64::new(0.0, 0.0),
        }
    }

    /// Adds `scale · u · v`.
    pub fn add_product(&mut self, scale: Complex64, u: &Affine, v: &Affine) -> &mut Self {
        for r in 0..self.n {
            for c in 0..self.n {
                // symmetric split of u_r v_c x_r x_c
                let w = 0.5 * scale * (u.coeffs[r] * v.coeffs[c] + u.coeffs[c] * v.coeffs[r]);
                self.quad[(r, c)] += w;
            }
            self.lin[r] += scale * (u.coeffs[r] * v.constant + v.coeffs[r] * u.constant);
        }
        self.constant += scale * u.constant * v.constant;
        self
    }

    /// Adds `scale · u`.
    pub fn add_linear(&mut self, scale: Complex64, u: &Affine) -> &mut Self {
        for r in 0..self.n {
            self.lin[r] += scale * u.coeffs[r];
        }
        self.constant += scale * u.constant;
        self
    }

    pub fn add_constant(&mut self, c: Complex64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn build(&self) -> Result<GaussianForm> {
        // exponent = xᵀ Q x + ... = −½ xᵀ (−2Q) x + ...
        GaussianForm::new(&self.quad * Complex64::new(-2.0, 0.0), self.lin.clone(), self.constant)
    }
}

/// Evaluates the Gaussian integral of `form` regularized by `delta · I`.
pub fn gaussian_integral(form: &GaussianForm, delta: f64) -> Result<Complex64> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::Domain(format!("regularization must be nonnegative, got {delta}")));
    }
    let n = form.dim();
    let m = &form.m + CMatrix::identity(n, n) * Complex64::new(delta, 0.0);
    if real_part(&m).cholesky().is_none() {
        return Err(Error::NonConvergentForm { delta });
    }
    closed_form(&m, form)
}

/// `δ → 0⁺` limit of [`gaussian_integral`].
///
/// When `Re M` is only semidefinite the eigenvalues of `M + δI` are `λ + δ`
/// with `Re λ ≥ 0`, and their principal square roots stay continuous down to
/// `δ = 0` as long as `M` is nonsingular, so the limit is the closed form at
/// `δ = 0`.
pub fn gaussian_integral_limit(form: &GaussianForm) -> Result<Complex64> {
    let re = real_part(&form.m);
    let scale = form.m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if re.symmetric_eigenvalues().min() < -SEMIDEFINITE_TOL * scale {
        return Err(Error::NonConvergentForm { delta: 0.0 });
    }
    closed_form(&form.m, form)
}

/// `δ → 0` limit by polynomial extrapolation over [`RICHARDSON_DELTAS`].
/// Accurate to roughly `δ_min³` divided by the smallest eigenvalue scale of
/// `M`; [`gaussian_integral_limit`] is exact.
pub fn gaussian_integral_richardson(form: &GaussianForm) -> Result<Complex64> {
    let values = RICHARDSON_DELTAS.iter().map(|&d| gaussian_integral(form, d)).collect::<Result<Vec<_>>>()?;
    Ok(extrapolate_to_zero(&RICHARDSON_DELTAS, &values))
}

/// Value at 0 of the interpolating polynomial through `(x_i, f_i)`.
pub fn extrapolate_to_zero(xs: &[f64], fs: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &fi) in fs.iter().enumerate() {
        let mut l = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if j != i {
                l *= xj / (xj - xs[i]);
            }
        }
        acc += fi * l;
    }
    acc
}

fn real_part(m: &CMatrix) -> DMatrix<f64> {
    let re = m.map(|z| z.re);
    (&re + re.transpose()) * 0.5
}

fn closed_form(m: &CMatrix, form: &GaussianForm) -> Result<Complex64> {
    let n = form.dim();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ev = eigenvalues(m);
    if ev.iter().any(|l| l.norm() <= 1e-14 * scale) {
        return Err(Error::DegenerateForm);
    }
    let inv_sqrt_det: Complex64 = ev.iter().map(|l| 1.0 / l.sqrt()).product();

    let solved = m.clone().lu().solve(&form.j).ok_or(Error::DegenerateForm)?;
    let quad = form.j.iter().zip(solved.iter()).map(|(a, b)| a * b).sum::<Complex64>();

    Ok((2.0 * PI).powf(n as f64 / 2.0) * inv_sqrt_det * (0.5 * quad + form.c0).exp())
}
