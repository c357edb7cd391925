//! Dense operator matrices in truncated oscillator bases.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// A square complex matrix representing an operator in a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: CMatrix,
    basis_frequency: f64,
    label: String,
}

impl OperatorMatrix {
    pub fn new(label: impl Into<String>, basis_frequency: f64, entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() < 2 {
            return Err(Error::InvalidParams(format!(
                "operator matrix must be square with dim >= 2, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParams("operator matrix has non-finite entries".into()));
        }
        if basis_frequency.is_nan() || basis_frequency <= 0.0 {
            return Err(Error::Domain(format!("basis frequency must be positive, got {basis_frequency}")));
        }
        Ok(Self { entries, basis_frequency, label: label.into() })
    }

    // Internal constructor for results of algebra on already-validated operands.
    pub(crate) fn derived(label: impl Into<String>, basis_frequency: f64, entries: CMatrix) -> Self {
        Self { entries, basis_frequency, label: label.into() }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn basis_frequency(&self) -> f64 {
        self.basis_frequency
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::derived(self.label.clone(), self.basis_frequency, &self.entries * factor)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::derived(format!("{}†", self.label), self.basis_frequency, self.entries.adjoint())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        let e = &self.entries * &other.entries - &other.entries * &self.entries;
        Self::derived(format!("[{},{}]", self.label, other.label), self.basis_frequency, e)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        let e = &self.entries * &other.entries + &other.entries * &self.entries;
        Self::derived(format!("{{{},{}}}", self.label, other.label), self.basis_frequency, e)
    }

    /// Restriction to the given basis indices (rows and columns).
    pub fn block(&self, indices: &[usize]) -> CMatrix {
        CMatrix::from_fn(indices.len(), indices.len(), |r, c| self.entries[(indices[r], indices[c])])
    }

    /// Eigenvalues of the block on `indices`, sorted by real part.
    pub fn block_eigenvalues(&self, indices: &[usize]) -> Vec<Complex64> {
        eigenvalues(&self.block(indices))
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::derived(
            format!("{}+{}", self.label, rhs.label),
            self.basis_frequency,
            &self.entries + &rhs.entries,
        )
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::derived(
            format!("{}-{}", self.label, rhs.label),
            self.basis_frequency,
            &self.entries - &rhs.entries,
        )
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::derived(
            format!("{}{}", self.label, rhs.label),
            self.basis_frequency,
            &self.entries * &rhs.entries,
        )
    }
}

/// Truncated annihilation operator, `⟨n|a|n+1⟩ = √(n+1)`.
pub fn annihilation(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |r, c| if c == r + 1 { Complex64::new((c as f64).sqrt(), 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// Position and momentum matrices in the frequency-`omega` oscillator basis:
/// `q = (a + a†)/√(2ω)`, `p = i√(ω/2)(a† − a)`.
pub fn ladder_matrices(n: usize, omega: f64) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("basis size must be >= 2, got {n}")));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    let a = annihilation(n);
    let ad = a.adjoint();
    let q = (&a + &ad) / Complex64::new((2.0 * omega).sqrt(), 0.0);
    let p = (&ad - &a) * (I * (omega / 2.0).sqrt());
    Ok((OperatorMatrix::derived("q", omega, q), OperatorMatrix::derived("p", omega, p)))
}

/// Kronecker product `a ⊗ b` (row-major: index = i_a · dim_b + i_b).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (na, nb) = (a.nrows(), b.nrows());
    CMatrix::from_fn(na * nb, na * nb, |r, c| a[(r / nb, c / nb)] * b[(r % nb, c % nb)])
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a general complex matrix (complex Schur form), sorted by
/// real part then imaginary part.
///
/// The Schur iteration is bounded; nearly diagonal matrices with repeated
/// eigenvalues may stall at machine epsilon, so the tolerance is relaxed in
/// steps before giving up.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let schur = [f64::EPSILON, 1e-15, 1e-14, 1e-13]
        .iter()
        .find_map(|&eps| m.clone().try_schur(eps, 10_000))
        .expect("complex Schur iteration did not converge");
    let mut ev: Vec<Complex64> = schur
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn interior_commutator_residual(n: usize, omega: f64) -> f64 {
        let (q, p) = ladder_matrices(n, omega).unwrap();
        let c = q.commutator(&p);
        let idx: Vec<usize> = (0..n - 1).collect();
        max_abs(&(c.block(&idx) - identity(n - 1) * I))
    }

    #[test]
    fn ladder_elements() {
        let (q, _) = ladder_matrices(4, 1.0).unwrap();
        assert_abs_diff_eq!(q.entries()[(0, 1)].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        let (q4, _) = ladder_matrices(4, 4.0).unwrap();
        assert_abs_diff_eq!(q4.entries()[(0, 1)].re, 0.3535534, epsilon = 1e-7);
        assert_eq!(q4.basis_frequency(), 4.0);
    }

    #[test]
    fn hermitian_by_construction() {
        let (q, p) = ladder_matrices(10, 2.0).unwrap();
        assert_eq!(max_abs(&(q.entries() - q.entries().adjoint())), 0.0);
        assert_eq!(max_abs(&(p.entries() - p.entries().adjoint())), 0.0);
    }

    #[test]
    fn canonical_commutator_on_interior() {
        for &omega in &[0.5, 1.0, 2.0, 4.0] {
            for n in [2, 3, 8, 33, 60] {
                assert!(interior_commutator_residual(n, omega) < 1e-12, "n={n} omega={omega}");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ladder_matrices(1, 1.0).is_err());
        assert!(ladder_matrices(4, 0.0).is_err());
        assert!(OperatorMatrix::new("x", 1.0, CMatrix::zeros(1, 1)).is_err());
        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(OperatorMatrix::new("x", 1.0, bad).is_err());
    }

    #[test]
    fn kron_layout() {
        let a = CMatrix::from_fn(2, 2, |r, c| Complex64::new((r * 2 + c) as f64, 0.0));
        let b = identity(3);
        let k = kron(&a, &b);
        assert_eq!(k[(3, 4)], a[(1, 0)] * b[(0, 1)]);
        assert_eq!(k[(4, 1)], a[(1, 0)]);
    }

    #[test]
    fn triangular_eigenvalues() {
        let m = CMatrix::from_row_slice(2, 2, &[Complex64::new(2.0, 1.0), I, Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)]);
        let ev = eigenvalues(&m);
        assert_abs_diff_eq!(ev[0].re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1].im, 1.0, epsilon = 1e-14);
    }
}
