use num_complex::Complex64;

use super::{PUParams, TransformCoefficients};
use crate::error::{Error, Result};
use crate::operator::{eigenvalues, identity, kron, ladder_matrices, CMatrix, OperatorMatrix, I};

/// Tensor product of a frequency-ω1 and a frequency-ω2 oscillator basis.
/// Index `n1 · N2 + n2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoModeBasis {
    n1: usize,
    n2: usize,
}

impl TwoModeBasis {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 < 4 || n2 < 4 {
            return Err(Error::InvalidParams(format!("two-mode basis needs N1, N2 >= 4, got ({n1}, {n2})")));
        }
        Ok(Self { n1, n2 })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.n2 + n2
    }

    /// States with `n1 < N1 − 2` and `n2 < N2 − 2`, where products of two
    /// ladder matrices agree with the untruncated operators.
    pub fn interior(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for a in 0..self.n1 - 2 {
            for b in 0..self.n2 - 2 {
                out.push(self.index(a, b));
            }
        }
        out
    }
}

/// `ξ̂_i`, `P̂_i` on the tensor basis.
#[derive(Debug, Clone, PartialEq)]
pub struct XiOperators {
    pub xi1: OperatorMatrix,
    pub p1: OperatorMatrix,
    pub xi2: OperatorMatrix,
    pub p2: OperatorMatrix,
}

pub fn xi_operators(params: &PUParams, basis: &TwoModeBasis) -> Result<XiOperators> {
    let (q1, p1) = ladder_matrices(basis.n1, params.omega1())?;
    let (q2, p2) = ladder_matrices(basis.n2, params.omega2())?;
    let id1 = identity(basis.n1);
    let id2 = identity(basis.n2);
    let w = params.omega1();
    Ok(XiOperators {
        xi1: OperatorMatrix::derived("ξ1", w, kron(q1.entries(), &id2)),
        p1: OperatorMatrix::derived("P1", w, kron(p1.entries(), &id2)),
        xi2: OperatorMatrix::derived("ξ2", w, kron(&id1, q2.entries())),
        p2: OperatorMatrix::derived("P2", w, kron(&id1, p2.entries())),
    })
}

/// `x̂, Π̂_x, ẑ, Π̂_z` expressed through the oscillator variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedOperators {
    pub x: OperatorMatrix,
    pub pi_x: OperatorMatrix,
    pub z: OperatorMatrix,
    pub pi_z: OperatorMatrix,
}

/// `x̂ = ibξ̂1 + bξ̂2`, `Π̂_x = iaP̂1 + cP̂2`, `ẑ = ibP̂1 + bP̂2`, `Π̂_z = icξ̂1 + aξ̂2`.
pub fn mapped_operators(
    params: &PUParams,
    coeffs: &TransformCoefficients,
    basis: &TwoModeBasis,
) -> Result<MappedOperators> {
    let ops = xi_operators(params, basis)?;
    let TransformCoefficients { a, b, c, .. } = *coeffs;
    let w = params.omega1();
    let combo = |label: &str, u: &OperatorMatrix, cu: Complex64, v: &OperatorMatrix, cv: Complex64| {
        OperatorMatrix::derived(label, w, u.entries() * cu + v.entries() * cv)
    };
    let re = |v: f64| Complex64::new(v, 0.0);
    Ok(MappedOperators {
        x: combo("x", &ops.xi1, I * b, &ops.xi2, re(b)),
        pi_x: combo("Π_x", &ops.p1, I * a, &ops.p2, re(c)),
        z: combo("z", &ops.p1, I * b, &ops.p2, re(b)),
        pi_z: combo("Π_z", &ops.xi1, I * c, &ops.xi2, re(a)),
    })
}

/// `Ĥ_PU = −½Π̂_z² − ½(ω1²+ω2²)ẑ² + ½{ẑ, Π̂_x} + ½ω1²ω2² x̂²`.
pub fn hpu_matrix(params: &PUParams, coeffs: &TransformCoefficients, basis: &TwoModeBasis) -> Result<OperatorMatrix> {
    let m = mapped_operators(params, coeffs, basis)?;
    let half = Complex64::new(0.5, 0.0);
    let pz2 = m.pi_z.entries() * m.pi_z.entries();
    let z2 = m.z.entries() * m.z.entries();
    let anti = m.z.anticommutator(&m.pi_x);
    let x2 = m.x.entries() * m.x.entries();
    let h = -pz2 * half - z2 * (half * params.omega_sum_sq()) + anti.entries() * half
        + x2 * (half * params.omega_prod_sq());
    OperatorMatrix::new("H_PU", params.omega1(), h)
}

/// Diagonal `Ĥ_ξ` with entries `ω1(n1+½) + ω2(n2+½)`.
pub fn hxi_matrix(params: &PUParams, basis: &TwoModeBasis) -> Result<OperatorMatrix> {
    let mut h = CMatrix::zeros(basis.dim(), basis.dim());
    for a in 0..basis.n1 {
        for b in 0..basis.n2 {
            let k = basis.index(a, b);
            h[(k, k)] = Complex64::new(level(params, a, b), 0.0);
        }
    }
    OperatorMatrix::new("H_ξ", params.omega1(), h)
}

fn level(params: &PUParams, n1: usize, n2: usize) -> f64 {
    params.omega1() * (n1 as f64 + 0.5) + params.omega2() * (n2 as f64 + 0.5)
}

/// Lowest `count` levels `ω1(n1+½) + ω2(n2+½)`, ascending.
pub fn xi_levels(params: &PUParams, count: usize) -> Vec<f64> {
    let n1max = (count as f64 * params.omega2() / params.omega1()).ceil() as usize + count;
    let mut all: Vec<f64> = (0..=n1max)
        .flat_map(|a| (0..=count).map(move |b| (a, b)))
        .map(|(a, b)| level(params, a, b))
        .collect();
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    all
}

/// `‖Ĥ_PU − Ĥ_ξ‖_max` over the interior block.
pub fn decoupling_residual(params: &PUParams, coeffs: &TransformCoefficients, basis: &TwoModeBasis) -> Result<f64> {
    let idx = basis.interior();
    let diff = hpu_matrix(params, coeffs, basis)?.block(&idx) - hxi_matrix(params, basis)?.block(&idx);
    Ok(crate::operator::max_abs(&diff))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorResiduals {
    /// `‖[x̂, Π̂_x] − i‖` and `‖[ẑ, Π̂_z] − i‖`.
    pub canonical: f64,
    /// Largest of the four cross commutators.
    pub cross: f64,
}

/// Canonical commutators of the mapped operators on the interior block.
pub fn commutator_residuals(
    params: &PUParams,
    coeffs: &TransformCoefficients,
    basis: &TwoModeBasis,
) -> Result<CommutatorResiduals> {
    let m = mapped_operators(params, coeffs, basis)?;
    let idx = basis.interior();
    let id = identity(idx.len()) * I;
    let norm = |a: &OperatorMatrix, b: &OperatorMatrix, target: Option<&CMatrix>| {
        let block = a.commutator(b).block(&idx);
        crate::operator::max_abs(&match target {
            Some(t) => block - t,
            None => block,
        })
    };
    let canonical = norm(&m.x, &m.pi_x, Some(&id)).max(norm(&m.z, &m.pi_z, Some(&id)));
    let cross = [
        norm(&m.x, &m.z, None),
        norm(&m.x, &m.pi_z, None),
        norm(&m.pi_x, &m.z, None),
        norm(&m.pi_x, &m.pi_z, None),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(CommutatorResiduals { canonical, cross })
}

/// Lowest `count` eigenvalues of the interior block of `Ĥ_PU`.
///
/// Returns real parts sorted ascending; fails if any eigenvalue of the block
/// has an imaginary part above `1e−8`.
pub fn pu_spectrum(
    params: &PUParams,
    coeffs: &TransformCoefficients,
    basis: &TwoModeBasis,
    count: usize,
) -> Result<Vec<f64>> {
    if count > basis.dim() / 4 {
        return Err(Error::InvalidParams(format!(
            "count {count} exceeds a quarter of the basis dimension {}",
            basis.dim()
        )));
    }
    let h = hpu_matrix(params, coeffs, basis)?;
    let ev = eigenvalues(&h.block(&basis.interior()));
    if let Some(bad) = ev.iter().find(|z| z.im.abs() > 1e-8) {
        return Err(Error::InvalidParams(format!("complex eigenvalue {bad} on the interior block")));
    }
    let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    re.truncate(count);
    Ok(re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs;
    use crate::pais_uhlenbeck::Branch;
    use approx::assert_abs_diff_eq;

    fn setup(w1: f64, w2: f64) -> (PUParams, TransformCoefficients) {
        let p = PUParams::new(w1, w2).unwrap();
        (p, TransformCoefficients::closed_form(&p, Branch::Plus))
    }

    #[test]
    fn basis_layout() {
        let b = TwoModeBasis::new(5, 4).unwrap();
        assert_eq!(b.dim(), 20);
        assert_eq!(b.index(1, 2), 6);
        assert_eq!(b.interior(), vec![0, 1, 4, 5, 8, 9]);
        assert!(TwoModeBasis::new(3, 8).is_err());
    }

    #[test]
    fn decoupling_on_interior() {
        let (p, k) = setup(2.0, 1.0);
        let basis = TwoModeBasis::new(16, 16).unwrap();
        assert!(decoupling_residual(&p, &k, &basis).unwrap() < 1e-10);
        let minus = TransformCoefficients::closed_form(&p, Branch::Minus);
        assert!(decoupling_residual(&p, &minus, &basis).unwrap() < 1e-10);
    }

    #[test]
    fn interior_block_hermitian() {
        let (p, k) = setup(3.0, 0.5);
        let basis = TwoModeBasis::new(10, 10).unwrap();
        let h = hpu_matrix(&p, &k, &basis).unwrap();
        let blk = h.block(&basis.interior());
        assert!(max_abs(&(&blk - blk.adjoint())) < 1e-10);
    }

    #[test]
    fn commutators() {
        let (p, k) = setup(2.0, 1.0);
        let r = commutator_residuals(&p, &k, &TwoModeBasis::new(8, 8).unwrap()).unwrap();
        assert!(r.canonical < 1e-12 && r.cross < 1e-12, "{r:?}");
    }

    #[test]
    fn xi_level_examples() {
        let (p, _) = setup(2.0, 1.0);
        assert_eq!(xi_levels(&p, 6), vec![1.5, 2.5, 3.5, 3.5, 4.5, 4.5]);
        let basis = TwoModeBasis::new(6, 6).unwrap();
        let h = hxi_matrix(&p, &basis).unwrap();
        let mut d: Vec<f64> = h.entries().diagonal().iter().map(|z| z.re).collect();
        d.sort_by(f64::total_cmp);
        assert_eq!(d[0], 1.5);
        assert_eq!(d.iter().filter(|&&e| e == 3.5).count(), 2);
    }

    #[test]
    fn spectrum_examples() {
        let (p, k) = setup(2.0, 1.0);
        let basis = TwoModeBasis::new(16, 16).unwrap();
        let ev = pu_spectrum(&p, &k, &basis, 6).unwrap();
        for (got, want) in ev.iter().zip([1.5, 2.5, 3.5, 3.5, 4.5, 4.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-8);
        }
        let (p, k) = setup(3.0, 0.5);
        let ev = pu_spectrum(&p, &k, &TwoModeBasis::new(8, 8).unwrap(), 3).unwrap();
        for (got, want) in ev.iter().zip([1.75, 2.25, 2.75]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-8);
        }
        assert!(pu_spectrum(&p, &k, &TwoModeBasis::new(4, 4).unwrap(), 5).is_err());
    }
}
