//! The Pais–Uhlenbeck oscillator
//! `L_PU = −ẍ²/2 + (ω1²+ω2²)ẋ²/2 − ω1²ω2²x²/2`
//! and its complex canonical map onto two ordinary oscillators of
//! frequencies `ω1 > ω2`.
//!
//! With `ξ1 = i(ax + bẍ)`, `ξ2 = cx + bẍ` and
//! `a/ω2² = b = c/ω1² = ±(ω1² − ω2²)^{−1/2}` the two Lagrangians differ by a
//! total derivative of `ẋẍ`.

mod operators;
mod propagator;

pub use operators::*;
pub use propagator::*;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PUParams {
    omega1: f64,
    omega2: f64,
}

impl PUParams {
    pub fn new(omega1: f64, omega2: f64) -> Result<Self> {
        if !(omega1.is_finite() && omega2.is_finite()) || omega2 <= 0.0 {
            return Err(Error::InvalidParams(format!("frequencies must be positive, got ({omega1}, {omega2})")));
        }
        if omega1 == omega2 {
            return Err(Error::DegenerateFrequencies(omega1, omega2));
        }
        if omega1 < omega2 {
            return Err(Error::InvalidParams(format!("expected omega1 > omega2, got ({omega1}, {omega2})")));
        }
        Ok(Self { omega1, omega2 })
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    /// `ω1² + ω2²`.
    pub fn omega_sum_sq(&self) -> f64 {
        self.omega1 * self.omega1 + self.omega2 * self.omega2
    }

    /// `ω1² ω2²`.
    pub fn omega_prod_sq(&self) -> f64 {
        (self.omega1 * self.omega2).powi(2)
    }

    /// `(ω1 + ω2)/2`, the lowest level of the decoupled oscillators.
    pub fn ground_energy(&self) -> f64 {
        0.5 * (self.omega1 + self.omega2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub branch: Branch,
}

impl TransformCoefficients {
    /// `a/ω2² = b = c/ω1² = ±(ω1² − ω2²)^{−1/2}`.
    pub fn closed_form(params: &PUParams, branch: Branch) -> Self {
        let b = branch.sign() / (params.omega1.powi(2) - params.omega2.powi(2)).sqrt();
        Self { a: params.omega2.powi(2) * b, b, c: params.omega1.powi(2) * b, branch }
    }

    /// Largest violation of `a/ω2² = b = c/ω1²`, `b²(ω1²−ω2²) = 1`,
    /// `(c−a)b = 1` and `c² − a² = ω1² + ω2²`.
    pub fn identity_residual(&self, params: &PUParams) -> f64 {
        let (w1s, w2s) = (params.omega1.powi(2), params.omega2.powi(2));
        [
            self.a / w2s - self.b,
            self.c / w1s - self.b,
            self.b * self.b * (w1s - w2s) - 1.0,
            (self.c - self.a) * self.b - 1.0,
            self.c * self.c - self.a * self.a - (w1s + w2s),
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// A jet `(x, ẋ, ẍ, x‴)` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub x: Complex64,
    pub xd: Complex64,
    pub xdd: Complex64,
    pub xddd: Complex64,
}

impl Jet {
    pub fn new(x: Complex64, xd: Complex64, xdd: Complex64, xddd: Complex64) -> Self {
        Self { x, xd, xdd, xddd }
    }

    pub fn real(x: f64, xd: f64, xdd: f64, xddd: f64) -> Self {
        let c = |v| Complex64::new(v, 0.0);
        Self::new(c(x), c(xd), c(xdd), c(xddd))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianValues {
    pub l_pu: Complex64,
    pub l_xi: Complex64,
    /// `d/dt` of `f = −ẋẍ`.
    pub df_dt: Complex64,
}

impl LagrangianValues {
    /// `|L_PU − df/dt − L_ξ|`: the total-derivative identity with `f = −ẋẍ`.
    pub fn identity_residual(&self) -> f64 {
        (self.l_pu - self.df_dt - self.l_xi).norm()
    }

    /// `|L_PU + df/dt − L_ξ|`, the opposite sign, which does not vanish.
    pub fn opposite_sign_residual(&self) -> f64 {
        (self.l_pu + self.df_dt - self.l_xi).norm()
    }
}

/// `L_PU`, `L_ξ` and `df/dt` at a jet.
pub fn lagrangian_values(params: &PUParams, coeffs: &TransformCoefficients, jet: &Jet) -> LagrangianValues {
    let (w1s, w2s) = (params.omega1.powi(2), params.omega2.powi(2));
    let Jet { x, xd, xdd, xddd } = *jet;
    let l_pu = -0.5 * xdd * xdd + 0.5 * (w1s + w2s) * xd * xd - 0.5 * w1s * w2s * x * x;
    let xi = map_to_xi_jet(coeffs, jet);
    let l_xi = 0.5 * xi.xi1_dot * xi.xi1_dot - 0.5 * w1s * xi.xi1 * xi.xi1 + 0.5 * xi.xi2_dot * xi.xi2_dot
        - 0.5 * w2s * xi.xi2 * xi.xi2;
    let df_dt = -xdd * xdd - xd * xddd;
    LagrangianValues { l_pu, l_xi, df_dt }
}

/// `ξ_i` and `ξ̇_i` of a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiJet {
    pub xi1: Complex64,
    pub xi2: Complex64,
    pub xi1_dot: Complex64,
    pub xi2_dot: Complex64,
}

pub fn map_to_xi_jet(coeffs: &TransformCoefficients, jet: &Jet) -> XiJet {
    let i = Complex64::i();
    let TransformCoefficients { a, b, c, .. } = *coeffs;
    XiJet {
        xi1: i * (a * jet.x + b * jet.xdd),
        xi2: c * jet.x + b * jet.xdd,
        xi1_dot: i * (a * jet.xd + b * jet.xddd),
        xi2_dot: c * jet.xd + b * jet.xddd,
    }
}

/// The jet with the given `ξ_i`, `ξ̇_i`.
pub fn jet_from_xi(params: &PUParams, coeffs: &TransformCoefficients, xi: &XiJet) -> Jet {
    let i = Complex64::i();
    let TransformCoefficients { a, b, c, .. } = *coeffs;
    let omega = params.omega_sum_sq();
    let p1 = xi.xi1_dot;
    let p2 = xi.xi2_dot;
    let xd = i * b * p1 + b * p2;
    Jet {
        x: i * b * xi.xi1 + b * xi.xi2,
        xd,
        xdd: -(i * c * xi.xi1 + a * xi.xi2),
        xddd: i * a * p1 + c * p2 - omega * xd,
    }
}

/// Ostrogradski variables of a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OstrogradskiPoint {
    pub x: Complex64,
    pub z: Complex64,
    pub pi_x: Complex64,
    pub pi_z: Complex64,
    /// `f = zΠ_z`.
    pub f: Complex64,
}

/// `Π_x = (ω1²+ω2²)ẋ + x‴`, `z = ẋ`, `Π_z = −ẍ`.
pub fn ostrogradski_map(params: &PUParams, jet: &Jet) -> OstrogradskiPoint {
    let z = jet.xd;
    let pi_z = -jet.xdd;
    OstrogradskiPoint { x: jet.x, z, pi_x: params.omega_sum_sq() * jet.xd + jet.xddd, pi_z, f: z * pi_z }
}

const MATCH_TOL: f64 = 1e-10;

// Monomial coefficients of the quadratic form L_PU − df/dt − L_ξ in the jet,
// obtained by polarization over unit jets.
fn matching_residuals(params: &PUParams, abc: &[f64; 3]) -> DVector<f64> {
    let coeffs = TransformCoefficients { a: abc[0], b: abc[1], c: abc[2], branch: Branch::Plus };
    let unit = |k: usize| {
        let mut v = [0.0; 4];
        v[k] = 1.0;
        v
    };
    let r = |v: [f64; 4]| {
        let jet = Jet::real(v[0], v[1], v[2], v[3]);
        let l = lagrangian_values(params, &coeffs, &jet);
        (l.l_pu - l.df_dt - l.l_xi).re
    };
    let mut out = Vec::with_capacity(10);
    for i in 0..4 {
        out.push(r(unit(i)));
        for j in i + 1..4 {
            let mut both = unit(i);
            both[j] = 1.0;
            out.push(0.5 * (r(both) - r(unit(i)) - r(unit(j))));
        }
    }
    DVector::from_vec(out)
}

/// Solves the coefficient-matching system for `(a, b, c)` by damped
/// Gauss–Newton and cross-checks the result against the closed form.
pub fn solve_coefficients(params: &PUParams, branch: Branch) -> Result<TransformCoefficients> {
    let s = branch.sign();
    let (w1, w2) = (params.omega1, params.omega2);
    let mut abc = [s * w2, s / w1, s * w1];
    let mut lambda = 1e-3;
    let norm = |v: &DVector<f64>| v.norm();
    let mut res = matching_residuals(params, &abc);
    for _ in 0..200 {
        if norm(&res) < 1e-15 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(res.len(), 3);
        for k in 0..3 {
            let h = 1e-7 * abc[k].abs().max(1.0);
            let mut shifted = abc;
            shifted[k] += h;
            let col = (matching_residuals(params, &shifted) - &res) / h;
            jac.set_column(k, &col);
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &res;
        let mut improved = false;
        for _ in 0..30 {
            let damped = &jtj + DMatrix::<f64>::from_diagonal(&jtj.diagonal()) * lambda;
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [abc[0] - step[0], abc[1] - step[1], abc[2] - step[2]];
            let trial_res = matching_residuals(params, &trial);
            if norm(&trial_res) < norm(&res) {
                abc = trial;
                res = trial_res;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let solved = TransformCoefficients { a: abc[0], b: abc[1], c: abc[2], branch };
    if solved.b * s < 0.0 {
        return Err(Error::InvalidParams("coefficient solve converged to the other sign branch".into()));
    }
    let closed = TransformCoefficients::closed_form(params, branch);
    let gap = [solved.a - closed.a, solved.b - closed.b, solved.c - closed.c]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = closed.c.abs().max(1.0);
    if gap > MATCH_TOL * scale {
        return Err(Error::InvalidParams(format!(
            "numerical coefficients disagree with the closed form by {gap:e}"
        )));
    }
    Ok(solved)
}

/// Largest entrywise gap between [`solve_coefficients`] and the closed form.
pub fn coefficient_solve_gap(params: &PUParams, branch: Branch) -> Result<f64> {
    let s = solve_coefficients(params, branch)?;
    let c = TransformCoefficients::closed_form(params, branch);
    Ok([s.a - c.a, s.b - c.b, s.c - c.c].iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_validation() {
        assert!(PUParams::new(2.0, 1.0).is_ok());
        assert!(matches!(PUParams::new(1.0, 1.0), Err(Error::DegenerateFrequencies(_, _))));
        assert!(PUParams::new(1.0, 2.0).is_err());
        assert!(PUParams::new(1.0, 0.0).is_err());
        assert!(PUParams::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn closed_form_example() {
        let p = PUParams::new(2.0, 1.0).unwrap();
        let k = solve_coefficients(&p, Branch::Plus).unwrap();
        assert_abs_diff_eq!(k.a, 0.5773503, epsilon = 1e-7);
        assert_abs_diff_eq!(k.b, 0.5773503, epsilon = 1e-7);
        assert_abs_diff_eq!(k.c, 2.3094011, epsilon = 1e-7);
        assert_abs_diff_eq!((k.c - k.a) * k.b, 1.0, epsilon = 1e-10);
        let m = solve_coefficients(&p, Branch::Minus).unwrap();
        assert_abs_diff_eq!(m.b, -k.b, epsilon = 1e-12);
    }

    #[test]
    fn solve_matches_closed_form_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let w2 = rng.gen_range(0.1..3.0);
            let w1 = w2 + rng.gen_range(0.05..3.0);
            let p = PUParams::new(w1, w2).unwrap();
            for branch in [Branch::Plus, Branch::Minus] {
                assert!(coefficient_solve_gap(&p, branch).unwrap() < 1e-10, "({w1}, {w2})");
                assert!(TransformCoefficients::closed_form(&p, branch).identity_residual(&p) < 1e-12);
            }
        }
    }

    #[test]
    fn jet_identity() {
        let p = PUParams::new(2.0, 1.0).unwrap();
        let k = TransformCoefficients::closed_form(&p, Branch::Plus);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut z = || cx(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        for _ in 0..200 {
            let jet = Jet::new(z(), z(), z(), z());
            let v = lagrangian_values(&p, &k, &jet);
            assert!(v.identity_residual() < 1e-12);
        }
        let jet = Jet::new(cx(0.3, 0.1), cx(1.0, 0.0), cx(0.5, -0.2), cx(0.1, 0.4));
        assert!(lagrangian_values(&p, &k, &jet).opposite_sign_residual() > 1e-2);
        let zero = lagrangian_values(&p, &k, &Jet::real(0.0, 0.0, 0.0, 0.0));
        assert_eq!((zero.l_pu, zero.l_xi, zero.df_dt), (cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)));
    }

    #[test]
    fn real_xi_sector_has_real_lagrangian() {
        let p = PUParams::new(2.0, 1.0).unwrap();
        let k = TransformCoefficients::closed_form(&p, Branch::Plus);
        let xi = XiJet { xi1: cx(0.4, 0.0), xi2: cx(-1.2, 0.0), xi1_dot: cx(0.7, 0.0), xi2_dot: cx(0.3, 0.0) };
        let jet = jet_from_xi(&p, &k, &xi);
        let back = map_to_xi_jet(&k, &jet);
        for (u, v) in [(back.xi1, xi.xi1), (back.xi2, xi.xi2), (back.xi1_dot, xi.xi1_dot), (back.xi2_dot, xi.xi2_dot)] {
            assert!((u - v).norm() < 1e-12);
        }
        assert!(lagrangian_values(&p, &k, &jet).l_xi.im.abs() < 1e-12);
        assert!(jet.x.im.abs() > 0.1);
    }

    #[test]
    fn ostrogradski_examples() {
        let p = PUParams::new(2.0, 1.0).unwrap();
        let o = ostrogradski_map(&p, &Jet::real(1.0, 0.0, 0.0, 0.0));
        assert_eq!((o.x, o.z, o.pi_x, o.pi_z), (cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(-0.0, 0.0)));
        assert_eq!(ostrogradski_map(&p, &Jet::real(0.0, 1.0, 0.0, 0.0)).pi_x, cx(5.0, 0.0));
        let jet = Jet::new(cx(0.2, 1.0), cx(-0.4, 0.3), cx(1.1, -0.6), cx(0.0, 2.0));
        let o = ostrogradski_map(&p, &jet);
        assert!((o.f + jet.xd * jet.xdd).norm() < 1e-12);
    }
}
