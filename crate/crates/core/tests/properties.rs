use ghostfree::field::{field_coefficients, psi_inverse, psi_map, FieldParams, FieldSample};
use ghostfree::gaussian::{gaussian_integral, CVector, GaussianForm};
use ghostfree::hermite::{gauss_hermite, ho_eigenfunction};
use ghostfree::mehler::momentum_kernel;
use ghostfree::operator::{ladder_matrices, CMatrix, I};
use ghostfree::pais_uhlenbeck::{
    pu_relation_form, Branch, PUParams, PUPropagatorCoeffs, TransformCoefficients,
};
use ghostfree::complex_oscillator::propagator_kernel;
use num_complex::Complex64;
use proptest::prelude::*;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `∫ e^{−α|x|²} g(x) dⁿx` on a tensor Gauss–Hermite grid.
fn tensor_quadrature(n: usize, order: usize, alpha: f64, g: impl Fn(&[f64]) -> Complex64) -> Complex64 {
    let rule = gauss_hermite(order).unwrap();
    let s = alpha.sqrt();
    let mut idx = vec![0usize; n];
    let mut pt = vec![0.0; n];
    let mut acc = cx(0.0, 0.0);
    loop {
        let mut w = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            pt[k] = rule.nodes()[i] / s;
            w *= rule.weights()[i];
        }
        acc += g(&pt) * w;
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < order {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            return acc / s.powi(n as i32);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gaussian_engine_matches_quadrature(
        l in prop::array::uniform3(-1.0f64..1.0),
        b in prop::array::uniform3(-0.5f64..0.5),
        j in prop::array::uniform4(-1.0f64..1.0),
    ) {
        // Re M = L Lᵀ + I, Im M symmetric
        let re = [l[0] * l[0] + 1.0, l[0] * l[1], l[0] * l[1], l[1] * l[1] + l[2] * l[2] + 1.0];
        let m = CMatrix::from_row_slice(2, 2, &[cx(re[0], b[0]), cx(re[1], b[1]), cx(re[2], b[1]), cx(re[3], b[2])]);
        let form = GaussianForm::new(m, CVector::from_vec(vec![cx(j[0], j[1]), cx(j[2], j[3])]), cx(0.0, 0.0)).unwrap();
        let exact = gaussian_integral(&form, 0.0).unwrap();
        let alpha = 0.4;
        let quad = tensor_quadrature(2, 60, alpha, |x| (form.exponent(x) + alpha * (x[0] * x[0] + x[1] * x[1])).exp());
        prop_assert!((quad - exact).norm() < 1e-9 * exact.norm(), "{quad} vs {exact}");
    }

    #[test]
    fn eigenfunctions_are_orthonormal(n in 0usize..30, m in 0usize..30, omega in 0.3f64..3.0) {
        let rule = gauss_hermite(80).unwrap();
        let s = omega.sqrt();
        let v = rule.integrate(|y| {
            let q = y / s;
            ho_eigenfunction(n, omega, q).unwrap() * ho_eigenfunction(m, omega, q).unwrap() * (y * y).exp()
        }) / s;
        let expect = if n == m { 1.0 } else { 0.0 };
        prop_assert!((v - expect).abs() < 1e-11, "{v}");
    }

    #[test]
    fn ladder_commutator_on_interior(n in 6usize..30, omega in 0.2f64..4.0) {
        let (q, p) = ladder_matrices(n, omega).unwrap();
        let c = q.commutator(&p);
        for r in 0..n - 1 {
            for k in 0..n - 1 {
                let want = if r == k { I } else { cx(0.0, 0.0) };
                prop_assert!((c.entries()[(r, k)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_invariants(w2 in 0.05f64..5.0, gap in 0.01f64..5.0) {
        let p = PUParams::new(w2 + gap, w2).unwrap();
        for branch in [Branch::Plus, Branch::Minus] {
            let k = TransformCoefficients::closed_form(&p, branch);
            prop_assert!((k.b * k.b * (p.omega1().powi(2) - p.omega2().powi(2)) - 1.0).abs() < 1e-12);
            prop_assert!(((k.c - k.a) * k.b - 1.0).abs() < 1e-12);
            prop_assert!(k.identity_residual(&p) < 1e-10);
        }
    }

    #[test]
    fn psi_round_trip(m2 in 0.0f64..3.0, gap in 0.05f64..3.0, v in prop::array::uniform4(-3.0f64..3.0)) {
        let k = field_coefficients(&FieldParams::new(m2 + gap, m2).unwrap(), Branch::Plus);
        let s = FieldSample { phi: cx(v[0], v[1]), box_phi: cx(v[2], v[3]) };
        let (p1, p2) = psi_map(&k, &s);
        let back = psi_inverse(&k, p1, p2);
        let scale = 1.0 + s.phi.norm() + s.box_phi.norm();
        prop_assert!((back.phi - s.phi).norm() < 1e-12 * scale * (1.0 + k.c.abs() * k.b.abs()));
        prop_assert!((back.box_phi - s.box_phi).norm() < 1e-12 * scale * (1.0 + k.c.abs() * k.b.abs()));
    }

    #[test]
    fn kernel_is_mehler_at_zero_epsilon(t in 0.1f64..3.0, pi in -2.0f64..2.0, po in -2.0f64..2.0) {
        prop_assume!((t - std::f64::consts::PI).abs() > 0.1);
        let k = propagator_kernel(0.0, t, cx(pi, 0.0), cx(po, 0.0)).unwrap();
        let m = momentum_kernel(1.0, t, cx(po, 0.0), cx(pi, 0.0)).unwrap();
        prop_assert!((k - m).norm() < 1e-10);
    }
}

#[test]
fn relation_form_matches_damped_brute_quadrature() {
    let p = PUParams::new(2.0, 1.0).unwrap();
    let k = TransformCoefficients::closed_form(&p, Branch::Plus);
    let coeffs = PUPropagatorCoeffs::canonical(&p, 0.7);
    let delta = 2.0;
    for (p_in, p_out) in [([0.2, -0.3], [0.5, 0.1]), ([-1.0, 0.4], [0.0, 0.8]), ([0.7, 0.7], [-0.6, 0.2])] {
        let (form, _) = pu_relation_form(&p, &k, &coeffs, p_in, p_out).unwrap();
        let engine = gaussian_integral(&form, delta).unwrap();
        let brute = tensor_quadrature(4, 30, delta / 2.0, |x| form.exponent(x).exp());
        assert!((brute - engine).norm() < 1e-10 * engine.norm(), "{brute} vs {engine}");
    }
}
