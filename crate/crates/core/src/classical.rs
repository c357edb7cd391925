//! Classical PU trajectories and their oscillator channels.
//!
//! The equation of motion `x⁗ + (ω1²+ω2²)ẍ + ω1²ω2² x = 0` is integrated as a
//! first-order system in the jet `(x, ẋ, ẍ, x‴)`.

use std::io::Write;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pais_uhlenbeck::{jet_from_xi, map_to_xi_jet, ostrogradski_map, Jet, PUParams, TransformCoefficients, XiJet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec {
    pub duration: f64,
    pub step: f64,
    pub initial: Jet,
}

impl TrajectorySpec {
    pub fn new(duration: f64, step: f64, initial: Jet) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParams(format!("duration must be positive, got {duration}")));
        }
        if step.is_nan() || step <= 0.0 || step > duration / 100.0 {
            return Err(Error::InvalidParams(format!("step {step} must be positive and at most duration/100")));
        }
        Ok(Self { duration, step, initial })
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.step).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub jets: Vec<Jet>,
    /// Filled by [`map_to_xi`].
    pub xi: Option<Vec<XiJet>>,
}

fn derivative(params: &PUParams, y: &[Complex64; 4]) -> [Complex64; 4] {
    [y[1], y[2], y[3], -params.omega_sum_sq() * y[2] - params.omega_prod_sq() * y[0]]
}

fn axpy(y: &[Complex64; 4], k: &[Complex64; 4], h: f64) -> [Complex64; 4] {
    [y[0] + k[0] * h, y[1] + k[1] * h, y[2] + k[2] * h, y[3] + k[3] * h]
}

/// Classic fixed-step RK4.
pub fn integrate_pu(params: &PUParams, spec: &TrajectorySpec) -> Result<Trajectory> {
    let n = spec.steps();
    let h = spec.step;
    let mut y = [spec.initial.x, spec.initial.xd, spec.initial.xdd, spec.initial.xddd];
    let mut times = Vec::with_capacity(n + 1);
    let mut jets = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * h;
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Blowup(t));
        }
        times.push(t);
        jets.push(Jet::new(y[0], y[1], y[2], y[3]));
        if k == n {
            break;
        }
        let k1 = derivative(params, &y);
        let k2 = derivative(params, &axpy(&y, &k1, h / 2.0));
        let k3 = derivative(params, &axpy(&y, &k2, h / 2.0));
        let k4 = derivative(params, &axpy(&y, &k3, h));
        for i in 0..4 {
            y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
    }
    Ok(Trajectory { times, jets, xi: None })
}

/// Exact solution as a superposition of `e^{±iω1 t}`, `e^{±iω2 t}` matching
/// the initial jet; returns the jet at time `t`.
pub fn analytic_solution(params: &PUParams, initial: &Jet, t: f64) -> Result<Jet> {
    let i = Complex64::i();
    let lambdas = [i * params.omega1(), -i * params.omega1(), i * params.omega2(), -i * params.omega2()];
    let v = Matrix4::<Complex64>::from_fn(|row, col| lambdas[col].powi(row as i32));
    let rhs = Vector4::new(initial.x, initial.xd, initial.xdd, initial.xddd);
    let amps = v.lu().solve(&rhs).ok_or(Error::DegenerateFrequencies(params.omega1(), params.omega2()))?;
    let deriv = |order: i32| (0..4).map(|k| amps[k] * lambdas[k].powi(order) * (lambdas[k] * t).exp()).sum();
    Ok(Jet::new(deriv(0), deriv(1), deriv(2), deriv(3)))
}

/// Fills the `ξ_i` channels and `P_i = ξ̇_i`.
pub fn map_to_xi(coeffs: &TransformCoefficients, trajectory: &Trajectory) -> Trajectory {
    let xi = trajectory.jets.iter().map(|j| map_to_xi_jet(coeffs, j)).collect();
    Trajectory { xi: Some(xi), ..trajectory.clone() }
}

/// Initial jet with real oscillator data `(ξ1, ξ2, P1, P2)`.
pub fn invert_xi(params: &PUParams, coeffs: &TransformCoefficients, xi1: f64, xi2: f64, p1: f64, p2: f64) -> Jet {
    let r = |v: f64| Complex64::new(v, 0.0);
    jet_from_xi(params, coeffs, &XiJet { xi1: r(xi1), xi2: r(xi2), xi1_dot: r(p1), xi2_dot: r(p2) })
}

fn xi_channels(trajectory: &Trajectory) -> Result<&[XiJet]> {
    trajectory
        .xi
        .as_deref()
        .ok_or_else(|| Error::InvalidParams("trajectory has no ξ channels; call map_to_xi first".into()))
}

/// `max|ξ̈_i + ω_i²ξ_i| / (ω_i² max|ξ_i|)` over the interior samples, with
/// `ξ̈` from second-order central differences; the larger of the two modes.
pub fn ho_equation_residual(params: &PUParams, trajectory: &Trajectory) -> Result<f64> {
    let xi = xi_channels(trajectory)?;
    if xi.len() < 3 {
        return Err(Error::InvalidParams("need at least three samples".into()));
    }
    let h = trajectory.times[1] - trajectory.times[0];
    let mut worst: f64 = 0.0;
    for (omega, pick) in [
        (params.omega1(), (|x: &XiJet| x.xi1) as fn(&XiJet) -> Complex64),
        (params.omega2(), |x: &XiJet| x.xi2),
    ] {
        let scale = xi.iter().map(|x| pick(x).norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        let w2 = omega * omega;
        let mut r: f64 = 0.0;
        for k in 1..xi.len() - 1 {
            let dd = (pick(&xi[k + 1]) - 2.0 * pick(&xi[k]) + pick(&xi[k - 1])) / (h * h);
            r = r.max((dd + w2 * pick(&xi[k])).norm());
        }
        worst = worst.max(r / (w2 * scale));
    }
    Ok(worst)
}

/// `max|Im ξ_i|` and `max|Im P_i|` over the run.
pub fn max_imaginary_xi(trajectory: &Trajectory) -> Result<f64> {
    Ok(xi_channels(trajectory)?
        .iter()
        .flat_map(|x| [x.xi1.im, x.xi2.im, x.xi1_dot.im, x.xi2_dot.im])
        .fold(0.0, |m, v| m.max(v.abs())))
}

/// `H_ξ = (P1² + ω1²ξ1² + P2² + ω2²ξ2²)/2`.
pub fn h_xi(params: &PUParams, xi: &XiJet) -> Complex64 {
    let (w1, w2) = (params.omega1(), params.omega2());
    0.5 * (xi.xi1_dot * xi.xi1_dot + w1 * w1 * xi.xi1 * xi.xi1 + xi.xi2_dot * xi.xi2_dot + w2 * w2 * xi.xi2 * xi.xi2)
}

/// `H_PU = −Π_z²/2 − (ω1²+ω2²)z²/2 + zΠ_x + ω1²ω2²x²/2` at a jet.
pub fn h_pu(params: &PUParams, jet: &Jet) -> Complex64 {
    let o = ostrogradski_map(params, jet);
    -0.5 * o.pi_z * o.pi_z - 0.5 * params.omega_sum_sq() * o.z * o.z + o.z * o.pi_x
        + 0.5 * params.omega_prod_sq() * o.x * o.x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCheck {
    /// `max|H_ξ(t) − H_ξ(0)|`.
    pub drift: f64,
    /// `max|H_PU − H_ξ|`.
    pub equality_residual: f64,
}

pub fn energy_check(params: &PUParams, trajectory: &Trajectory) -> Result<EnergyCheck> {
    let xi = xi_channels(trajectory)?;
    let h0 = h_xi(params, &xi[0]);
    let mut out = EnergyCheck { drift: 0.0, equality_residual: 0.0 };
    for (x, jet) in xi.iter().zip(&trajectory.jets) {
        let hx = h_xi(params, x);
        out.drift = out.drift.max((hx - h0).norm());
        out.equality_residual = out.equality_residual.max((h_pu(params, jet) - hx).norm());
    }
    Ok(out)
}

/// Largest `|x_RK4 − x_exact|` over the run (all four jet components).
pub fn max_error_vs_analytic(params: &PUParams, trajectory: &Trajectory) -> Result<f64> {
    let init = trajectory.jets[0];
    let mut worst: f64 = 0.0;
    for (t, jet) in trajectory.times.iter().zip(&trajectory.jets) {
        let exact = analytic_solution(params, &init, *t)?;
        worst = worst
            .max((jet.x - exact.x).norm())
            .max((jet.xd - exact.xd).norm())
            .max((jet.xdd - exact.xdd).norm())
            .max((jet.xddd - exact.xddd).norm());
    }
    Ok(worst)
}

pub const TRAJECTORY_CSV_HEADER: [&str; 21] = [
    "t", "x_re", "x_im", "xd_re", "xd_im", "xdd_re", "xdd_im", "xddd_re", "xddd_im", "xi1_re", "xi1_im", "xi2_re",
    "xi2_im", "p1_re", "p1_im", "p2_re", "p2_im", "h_xi_re", "h_xi_im", "h_pu_re", "h_pu_im",
];

/// Writes `t`, real and imaginary parts of the jet, the `ξ` channels and both
/// Hamiltonians, one row per sample.
pub fn write_trajectory_csv<W: Write>(params: &PUParams, trajectory: &Trajectory, out: W) -> Result<()> {
    let xi = xi_channels(trajectory)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(TRAJECTORY_CSV_HEADER).map_err(io_error)?;
    for ((t, jet), x) in trajectory.times.iter().zip(&trajectory.jets).zip(xi) {
        let mut row = vec![t.to_string()];
        for z in [
            jet.x,
            jet.xd,
            jet.xdd,
            jet.xddd,
            x.xi1,
            x.xi2,
            x.xi1_dot,
            x.xi2_dot,
            h_xi(params, x),
            h_pu(params, jet),
        ] {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        w.write_record(&row).map_err(io_error)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

fn io_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pais_uhlenbeck::Branch;
    use approx::assert_abs_diff_eq;

    fn setup() -> (PUParams, TransformCoefficients) {
        let p = PUParams::new(2.0, 1.0).unwrap();
        (p, TransformCoefficients::closed_form(&p, Branch::Plus))
    }

    #[test]
    fn spec_validation() {
        let j = Jet::real(1.0, 0.0, 0.0, 0.0);
        assert!(TrajectorySpec::new(10.0, 0.2, j).is_err());
        assert!(TrajectorySpec::new(0.0, 1e-3, j).is_err());
        assert!(TrajectorySpec::new(10.0, 0.1, j).is_ok());
    }

    #[test]
    fn analytic_examples() {
        let (p, _) = setup();
        let init = Jet::real(1.0, 0.0, 0.0, 0.0);
        for &t in &[0.0, 0.4, 2.5, 7.0] {
            let got = analytic_solution(&p, &init, t).unwrap();
            assert_abs_diff_eq!(got.x.re, (4.0 * t.cos() - (2.0 * t).cos()) / 3.0, epsilon = 1e-13);
            assert!(got.x.im.abs() < 1e-13);
        }
        let mode = Jet::real(1.0, 0.0, -4.0, 0.0);
        assert_abs_diff_eq!(analytic_solution(&p, &mode, 1.3).unwrap().x.re, (2.6f64).cos(), epsilon = 1e-13);
    }

    #[test]
    fn rk4_reproduces_pure_modes() {
        let (p, _) = setup();
        for (init, w) in [(Jet::real(1.0, 0.0, -4.0, 0.0), 2.0), (Jet::real(1.0, 0.0, -1.0, 0.0), 1.0)] {
            let traj = integrate_pu(&p, &TrajectorySpec::new(10.0, 1e-3, init).unwrap()).unwrap();
            let err = traj.times.iter().zip(&traj.jets).map(|(t, j)| (j.x - Complex64::new((w * t).cos(), 0.0)).norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "ω={w}: {err}");
        }
    }

    #[test]
    fn rk4_order() {
        let (p, _) = setup();
        let init = Jet::real(1.0, 0.3, 0.0, -0.5);
        let e1 = max_error_vs_analytic(&p, &integrate_pu(&p, &TrajectorySpec::new(10.0, 1e-2, init).unwrap()).unwrap()).unwrap();
        let e2 = max_error_vs_analytic(&p, &integrate_pu(&p, &TrajectorySpec::new(10.0, 5e-3, init).unwrap()).unwrap()).unwrap();
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 3.2, "ratio {ratio}");
    }

    #[test]
    fn xi_channels_decouple() {
        let (p, k) = setup();
        let init = invert_xi(&p, &k, 0.4, -0.7, 0.2, 0.5);
        assert!(init.x.im.abs() > 0.1);
        let traj = map_to_xi(&k, &integrate_pu(&p, &TrajectorySpec::new(10.0, 1e-3, init).unwrap()).unwrap());
        assert!(ho_equation_residual(&p, &traj).unwrap() < 1e-6);
        assert!(max_imaginary_xi(&traj).unwrap() < 1e-10);
        let e = energy_check(&p, &traj).unwrap();
        assert!(e.drift < 1e-8 && e.equality_residual < 1e-10, "{e:?}");
        let xi = traj.xi.as_ref().unwrap();
        assert!(xi.iter().all(|x| h_xi(&p, x).re >= 0.0));
    }

    #[test]
    fn ho_residual_converges_quadratically() {
        let (p, k) = setup();
        let init = invert_xi(&p, &k, 0.4, -0.7, 0.2, 0.5);
        let r = |h: f64| {
            let traj = map_to_xi(&k, &integrate_pu(&p, &TrajectorySpec::new(10.0, h, init).unwrap()).unwrap());
            ho_equation_residual(&p, &traj).unwrap()
        };
        let ratio = r(2e-3) / r(1e-3);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn pure_mode_kills_other_channel() {
        let (p, k) = setup();
        let traj = map_to_xi(&k, &integrate_pu(&p, &TrajectorySpec::new(2.0, 1e-3, Jet::real(1.0, 0.0, -4.0, 0.0)).unwrap()).unwrap());
        let xi = traj.xi.unwrap();
        assert!(xi.iter().all(|x| x.xi2.norm() < 1e-9));
    }

    #[test]
    fn round_trip() {
        let (p, k) = setup();
        let j = invert_xi(&p, &k, 0.3, 1.2, -0.4, 0.9);
        let back = map_to_xi_jet(&k, &j);
        assert!((back.xi1 - Complex64::new(0.3, 0.0)).norm() < 1e-12);
        assert!((back.xi2_dot - Complex64::new(0.9, 0.0)).norm() < 1e-12);
        assert_eq!(invert_xi(&p, &k, 0.0, 0.0, 0.0, 0.0), Jet::real(0.0, 0.0, 0.0, 0.0));
        assert_abs_diff_eq!(j.x.im, k.b * 0.3, epsilon = 1e-15);
    }

    #[test]
    fn csv_export() {
        let (p, k) = setup();
        let traj = map_to_xi(&k, &integrate_pu(&p, &TrajectorySpec::new(1.0, 0.01, Jet::real(1.0, 0.0, 0.0, 0.0)).unwrap()).unwrap());
        let mut buf = Vec::new();
        write_trajectory_csv(&p, &traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 102);
        assert!(lines[0].starts_with("t,x_re,x_im"));
        assert_eq!(lines[1].split(',').count(), 21);
        assert!(!text.contains('\r'));
        assert!(lines[1].starts_with("0,1,0,"));
    }
}
