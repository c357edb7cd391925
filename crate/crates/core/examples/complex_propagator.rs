//! The closed-form propagator of the complex oscillator against the Mehler
//! kernel and against the contraction through the basis-change kernels.

use ghostfree::complex_oscillator::{delta_limit_error, propagator_kernel, propagator_relation_check};
use ghostfree::mehler::momentum_kernel;
use num_complex::Complex64;

fn main() -> ghostfree::Result<()> {
    let c = |x: f64| Complex64::new(x, 0.0);
    for t in [0.5, 2.0, 4.0] {
        let k = propagator_kernel(0.0, t, c(0.3), c(-0.2))?;
        let m = momentum_kernel(1.0, t, c(-0.2), c(0.3))?;
        println!("t = {t}: kernel {k:.10}, Mehler {m:.10}");
    }
    let r = propagator_relation_check(0.3, 0.7, &[(0.2, -0.4), (1.0, 0.3)])?;
    println!("relation residual {:.2e} (printed closed form {:.3})", r.residual, r.printed_residual);
    for t in [0.5f64, 0.2, 0.1, 0.05] {
        println!("delta limit at t = {t}, eps = t^3: {:.4e}", delta_limit_error(t.powi(3), t, 0.4)?);
    }
    Ok(())
}
