//! The two-mode propagator contracted over the real sector reproduces the
//! product of oscillator kernels.

use ghostfree::pais_uhlenbeck::{
    pu_propagator_kernel, pu_propagator_relation_check, Branch, PUParams, PUPropagatorCoeffs, PhasePoint,
    TransformCoefficients,
};
use num_complex::Complex64;

fn main() -> ghostfree::Result<()> {
    let params = PUParams::new(2.0, 1.0)?;
    let transform = TransformCoefficients::closed_form(&params, Branch::Plus);
    println!("coefficients at t = 0: {:?}", PUPropagatorCoeffs::canonical(&params, 0.0).values());
    let z = PhasePoint::new(Complex64::new(0.1, 0.0), Complex64::new(0.2, 0.0));
    println!("kernel at t = pi: {:?}", pu_propagator_kernel(&params, std::f64::consts::PI, z, z).err());

    let samples = [[0.2, -0.3, 0.5, 0.1], [-1.0, 0.4, 0.0, 0.8]];
    for t in [0.4, 0.7, 1.1] {
        let r = pu_propagator_relation_check(&params, &transform, t, &samples)?;
        let printed = r.printed.map_or("divergent".to_string(), |v| format!("{v:.2e}"));
        println!("t = {t}: relative residual {:.2e}, printed coefficients {printed}", r.canonical);
    }
    Ok(())
}
