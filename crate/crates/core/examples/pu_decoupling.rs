//! The Pais-Uhlenbeck Hamiltonian in the mapped operators: decoupling,
//! commutators and a spectrum bounded from below.

use ghostfree::pais_uhlenbeck::{
    commutator_residuals, decoupling_residual, pu_spectrum, solve_coefficients, Branch, PUParams,
    TransformCoefficients, TwoModeBasis,
};

fn main() -> ghostfree::Result<()> {
    let params = PUParams::new(2.0, 1.0)?;
    let coeffs = solve_coefficients(&params, Branch::Plus)?;
    let closed = TransformCoefficients::closed_form(&params, Branch::Plus);
    println!("a = {:.7}, b = {:.7}, c = {:.7}", coeffs.a, coeffs.b, coeffs.c);
    println!("solve vs closed form: {:.2e}", (coeffs.c - closed.c).abs().max((coeffs.a - closed.a).abs()));

    let basis = TwoModeBasis::new(16, 16)?;
    println!("decoupling residual {:.2e}", decoupling_residual(&params, &coeffs, &basis)?);
    let comm = commutator_residuals(&params, &coeffs, &basis)?;
    println!("commutators: canonical {:.2e}, cross {:.2e}", comm.canonical, comm.cross);
    println!("lowest levels {:?}", pu_spectrum(&params, &coeffs, &basis, 6)?);
    println!("ground energy (w1 + w2)/2 = {}", params.ground_energy());
    Ok(())
}
