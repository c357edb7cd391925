//! Lowest levels of the non-hermitian oscillator `H = p²/2 + q²/2 − iε{p, q}/2`.

use ghostfree::complex_oscillator::{hc_spectrum, reality_conditions_check, ComplexOscParams};

fn main() -> ghostfree::Result<()> {
    let params = ComplexOscParams::with_basis(0.3, 40)?;
    for (n, e) in hc_spectrum(&params, 10)?.iter().enumerate() {
        println!("n = {n:2}  E = {:.12} {:+.2e}i", e.re, e.im);
    }
    let r = reality_conditions_check(&params)?;
    println!("reality residuals: position {:.2e}, momentum {:.2e}", r.position, r.momentum);
    println!("plain adjoint of p misses by {:.3}", r.naive_momentum_asymmetry);
    Ok(())
}
