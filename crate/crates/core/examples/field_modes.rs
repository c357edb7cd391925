//! Plane-wave modes of the higher-derivative scalar field and the quartic
//! term in the oscillator variables.

use ghostfree::field::{field_coefficients, mode_reduce, quartic_identity_check, FieldParams};
use ghostfree::pais_uhlenbeck::Branch;

fn main() -> ghostfree::Result<()> {
    let field = FieldParams::new(2.0, 1.0)?;
    for k in [0.0, 0.5, 1.0, 2.0] {
        let p = mode_reduce(&field, k)?;
        println!("k = {k}: omega1 = {:.7}, omega2 = {:.7}", p.omega1(), p.omega2());
    }
    let coeffs = field_coefficients(&field, Branch::Plus);
    let r = quartic_identity_check(&coeffs, &[(0.3, -0.8), (1.5, 0.2), (-0.7, -0.7)]);
    println!("quartic identity: sign + {:.2e}, sign - {:.3e}", r.plus, r.minus);
    println!("vanishing sign: {:?}", r.vanishing_sign(1e-12));
    Ok(())
}
