//! Eigenfunctions are orthonormal under the modified measure but not in plain L².

use ghostfree::complex_oscillator::{l2_gram, mu_gram, ComplexOscParams};
use nalgebra::DMatrix;

fn main() -> ghostfree::Result<()> {
    for eps in [0.1, 0.3, 0.6] {
        let params = ComplexOscParams::with_basis(eps, 16)?;
        let mu = mu_gram(&params, 15)?;
        let dev = (mu - DMatrix::<f64>::identity(16, 16)).abs().max();
        let l2 = l2_gram(&params, 15)?;
        println!(
            "eps = {eps}: measure Gram deviation {dev:.2e}, plain <0|0> = {:.6}, plain Gram min eigenvalue {:.4}",
            l2.matrix[(0, 0)],
            l2.min_eigenvalue
        );
    }
    Ok(())
}
