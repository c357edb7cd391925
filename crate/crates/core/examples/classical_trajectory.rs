//! Integrates a Pais-Uhlenbeck trajectory in the real oscillator sector and
//! writes it as CSV.

use std::fs::File;
use std::io::BufWriter;

use ghostfree::classical::{
    energy_check, ho_equation_residual, integrate_pu, invert_xi, map_to_xi, max_imaginary_xi, write_trajectory_csv,
    TrajectorySpec,
};
use ghostfree::pais_uhlenbeck::{Branch, PUParams, TransformCoefficients};

fn main() -> ghostfree::Result<()> {
    let params = PUParams::new(2.0, 1.0)?;
    let coeffs = TransformCoefficients::closed_form(&params, Branch::Plus);
    let initial = invert_xi(&params, &coeffs, 0.4, -0.7, 0.2, 0.5);
    let traj = map_to_xi(&coeffs, &integrate_pu(&params, &TrajectorySpec::new(10.0, 1e-3, initial)?)?);

    println!("oscillator equation residual {:.2e}", ho_equation_residual(&params, &traj)?);
    println!("largest imaginary part of xi {:.2e}", max_imaginary_xi(&traj)?);
    let e = energy_check(&params, &traj)?;
    println!("energy drift {:.2e}, H_PU - H_xi {:.2e}", e.drift, e.equality_residual);

    let path = std::env::temp_dir().join("ghostfree_trajectory.csv");
    let file = File::create(&path).map_err(|e| ghostfree::Error::Io(e.to_string()))?;
    write_trajectory_csv(&params, &traj, BufWriter::new(file))?;
    println!("wrote {}", path.display());
    Ok(())
}
