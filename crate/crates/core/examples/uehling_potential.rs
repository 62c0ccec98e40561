//! First-order vacuum-polarization correction to the Coulomb potential of a
//! Gaussian charge, by the real-space and Fourier routes.

use std::f64::consts::PI;

use vacpol::charge::GaussianCharge;
use vacpol::renorm::{uehling_potential, uehling_potential_fourier};

fn main() -> vacpol::Result<()> {
    let alpha = 1.0 / 137.036;
    let nu = GaussianCharge::new(1.0, 0.5);
    println!("{:>6} {:>16} {:>16} {:>12}", "x", "real space", "fourier", "vs Coulomb");
    for x in [0.1, 0.25, 0.5, 1.0, 2.0, 3.0] {
        let direct = uehling_potential(&nu, alpha, x, 1e-8)?;
        let fourier = uehling_potential_fourier(&nu, alpha, x, 1e-10)?;
        // ratio to the point-charge potential, only for scale
        let coulomb = 1.0 / x;
        println!("{x:>6} {direct:>16.9e} {fourier:>16.9e} {:>12.3e}", direct / coulomb);
    }
    println!("(alpha^2 = {:.3e}, 2 alpha / 3 pi = {:.3e})", alpha * alpha, 2.0 * alpha / (3.0 * PI));
    Ok(())
}
