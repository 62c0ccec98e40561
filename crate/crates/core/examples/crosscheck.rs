//! Lattice self-consistent density against the continuum linear response,
//! shell by shell.

use std::f64::consts::PI;

use vacpol::charge::{GaussianCharge, RadialCharge};
use vacpol::crosscheck::crosscheck;
use vacpol::lattice::{build_lattice, periodize, CutoffShape};
use vacpol::numerics::C64;
use vacpol::scf::{PeriodicSystem, ScfOptions};

fn main() -> vacpol::Result<()> {
    let lat = build_lattice(2.0 * PI, 2.5, CutoffShape::Sharp)?;
    let sys = PeriodicSystem::new(&lat, 1.0)?;
    let g = GaussianCharge::unit();
    let nu = periodize(|k| C64::new(g.fourier((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()), 0.0), &lat);

    for alpha in [0.02, 0.08] {
        let r = crosscheck(&sys, &nu, alpha, &ScfOptions::default())?;
        println!("alpha {alpha}: discrepancy {:.4e}, relative {:.4}", r.coulomb_discrepancy, r.relative_discrepancy);
        println!("{:>8} {:>5} {:>14} {:>14}", "k", "mult", "scf", "linear");
        for s in r.shells.iter().take(6) {
            println!("{:>8.4} {:>5} {:>14.6e} {:>14.6e}", s.k, s.multiplicity, s.scf, s.linear);
        }
    }
    Ok(())
}
