//! Electrons and positrons bound near an external charge: constrained
//! minimization at fixed relative charge and the resulting Fermi levels.

use std::f64::consts::PI;

use vacpol::charge::{GaussianCharge, RadialCharge};
use vacpol::lattice::{build_lattice, periodize, CutoffShape};
use vacpol::numerics::C64;
use vacpol::scf::{scf_charge_sector, PeriodicSystem, ScfOptions};

fn main() -> vacpol::Result<()> {
    let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp)?;
    let sys = PeriodicSystem::new(&lat, 1.0)?;
    let g = GaussianCharge::new(2.0, 1.0);
    let nu = periodize(|k| C64::new(g.fourier((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()), 0.0), &lat);

    println!("{:>4} {:>14} {:>12} {:>10}", "q", "energy", "mu", "degenerate");
    for q in [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
        let (_, report) = scf_charge_sector(&sys, &nu, 0.02, q, &ScfOptions::default())?;
        println!("{q:>4} {:>14.8} {:>12.6} {:>10}", report.energy, report.fermi_level, report.degenerate_levels);
    }
    Ok(())
}
