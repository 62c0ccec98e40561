//! Self-consistent polarized vacuum around a Gaussian charge, with the
//! energy trace of the optimal-damping iteration.

use std::f64::consts::PI;

use vacpol::charge::{GaussianCharge, RadialCharge};
use vacpol::lattice::{build_lattice, density_of, periodize, CutoffShape};
use vacpol::numerics::C64;
use vacpol::scf::{exchange_energy, scf_solve, stability_check, PeriodicSystem, ScfOptions};

fn main() -> vacpol::Result<()> {
    let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp)?;
    let sys = PeriodicSystem::new(&lat, 1.0)?;
    let g = GaussianCharge::new(1.0, 0.8);
    let nu = periodize(|k| C64::new(g.fourier((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()), 0.0), &lat);

    for alpha in [0.05, 0.2, 1.0] {
        let (gamma, report) = scf_solve(&sys, &nu, alpha, &ScfOptions::default())?;
        let rho = density_of(&gamma, &lat)?;
        println!(
            "alpha {alpha:<4}: {} iterations, relative energy {:.6e}, residual {:.1e}, uniqueness {}",
            report.iterations, report.relative_energy, report.residual, report.uniqueness_condition_met
        );
        println!("  induced density at d = 0 and (1,0,0): {:.3e}, {:.3e}", rho.coefficient(&[0, 0, 0]).unwrap().re, rho.coefficient(&[1, 0, 0]).unwrap().re);
        println!("  energy history {:?}", report.energy_history.iter().map(|e| format!("{e:.8}")).collect::<Vec<_>>());
        println!("  exchange energy (not part of the minimized functional) {:.3e}", exchange_energy(&sys, &gamma, alpha)?);
        println!("  stability lhs {:.3e}", stability_check(&sys, &gamma, &nu, alpha)?.lhs);
    }
    Ok(())
}
