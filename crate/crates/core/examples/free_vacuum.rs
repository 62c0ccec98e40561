//! Free Dirac sea on a small periodic lattice: spectrum of the free operator,
//! the negative spectral projector and its energy.

use std::f64::consts::PI;

use vacpol::dirac::{free_dirac_matrix, free_projector};
use vacpol::lattice::{build_lattice, CutoffShape};
use vacpol::numerics::eigh;

fn main() -> vacpol::Result<()> {
    let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp)?;
    println!("{}", lat.describe());

    let d0 = free_dirac_matrix(&lat, 1.0)?;
    let spectrum = eigh(&d0)?.values;
    let negative = spectrum.iter().filter(|v| **v < 0.0).count();
    println!("spectrum: {} negative, {} positive eigenvalues", negative, spectrum.len() - negative);
    println!("lowest |E| = {:.6}, highest |E| = {:.6}", spectrum[negative], spectrum[spectrum.len() - 1]);

    let p = free_projector(&lat, 1.0)?;
    println!("projector: trace {:.1}, idempotent {}", p.trace(), p.is_projector());
    let sea_energy: f64 = spectrum.iter().filter(|v| **v < 0.0).sum::<f64>() * 0.5
        - spectrum.iter().filter(|v| **v > 0.0).sum::<f64>() * 0.5;
    println!("free vacuum energy -1/2 sum |lambda| = {sea_energy:.6}");
    Ok(())
}
