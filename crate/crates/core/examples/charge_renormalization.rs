//! Bare versus physical coupling, the Landau pole and the cutoff implied by
//! a given field-strength renormalization.

use vacpol::renorm::{b0, b0_asymptotic, bare_from_physical, cutoff_from_z3, renorm_point_from_bare};
use vacpol::Error;

fn main() -> vacpol::Result<()> {
    let alpha_ph = 1.0 / 137.036;
    println!("{:>10} {:>14} {:>14} {:>12}", "Lambda", "B0", "asymptotic", "alpha_bare");
    for cutoff in [1e1, 1e3, 1e6, 1e12] {
        let p = bare_from_physical(alpha_ph, cutoff)?;
        println!("{cutoff:>10.0e} {:>14.10} {:>14.10} {:>12.8}", b0(cutoff)?, b0_asymptotic(cutoff), p.alpha_bare);
    }

    let back = renorm_point_from_bare(bare_from_physical(alpha_ph, 1e6)?.alpha_bare, 1e6)?;
    println!("round trip alpha_ph = {:.15}", back.alpha_ph);

    for z3 in [0.99, 0.95, 0.9] {
        println!("Z3 = {z3}: Lambda = {:.6e}", cutoff_from_z3(alpha_ph, z3)?);
    }

    match bare_from_physical(1.0, 1e6) {
        Err(Error::LandauPole { product }) => println!("alpha_ph = 1 at Lambda = 1e6 is past the Landau pole (alpha_ph B0 = {product:.4})"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
