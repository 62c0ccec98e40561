//! Pauli-Villars schemes: sum rules, averaged cutoff, the multiplier M and
//! how it approaches the Uehling multiplier as the regulator masses grow.

use std::f64::consts::PI;

use vacpol::numerics::C64;
use vacpol::pauli_villars::{f2_energy, m_multiplier, pv_scheme, uehling_limit_gap, FieldSample};

fn main() -> vacpol::Result<()> {
    let scheme = pv_scheme(1.0, 2.0, 3.0)?;
    println!("c = {:?}, Lambda = {:.6}, sum rules {:?}", scheme.coefficients(), scheme.lambda(), scheme.sum_rule_residuals());
    println!("M(0) = {:.10}, 2 ln(Lambda)/(3 pi) = {:.10}", m_multiplier(&scheme, 0.0)?, 2.0 * scheme.lambda().ln() / (3.0 * PI));

    println!("{:>6} {:>12} {:>12} {:>12}", "s", "Lambda", "gap(k=1)", "gap(k=5)");
    for s in [1.0, 10.0, 100.0, 1000.0] {
        let sch = pv_scheme(1.0, 2.0 * s, 3.0 * s)?;
        println!("{s:>6} {:>12.4e} {:>12.3e} {:>12.3e}", sch.lambda(), uehling_limit_gap(&sch, 1.0)?, uehling_limit_gap(&sch, 5.0)?);
    }

    // a plane magnetic wave along z and its conjugate partner
    let b = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)];
    let zero = [C64::new(0.0, 0.0); 3];
    let field = FieldSample::new(
        vec![[0.0, 0.0, 2.0], [0.0, 0.0, -2.0]],
        vec![zero, zero],
        vec![b, b.map(|z| z.conj())],
        vec![0.5, 0.5],
    )?;
    println!("F2 of the magnetic wave: {:?}", f2_energy(&field, &scheme)?);
    Ok(())
}
