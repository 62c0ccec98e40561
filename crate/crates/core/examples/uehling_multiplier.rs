//! The Uehling multiplier next to its cutoff versions, written as a CSV
//! table on stdout.

use vacpol::renorm::{log_grid, uehling_u_closed, uehling_u_integral, MultiplierKind, MultiplierTable};

fn main() -> vacpol::Result<()> {
    let grid = log_grid(0.05, 20.0, 12);
    for k in [1e-3, 0.1, 1.0, 10.0] {
        println!("# k = {k:<6} closed {:.12e} quadrature {:.12e}", uehling_u_closed(k), uehling_u_integral(k)?);
    }
    let mut out = std::io::stdout().lock();
    MultiplierTable::tabulate(MultiplierKind::U, grid.clone(), None)?.write_csv(&mut out, "", true)?;
    for cutoff in [10.0, 1e3] {
        MultiplierTable::tabulate(MultiplierKind::ULambda, grid.clone(), Some(cutoff))?.write_csv(&mut out, "", false)?;
    }
    Ok(())
}
