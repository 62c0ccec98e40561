//! Comparison of the self-consistent lattice vacuum density with the
//! continuum linear response evaluated at the lattice wavevectors.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{coulomb_norm_sq, density_of, ChargeDensity, CutoffShape};
use crate::renorm::b_k;
use crate::scf::{scf_solve, PeriodicSystem, ScfOptions, ScfReport};

/// `alpha B(k) / (1 + alpha B(k))` times `nu` on every difference mode, with
/// `B` the sharp-cutoff multiplier at the lattice cutoff. Momenta are scaled
/// by the mass so the continuum formula, written in electron-mass units,
/// applies to any mass.
pub fn lattice_linear_response(sys: &PeriodicSystem, nu: &ChargeDensity, alpha: f64) -> Result<ChargeDensity> {
    let lat = sys.lattice();
    if lat.shape() != CutoffShape::Sharp {
        return Err(Error::InvalidInput("the continuum linear response is only available for the sharp cutoff".into()));
    }
    if !nu.lattice().same_as(lat) {
        return Err(Error::LatticeMismatch);
    }
    let m = sys.mass();
    let cutoff = lat.cutoff() / m;
    let mut factors = Vec::with_capacity(lat.diff_modes().len());
    for d in lat.diff_modes() {
        let b = b_k(cutoff, lat.norm(d) / m)?;
        factors.push(alpha * b / (1.0 + alpha * b));
    }
    let coefficients = nu.coefficients().iter().zip(&factors).map(|(c, f)| c * *f).collect();
    ChargeDensity::from_coefficients(lat, coefficients)
}

/// SCF and linear-response densities averaged over one shell `|d|^2 = const`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellRow {
    pub k: f64,
    pub multiplicity: usize,
    pub scf: f64,
    pub linear: f64,
    pub max_abs_difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub alpha: f64,
    pub box_length: f64,
    pub cutoff: f64,
    pub shape: CutoffShape,
    pub mass: f64,
    pub num_modes: usize,
    /// Coulomb norm of `rho_scf - rho_linear`, zero mode excluded.
    pub coulomb_discrepancy: f64,
    pub linear_coulomb_norm: f64,
    pub relative_discrepancy: f64,
    pub scf: ScfReport,
    pub shells: Vec<ShellRow>,
}

pub fn crosscheck(sys: &PeriodicSystem, nu: &ChargeDensity, alpha: f64, opts: &ScfOptions) -> Result<CrosscheckReport> {
    let linear = lattice_linear_response(sys, nu, alpha)?;
    let (gamma, scf) = scf_solve(sys, nu, alpha, opts)?;
    let lat = sys.lattice();
    let rho = density_of(&gamma, lat)?;
    let diff = rho.sub(&linear)?;
    let coulomb_discrepancy = coulomb_norm_sq(&diff).sqrt();
    let linear_coulomb_norm = coulomb_norm_sq(&linear).sqrt();

    let mut shells: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, d) in lat.diff_modes().iter().enumerate() {
        shells.entry(d.iter().map(|x| x * x).sum()).or_default().push(i);
    }
    let shells = shells
        .into_values()
        .map(|members| {
            let n = members.len();
            let mean = |c: &[crate::numerics::C64]| members.iter().map(|&i| c[i].re).sum::<f64>() / n as f64;
            ShellRow {
                k: lat.norm(&lat.diff_modes()[members[0]]),
                multiplicity: n,
                scf: mean(rho.coefficients()),
                linear: mean(linear.coefficients()),
                max_abs_difference: members.iter().map(|&i| diff.coefficients()[i].norm()).fold(0.0, f64::max),
            }
        })
        .collect();

    Ok(CrosscheckReport {
        alpha,
        box_length: lat.box_length(),
        cutoff: lat.cutoff(),
        shape: lat.shape(),
        mass: sys.mass(),
        num_modes: lat.num_modes(),
        coulomb_discrepancy,
        linear_coulomb_norm,
        relative_discrepancy: if linear_coulomb_norm > 0.0 { coulomb_discrepancy / linear_coulomb_norm } else { 0.0 },
        scf,
        shells,
    })
}
