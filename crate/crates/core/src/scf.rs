//! Periodic reduced mean-field energy of the polarized vacuum and its
//! self-consistent minimization.
//!
//! States are relaxed to the convex hull of projectors and updated by the
//! optimal damping rule: the next state is the best point on the segment
//! between the current state and the aufbau projector of its Fock operator.
//! The energy is exactly quadratic along that segment, so the step length
//! has a closed form.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dirac::{free_dirac_matrix, free_projector, DensityMatrix};
use crate::error::{Error, Result};
use crate::lattice::{
    coulomb_inner, coulomb_kernel, coulomb_norm_sq, density_of, operator_density, ChargeDensity, CoulombKernel,
    FourierLattice,
};
use crate::numerics::{eigh, Eigen, HermitianMatrix, C64};

/// Lattice, Coulomb kernel and the free Dirac data derived from them.
#[derive(Clone, Debug)]
pub struct PeriodicSystem {
    lattice: Arc<FourierLattice>,
    kernel: CoulombKernel,
    mass: f64,
    free_dirac: HermitianMatrix,
    free_projector: DensityMatrix,
}

impl PeriodicSystem {
    pub fn new(lat: &Arc<FourierLattice>, mass: f64) -> Result<Self> {
        let kernel = coulomb_kernel(lat);
        Self::with_kernel(lat, kernel, mass)
    }

    pub fn with_kernel(lat: &Arc<FourierLattice>, kernel: CoulombKernel, mass: f64) -> Result<Self> {
        lat.check_same(kernel.lattice())?;
        let free_dirac = free_dirac_matrix(lat, mass)?;
        let free_projector = free_projector(lat, mass)?;
        Ok(Self { lattice: Arc::clone(lat), kernel, mass, free_dirac, free_projector })
    }

    pub fn lattice(&self) -> &Arc<FourierLattice> {
        &self.lattice
    }

    pub fn kernel(&self) -> &CoulombKernel {
        &self.kernel
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn free_dirac(&self) -> &HermitianMatrix {
        &self.free_dirac
    }

    pub fn free_projector(&self) -> &DensityMatrix {
        &self.free_projector
    }

    fn check_density(&self, rho: &ChargeDensity) -> Result<()> {
        self.lattice.check_same(rho.lattice())
    }

    fn check_state(&self, gamma: &DensityMatrix) -> Result<()> {
        self.lattice.check_same(gamma.lattice())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    Fixed(f64),
    OptimalDamping,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScfOptions {
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub damping: Damping,
    pub degeneracy_tol: f64,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self { max_iterations: 500, residual_tol: 1e-9, damping: Damping::OptimalDamping, degeneracy_tol: 1e-9 }
    }
}

impl ScfOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidInput(format!("residual_tol must be positive, got {}", self.residual_tol)));
        }
        if !(self.degeneracy_tol >= 0.0) {
            return Err(Error::InvalidInput(format!("degeneracy_tol must be nonnegative, got {}", self.degeneracy_tol)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        if let Damping::Fixed(t) = self.damping {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidInput(format!("fixed damping must lie in (0, 1], got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScfReport {
    pub iterations: usize,
    pub converged: bool,
    pub energy: f64,
    pub relative_energy: f64,
    /// Frobenius norm of the commutator of the state with its Fock operator.
    pub residual: f64,
    /// Frobenius distance between the state and the aufbau state of its
    /// Fock operator.
    pub fixed_point_error: f64,
    pub fermi_level: f64,
    pub relative_charge: f64,
    pub degenerate_levels: usize,
    pub uniqueness_condition_met: bool,
    pub kernel_zero_mode: f64,
    #[serde(skip)]
    pub energy_history: Vec<f64>,
}

/// `tr(P Q P) + tr((1 - P) Q (1 - P))`.
pub fn relative_trace(q: &HermitianMatrix, reference: &DensityMatrix) -> Result<f64> {
    if q.dimension() != reference.matrix().dimension() {
        return Err(Error::LatticeMismatch);
    }
    let p = reference.matrix().as_matrix();
    let n = p.nrows();
    let complement = DMatrix::<C64>::identity(n, n) - p;
    let qm = q.as_matrix();
    let inner = (p * qm * p).trace().re;
    let outer = (&complement * qm * &complement).trace().re;
    let total = inner + outer;
    debug_assert!((total - q.trace()).abs() <= 1e-8 * (1.0 + q.frobenius_norm()));
    Ok(total)
}

/// Adds the scalar potential `alpha (rho - nu) * G` to the free Dirac matrix.
pub fn fock_operator(sys: &PeriodicSystem, rho: &ChargeDensity, nu: &ChargeDensity, alpha: f64) -> Result<HermitianMatrix> {
    sys.check_density(rho)?;
    sys.check_density(nu)?;
    let mut f = sys.free_dirac.as_matrix().clone();
    if alpha != 0.0 {
        let lat = &sys.lattice;
        let g = sys.kernel.coefficients();
        let potential: Vec<C64> = rho
            .coefficients()
            .iter()
            .zip(nu.coefficients())
            .zip(g)
            .map(|((r, n), g)| (r - n) * (alpha * g))
            .collect();
        let modes = lat.modes();
        for (j, mj) in modes.iter().enumerate() {
            for (k, mk) in modes.iter().enumerate() {
                let d = [mj[0] - mk[0], mj[1] - mk[1], mj[2] - mk[2]];
                let v = potential[lat.diff_index(&d).expect("difference of modes")];
                for s in 0..4 {
                    f[(4 * j + s, 4 * k + s)] += v;
                }
            }
        }
    }
    Ok(HermitianMatrix::symmetrized(f))
}

/// `tr(D (gamma - 1/2)) - alpha C(rho, nu) + alpha/2 C(rho, rho)` with `rho`
/// the density of `gamma - 1/2`.
pub fn energy_per(sys: &PeriodicSystem, gamma: &DensityMatrix, nu: &ChargeDensity, alpha: f64) -> Result<f64> {
    sys.check_state(gamma)?;
    let rho = density_of(gamma, &sys.lattice)?;
    energy_from_parts(sys, gamma.matrix(), &rho, nu, alpha)
}

fn energy_from_parts(
    sys: &PeriodicSystem,
    gamma: &HermitianMatrix,
    rho: &ChargeDensity,
    nu: &ChargeDensity,
    alpha: f64,
) -> Result<f64> {
    // the Dirac symbols are traceless, so tr(D / 2) vanishes
    let kinetic = sys.free_dirac.trace_product(gamma) - 0.5 * sys.free_dirac.trace();
    if alpha == 0.0 {
        return Ok(kinetic);
    }
    let cross = coulomb_inner(rho, nu, &sys.kernel)?;
    let direct = coulomb_inner(rho, rho, &sys.kernel)?;
    Ok(kinetic - alpha * cross + 0.5 * alpha * direct)
}

/// `alpha/2` times the double integral of `|(gamma - 1/2)(x, y)|^2 G_L(x - y)`
/// over the box. Diagnostic only.
pub fn exchange_energy(sys: &PeriodicSystem, gamma: &DensityMatrix, alpha: f64) -> Result<f64> {
    sys.check_state(gamma)?;
    let lat = &sys.lattice;
    let modes = lat.modes();
    let n = modes.len();
    let a = gamma.matrix().as_matrix() - DMatrix::<C64>::identity(4 * n, 4 * n) * C64::new(0.5, 0.0);

    let mut total = 0.0;
    for (qi, q) in lat.diff_modes().iter().enumerate() {
        let g = sys.kernel.coefficients()[qi];
        if g == 0.0 {
            continue;
        }
        // shifted[j] = index of mode j + q when it exists
        let shifted: Vec<Option<usize>> =
            modes.iter().map(|m| lat.mode_index(&[m[0] + q[0], m[1] + q[1], m[2] + q[2]])).collect();
        let mut sum = 0.0;
        for j in 0..n {
            let Some(jq) = shifted[j] else { continue };
            for k in 0..n {
                let Some(kq) = shifted[k] else { continue };
                // tr(A_{jk} A_{j+q,k+q}^*)
                for s in 0..4 {
                    for t in 0..4 {
                        sum += (a[(4 * j + s, 4 * k + t)] * a[(4 * jq + s, 4 * kq + t)].conj()).re;
                    }
                }
            }
        }
        total += g * sum;
    }
    Ok(0.5 * alpha * total / lat.volume())
}

#[derive(Clone, Copy, Debug)]
enum Occupation {
    /// Fill the negative spectrum of the Fock operator.
    Vacuum,
    /// Fill exactly this many levels, counting fractional occupations.
    Count(f64),
}

struct Aufbau {
    state: HermitianMatrix,
    fermi_level: f64,
    degenerate: usize,
}

fn aufbau(eig: &Eigen, occupation: Occupation, deg_tol: f64) -> Aufbau {
    let values = &eig.values;
    let n = values.len();
    let mut weights = vec![0.0; n];
    let (fermi_level, degenerate) = match occupation {
        Occupation::Vacuum => {
            for (w, &v) in weights.iter_mut().zip(values) {
                if v < -deg_tol {
                    *w = 1.0;
                }
            }
            (0.0, values.iter().filter(|v| v.abs() <= deg_tol).count())
        }
        Occupation::Count(target) => {
            let rounded = target.round();
            let integral = (target - rounded).abs() <= 1e-12;
            let k = rounded as usize;
            if integral && k == 0 {
                (values.first().map_or(0.0, |v| v - 1.0), 0)
            } else if integral && k == n {
                weights.iter_mut().for_each(|w| *w = 1.0);
                (values.last().map_or(0.0, |v| v + 1.0), 0)
            } else if integral && values[k] - values[k - 1] > deg_tol {
                weights[..k].iter_mut().for_each(|w| *w = 1.0);
                (0.5 * (values[k] + values[k - 1]), 0)
            } else {
                // fractional filling of the level cluster holding the Fermi level
                let pivot = values[(target.ceil() as usize).clamp(1, n) - 1];
                let below = values.iter().filter(|&&v| v < pivot - deg_tol).count();
                let cluster: Vec<usize> = (0..n).filter(|&i| (values[i] - pivot).abs() <= deg_tol).collect();
                weights[..below].iter_mut().for_each(|w| *w = 1.0);
                let share = (target - below as f64) / cluster.len() as f64;
                for &i in &cluster {
                    weights[i] = share.clamp(0.0, 1.0);
                }
                (pivot, cluster.len())
            }
        }
    };
    Aufbau { state: eig.spectral_sum(&weights), fermi_level, degenerate }
}

/// Uniqueness criterion evaluated with the lattice Coulomb norm of `nu`.
pub fn uniqueness_condition(nu: &ChargeDensity, alpha: f64, mass: f64) -> bool {
    2f64.powf(11.0 / 6.0) * PI.powf(1.0 / 6.0) * alpha * coulomb_norm_sq(nu).sqrt() < mass.sqrt()
}

/// Global minimizer of the periodic energy, started from the free vacuum.
pub fn scf_solve(sys: &PeriodicSystem, nu: &ChargeDensity, alpha: f64, opts: &ScfOptions) -> Result<(DensityMatrix, ScfReport)> {
    scf_solve_from(sys, sys.free_projector.clone(), nu, alpha, opts)
}

/// Global minimization started from an arbitrary admissible state.
pub fn scf_solve_from(
    sys: &PeriodicSystem,
    start: DensityMatrix,
    nu: &ChargeDensity,
    alpha: f64,
    opts: &ScfOptions,
) -> Result<(DensityMatrix, ScfReport)> {
    iterate(sys, start, nu, alpha, opts, Occupation::Vacuum)
}

/// Minimizer among states whose trace relative to the free vacuum is `q`.
pub fn scf_charge_sector(
    sys: &PeriodicSystem,
    nu: &ChargeDensity,
    alpha: f64,
    q: f64,
    opts: &ScfOptions,
) -> Result<(DensityMatrix, ScfReport)> {
    let modes = sys.lattice.num_modes();
    let max = 2.0 * modes as f64;
    if !(q.abs() <= max) {
        return Err(Error::InfeasibleCharge { q, modes, max });
    }
    opts.validate()?;
    let occupation = Occupation::Count(max + q);
    let free = eigh(&sys.free_dirac)?;
    let start = aufbau(&free, occupation, opts.degeneracy_tol).state;
    iterate(sys, DensityMatrix::new_unchecked(&sys.lattice, start), nu, alpha, opts, occupation)
}

fn iterate(
    sys: &PeriodicSystem,
    start: DensityMatrix,
    nu: &ChargeDensity,
    alpha: f64,
    opts: &ScfOptions,
    occupation: Occupation,
) -> Result<(DensityMatrix, ScfReport)> {
    opts.validate()?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("alpha must be nonnegative, got {alpha}")));
    }
    sys.check_state(&start)?;
    sys.check_density(nu)?;

    let lat = &sys.lattice;
    let reference_energy = energy_per(sys, &sys.free_projector, nu, alpha)?;
    let mut gamma = start.matrix().clone();
    let mut history = Vec::new();

    for iteration in 1..=opts.max_iterations {
        let rho = density_of(&DensityMatrix::from_parts(Arc::clone(lat), gamma.clone(), false), lat)?;
        let energy = energy_from_parts(sys, &gamma, &rho, nu, alpha)?;
        history.push(energy);

        let fock = fock_operator(sys, &rho, nu, alpha)?;
        let eig = eigh(&fock)?;
        let target = aufbau(&eig, occupation, opts.degeneracy_tol);
        let residual = gamma.commutator_norm(&fock);
        let step = target.state.sub(&gamma);
        let fixed_point_error = step.frobenius_norm();

        let report = |converged| ScfReport {
            iterations: iteration,
            converged,
            energy,
            relative_energy: energy - reference_energy,
            residual,
            fixed_point_error,
            fermi_level: target.fermi_level,
            relative_charge: gamma.trace() - 2.0 * lat.num_modes() as f64,
            degenerate_levels: target.degenerate,
            uniqueness_condition_met: uniqueness_condition(nu, alpha, sys.mass),
            kernel_zero_mode: sys.kernel.zero_mode(),
            energy_history: history.clone(),
        };

        if residual <= opts.residual_tol && fixed_point_error <= opts.residual_tol {
            return Ok((DensityMatrix::new_unchecked(lat, gamma.clone()), report(true)));
        }
        if iteration == opts.max_iterations {
            return Err(Error::NoConvergence {
                state: Box::new(DensityMatrix::new_unchecked(lat, gamma.clone())),
                report: Box::new(report(false)),
            });
        }

        let t = match opts.damping {
            Damping::Fixed(t) => t,
            Damping::OptimalDamping => {
                let slope = fock.trace_product(&step);
                let drho = operator_density(step.as_matrix(), lat);
                let curvature = 0.5 * alpha * coulomb_inner(&drho, &drho, &sys.kernel)?;
                if slope >= 0.0 {
                    // the aufbau state is already optimal to rounding accuracy
                    1.0
                } else if curvature > 0.0 {
                    (-slope / (2.0 * curvature)).min(1.0)
                } else {
                    1.0
                }
            }
        };
        gamma = gamma.lerp(&target.state, t);
    }
    unreachable!("loop returns on its last iteration")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    pub lhs: f64,
    pub holds: bool,
}

/// `E(gamma) - E(free vacuum) + alpha/2 C(nu, nu)`, nonnegative for every
/// admissible state.
pub fn stability_check(sys: &PeriodicSystem, gamma: &DensityMatrix, nu: &ChargeDensity, alpha: f64) -> Result<StabilityCheck> {
    let e = energy_per(sys, gamma, nu, alpha)?;
    let e0 = energy_per(sys, &sys.free_projector, nu, alpha)?;
    let lhs = e - e0 + 0.5 * alpha * coulomb_inner(nu, nu, &sys.kernel)?;
    Ok(StabilityCheck { lhs, holds: lhs >= -1e-9 })
}
