//! Dirac matrices, cut-off momentum-space Dirac symbols, the free negative
//! spectral projector and one-body density matrices.

use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::lattice::{CutoffShape, FourierLattice};
use crate::numerics::{eigh, HermitianMatrix, C64};

const SPECTRUM_SLACK: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-9;

/// Pauli matrices followed by the Dirac `alpha` and `beta` matrices in the
/// standard (Dirac) representation.
#[derive(Clone, Debug)]
pub struct DiracMatrices {
    pub sigma: [Matrix2<C64>; 3],
    pub alpha: [Matrix4<C64>; 3],
    pub beta: Matrix4<C64>,
}

pub fn pauli_and_dirac_matrices() -> DiracMatrices {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let sigma = [
        Matrix2::new(o, one, one, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(one, o, o, -one),
    ];
    let alpha = sigma.map(|s| {
        let mut a = Matrix4::zeros();
        a.fixed_view_mut::<2, 2>(0, 2).copy_from(&s);
        a.fixed_view_mut::<2, 2>(2, 0).copy_from(&s);
        a
    });
    let beta = Matrix4::from_diagonal(&nalgebra::Vector4::new(one, one, -one, -one));
    DiracMatrices { sigma, alpha, beta }
}

/// `alpha . p + m beta` without any cutoff factor.
fn bare_symbol(p: [f64; 3], m: f64) -> Matrix4<C64> {
    let d = pauli_and_dirac_matrices();
    let mut s = d.beta * C64::new(m, 0.0);
    for (a, pk) in d.alpha.iter().zip(p) {
        s += a * C64::new(pk, 0.0);
    }
    s
}

#[derive(Clone, Debug)]
pub struct DiracSymbol {
    momentum: [f64; 3],
    mass: f64,
    matrix: HermitianMatrix,
}

impl DiracSymbol {
    pub fn momentum(&self) -> [f64; 3] {
        self.momentum
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }
}

fn check_mass(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("mass must be positive, got {m}")))
    }
}

/// `(alpha . p + m beta)(1 + chi(|p|^2 / Lambda^2))` for `|p| <= Lambda`.
pub fn dirac_symbol(p: [f64; 3], m: f64, shape: CutoffShape, cutoff: f64) -> Result<DiracSymbol> {
    check_mass(m)?;
    let p2 = p.iter().map(|x| x * x).sum::<f64>();
    if p2.sqrt() > cutoff * (1.0 + 1e-12) {
        return Err(Error::OutsideCutoff { norm: p2.sqrt(), cutoff });
    }
    let factor = shape.factor(p2 / (cutoff * cutoff));
    let s = bare_symbol(p, m) * C64::new(factor, 0.0);
    let matrix = HermitianMatrix::symmetrized(DMatrix::from_iterator(4, 4, s.iter().copied()));
    Ok(DiracSymbol { momentum: p, mass: m, matrix })
}

/// Block-diagonal matrix of the cut-off free Dirac operator on the lattice.
pub fn free_dirac_matrix(lat: &FourierLattice, m: f64) -> Result<HermitianMatrix> {
    let n = lat.dimension();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (j, mode) in lat.modes().iter().enumerate() {
        let s = dirac_symbol(lat.wavevector(mode), m, lat.shape(), lat.cutoff())?;
        out.view_mut((4 * j, 4 * j), (4, 4)).copy_from(s.matrix().as_matrix());
    }
    Ok(HermitianMatrix::symmetrized(out))
}

/// Negative spectral projector of the free Dirac operator, built block by
/// block from `(1 - S(p) / E(p)) / 2` with `S = alpha . p + m beta`.
pub fn free_projector(lat: &Arc<FourierLattice>, m: f64) -> Result<DensityMatrix> {
    check_mass(m)?;
    let n = lat.dimension();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (j, mode) in lat.modes().iter().enumerate() {
        let p = lat.wavevector(mode);
        let energy = (p.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt();
        let block = (Matrix4::<C64>::identity() - bare_symbol(p, m) / C64::new(energy, 0.0)) * C64::new(0.5, 0.0);
        out.view_mut((4 * j, 4 * j), (4, 4)).copy_from(&block);
    }
    Ok(DensityMatrix::from_parts(Arc::clone(lat), HermitianMatrix::symmetrized(out), true))
}

/// One-body state `0 <= gamma <= I` on the plane-wave spinor space.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    lattice: Arc<FourierLattice>,
    matrix: HermitianMatrix,
    projector: bool,
}

impl DensityMatrix {
    /// Checks the spectrum lies in `[0, 1]` up to `1e-10` and records whether
    /// the state is a projector.
    pub fn new(lat: &Arc<FourierLattice>, matrix: HermitianMatrix) -> Result<Self> {
        if matrix.dimension() != lat.dimension() {
            return Err(Error::LatticeMismatch);
        }
        let spectrum = eigh(&matrix)?.values;
        if let (Some(&lo), Some(&hi)) = (spectrum.first(), spectrum.last()) {
            if lo < -SPECTRUM_SLACK || hi > 1.0 + SPECTRUM_SLACK {
                return Err(Error::NotAdmissible(format!("spectrum spans [{lo:.3e}, {hi:.3e}]")));
            }
        }
        let projector = idempotency_defect(&matrix) <= PROJECTOR_TOL;
        Ok(Self { lattice: Arc::clone(lat), matrix, projector })
    }

    /// Caller guarantees admissibility; the projector flag is recomputed.
    pub(crate) fn new_unchecked(lat: &Arc<FourierLattice>, matrix: HermitianMatrix) -> Self {
        let projector = idempotency_defect(&matrix) <= PROJECTOR_TOL;
        Self { lattice: Arc::clone(lat), matrix, projector }
    }

    pub(crate) fn from_parts(lattice: Arc<FourierLattice>, matrix: HermitianMatrix, projector: bool) -> Self {
        Self { lattice, matrix, projector }
    }

    pub fn lattice(&self) -> &Arc<FourierLattice> {
        &self.lattice
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn is_projector(&self) -> bool {
        self.projector
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

fn idempotency_defect(m: &HermitianMatrix) -> f64 {
    let a = m.as_matrix();
    (a * a - a).norm()
}
