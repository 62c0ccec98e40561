use thiserror::Error;

use crate::dirac::DensityMatrix;
use crate::scf::ScfReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge: error estimate {error_estimate:.3e} exceeds tolerance {tol:.3e} after {evaluations} evaluations")]
    NonConvergence {
        error_estimate: f64,
        tol: f64,
        evaluations: usize,
    },

    #[error("root is not bracketed: f({lo}) = {f_lo:.6e} and f({hi}) = {f_hi:.6e} have the same sign")]
    BadBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("matrix dimension {dimension} exceeds the dense eigensolver cap of {cap}")]
    TooLarge { dimension: usize, cap: usize },

    #[error("matrix is not Hermitian (relative Frobenius defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("objects were built on different lattices")]
    LatticeMismatch,

    #[error("momentum |p| = {norm} lies outside the cutoff ball of radius {cutoff}")]
    OutsideCutoff { norm: f64, cutoff: f64 },

    #[error("operator is not an admissible density matrix: {0}")]
    NotAdmissible(String),

    #[error("self-consistent iteration did not converge after {} iterations (residual {:.3e})", .report.iterations, .report.residual)]
    NoConvergence {
        state: Box<DensityMatrix>,
        report: Box<ScfReport>,
    },

    #[error("charge q = {q} is infeasible on a lattice with {modes} modes (|q| must not exceed {max})")]
    InfeasibleCharge { q: f64, modes: usize, max: f64 },

    #[error("argument outside the domain: {0}")]
    DomainError(String),

    #[error("Landau pole: alpha_ph * B0(Lambda) = {product:.12} >= 1, no bare coupling exists")]
    LandauPole { product: f64 },

    #[error("degenerate renormalization input: {0}")]
    Degenerate(String),

    #[error("order {0} of the density series needs the nonlinear densities and is not supported (max 2)")]
    Unsupported(usize),

    #[error("linear physical density is ill-posed: 1 - alpha_ph * U_Lambda(k) = {value:.3e} at k = {k}")]
    DenominatorVanishes { k: f64, value: f64 },

    #[error("Pauli-Villars masses must satisfy 0 < m0 < m1 < m2, got ({0}, {1}, {2})")]
    DegenerateMasses(f64, f64, f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures map to exit code 3, everything else to 2.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::NoConvergence { .. }
                | Error::LandauPole { .. }
                | Error::DenominatorVanishes { .. }
                | Error::Degenerate(_)
        )
    }
}
