//! Shared numerical kernels: adaptive quadrature, bracketed root finding
//! and dense Hermitian eigendecomposition.

mod linalg;
mod quadrature;
mod roots;

pub use linalg::{eigh, Eigen, HermitianMatrix, C64, MAX_DIMENSION};
pub use quadrature::{integrate_adaptive, integrate_adaptive_with, QuadratureResult, DEFAULT_MAX_PANELS};
pub use roots::find_root_monotone;
