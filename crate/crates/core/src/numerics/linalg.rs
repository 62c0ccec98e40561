use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest matrix dimension accepted by the dense eigensolver.
pub const MAX_DIMENSION: usize = 8192;

const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex matrix equal to its own conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    entries: DMatrix<C64>,
}

impl HermitianMatrix {
    /// Validates the Hermitian defect against a relative Frobenius tolerance
    /// of 1e-12, then stores the exactly symmetrized matrix.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidInput(format!(
                "Hermitian matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let norm = entries.norm();
        let defect = (&entries - entries.adjoint()).norm();
        let relative = if norm > 0.0 { defect / norm } else { defect };
        if !(relative <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { defect: relative });
        }
        Ok(Self::symmetrized(entries))
    }

    pub(crate) fn symmetrized(entries: DMatrix<C64>) -> Self {
        let adj = entries.adjoint();
        Self { entries: (entries + adj) * C64::new(0.5, 0.0) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: DMatrix::identity(n, n) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self { entries: DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) }) }
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    /// `(1 - t) * self + t * other`
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self { entries: &self.entries * C64::new(1.0 - t, 0.0) + &other.entries * C64::new(t, 0.0) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { entries: &self.entries * C64::new(s, 0.0) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { entries: &self.entries - &other.entries }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { entries: &self.entries + &other.entries }
    }

    /// Frobenius norm of the commutator `self * other - other * self`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        let ab = &self.entries * &other.entries;
        // (AB)^* = BA for Hermitian A, B
        (&ab - ab.adjoint()).norm()
    }

    /// Real part of `tr(self * other)`.
    pub fn trace_product(&self, other: &Self) -> f64 {
        self.entries.iter().zip(other.entries.transpose().iter()).map(|(a, b)| (a * b).re).sum()
    }
}

/// Eigenpairs sorted by ascending eigenvalue; eigenvectors are the columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigen {
    /// `sum_i w_i v_i v_i^*` for real weights.
    pub fn spectral_sum(&self, weights: &[f64]) -> HermitianMatrix {
        let n = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for (j, &w) in weights.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        let m = &scaled * self.vectors.adjoint();
        debug_assert_eq!(m.nrows(), n);
        HermitianMatrix::symmetrized(m)
    }
}

/// Dense Hermitian eigendecomposition.
pub fn eigh(m: &HermitianMatrix) -> Result<Eigen> {
    let n = m.dimension();
    if n > MAX_DIMENSION {
        return Err(Error::TooLarge { dimension: n, cap: MAX_DIMENSION });
    }
    if n == 0 {
        return Ok(Eigen { values: Vec::new(), vectors: DMatrix::zeros(0, 0) });
    }
    let decomposition = m.entries.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| decomposition.eigenvalues[i].total_cmp(&decomposition.eigenvalues[j]));

    let values = order.iter().map(|&i| decomposition.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| decomposition.eigenvectors[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::dirac_symbol;
    use crate::lattice::CutoffShape;
    use proptest::prelude::*;

    fn check_pairs(m: &HermitianMatrix, e: &Eigen) {
        let scale = m.frobenius_norm().max(1.0);
        for (i, &lambda) in e.values.iter().enumerate() {
            let v = e.vectors.column(i);
            let r = m.as_matrix() * v - v * C64::new(lambda, 0.0);
            assert!(r.norm() <= 1e-10 * scale);
        }
        let gram = e.vectors.adjoint() * &e.vectors;
        let id = DMatrix::<C64>::identity(gram.nrows(), gram.ncols());
        assert!((gram - id).norm() <= 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    fn random_hermitian(n: usize, seed: &[f64]) -> HermitianMatrix {
        let m = DMatrix::from_fn(n, n, |i, j| {
            let k = (i * n + j) % seed.len();
            C64::new(seed[k] * (1.0 + i as f64), seed[(k + 7) % seed.len()] - j as f64 * 0.1)
        });
        HermitianMatrix::symmetrized(m)
    }

    #[test]
    fn identity_spectrum() {
        let m = HermitianMatrix::identity(4);
        let e = eigh(&m).unwrap();
        assert_eq!(e.values.len(), 4);
        for v in &e.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        check_pairs(&m, &e);
    }

    #[test]
    fn diagonal_sorted() {
        let m = HermitianMatrix::from_real_diagonal(&[3.0, -2.0]);
        let e = eigh(&m).unwrap();
        assert!((e.values[0] + 2.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn dirac_symbol_spectrum() {
        let s = dirac_symbol([1.0, 0.0, 0.0], 1.0, CutoffShape::Sharp, 10.0).unwrap();
        let e = eigh(s.matrix()).unwrap();
        let r2 = 2f64.sqrt();
        for (v, want) in e.values.iter().zip([-r2, -r2, r2, r2]) {
            assert!((v - want).abs() < 1e-12);
        }
        check_pairs(s.matrix(), &e);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn dimension_cap() {
        let m = HermitianMatrix { entries: DMatrix::zeros(MAX_DIMENSION + 1, 1) };
        // only the dimension is inspected before any work is done
        assert!(matches!(eigh(&m), Err(Error::TooLarge { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn spectrum_invariant_under_unitary_conjugation(
            seed in prop::collection::vec(-2.0f64..2.0, 16),
            angles in prop::collection::vec(-3.0f64..3.0, 12),
        ) {
            let n = 6;
            let m = random_hermitian(n, &seed);
            // unitary from exp(iH) of a second Hermitian matrix
            let h = random_hermitian(n, &angles);
            let eh = eigh(&h).unwrap();
            let phases: Vec<C64> = eh.values.iter().map(|&t| C64::from_polar(1.0, t)).collect();
            let mut scaled = eh.vectors.clone();
            for (j, p) in phases.iter().enumerate() {
                { let mut col = scaled.column_mut(j); col *= *p; }
            }
            let u = &scaled * eh.vectors.adjoint();
            let conj = HermitianMatrix::symmetrized(&u * m.as_matrix() * u.adjoint());

            let a = eigh(&m).unwrap();
            let b = eigh(&conj).unwrap();
            check_pairs(&m, &a);
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
            }
        }
    }
}
