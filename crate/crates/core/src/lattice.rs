//! Truncated Fourier lattice of a cubic box, the periodic Coulomb kernel and
//! charge densities living on the lattice of mode differences.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dirac::DensityMatrix;
use crate::error::{Error, Result};
use crate::io::{fmt_num, write_header};
use crate::numerics::{C64, MAX_DIMENSION};

/// Ultraviolet regularization of the kinetic symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffShape {
    /// Plain restriction to the ball `|p| <= Lambda`.
    Sharp,
    /// Symbol multiplied by `1 + (|p|^2 / Lambda^2)^2`.
    Quadratic,
}

impl CutoffShape {
    /// `1 + chi(r)` for `r = |p|^2 / Lambda^2 <= 1`.
    pub fn factor(self, r: f64) -> f64 {
        match self {
            CutoffShape::Sharp => 1.0,
            CutoffShape::Quadratic => 1.0 + r * r,
        }
    }
}

/// Integer coordinates of a wavevector in units of `2 pi / L`.
pub type Mode = [i64; 3];

const BALL_SLACK: f64 = 1e-12;
const KERNEL_GRID: i64 = 32;

#[derive(Debug)]
pub struct FourierLattice {
    box_length: f64,
    cutoff: f64,
    shape: CutoffShape,
    modes: Vec<Mode>,
    mode_index: HashMap<Mode, usize>,
    diff_modes: Vec<Mode>,
    diff_index: HashMap<Mode, usize>,
}

/// Builds the lattice `(2 pi / L) Z^3 ∩ B(0, Lambda)` in lexicographic order.
pub fn build_lattice(box_length: f64, cutoff: f64, shape: CutoffShape) -> Result<Arc<FourierLattice>> {
    FourierLattice::new(box_length, cutoff, shape)
}

impl FourierLattice {
    pub fn new(box_length: f64, cutoff: f64, shape: CutoffShape) -> Result<Arc<Self>> {
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::InvalidInput(format!("box length must be positive, got {box_length}")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff must be positive, got {cutoff}")));
        }

        let spacing = 2.0 * PI / box_length;
        let reach = (cutoff / spacing).floor() as i64 + 1;
        let limit = (cutoff / spacing).powi(2) * (1.0 + BALL_SLACK);

        let mut modes = Vec::new();
        for a in -reach..=reach {
            for b in -reach..=reach {
                for c in -reach..=reach {
                    if ((a * a + b * b + c * c) as f64) <= limit {
                        modes.push([a, b, c]);
                    }
                    if 4 * modes.len() > MAX_DIMENSION {
                        return Err(Error::TooLarge { dimension: 4 * modes.len(), cap: MAX_DIMENSION });
                    }
                }
            }
        }

        let diff_set: BTreeSet<Mode> = modes
            .iter()
            .flat_map(|j| modes.iter().map(move |k| [j[0] - k[0], j[1] - k[1], j[2] - k[2]]))
            .collect();
        let diff_modes: Vec<Mode> = diff_set.into_iter().collect();

        let mode_index = modes.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let diff_index = diff_modes.iter().enumerate().map(|(i, &m)| (m, i)).collect();

        Ok(Arc::new(Self { box_length, cutoff, shape, modes, mode_index, diff_modes, diff_index }))
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn shape(&self) -> CutoffShape {
        self.shape
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    /// Dimension of the spinor space, `4 * |modes|`.
    pub fn dimension(&self) -> usize {
        4 * self.modes.len()
    }

    pub fn diff_modes(&self) -> &[Mode] {
        &self.diff_modes
    }

    pub fn mode_index(&self, m: &Mode) -> Option<usize> {
        self.mode_index.get(m).copied()
    }

    pub fn diff_index(&self, d: &Mode) -> Option<usize> {
        self.diff_index.get(d).copied()
    }

    pub fn zero_diff_index(&self) -> usize {
        self.diff_index[&[0, 0, 0]]
    }

    pub fn wavevector(&self, m: &Mode) -> [f64; 3] {
        let s = self.spacing();
        [s * m[0] as f64, s * m[1] as f64, s * m[2] as f64]
    }

    pub fn norm(&self, m: &Mode) -> f64 {
        self.spacing() * ((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64).sqrt()
    }

    /// Same box, cutoff and shape.
    pub fn same_as(&self, other: &FourierLattice) -> bool {
        std::ptr::eq(self, other)
            || (self.box_length == other.box_length && self.cutoff == other.cutoff && self.shape == other.shape)
    }

    pub(crate) fn check_same(&self, other: &FourierLattice) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }

    /// One-line description echoed into output headers.
    pub fn describe(&self) -> String {
        format!(
            "lattice: L={} Lambda={} shape={:?} modes={} diff_modes={}",
            self.box_length,
            self.cutoff,
            self.shape,
            self.modes.len(),
            self.diff_modes.len()
        )
    }
}

/// Fourier coefficients of the periodic Coulomb kernel, scaled so that
/// `coulomb_inner` equals the double integral of `a(x) b(y) G_L(x - y)`
/// over the box.
#[derive(Clone, Debug)]
pub struct CoulombKernel {
    lattice: Arc<FourierLattice>,
    coefficients: Vec<f64>,
    zero_mode: f64,
}

/// Truncated kernel `(4 pi / L^3) sum_{d != 0} cos(d.x) / |d|^2` on the
/// `32^3` grid `x = L (a, b, c) / 32`.
pub(crate) fn truncated_kernel_on_grid(lat: &FourierLattice) -> Vec<f64> {
    let n = KERNEL_GRID;
    let table: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).cos()).collect();
    let prefactor = 4.0 * PI / lat.volume();
    let terms: Vec<(Mode, f64)> = lat
        .diff_modes()
        .iter()
        .filter(|d| **d != [0, 0, 0])
        .map(|d| (*d, prefactor / lat.norm(d).powi(2)))
        .collect();

    let mut values = Vec::with_capacity((n * n * n) as usize);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let v: f64 = terms
                    .iter()
                    .map(|(d, w)| w * table[(d[0] * a + d[1] * b + d[2] * c).rem_euclid(n) as usize])
                    .sum();
                values.push(v);
            }
        }
    }
    values
}

/// Coulomb kernel on the difference lattice; the zero-mode shift `K_L` is
/// the smallest constant making the truncated kernel nonnegative on a
/// `32^3` real-space grid.
pub fn coulomb_kernel(lat: &Arc<FourierLattice>) -> CoulombKernel {
    let grid = truncated_kernel_on_grid(lat);
    let minimum = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let zero_mode = (-minimum).max(0.0);

    let coefficients = lat
        .diff_modes()
        .iter()
        .map(|d| if *d == [0, 0, 0] { zero_mode * lat.volume() } else { 4.0 * PI / lat.norm(d).powi(2) })
        .collect();

    CoulombKernel { lattice: Arc::clone(lat), coefficients, zero_mode }
}

impl CoulombKernel {
    pub fn lattice(&self) -> &Arc<FourierLattice> {
        &self.lattice
    }

    /// Real-space constant `K_L`.
    pub fn zero_mode(&self) -> f64 {
        self.zero_mode
    }

    /// Kernel coefficient indexed like `FourierLattice::diff_modes`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, d: &Mode) -> Option<f64> {
        self.lattice.diff_index(d).map(|i| self.coefficients[i])
    }
}

/// Complex Fourier coefficients of a real periodic density, indexed like
/// `FourierLattice::diff_modes`.
#[derive(Clone, Debug)]
pub struct ChargeDensity {
    lattice: Arc<FourierLattice>,
    coefficients: Vec<C64>,
}

impl ChargeDensity {
    pub fn zeros(lat: &Arc<FourierLattice>) -> Self {
        Self { lattice: Arc::clone(lat), coefficients: vec![C64::new(0.0, 0.0); lat.diff_modes().len()] }
    }

    pub fn from_coefficients(lat: &Arc<FourierLattice>, coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() != lat.diff_modes().len() {
            return Err(Error::LatticeMismatch);
        }
        Ok(Self { lattice: Arc::clone(lat), coefficients })
    }

    /// Coefficients from a function of the integer mode.
    pub fn from_fn(lat: &Arc<FourierLattice>, f: impl Fn(&Mode) -> C64) -> Self {
        let coefficients = lat.diff_modes().iter().map(f).collect();
        Self { lattice: Arc::clone(lat), coefficients }
    }

    pub fn lattice(&self) -> &Arc<FourierLattice> {
        &self.lattice
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn coefficient(&self, d: &Mode) -> Option<C64> {
        self.lattice.diff_index(d).map(|i| self.coefficients[i])
    }

    /// `rho_hat(0) * L^3`.
    pub fn total_charge(&self) -> f64 {
        self.coefficients[self.lattice.zero_diff_index()].re * self.lattice.volume()
    }

    /// Largest violation of `rho_hat(-d) = conj(rho_hat(d))`.
    pub fn hermitian_defect(&self) -> f64 {
        self.lattice
            .diff_modes()
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let j = self.lattice.diff_index(&[-d[0], -d[1], -d[2]]).expect("difference set is symmetric");
                (self.coefficients[i] - self.coefficients[j].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { lattice: Arc::clone(&self.lattice), coefficients: self.coefficients.iter().map(|c| c * s).collect() }
    }

    pub fn combine(&self, other: &Self, a: f64, b: f64) -> Result<Self> {
        self.lattice.check_same(&other.lattice)?;
        let coefficients = self.coefficients.iter().zip(&other.coefficients).map(|(x, y)| x * a + y * b).collect();
        Ok(Self { lattice: Arc::clone(&self.lattice), coefficients })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0, -1.0)
    }

    /// CSV with columns `d1,d2,d3,re,im`, `d` given as a wavevector.
    pub fn write_csv<W: Write>(&self, w: &mut W, header: &str) -> Result<()> {
        write_header(w, header)?;
        write_header(w, &self.lattice.describe())?;
        writeln!(w, "d1,d2,d3,re,im")?;
        for (d, c) in self.lattice.diff_modes().iter().zip(&self.coefficients) {
            let k = self.lattice.wavevector(d);
            writeln!(w, "{},{},{},{},{}", fmt_num(k[0]), fmt_num(k[1]), fmt_num(k[2]), fmt_num(c.re), fmt_num(c.im))?;
        }
        Ok(())
    }
}

/// Periodic version of an external density given by its continuum Fourier
/// transform; coefficients vanish outside the mode ball `|d| <= Lambda`.
pub fn periodize(nu_hat: impl Fn([f64; 3]) -> C64, lat: &Arc<FourierLattice>) -> ChargeDensity {
    let scale = ((2.0 * PI).sqrt() / lat.box_length()).powi(3);
    let slack = lat.cutoff() * (1.0 + BALL_SLACK);
    ChargeDensity::from_fn(lat, |d| {
        if lat.norm(d) <= slack {
            nu_hat(lat.wavevector(d)) * scale
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `sum_d G(d) conj(a(d)) b(d) L^3`, the lattice analogue of
/// `int int a(x) b(y) G_L(x - y) dx dy`.
pub fn coulomb_inner(a: &ChargeDensity, b: &ChargeDensity, ker: &CoulombKernel) -> Result<f64> {
    a.lattice.check_same(&b.lattice)?;
    a.lattice.check_same(&ker.lattice)?;
    let sum: f64 = ker
        .coefficients
        .iter()
        .zip(a.coefficients.iter().zip(&b.coefficients))
        .map(|(g, (x, y))| g * (x.conj() * y).re)
        .sum();
    Ok(sum * a.lattice.volume())
}

/// Squared Coulomb norm `4 pi int |a_hat(k)|^2 / |k|^2 dk` approximated on
/// the lattice, zero mode excluded.
pub fn coulomb_norm_sq(a: &ChargeDensity) -> f64 {
    let lat = &a.lattice;
    lat.diff_modes()
        .iter()
        .zip(&a.coefficients)
        .filter(|(d, _)| **d != [0, 0, 0])
        .map(|(d, c)| c.norm_sqr() / lat.norm(d).powi(2))
        .sum::<f64>()
        * 4.0
        * PI
        * lat.volume()
}

/// `rho_hat(d) = L^{-3} sum_{j - k = d} tr_{C^4} M(j, k)` for an operator on
/// the spinor space of `lat`, without any `1/2` shift.
pub(crate) fn operator_density(m: &DMatrix<C64>, lat: &Arc<FourierLattice>) -> ChargeDensity {
    let modes = lat.modes();
    let inv_volume = 1.0 / lat.volume();
    let mut coefficients = vec![C64::new(0.0, 0.0); lat.diff_modes().len()];
    for (j, mj) in modes.iter().enumerate() {
        for (k, mk) in modes.iter().enumerate() {
            let d = [mj[0] - mk[0], mj[1] - mk[1], mj[2] - mk[2]];
            let idx = lat.diff_index(&d).expect("difference of modes");
            let tr = (0..4).map(|s| m[(4 * j + s, 4 * k + s)]).sum::<C64>();
            coefficients[idx] += tr * inv_volume;
        }
    }
    ChargeDensity { lattice: Arc::clone(lat), coefficients }
}

/// Charge density of `gamma - 1/2`.
pub fn density_of(gamma: &DensityMatrix, lat: &Arc<FourierLattice>) -> Result<ChargeDensity> {
    lat.check_same(gamma.lattice())?;
    let mut rho = operator_density(gamma.matrix().as_matrix(), lat);
    let zero = lat.zero_diff_index();
    // each mode contributes tr(I/2) = 2 to the zero coefficient
    rho.coefficients[zero] -= C64::new(2.0 * lat.num_modes() as f64 / lat.volume(), 0.0);
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm2(m: &Mode) -> i64 {
        m[0] * m[0] + m[1] * m[1] + m[2] * m[2]
    }

    #[test]
    fn face_diagonals_enter_below_root_two() {
        // (1, 1, 0) has norm sqrt(2) < 1.5, so the ball holds 1 + 6 + 12 modes
        let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp).unwrap();
        assert_eq!(lat.num_modes(), 19);
        assert!(lat.mode_index(&[1, -1, 0]).is_some());
        assert!(lat.mode_index(&[1, 1, 1]).is_none());
    }

    #[test]
    fn seven_modes_at_unit_spacing() {
        let lat = build_lattice(2.0 * PI, 1.2, CutoffShape::Sharp).unwrap();
        assert_eq!(lat.num_modes(), 7);
        let mut expected: Vec<Mode> =
            vec![[0, 0, 0], [1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
        expected.sort();
        assert_eq!(lat.modes(), &expected[..]);
    }

    #[test]
    fn single_mode() {
        let lat = build_lattice(2.0 * PI, 0.5, CutoffShape::Sharp).unwrap();
        assert_eq!(lat.modes(), &[[0, 0, 0]]);
        assert_eq!(lat.diff_modes(), &[[0, 0, 0]]);
    }

    #[test]
    fn spacing_two() {
        // (2Z)^3 inside the ball of radius 2.1
        let lat = build_lattice(PI, 2.1, CutoffShape::Sharp).unwrap();
        assert_eq!(lat.num_modes(), 7);
        assert!((lat.spacing() - 2.0).abs() < 1e-15);
        for m in lat.modes() {
            assert!(lat.norm(m) <= 2.1);
        }
    }

    #[test]
    fn lattice_invariants() {
        let lat = build_lattice(2.0 * PI, 2.5, CutoffShape::Quadratic).unwrap();
        // brute force count of integer vectors with n^2 <= 6.25
        let mut count = 0;
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                for c in -3i64..=3 {
                    if a * a + b * b + c * c <= 6 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(lat.num_modes(), count);
        assert_eq!(lat.num_modes() % 2, 1);
        assert!(lat.modes().windows(2).all(|w| w[0] < w[1]));
        for m in lat.modes() {
            assert!(lat.mode_index(&[-m[0], -m[1], -m[2]]).is_some());
            for k in lat.modes() {
                let d = [m[0] - k[0], m[1] - k[1], m[2] - k[2]];
                assert!(lat.diff_index(&d).is_some());
            }
        }
        for d in lat.diff_modes() {
            assert!(lat.norm(d) <= 2.0 * lat.cutoff() + 1e-12);
        }
    }

    #[test]
    fn too_large() {
        let err = build_lattice(2.0 * PI, 9.0, CutoffShape::Sharp).unwrap_err();
        assert!(matches!(err, Error::TooLarge { .. }));
    }

    #[test]
    fn kernel_coefficients() {
        let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp).unwrap();
        let ker = coulomb_kernel(&lat);
        assert!((ker.coefficient(&[1, 0, 0]).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((ker.coefficient(&[2, 0, 0]).unwrap() - PI).abs() < 1e-13);
        assert!(ker.zero_mode() >= 0.0);
        assert!((ker.coefficient(&[0, 0, 0]).unwrap() - ker.zero_mode() * lat.volume()).abs() < 1e-12);
    }

    #[test]
    fn kernel_shift_makes_grid_values_nonnegative() {
        let lat = build_lattice(2.0 * PI, 2.5, CutoffShape::Sharp).unwrap();
        let ker = coulomb_kernel(&lat);
        // independent evaluation with explicit cosines
        let prefactor = 4.0 * PI / lat.volume();
        let mut minimum = f64::INFINITY;
        for a in 0..32 {
            for b in 0..32 {
                for c in 0..32 {
                    let x = [a as f64, b as f64, c as f64].map(|t| t * lat.box_length() / 32.0);
                    let v: f64 = lat
                        .diff_modes()
                        .iter()
                        .filter(|d| norm2(d) != 0)
                        .map(|d| {
                            let k = lat.wavevector(d);
                            prefactor * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos() / lat.norm(d).powi(2)
                        })
                        .sum();
                    minimum = minimum.min(v);
                }
            }
        }
        assert!(ker.zero_mode() > 0.0);
        assert!(minimum + ker.zero_mode() >= -1e-12);
        assert!((minimum + ker.zero_mode()).abs() < 1e-10);
    }

    #[test]
    fn periodize_gaussian() {
        let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp).unwrap();
        let g = |k: [f64; 3]| {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            C64::new((2.0 * PI).powf(-1.5) * (-k2 / 2.0).exp(), 0.0)
        };
        let nu = periodize(g, &lat);
        let want = ((2.0 * PI).sqrt() / (2.0 * PI)).powi(3) * (2.0 * PI).powf(-1.5);
        assert!((nu.coefficient(&[0, 0, 0]).unwrap().re - want).abs() < 1e-16);
        // truncated to |d| <= Lambda
        assert_eq!(nu.coefficient(&[2, 0, 0]).unwrap(), C64::new(0.0, 0.0));
        assert!(nu.coefficient(&[1, 0, 0]).unwrap().re > 0.0);
        assert!(nu.hermitian_defect() == 0.0);
        // total charge equals (sqrt(2 pi)/L)^3 nu_hat(0) L^3
        assert!((nu.total_charge() - want * lat.volume()).abs() < 1e-15);
    }

    #[test]
    fn periodize_zero() {
        let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp).unwrap();
        let nu = periodize(|_| C64::new(0.0, 0.0), &lat);
        assert_eq!(nu.max_abs(), 0.0);
    }

    #[test]
    fn coulomb_inner_single_pair() {
        let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp).unwrap();
        let ker = coulomb_kernel(&lat);
        let a = ChargeDensity::from_fn(&lat, |d| {
            if *d == [1, 0, 0] || *d == [-1, 0, 0] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let v = coulomb_inner(&a, &a, &ker).unwrap();
        assert!((v - 2.0 * 4.0 * PI * lat.volume()).abs() < 1e-10);
        let zero = ChargeDensity::zeros(&lat);
        assert_eq!(coulomb_inner(&zero, &a, &ker).unwrap(), 0.0);
    }

    #[test]
    fn coulomb_inner_rejects_other_lattice() {
        let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp).unwrap();
        let other = build_lattice(2.0 * PI, 1.2, CutoffShape::Sharp).unwrap();
        let ker = coulomb_kernel(&lat);
        let a = ChargeDensity::zeros(&lat);
        let b = ChargeDensity::zeros(&other);
        assert!(matches!(coulomb_inner(&a, &b, &ker), Err(Error::LatticeMismatch)));
    }

    #[test]
    fn csv_layout() {
        let lat = build_lattice(2.0 * PI, 0.5, CutoffShape::Sharp).unwrap();
        let nu = ChargeDensity::from_fn(&lat, |_| C64::new(0.25, 0.0));
        let mut out = Vec::new();
        nu.write_csv(&mut out, "test").unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# test");
        assert!(lines[1].starts_with("# lattice: L="));
        assert_eq!(lines[2], "d1,d2,d3,re,im");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].ends_with(&format!("{},{}", fmt_num(0.25), fmt_num(0.0))));
    }
    #[test]
    fn densities_of_reference_states() {
        use crate::dirac::free_projector;
        use crate::numerics::HermitianMatrix;
        let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp).unwrap();
        let g0 = free_projector(&lat, 1.0).unwrap();
        assert!(density_of(&g0, &lat).unwrap().max_abs() < 1e-15);

        let full = DensityMatrix::new(&lat, HermitianMatrix::identity(lat.dimension())).unwrap();
        let rho = density_of(&full, &lat).unwrap();
        for (d, c) in lat.diff_modes().iter().zip(rho.coefficients()) {
            let want = if *d == [0, 0, 0] { 2.0 * lat.num_modes() as f64 / lat.volume() } else { 0.0 };
            assert!((c - C64::new(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn density_of_random_projector() {
        use crate::numerics::{eigh, HermitianMatrix};
        use rand::{Rng, SeedableRng};
        let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Sharp).unwrap();
        let n = lat.dimension();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let h = HermitianMatrix::symmetrized(DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }));
        let e = eigh(&h).unwrap();
        for rank in [0, 5, 11, 28] {
            let w: Vec<f64> = (0..n).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
            let g = DensityMatrix::new(&lat, e.spectral_sum(&w)).unwrap();
            let rho = density_of(&g, &lat).unwrap();
            assert!((rho.total_charge() - (rank as f64 - 2.0 * lat.num_modes() as f64)).abs() < 1e-10);
            assert!(rho.hermitian_defect() < 1e-12);
        }
    }

    #[test]
    fn density_is_affine_in_the_state() {
        use crate::numerics::HermitianMatrix;
        use rand::{Rng, SeedableRng};
        let lat = build_lattice(2.0 * PI, 1.5, CutoffShape::Quadratic).unwrap();
        let n = lat.dimension();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let mut random_state = || {
            let diag: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            DensityMatrix::new(&lat, HermitianMatrix::from_real_diagonal(&diag)).unwrap()
        };
        let (a, b) = (random_state(), random_state());
        let t = 0.37;
        let mix = DensityMatrix::new(&lat, a.matrix().lerp(b.matrix(), t)).unwrap();
        let want = density_of(&a, &lat).unwrap().combine(&density_of(&b, &lat).unwrap(), 1.0 - t, t).unwrap();
        let got = density_of(&mix, &lat).unwrap();
        assert!(got.sub(&want).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn coulomb_form_is_symmetric_and_positive() {
        use rand::{Rng, SeedableRng};
        let lat = build_lattice(2.0 * PI, 2.0, CutoffShape::Sharp).unwrap();
        let ker = coulomb_kernel(&lat);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..10 {
            let mut random_density = || {
                let raw: Vec<C64> =
                    lat.diff_modes().iter().map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                ChargeDensity::from_fn(&lat, |d| {
                    let i = lat.diff_index(d).unwrap();
                    let j = lat.diff_index(&[-d[0], -d[1], -d[2]]).unwrap();
                    (raw[i] + raw[j].conj()) * 0.5
                })
            };
            let a = random_density();
            let b = random_density();
            let ab = coulomb_inner(&a, &b, &ker).unwrap();
            let ba = coulomb_inner(&b, &a, &ker).unwrap();
            assert!((ab - ba).abs() <= 1e-10 * ab.abs().max(1.0));
            assert!(coulomb_inner(&a, &a, &ker).unwrap() >= 0.0);
        }
    }
}
