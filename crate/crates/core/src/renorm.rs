//! Continuum vacuum-polarization multipliers, coupling renormalization and
//! linear-response densities.
//!
//! Wavenumbers and cutoffs are in units of the electron mass. Densities are
//! tabulated on caller-provided grids of `|k|` and never interpolated.

use std::cell::Cell;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::charge::RadialCharge;
use crate::error::{Error, Result};
use crate::io::{fmt_num, write_header};
use crate::numerics::{find_root_monotone, integrate_adaptive};

const MULTIPLIER_TOL: f64 = 1e-12;
/// Above this upper limit the `1 / (1 - z^2)` integrands are integrated in
/// the variable `t = -ln(1 - z)`.
const SUBSTITUTION_THRESHOLD: f64 = 0.999;
/// Closed form of the Uehling multiplier is used above this wavenumber.
pub const UEHLING_BRANCH_K: f64 = 1e-3;

/// `Z_Lambda(k)` and `1 - Z_Lambda(k)`, both free of cancellation.
fn upper_limit(cutoff: f64, k: f64) -> (f64, f64) {
    let s1 = (1.0 + cutoff * cutoff).sqrt();
    let rest = cutoff - k;
    let s2 = (1.0 + rest * rest).sqrt();
    // the k -> 0 limit Lambda / sqrt(1 + Lambda^2) is reached continuously
    let z = (2.0 * cutoff - k) / (s1 + s2);
    let gap1 = 1.0 / (s1 + cutoff);
    let gap2 = if rest >= 0.0 { 1.0 / (s2 + rest) } else { s2 - rest };
    (z, (gap1 + gap2) / (s1 + s2))
}

/// `int_0^Z h(z, 1 - z) / (1 - z^2) dz` for smooth `h`.
fn integrate_over_one_minus_z2(h: impl Fn(f64, f64) -> f64, z: f64, one_minus_z: f64) -> Result<f64> {
    if z <= 0.0 {
        return Ok(0.0);
    }
    if z <= SUBSTITUTION_THRESHOLD {
        return Ok(integrate_adaptive(|x| h(x, 1.0 - x) / (1.0 - x * x), 0.0, z, MULTIPLIER_TOL)?.value);
    }
    // z = 1 - e^{-t}, dz = (1 - z) dt
    let t_max = -one_minus_z.ln();
    let integrand = |t: f64| {
        let w = (-t).exp();
        h(1.0 - w, w) / (2.0 - w)
    };
    Ok(integrate_adaptive(integrand, 0.0, t_max, MULTIPLIER_TOL)?.value)
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff > 0.0 && cutoff.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("cutoff must be positive and finite, got {cutoff}")))
    }
}

fn bk_unchecked(cutoff: f64, k: f64) -> Result<f64> {
    let (z, one_minus_z) = upper_limit(cutoff, k);
    let q = 0.25 * k * k;
    let first = integrate_over_one_minus_z2(
        |x, w| (x * x - x.powi(4) / 3.0) / (1.0 + q * w * (1.0 + x)),
        z,
        one_minus_z,
    )? / PI;
    if k == 0.0 || z <= 0.0 {
        return Ok(first);
    }
    let s1 = (1.0 + cutoff * cutoff).sqrt();
    let second = integrate_adaptive(|x| (x - x.powi(3) / 3.0) / (s1 - 0.5 * k * x), 0.0, z, MULTIPLIER_TOL)?.value;
    Ok(first + k / (2.0 * PI) * second)
}

/// Logarithmically divergent constant `B_Lambda^0`.
pub fn b0(cutoff: f64) -> Result<f64> {
    check_cutoff(cutoff)?;
    bk_unchecked(cutoff, 0.0)
}

/// Large-cutoff expansion of [`b0`] without its `O(Lambda^-2)` remainder.
pub fn b0_asymptotic(cutoff: f64) -> f64 {
    2.0 / (3.0 * PI) * cutoff.ln() - 5.0 / (9.0 * PI) + 2.0 / (3.0 * PI) * 2f64.ln()
}

/// Vacuum-polarization multiplier `B_Lambda(k)` for `0 <= k <= 2 Lambda`.
pub fn b_k(cutoff: f64, k: f64) -> Result<f64> {
    check_cutoff(cutoff)?;
    if !(k >= 0.0) || k > 2.0 * cutoff {
        return Err(Error::DomainError(format!("B_Lambda(k) needs 0 <= k <= 2 Lambda, got k = {k}, Lambda = {cutoff}")));
    }
    bk_unchecked(cutoff, k)
}

/// `U_Lambda(k) = B_Lambda^0 - B_Lambda(k)`.
pub fn u_cutoff(cutoff: f64, k: f64) -> Result<f64> {
    let bk = b_k(cutoff, k)?;
    if k == 0.0 {
        return Ok(0.0);
    }
    Ok(b0(cutoff)? - bk)
}

/// Uehling multiplier by direct quadrature of its integral representation.
pub fn uehling_u_integral(k: f64) -> Result<f64> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::DomainError(format!("Uehling multiplier needs finite k >= 0, got {k}")));
    }
    if k == 0.0 {
        return Ok(0.0);
    }
    let q = 0.25 * k * k;
    let scale = k * k / (4.0 * PI);
    let r = integrate_adaptive(|z| (z * z - z.powi(4) / 3.0) / (1.0 + q * (1.0 - z * z)), 0.0, 1.0, MULTIPLIER_TOL / scale.max(1.0))?;
    Ok(scale * r.value)
}

/// Closed form of the Uehling multiplier; loses accuracy as `k -> 0`.
pub fn uehling_u_closed(k: f64) -> f64 {
    let k2 = k * k;
    let s = (4.0 + k2).sqrt();
    // ln((s + k) / (s - k)) written without the cancelling denominator
    let log_ratio = 2.0 * (k / s).atanh();
    (12.0 - 5.0 * k2) / (9.0 * PI * k2) + s / (3.0 * PI * k2 * k) * (k2 - 2.0) * log_ratio
}

/// Uehling multiplier `U(k)`.
pub fn uehling_u(k: f64) -> Result<f64> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::DomainError(format!("Uehling multiplier needs finite k >= 0, got {k}")));
    }
    if k > UEHLING_BRANCH_K {
        Ok(uehling_u_closed(k))
    } else {
        uehling_u_integral(k)
    }
}

/// Bare coupling, physical coupling, cutoff and `Z_3`, mutually consistent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormPoint {
    pub alpha_bare: f64,
    pub alpha_ph: f64,
    pub lambda: f64,
    pub z3: f64,
}

pub fn renorm_point_from_bare(alpha: f64, cutoff: f64) -> Result<RenormPoint> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("bare coupling must be nonnegative, got {alpha}")));
    }
    let b = b0(cutoff)?;
    let alpha_ph = alpha / (1.0 + alpha * b);
    Ok(RenormPoint { alpha_bare: alpha, alpha_ph, lambda: cutoff, z3: 1.0 - alpha_ph * b })
}

/// Inverts the screening relation; fails beyond the Landau pole.
pub fn bare_from_physical(alpha_ph: f64, cutoff: f64) -> Result<RenormPoint> {
    if !(alpha_ph >= 0.0 && alpha_ph.is_finite()) {
        return Err(Error::InvalidInput(format!("physical coupling must be nonnegative, got {alpha_ph}")));
    }
    let b = b0(cutoff)?;
    let product = alpha_ph * b;
    if product >= 1.0 {
        return Err(Error::LandauPole { product });
    }
    let z3 = 1.0 - product;
    Ok(RenormPoint { alpha_bare: alpha_ph / z3, alpha_ph, lambda: cutoff, z3 })
}

/// Cutoff at which `alpha_ph * B_Lambda^0 = 1 - Z_3`, by bisection in `ln Lambda`.
pub fn cutoff_from_z3(alpha_ph: f64, z3: f64) -> Result<f64> {
    if !(alpha_ph > 0.0 && alpha_ph.is_finite()) {
        return Err(Error::InvalidInput(format!("physical coupling must be positive, got {alpha_ph}")));
    }
    if z3 >= 1.0 {
        return Err(Error::Degenerate(format!("Z3 = {z3} forces a vanishing cutoff")));
    }
    if !(z3 > 0.0) {
        return Err(Error::InvalidInput(format!("Z3 must lie in (0, 1), got {z3}")));
    }
    let target = (1.0 - z3) / alpha_ph;
    let f = |s: f64| b0(s.exp()).map_or(f64::NAN, |b| b - target);

    let mut lo = -1.0;
    while f(lo) > 0.0 {
        lo *= 2.0;
        if lo < -700.0 {
            return Err(Error::Degenerate(format!("no cutoff bracket found below B0 = {target}")));
        }
    }
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 700.0 {
            return Err(Error::Degenerate(format!("B0 = {target} needs a cutoff beyond the floating point range")));
        }
    }
    if f(lo).is_nan() || f(hi).is_nan() {
        return Err(Error::Degenerate("B0 could not be evaluated on the bracket".into()));
    }
    Ok(find_root_monotone(f, lo, hi, 1e-13)?.exp())
}

/// Values of a radial function on a strictly increasing grid of `|k| >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidInput(format!("{} grid points but {} values", grid.len(), values.len())));
        }
        if grid.iter().any(|k| !(k.is_finite() && *k >= 0.0)) || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("grid must be finite, nonnegative and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sampled values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&k| f(k)).collect();
        Self::new(grid, values)
    }

    pub fn try_from_fn(grid: Vec<f64>, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = grid.iter().map(|&k| f(k)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Exact lookup; there is no interpolation between grid points.
    pub fn value_at(&self, k: f64) -> Result<f64> {
        match self.grid.binary_search_by(|g| g.total_cmp(&k)) {
            Ok(i) => Ok(self.values[i]),
            Err(_) => Err(Error::InvalidInput(format!("k = {k} is not a grid point"))),
        }
    }

    fn map(&self, f: impl Fn(f64, f64) -> Result<f64>) -> Result<Self> {
        let values = self.grid.iter().zip(&self.values).map(|(&k, &v)| f(k, v)).collect::<Result<Vec<_>>>()?;
        Self::new(self.grid.clone(), values)
    }

    pub fn max_abs_difference(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("sampled functions live on different grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

/// `n` points from `lo` to `hi` evenly spaced in `ln k`; both endpoints are
/// reproduced exactly.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp()).collect();
    if let Some(first) = grid.first_mut() {
        *first = lo;
    }
    if n > 1 {
        grid[n - 1] = hi;
    }
    grid
}

/// `n` points from `lo` to `hi` evenly spaced.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).collect()
}

/// Terms `nu_0, ..., nu_order` of the expansion of the physical density in
/// powers of the physical coupling. Orders above two need the nonlinear
/// response and are rejected.
pub fn density_series(nu: &SampledFunction, order: usize) -> Result<Vec<SampledFunction>> {
    if order > 2 {
        return Err(Error::Unsupported(order));
    }
    let mut terms = vec![nu.clone()];
    for _ in 0..order {
        let next = terms.last().expect("nonempty").map(|k, v| Ok(uehling_u(k)? * v))?;
        terms.push(next);
    }
    Ok(terms)
}

/// `sum_n alpha_ph^n nu_n`.
pub fn series_partial_sum(terms: &[SampledFunction], alpha_ph: f64) -> Result<SampledFunction> {
    let first = terms.first().ok_or_else(|| Error::InvalidInput("empty density series".into()))?;
    let mut values = vec![0.0; first.len()];
    for (n, term) in terms.iter().enumerate() {
        if term.grid != first.grid {
            return Err(Error::InvalidInput("series terms live on different grids".into()));
        }
        let weight = alpha_ph.powi(n as i32);
        for (acc, v) in values.iter_mut().zip(&term.values) {
            *acc += weight * v;
        }
    }
    SampledFunction::new(first.grid.clone(), values)
}

/// Linearized self-consistent vacuum density `alpha B nu / (1 + alpha B)`.
pub fn linear_response(nu: &SampledFunction, alpha: f64, cutoff: f64) -> Result<SampledFunction> {
    check_cutoff(cutoff)?;
    nu.map(|k, v| {
        let b = b_k(cutoff, k)?;
        Ok(alpha * b * v / (1.0 + alpha * b))
    })
}

/// Physical density with the nonlinear response dropped; zero beyond `2 Lambda`.
pub fn physical_density_linear(nu: &SampledFunction, alpha_ph: f64, cutoff: f64) -> Result<SampledFunction> {
    check_cutoff(cutoff)?;
    nu.map(|k, v| {
        if k > 2.0 * cutoff {
            return Ok(0.0);
        }
        let denominator = 1.0 - alpha_ph * u_cutoff(cutoff, k)?;
        if !(denominator > 0.0) {
            return Err(Error::DenominatorVanishes { k, value: denominator });
        }
        Ok(v / denominator)
    })
}

/// Potential `int exp(-2 t |x - y|) nu(y) / |x - y| dy` of a radial density,
/// reduced to one radial integral.
fn yukawa_like_potential(nu: &impl RadialCharge, x: f64, t: f64, tol: f64) -> Result<f64> {
    const DECAY: f64 = 45.0;
    let extent = nu.extent();
    if x == 0.0 {
        // 4 pi int r nu(r) e^{-2 t r} dr with u = 2 t r
        let upper = (2.0 * t * extent).min(DECAY);
        let h = 0.5 / t;
        let r = integrate_adaptive(|u| u * h * nu.density(u * h) * (-u).exp(), 0.0, upper, tol / (4.0 * PI * h))?;
        return Ok(4.0 * PI * h * r.value);
    }
    // r = x -/+ u / (2 t) on either side of x
    let h = 0.5 / t;
    let inside_upper = (2.0 * t * x).min(DECAY);
    let inside = integrate_adaptive(
        |u| {
            let r = x - u * h;
            r * nu.density(r) * (-u).exp() * -(-4.0 * t * r).exp_m1()
        },
        0.0,
        inside_upper,
        tol,
    )?;
    let mut total = inside.value;
    if extent > x {
        let outside_upper = (2.0 * t * (extent - x)).min(DECAY);
        let outside = integrate_adaptive(
            |u| {
                let r = x + u * h;
                r * nu.density(r) * (-u).exp()
            },
            0.0,
            outside_upper,
            tol,
        )?;
        total += outside.value * -(-4.0 * t * x).exp_m1();
    }
    Ok(PI / (x * t) * h * total)
}

fn uehling_outer(nu: &impl RadialCharge, x: f64, tol: f64, inner_tol: f64) -> Result<f64> {
    let failure: Cell<Option<Error>> = Cell::new(None);
    // t = 1 / sin(theta) maps [1, oo) onto (0, pi/2]
    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        match yukawa_like_potential(nu, x, 1.0 / s, inner_tol) {
            Ok(v) => c * c * (2.0 + s * s) / s * v,
            Err(e) => {
                let previous = failure.take();
                failure.set(Some(previous.unwrap_or(e)));
                f64::NAN
            }
        }
    };
    let outer = integrate_adaptive(integrand, 0.0, 0.5 * PI, tol);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(outer?.value / (3.0 * PI))
}

/// Uehling potential of a radial charge at distance `x`, evaluated in real
/// space by nested quadrature to the given relative tolerance.
pub fn uehling_potential(nu: &impl RadialCharge, alpha_ph: f64, x: f64, rel_tol: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::DomainError(format!("distance must be finite and nonnegative, got {x}")));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidInput(format!("relative tolerance must be positive, got {rel_tol}")));
    }
    let scale = nu.density(0.0).abs().max(nu.density(x).abs());
    if scale == 0.0 {
        return Ok(0.0);
    }
    // a coarse pass fixes the magnitude, the second pass the requested digits
    let rough = uehling_outer(nu, x, 1e-6 * scale, 1e-9 * scale)?;
    let tol = (rel_tol * rough.abs() * 3.0 * PI * 0.1).max(f64::EPSILON * scale);
    let value = uehling_outer(nu, x, tol, 0.1 * tol)?;
    Ok(alpha_ph * alpha_ph * value)
}

/// Same potential through the Fourier representation of the first-order
/// density, `alpha_ph^2 (2 / pi x) int U(k) nu_hat(k) (2 pi)^{3/2} sin(kx) / k dk`.
pub fn uehling_potential_fourier(nu: &impl RadialCharge, alpha_ph: f64, x: f64, tol: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::DomainError(format!("distance must be finite and nonnegative, got {x}")));
    }
    let norm = (2.0 * PI).powf(1.5);
    let kmax = nu.fourier_extent();
    let value = if x == 0.0 {
        integrate_adaptive(|k| uehling_u(k).unwrap_or(f64::NAN) * nu.fourier(k) * norm, 0.0, kmax, tol)?.value * 2.0 / PI
    } else {
        integrate_adaptive(
            |k| uehling_u(k).unwrap_or(f64::NAN) * nu.fourier(k) * norm * (k * x).sin() / k,
            0.0,
            kmax,
            tol,
        )?
        .value
            * 2.0
            / (PI * x)
    };
    Ok(alpha_ph * alpha_ph * value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultiplierKind {
    B0const,
    Bk,
    U,
    ULambda,
    M,
}

impl MultiplierKind {
    pub fn label(self) -> &'static str {
        match self {
            MultiplierKind::B0const => "B0const",
            MultiplierKind::Bk => "Bk",
            MultiplierKind::U => "U",
            MultiplierKind::ULambda => "ULambda",
            MultiplierKind::M => "M",
        }
    }
}

/// Samples of one multiplier; `lambda` is the cutoff when one applies.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierTable {
    pub kind: MultiplierKind,
    pub lambda: Option<f64>,
    pub samples: SampledFunction,
}

impl MultiplierTable {
    /// Tabulates a renormalization multiplier. `M` needs a Pauli-Villars
    /// scheme and is built by `pauli_villars::m_table` instead.
    pub fn tabulate(kind: MultiplierKind, grid: Vec<f64>, cutoff: Option<f64>) -> Result<Self> {
        let need_cutoff = || cutoff.ok_or_else(|| Error::InvalidInput(format!("{} needs a cutoff", kind.label())));
        let samples = match kind {
            MultiplierKind::U => SampledFunction::try_from_fn(grid, uehling_u)?,
            MultiplierKind::B0const => {
                let b = b0(need_cutoff()?)?;
                SampledFunction::from_fn(grid, |_| b)?
            }
            MultiplierKind::Bk => {
                let l = need_cutoff()?;
                SampledFunction::try_from_fn(grid, |k| b_k(l, k))?
            }
            MultiplierKind::ULambda => {
                let l = need_cutoff()?;
                SampledFunction::try_from_fn(grid, |k| u_cutoff(l, k))?
            }
            MultiplierKind::M => {
                return Err(Error::InvalidInput("M multipliers come from a Pauli-Villars scheme".into()));
            }
        };
        Ok(Self { kind, lambda: if kind == MultiplierKind::U { None } else { cutoff }, samples })
    }

    /// Rows `k,value,kind,lambda`; `lambda` is empty when not applicable.
    pub fn write_csv<W: Write>(&self, w: &mut W, header: &str, with_column_names: bool) -> Result<()> {
        if !header.is_empty() {
            write_header(w, header)?;
        }
        if with_column_names {
            writeln!(w, "k,value,kind,lambda")?;
        }
        let lambda = self.lambda.map(fmt_num).unwrap_or_default();
        for (k, v) in self.samples.grid().iter().zip(self.samples.values()) {
            writeln!(w, "{},{},{},{}", fmt_num(*k), fmt_num(*v), self.kind.label(), lambda)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charge::GaussianCharge;

    fn antiderivative(z: f64) -> f64 {
        z.powi(3) / 9.0 - 2.0 * z / 3.0 + 2.0 / 3.0 * z.atanh()
    }

    /// Closed form of `B_Lambda^0` from the antiderivative, with `atanh`
    /// written through `1 - Z` to survive huge cutoffs.
    fn b0_closed(cutoff: f64) -> f64 {
        let s = (1.0 + cutoff * cutoff).sqrt();
        let z = cutoff / s;
        let one_minus_z = 1.0 / (s * (s + cutoff));
        let atanh = 0.5 * ((2.0 - one_minus_z) / one_minus_z).ln();
        (z.powi(3) / 9.0 - 2.0 * z / 3.0 + 2.0 / 3.0 * atanh) / PI
    }

    #[test]
    fn b0_at_unit_cutoff() {
        let want = antiderivative(1.0 / 2f64.sqrt()) / PI;
        assert!((b0(1.0).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn b0_against_closed_form_over_many_scales() {
        for cutoff in [1e-3, 0.1, 1.0, 10.0, 1e3, 1e6, 1e10] {
            let got = b0(cutoff).unwrap();
            let want = b0_closed(cutoff);
            assert!((got - want).abs() <= 1e-11 * want.abs().max(1.0), "Lambda={cutoff}: {got} vs {want}");
            assert!(got > 0.0);
        }
        assert!(b0(1e-4).unwrap() < 1e-10);
    }

    #[test]
    fn b0_asymptotics() {
        assert!((b0_asymptotic(1.0) - (-5.0 / (9.0 * PI) + 2.0 / (3.0 * PI) * 2f64.ln())).abs() < 1e-15);
        assert!((b0_asymptotic(2.0) - (2.0 / (3.0 * PI) * 4f64.ln() - 5.0 / (9.0 * PI))).abs() < 1e-15);
        assert!((b0(100.0).unwrap() - b0_asymptotic(100.0)).abs() < 1e-3);
        for cutoff in [10.0, 100.0, 1000.0] {
            assert!((b0(cutoff).unwrap() - b0_asymptotic(cutoff)).abs() * cutoff * cutoff <= 1.0);
        }
    }

    #[test]
    fn upper_limit_matches_definition() {
        for (l, k) in [(2.0, 0.5), (10.0, 3.0), (5.0, 9.0), (1.0, 1e-3)] {
            let (z, omz) = upper_limit(l, k);
            let direct = ((1.0 + l * l).sqrt() - (1.0 + (l - k) * (l - k)).sqrt()) / k;
            assert!((z - direct).abs() < 1e-12);
            assert!((1.0 - z - omz).abs() < 1e-12);
        }
        let (z, _) = upper_limit(3.0, 0.0);
        assert_eq!(z, 3.0 / 10f64.sqrt());
    }

    #[test]
    fn b_k_is_continuous_at_zero_and_decreasing() {
        for cutoff in [1.0, 10.0, 1e4] {
            let b = b0(cutoff).unwrap();
            assert_eq!(b_k(cutoff, 0.0).unwrap(), b);
            assert!((b_k(cutoff, 1e-9).unwrap() - b).abs() < 1e-8);
            assert_eq!(u_cutoff(cutoff, 0.0).unwrap(), 0.0);
            let grid = linear_grid(0.0, cutoff, 60);
            let values: Vec<f64> = grid.iter().map(|&k| b_k(cutoff, k).unwrap()).collect();
            assert!(values.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn b_k_domain() {
        assert!(matches!(b_k(1.0, 2.5), Err(Error::DomainError(_))));
        assert!(b_k(1.0, 2.0).unwrap().abs() < 1e-15);
        assert!(b_k(1.0, 1.5).unwrap() > 0.0);
    }

    #[test]
    fn b_k_against_midpoint_oracle() {
        let (cutoff, k) = (3.0, 2.2);
        let s1 = (1.0f64 + cutoff * cutoff).sqrt();
        let z = (s1 - (1.0f64 + (cutoff - k) * (cutoff - k)).sqrt()) / k;
        let n = 1_000_000;
        let h = z / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            let a = (x * x - x.powi(4) / 3.0) / ((1.0 - x * x) * (1.0 + k * k / 4.0 * (1.0 - x * x))) / PI;
            let b = k / (2.0 * PI) * (x - x.powi(3) / 3.0) / (s1 - k * x / 2.0);
            sum += (a + b) * h;
        }
        assert!((b_k(cutoff, k).unwrap() - sum).abs() < 1e-9);
    }

    #[test]
    fn uehling_examples() {
        assert_eq!(uehling_u(0.0).unwrap(), 0.0);
        assert!((uehling_u_closed(2.0) - uehling_u_integral(2.0).unwrap()).abs() < 1e-10);
        let small = 1e-2;
        let ratio = uehling_u(small).unwrap() / (small * small) * 15.0 * PI;
        assert!((ratio - 1.0).abs() < 0.01);
    }

    #[test]
    fn uehling_branches_agree_on_the_overlap() {
        for k in linear_grid(5e-4, 2e-3, 31) {
            assert!((uehling_u_closed(k) - uehling_u_integral(k).unwrap()).abs() <= 1e-9, "k={k}");
        }
    }

    #[test]
    fn cutoff_multiplier_tends_to_uehling() {
        assert!((u_cutoff(1e4, 1.0).unwrap() - uehling_u(1.0).unwrap()).abs() < 1e-3);
        for k in linear_grid(0.05, 2.0, 12) {
            let u = uehling_u(k).unwrap();
            let ul = u_cutoff(10.0, k).unwrap();
            assert!(ul >= 0.0);
            // the sharp cutoff leaves a correction linear in k / Lambda
            assert!((ul - u - k / (80.0 * PI)).abs() <= 0.1 * u.max(k / (80.0 * PI)), "k={k}: {ul} vs {u}");
        }
    }

    #[test]
    fn cutoff_correction_scales_like_k_over_lambda() {
        for cutoff in [1e2, 1e4, 1e6] {
            for k in [0.05, 0.5, 2.0] {
                let excess = (u_cutoff(cutoff, k).unwrap() - uehling_u(k).unwrap()) * cutoff / k;
                assert!((excess * 8.0 * PI - 1.0).abs() < 0.01, "Lambda={cutoff} k={k}: {excess}");
            }
        }
    }

    #[test]
    fn renorm_points() {
        let p = renorm_point_from_bare(0.0, 10.0).unwrap();
        assert_eq!((p.alpha_ph, p.z3), (0.0, 1.0));
        let p = renorm_point_from_bare(1.0, 1.0).unwrap();
        let b = antiderivative(1.0 / 2f64.sqrt()) / PI;
        assert!((p.alpha_ph - 1.0 / (1.0 + b)).abs() < 1e-12);
        assert!((p.z3 - (1.0 - p.alpha_ph * b)).abs() < 1e-12);
        assert!(p.alpha_ph < p.alpha_bare);
        for (a, l) in [(0.3, 50.0), (1.0 / 137.0, 1e6), (2.0, 3.0)] {
            let p = renorm_point_from_bare(a, l).unwrap();
            let q = bare_from_physical(p.alpha_ph, l).unwrap();
            assert!((q.alpha_bare - a).abs() <= 1e-10 * a.max(1.0));
            assert!((q.z3 - p.z3).abs() < 1e-12);
            assert!((p.alpha_ph - p.z3 * p.alpha_bare).abs() < 1e-12);
        }
        assert_eq!(bare_from_physical(0.0, 5.0).unwrap().alpha_bare, 0.0);
    }

    #[test]
    fn landau_pole() {
        // B0 exceeds one once ln Lambda is of order 5
        let l1 = cutoff_from_z3(1.0, 1e-12).unwrap();
        assert!((b0(l1).unwrap() - (1.0 - 1e-12)).abs() < 1e-10);
        assert!(matches!(bare_from_physical(1.0, l1 * 2.0), Err(Error::LandauPole { .. })));
        assert!(bare_from_physical(1.0, l1 / 2.0).is_ok());
    }

    #[test]
    fn cutoff_from_z3_examples() {
        let l = cutoff_from_z3(0.1, 0.5).unwrap();
        assert!((b0(l).unwrap() - 5.0).abs() < 1e-10);
        let asymptotic = (1.5 * PI * 5.0 + 5.0 / 6.0 - 2f64.ln()).exp();
        assert!((l / asymptotic - 1.0).abs() < 1e-6);
        let p = renorm_point_from_bare(0.1 / 0.5, l).unwrap();
        assert!((p.z3 - 0.5).abs() < 1e-8);

        let small = cutoff_from_z3(10.0, 0.999).unwrap();
        assert!((b0(small).unwrap() - 1e-4).abs() < 1e-12);
        assert!(small < 1.0);
        assert!(matches!(cutoff_from_z3(0.1, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn sampled_functions_refuse_interpolation() {
        let f = SampledFunction::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.value_at(1.0).unwrap(), 2.0);
        assert!(f.value_at(1.5).is_err());
        assert!(SampledFunction::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(SampledFunction::new(vec![1.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn density_series_terms() {
        let grid = vec![0.5, 2.0, 7.0];
        let zero = SampledFunction::from_fn(grid.clone(), |_| 0.0).unwrap();
        for term in density_series(&zero, 2).unwrap() {
            assert!(term.values().iter().all(|v| *v == 0.0));
        }
        let one = SampledFunction::from_fn(grid, |_| 1.0).unwrap();
        let terms = density_series(&one, 2).unwrap();
        let u2 = uehling_u_integral(2.0).unwrap();
        assert!((terms[1].value_at(2.0).unwrap() - u2).abs() < 1e-12);
        assert!((terms[2].value_at(2.0).unwrap() - u2 * u2).abs() < 1e-12);
        assert!(matches!(density_series(&one, 3), Err(Error::Unsupported(3))));
        let sum = series_partial_sum(&terms, 0.5).unwrap();
        assert!((sum.value_at(2.0).unwrap() - (1.0 + 0.5 * u2 + 0.25 * u2 * u2)).abs() < 1e-12);
    }

    fn gaussian_samples(grid: Vec<f64>) -> SampledFunction {
        let g = GaussianCharge::unit();
        SampledFunction::from_fn(grid, |k| g.fourier(k)).unwrap()
    }

    #[test]
    fn linear_response_examples() {
        let nu = gaussian_samples(vec![0.0, 0.5, 1.0, 3.0]);
        let zero = linear_response(&nu, 0.0, 50.0).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
        let rho = linear_response(&nu, 0.3, 50.0).unwrap();
        let n0 = nu.value_at(0.0).unwrap();
        let r0 = rho.value_at(0.0).unwrap();
        assert!(((n0 - r0) * (1.0 + 0.3 * b0(50.0).unwrap()) - n0).abs() < 1e-12);
        // the solution of rho = -alpha B (rho - nu)
        for (k, (r, v)) in rho.grid().iter().zip(rho.values().iter().zip(nu.values())) {
            let b = b_k(50.0, *k).unwrap();
            assert!((r + 0.3 * b * (r - v)).abs() < 1e-14);
        }
        assert!(matches!(linear_response(&nu, 0.3, 1.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn screening_grows_with_the_cutoff() {
        let grid = linear_grid(0.1, 8.0, 40);
        let nu = gaussian_samples(grid.clone());
        let distance = |cutoff: f64| {
            let rho = linear_response(&nu, 1.0, cutoff).unwrap();
            grid.iter()
                .zip(nu.values().iter().zip(rho.values()))
                .map(|(k, (v, r))| (v - r).powi(2) / (k * k))
                .sum::<f64>()
        };
        let d: Vec<f64> = [10.0, 1e3, 1e5].iter().map(|&l| distance(l)).collect();
        assert!(d[0] > d[1] && d[1] > d[2]);
    }

    #[test]
    fn physical_density_examples() {
        let nu = gaussian_samples(vec![0.5, 1.0, 3.0, 25.0]);
        let free = physical_density_linear(&nu, 0.0, 10.0).unwrap();
        assert_eq!(free.values()[..3], nu.values()[..3]);
        assert_eq!(free.value_at(25.0).unwrap(), 0.0);
        let rho = physical_density_linear(&nu, 0.1, 10.0).unwrap();
        assert!(rho.value_at(1.0).unwrap() > nu.value_at(1.0).unwrap());
        assert!(matches!(
            physical_density_linear(&nu, 1e3, 10.0),
            Err(Error::DenominatorVanishes { .. })
        ));
    }

    #[test]
    fn series_residual_splits_into_cutoff_and_cubic_parts() {
        let cutoff = 1e4;
        let grid = linear_grid(0.25, 10.0, 40);
        let nu = gaussian_samples(grid.clone());
        let terms = density_series(&nu, 2).unwrap();
        let u: Vec<f64> = grid.iter().map(|&k| uehling_u(k).unwrap()).collect();
        let ul: Vec<f64> = grid.iter().map(|&k| u_cutoff(cutoff, k).unwrap()).collect();
        let residual = |a: f64, strip_cutoff_terms: bool| {
            let exact = physical_density_linear(&nu, a, cutoff).unwrap();
            let series = series_partial_sum(&terms, a).unwrap();
            (0..grid.len())
                .map(|i| {
                    let mut r = exact.values()[i] - series.values()[i];
                    if strip_cutoff_terms {
                        let v = nu.values()[i];
                        r -= v * (a * (ul[i] - u[i]) + a * a * (ul[i] * ul[i] - u[i] * u[i]));
                    }
                    r.abs()
                })
                .fold(0.0, f64::max)
        };
        // the O(k / Lambda) gap between U_Lambda and U enters at first order
        let raw = residual(0.04, false) / residual(0.02, false);
        assert!((raw - 2.0).abs() < 0.05, "raw ratio {raw}");
        let cubic = residual(0.04, true) / residual(0.02, true);
        assert!((7.5..=8.5).contains(&cubic), "cubic ratio {cubic}");
    }

    #[test]
    fn uehling_potential_routes_agree() {
        let g = GaussianCharge::unit();
        for x in [0.5, 1.0, 2.0] {
            let real = uehling_potential(&g, 1.0, x, 1e-7).unwrap();
            let fourier = uehling_potential_fourier(&g, 1.0, x, 1e-13).unwrap();
            assert!(((real - fourier) / fourier).abs() <= 1e-4, "x={x}: {real} vs {fourier}");
        }
        let zero = GaussianCharge::new(0.0, 1.0);
        assert_eq!(uehling_potential(&zero, 1.0, 1.0, 1e-6).unwrap(), 0.0);
        let a = uehling_potential(&g, 0.1, 1.0, 1e-8).unwrap();
        let b = uehling_potential(&g, 0.2, 1.0, 1e-8).unwrap();
        assert!((b / a - 4.0).abs() < 1e-6);
    }

    #[test]
    fn multiplier_table_csv() {
        let t = MultiplierTable::tabulate(MultiplierKind::ULambda, vec![0.0, 1.0], Some(10.0)).unwrap();
        let mut out = Vec::new();
        t.write_csv(&mut out, "run", true).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# run");
        assert_eq!(lines[1], "k,value,kind,lambda");
        assert_eq!(lines[2], format!("{},{},ULambda,{}", fmt_num(0.0), fmt_num(0.0), fmt_num(10.0)));
        let u = MultiplierTable::tabulate(MultiplierKind::U, vec![1.0], None).unwrap();
        let mut out = Vec::new();
        u.write_csv(&mut out, "", false).unwrap();
        assert!(String::from_utf8(out).unwrap().trim_end().ends_with(",U,"));
        assert!(MultiplierTable::tabulate(MultiplierKind::Bk, vec![1.0], None).is_err());
    }
}
