//! Pauli-Villars regularization with two auxiliary masses: the scheme
//! coefficients, the second-order multiplier `M(k)` and the quadratic field
//! energy it defines.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate_adaptive, C64};
use crate::renorm::{uehling_u, MultiplierKind, MultiplierTable, SampledFunction};

const M_TOL: f64 = 1e-11;
const SUM_RULE_TOL: f64 = 1e-12;

/// Masses `m0 < m1 < m2` with weights `c0 = 1, c1, c2` obeying both sum
/// rules, and the averaged cutoff they induce.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PvScheme {
    m0: f64,
    m1: f64,
    m2: f64,
    c1: f64,
    c2: f64,
    lambda_avg: f64,
}

pub fn pv_scheme(m0: f64, m1: f64, m2: f64) -> Result<PvScheme> {
    if !(m0 > 0.0 && m0 < m1 && m1 < m2 && m2.is_finite()) {
        return Err(Error::DegenerateMasses(m0, m1, m2));
    }
    let (s0, s1, s2) = (m0 * m0, m1 * m1, m2 * m2);
    let denom = s2 - s1;
    let c1 = (s0 - s2) / denom;
    let c2 = (s1 - s0) / denom;
    let scheme_sum = 1.0 + c1 + c2;
    let mass_sum = s0 + c1 * s1 + c2 * s2;
    let mass_scale = s0 + c1.abs() * s1 + c2.abs() * s2;
    if scheme_sum.abs() > SUM_RULE_TOL || mass_sum.abs() > SUM_RULE_TOL * mass_scale {
        return Err(Error::DegenerateMasses(m0, m1, m2));
    }
    // sum c_j = 0 lets the logs be taken relative to m0, which keeps the
    // result accurate for widely separated masses
    let log_lambda_sq = -(c1 * (s1 / s0).ln() + c2 * (s2 / s0).ln());
    Ok(PvScheme { m0, m1, m2, c1, c2, lambda_avg: (0.5 * log_lambda_sq).exp() })
}

impl PvScheme {
    pub fn masses(&self) -> [f64; 3] {
        [self.m0, self.m1, self.m2]
    }

    /// `[c0, c1, c2]` with `c0 = 1`.
    pub fn coefficients(&self) -> [f64; 3] {
        [1.0, self.c1, self.c2]
    }

    /// Averaged ultraviolet cutoff.
    pub fn lambda(&self) -> f64 {
        self.lambda_avg
    }

    pub fn log_lambda_sq(&self) -> f64 {
        2.0 * self.lambda_avg.ln()
    }

    /// Residuals of `sum c_j` and `sum c_j m_j^2`.
    pub fn sum_rule_residuals(&self) -> (f64, f64) {
        let [c0, c1, c2] = self.coefficients();
        let [m0, m1, m2] = self.masses();
        (c0 + c1 + c2, c0 * m0 * m0 + c1 * m1 * m1 + c2 * m2 * m2)
    }
}

/// Pauli-Villars multiplier `M(k)`.
///
/// The `ln m_j^2` part integrates in closed form to `M(0)`; the remaining
/// `ln(1 + u(1-u) k^2 / m_j^2)` part goes to quadrature.
pub fn m_multiplier(scheme: &PvScheme, k: f64) -> Result<f64> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::DomainError(format!("M multiplier needs finite k >= 0, got {k}")));
    }
    let m_zero = scheme.log_lambda_sq() / (3.0 * PI);
    if k == 0.0 {
        return Ok(m_zero);
    }
    let k2 = k * k;
    let c = scheme.coefficients();
    let m = scheme.masses();
    let integrand = |u: f64| {
        let w = u * (1.0 - u);
        let s: f64 = (0..3).map(|j| c[j] * (w * k2 / (m[j] * m[j])).ln_1p()).sum();
        w * s
    };
    // symmetric under u -> 1 - u
    let half = integrate_adaptive(integrand, 0.0, 0.5, M_TOL)?.value;
    Ok(m_zero - 4.0 / PI * half)
}

/// `M` sampled on `grid`, tagged with the averaged cutoff.
pub fn m_table(scheme: &PvScheme, grid: Vec<f64>) -> Result<MultiplierTable> {
    let samples = SampledFunction::try_from_fn(grid, |k| m_multiplier(scheme, k))?;
    Ok(MultiplierTable { kind: MultiplierKind::M, lambda: Some(scheme.lambda()), samples })
}

/// `2 ln(Lambda) / (3 pi) - M(k) - U(k)`, which vanishes as the auxiliary
/// masses grow at fixed ratios.
pub fn uehling_limit_gap(scheme: &PvScheme, k: f64) -> Result<f64> {
    let m = m_multiplier(scheme, k)?;
    Ok(scheme.log_lambda_sq() / (3.0 * PI) - m - uehling_u(k)?)
}

/// Fourier samples of an electromagnetic field with quadrature weights.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    wavevectors: Vec<[f64; 3]>,
    electric: Vec<[C64; 3]>,
    magnetic: Vec<[C64; 3]>,
    weights: Vec<f64>,
}

/// Grid spacing below which two wavevectors are treated as equal when
/// pairing `k` with `-k`.
const PAIRING_RESOLUTION: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-12;

fn pairing_key(k: [f64; 3]) -> [i64; 3] {
    k.map(|x| (x / PAIRING_RESOLUTION).round() as i64)
}

impl FieldSample {
    /// Checks that the samples come from real fields, i.e. `F(-k)` is the
    /// conjugate of `F(k)`, and that every weight is positive.
    pub fn new(
        wavevectors: Vec<[f64; 3]>,
        electric: Vec<[C64; 3]>,
        magnetic: Vec<[C64; 3]>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n = wavevectors.len();
        if electric.len() != n || magnetic.len() != n || weights.len() != n {
            return Err(Error::InvalidInput(format!(
                "field sample lengths differ: {} wavevectors, {} E, {} B, {} weights",
                n,
                electric.len(),
                magnetic.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput(format!("quadrature weights must be positive, got {w}")));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, k) in wavevectors.iter().enumerate() {
            if k.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite wavevector {k:?}")));
            }
            if index.insert(pairing_key(*k), i).is_some() {
                return Err(Error::InvalidInput(format!("wavevector {k:?} appears twice")));
            }
        }
        let sample = Self { wavevectors, electric, magnetic, weights };
        for (i, k) in sample.wavevectors.iter().enumerate() {
            let Some(&j) = index.get(&pairing_key(k.map(|x| -x))) else {
                return Err(Error::InvalidInput(format!("wavevector {k:?} has no partner at -k")));
            };
            let mismatch = |f: &[[C64; 3]]| (0..3).map(|a| (f[i][a] - f[j][a].conj()).norm()).fold(0.0, f64::max);
            let scale = 1.0 + sample.electric[i].iter().chain(&sample.magnetic[i]).map(|z| z.norm()).fold(0.0, f64::max);
            if mismatch(&sample.electric).max(mismatch(&sample.magnetic)) > HERMITIAN_TOL * scale
                || (sample.weights[i] - sample.weights[j]).abs() > HERMITIAN_TOL * sample.weights[i]
            {
                return Err(Error::InvalidInput(format!("samples at {k:?} and its negative are not conjugate")));
            }
        }
        Ok(sample)
    }

    pub fn zeros(wavevectors: Vec<[f64; 3]>, weights: Vec<f64>) -> Result<Self> {
        let zero = vec![[C64::new(0.0, 0.0); 3]; wavevectors.len()];
        Self::new(wavevectors, zero.clone(), zero, weights)
    }

    pub fn len(&self) -> usize {
        self.wavevectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavevectors.is_empty()
    }

    pub fn wavevectors(&self) -> &[[f64; 3]] {
        &self.wavevectors
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct F2Energy {
    /// `magnetic - electric`.
    pub total: f64,
    pub magnetic: f64,
    pub electric: f64,
}

pub fn f2_energy(field: &FieldSample, scheme: &PvScheme) -> Result<F2Energy> {
    let norm_sq = |v: &[C64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let (mut magnetic, mut electric) = (0.0, 0.0);
    for i in 0..field.len() {
        let k = field.wavevectors[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        let wm = field.weights[i] * m_multiplier(scheme, k)?;
        magnetic += wm * norm_sq(&field.magnetic[i]);
        electric += wm * norm_sq(&field.electric[i]);
    }
    let scale = 1.0 / (8.0 * PI);
    let (magnetic, electric) = (scale * magnetic, scale * electric);
    Ok(F2Energy { total: magnetic - electric, magnetic, electric })
}
