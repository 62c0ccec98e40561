use crate::error::{Error, Result};

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

pub const DEFAULT_MAX_PANELS: usize = 4000;

// 15-point Kronrod abscissae; the odd entries (1, 3, 5, 7) are the 7-point
// Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        abs_value: abs_sum * half.abs(),
    }
}

/// Integrate `f` over `[a, b]` to an absolute tolerance `tol` using globally
/// adaptive Gauss-Kronrod (7/15) bisection.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    integrate_adaptive_with(f, a, b, tol, DEFAULT_MAX_PANELS)
}

/// Same as [`integrate_adaptive`] with an explicit subdivision budget.
///
/// The panel with the largest error estimate is always bisected next; ties
/// go to the leftmost panel so the result is reproducible.
pub fn integrate_adaptive_with<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInput(format!("integration interval [{a}, {b}] is not a finite increasing interval")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("quadrature tolerance must be positive, got {tol}")));
    }

    let mut panels = vec![kronrod_panel(&f, a, b)];
    let mut evaluations = 15;

    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let abs_value: f64 = panels.iter().map(|p| p.abs_value).sum();

        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NonConvergence { error_estimate: f64::INFINITY, tol, evaluations });
        }

        let floor = 50.0 * f64::EPSILON * abs_value;
        if error <= tol.max(floor) {
            return Ok(QuadratureResult { value, error_estimate: error, evaluations });
        }

        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, p)| if p.error > be { (i, p.error) } else { (bi, be) });
        let panel = panels[worst];
        let mid = 0.5 * (panel.a + panel.b);

        let exhausted = panels.len() >= max_panels;
        let unsplittable = mid <= panel.a || mid >= panel.b;
        if exhausted || unsplittable {
            return Err(Error::NonConvergence { error_estimate: error, tol, evaluations });
        }

        panels[worst] = kronrod_panel(&f, panel.a, mid);
        panels.insert(worst + 1, kronrod_panel(&f, mid, panel.b));
        evaluations += 30;
    }
}
