use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 400;

/// Bisection on a strictly monotone function bracketed by `[lo, hi]`.
///
/// Stops as soon as `|f(x)| <= tol` or the bracket is narrower than `tol`.
pub fn find_root_monotone<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidInput(format!("invalid bracket [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("root tolerance must be positive, got {tol}")));
    }

    let (mut a, mut b) = (lo, hi);
    let f_lo = f(a);
    let f_hi = f(b);
    if f_lo == 0.0 {
        return Ok(a);
    }
    if f_hi == 0.0 {
        return Ok(b);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::BadBracket { lo, hi, f_lo, f_hi });
    }

    let increasing = f_hi > 0.0;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm.abs() <= tol {
            return Ok(mid);
        }
        if (fm > 0.0) == increasing {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let x = find_root_monotone(|x| x - 2.0, 0.0, 5.0, 1e-12).unwrap();
        assert!((x - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn cube_root_of_two() {
        let x = find_root_monotone(|x| x * x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((x - 2f64.cbrt()).abs() <= 1e-10);
    }

    #[test]
    fn decreasing_function() {
        let x = find_root_monotone(|x: f64| (-x).exp() - 0.5, 0.0, 3.0, 1e-13).unwrap();
        assert!((x - 2f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn no_sign_change_is_bad_bracket() {
        let err = find_root_monotone(|x| x + 1.0, 0.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::BadBracket { .. }));
    }

    #[test]
    fn bracket_independence() {
        let f = |x: f64| x.powi(3) + x - 3.0;
        let roots: Vec<f64> = [(0.0, 2.0), (1.0, 1.5), (-5.0, 10.0)]
            .iter()
            .map(|&(lo, hi)| find_root_monotone(f, lo, hi, 1e-13).unwrap())
            .collect();
        for r in &roots {
            assert!((r - roots[0]).abs() <= 1e-12);
        }
    }
}
