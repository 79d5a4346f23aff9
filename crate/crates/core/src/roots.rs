//! Bracketed solver for strictly monotone scalar equations.

use crate::error::{BilliardError, Result};

/// Width at which bisection hands over to Newton.
pub(crate) const BISECTION_WIDTH: f64 = 1e-8;

/// Root of `f` on `[lo, hi]` where `f` is strictly monotone and changes sign
/// exactly once. `f` returns the value and its derivative.
///
/// Bisection narrows the bracket to [`BISECTION_WIDTH`], then a safeguarded
/// Newton iteration polishes the last digits.
pub(crate) fn solve_monotone<F>(f: F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if !(f_lo.is_finite() && f_hi.is_finite())
        || f_lo.signum() == f_hi.signum()
        || f_lo == 0.0
        || f_hi == 0.0
    {
        return Err(BilliardError::BracketFailure(format!(
            "no strict sign change on [{lo}, {hi}]: f = ({f_lo:e}, {f_hi:e})"
        )));
    }
    let lo_positive = f_lo > 0.0;
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        let (v, _) = f(mid);
        if v == 0.0 {
            return Ok(mid);
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..12 {
        let (v, dv) = f(x);
        if v == 0.0 {
            break;
        }
        if (v > 0.0) == lo_positive {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - v / dv;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_decreasing_and_increasing() {
        let r = solve_monotone(|x| (2.0 - x * x, -2.0 * x), 0.0, 3.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        let r = solve_monotone(|x| (x.powi(3) - 0.1, 3.0 * x * x), -1.0, 1.0).unwrap();
        assert!((r - 0.1f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(solve_monotone(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0).is_err());
    }
}
