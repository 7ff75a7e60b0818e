//! Scalar root finding on a sign-changing bracket.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]` until the bracket is narrower than `tol`.
///
/// Returns the midpoint of the final bracket. `f(lo)` and `f(hi)` must have
/// opposite signs (a zero at either end is accepted and returned).
pub fn bisect(
    what: &str,
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let mut f_lo = f(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let f_hi = f(hi)?;
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracket {
            what: what.to_string(),
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Safeguarded Newton iteration for an increasing function on `[lo, hi]`.
///
/// Bisects until the bracket is narrower than `switch_width`, then takes
/// Newton steps, falling back to bisection whenever a step leaves the
/// bracket. Stops when the step is below `tol`.
pub fn newton_bisect(
    mut f: impl FnMut(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    switch_width: f64,
    tol: f64,
) -> Option<f64> {
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if !(f_lo <= 0.0 && f_hi >= 0.0) {
        return None;
    }
    for _ in 0..200 {
        if hi - lo <= switch_width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (v, _) = f(mid);
        if v == 0.0 {
            return Some(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (v, dv) = f(z);
        if v == 0.0 {
            return Some(z);
        }
        if v < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let newton = z - v / dv;
        let next = if dv > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - z).abs() <= tol || hi - lo <= tol {
            return Some(next);
        }
        z = next;
    }
    Some(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect("sqrt", |x| Ok(x * x - 2.0), 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bisect_reports_bad_bracket() {
        let e = bisect("pos", |x| Ok(x * x + 1.0), -1.0, 1.0, 1e-6).unwrap_err();
        assert!(matches!(e, Error::Bracket { .. }));
    }

    #[test]
    fn newton_handles_flat_end() {
        // derivative vanishes at the right end of the bracket
        let r = newton_bisect(|z| (z - z * z / 2.0 - 0.3, 1.0 - z), 0.0, 1.0, 1e-6, 1e-15).unwrap();
        let exact = 1.0 - (1.0f64 - 0.6).sqrt();
        assert!((r - exact).abs() < 1e-14);
    }
}
