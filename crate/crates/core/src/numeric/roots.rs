use crate::{Error, Result};

/// Bisection on a bracket with a verified sign change.
///
/// Stops after `max_iter` halvings, at an exact zero, or once the midpoint
/// can no longer be separated from the endpoints in floating point.
pub fn bisect(what: &'static str, f: impl Fn(f64) -> f64, lo: f64, hi: f64, max_iter: usize) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket {
            what,
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let r = bisect("x^2-2", |x| x * x - 2.0, 0.0, 2.0, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reports_missing_bracket() {
        let err = bisect("x^2+1", |x| x * x + 1.0, -1.0, 1.0, 200).unwrap_err();
        assert!(matches!(err, Error::NoBracket { .. }));
    }
}
