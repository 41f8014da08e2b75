//! Scalar bracketing root finders shared by the jump solver and the polar.

use crate::error::{Error, Result};

/// Refines a sign-changing bracket `[a, b]` of `f` by bisection down to
/// `x_tol` (absolute), then applies one secant step inside the final bracket.
///
/// `fa` and `fb` are `f(a)` and `f(b)`; they must not have the same strict
/// sign.
pub fn bisect_secant<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let (mut lo, mut hi, mut flo, mut fhi) = (a, b, fa, fb);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= x_tol || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    // secant polish, kept inside the bracket
    let x = lo - flo * (hi - lo) / (fhi - flo);
    if x.is_finite() && (x - lo) * (x - hi) <= 0.0 {
        Ok(x)
    } else {
        Ok(0.5 * (lo + hi))
    }
}

/// Locates the minimum of a unimodal function on `[a, b]` by golden-section
/// search. Returns `(x_min, f(x_min))`.
pub fn golden_section_min<F>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > x_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect_secant(|x| Ok(x * x - 2.0), 0.0, 2.0, -2.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(bisect_secant(|x| Ok(x * x + 1.0), -1.0, 1.0, 2.0, 2.0, 1e-12).is_err());
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) = golden_section_min(|x| Ok((x - 0.3) * (x - 0.3) + 1.0), 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }
}
