//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Terminates when the bracket width drops below `x_tol` (plus a few ulps of
/// the iterate) or an exact zero is hit.
pub fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, x_tol: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Root(format!(
            "bracket [{a}, {b}] does not change sign (f = {fa}, {fb})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::Root(format!("no convergence after {max_iter} iterations")))
}

/// Marches `[start, stop]` in steps of `step` and returns the first
/// subinterval on which `sign` changes. `sign(x)` returns `None` when the
/// sign at `x` is not resolvable and the point is skipped.
pub fn first_sign_change<S: Fn(f64) -> Option<f64>>(sign: S, start: f64, stop: f64, step: f64) -> Option<(f64, f64)> {
    let mut prev: Option<(f64, f64)> = None;
    let n = ((stop - start) / step).ceil() as usize;
    for i in 0..=n {
        let x = (start + i as f64 * step).min(stop);
        let Some(s) = sign(x) else { continue };
        if let Some((px, ps)) = prev {
            if ps.signum() != s.signum() {
                return Some((px, x));
            }
        }
        prev = Some((x, s));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_sqrt2() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn brent_rejects_same_sign() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50),
            Err(Error::Root(_))
        ));
    }

    #[test]
    fn brent_handles_flat_then_steep() {
        let r = brent(|x: f64| (x - 0.3).powi(3), -1.0, 1.0, 1e-14, 200).unwrap();
        assert!((r - 0.3).abs() < 1e-4);
    }

    #[test]
    fn march_brackets_first_crossing() {
        let (lo, hi) = first_sign_change(|x| Some((3.0 * x).cos()), 0.0, 10.0, 0.1).unwrap();
        let root = std::f64::consts::PI / 6.0;
        assert!(lo < root && root <= hi);
        assert!(first_sign_change(|x| Some(x + 1.0), 0.0, 5.0, 0.5).is_none());
    }

    #[test]
    fn march_skips_unresolved_points() {
        let s = |x: f64| if (0.45..0.75).contains(&x) { None } else { Some(0.6 - x) };
        let (lo, hi) = first_sign_change(s, 0.0, 2.0, 0.1).unwrap();
        assert!(lo < 0.45 && hi >= 0.75);
    }
}
