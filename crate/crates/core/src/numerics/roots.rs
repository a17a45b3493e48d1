use crate::error::{Error, Result};
use crate::Real;


const MAX_ITER: usize = 200;

/// Bracketed root finding: Brent's method with bisection safeguard.
///
/// Requires a sign change on [lo, hi]. Stops when |f(x)| <= tol or the
/// bracket width shrinks below tol; the result always lies inside the
/// initial bracket.
pub fn find_root<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, tol: T) -> Result<T> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa * fb > T::zero() {
        return Err(Error::NoSignChange {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    let two = T::of(2.0);
    let three = T::of(3.0);
    let half = T::of(0.5);
    for _ in 0..MAX_ITER {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + half * tol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation / secant
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (two * xm * s, T::one() - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (two * xm * q0 * (q0 - r) - (b - a) * (r - T::one())),
                    (q0 - T::one()) * (r - T::one()) * (s - T::one()),
                )
            };
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = three * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b = b + d;
        } else {
            b = b + if xm > T::zero() { tol1 } else { -tol1 };
        }
        fb = f(b);
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(Error::MaxIterations(MAX_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm_cdf;

    #[test]
    fn sqrt_two() {
        let x = find_root(|x: f64| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((x - std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn identity_at_zero() {
        let x = find_root(|x: f64| x, -1.0, 1.0, 1e-12).unwrap();
        assert!(x.abs() < 1e-11);
    }

    #[test]
    fn normal_quantile() {
        let x = find_root(|x: f64| norm_cdf(x) - 0.975, 0.0, 4.0, 1e-12).unwrap();
        assert!((x - 1.959963984540054).abs() < 1e-7, "{x}");
    }

    #[test]
    fn stays_in_bracket() {
        let x = find_root(|x: f64| (x - 0.3).tanh(), -10.0, 10.0, 1e-10).unwrap();
        assert!((-10.0..=10.0).contains(&x));
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn no_sign_change_is_error() {
        let r = find_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::NoSignChange { .. })));
    }
}
