//! Scalar root finding and minimisation.

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};

/// Brent's method on a bracket with `f(a) f(b) <= 0`.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo: a.min(b), hi: a.max(b) });
    }
    let (mut c, mut fc) = (a, fa);
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
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
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
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
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NotFound { iterations: max_iter, residual: fb });
        }
    }
    Err(Error::NotFound { iterations: max_iter, residual: fb.abs() })
}

/// Golden-section search for a minimum of a unimodal function on `[a, b]`.
/// Returns `(x_min, f(x_min))`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRoot {
    pub z: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

/// Secant iteration for `f(z) = 0` started from `z0`, `z1`; stops when
/// `|f| <= ftol` or the step is below `ztol * |z|`.
pub fn complex_secant<F>(
    mut f: F,
    z0: Complex64,
    z1: Complex64,
    ftol: f64,
    ztol: f64,
    max_iter: usize,
) -> Result<ComplexRoot>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let (mut za, mut zb) = (z0, z1);
    let (mut fa, mut fb) = (f(za)?, f(zb)?);
    if fa.norm() < fb.norm() {
        core::mem::swap(&mut za, &mut zb);
        core::mem::swap(&mut fa, &mut fb);
    }
    for it in 1..=max_iter {
        if fb.norm() <= ftol {
            return Ok(ComplexRoot { z: zb, residual: fb.norm(), iterations: it - 1 });
        }
        let denom = fb - fa;
        if denom.norm() == 0.0 {
            break;
        }
        let step = fb * (zb - za) / denom;
        za = zb;
        fa = fb;
        zb -= step;
        fb = f(zb)?;
        if !(fb.re.is_finite() && fb.im.is_finite()) {
            break;
        }
        if step.norm() <= ztol * zb.norm().max(1.0) {
            return Ok(ComplexRoot { z: zb, residual: fb.norm(), iterations: it });
        }
    }
    Err(Error::NotFound { iterations: max_iter, residual: fb.norm() })
}
