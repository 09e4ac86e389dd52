//! Modified Bessel functions `K_n(z)` of integer order for complex `z`.

use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use super::{QnmMethod, QnmResult};
use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |p, k| p * k as f64)
}

/// Power series about `z = 0` with the principal logarithm.
fn k_series(n: usize, z: Complex64) -> Complex64 {
    let half = z / 2.0;
    let q = half * half;
    let mut finite = Complex64::new(0.0, 0.0);
    for k in 0..n {
        finite += (-q).powu(k as u32) * (factorial(n - k - 1) / factorial(k));
    }
    finite *= half.powi(-(n as i32)) * 0.5;
    let mut i_n = Complex64::new(0.0, 0.0);
    let mut psi_sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0 / factorial(n), 0.0);
    // psi(k+1) + psi(n+k+1) = -2 gamma + H_k + H_{n+k}
    let mut h_k = 0.0;
    let mut h_nk: f64 = (1..=n).map(|m| 1.0 / m as f64).sum();
    for k in 0..400 {
        if k > 0 {
            term *= q / (k as f64 * (n + k) as f64);
            h_k += 1.0 / k as f64;
            h_nk += 1.0 / (n + k) as f64;
        }
        i_n += term;
        psi_sum += term * (h_k + h_nk - 2.0 * EULER_GAMMA);
        if term.norm() < 1e-18 * i_n.norm().max(psi_sum.norm()) && k > 2 {
            break;
        }
    }
    let hn = half.powu(n as u32);
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    finite - sign * half.ln() * hn * i_n + sign * 0.5 * hn * psi_sum
}

/// `int_0^inf exp(-z cosh t) cosh(n t) dt` by the trapezoidal rule, `Re z > 0`.
fn k_integral(n: usize, z: Complex64) -> Complex64 {
    // the integrand is analytic for |Im t| < pi/2 - |arg z|
    let width = PI / 2.0 - z.arg().abs();
    let h = (width / 8.0).min(0.1);
    let t_max = (750.0 / z.re).max(1.0).acosh() + 1.0;
    let steps = (t_max / h).ceil() as usize;
    let f = |t: f64| (-z * t.cosh()).exp() * (n as f64 * t).cosh();
    let mut sum = f(0.0) * 0.5;
    for i in 1..=steps {
        sum += f(i as f64 * h);
    }
    sum * h
}

/// `K_n(z)` on the principal branch, `|arg z| < pi`. Uses the integral
/// representation away from the imaginary axis in the right half-plane and
/// the series elsewhere.
pub fn bessel_k(n: usize, z: Complex64) -> Result<Complex64> {
    let arg = z.arg();
    if arg.abs() > PI - 0.01 {
        return Err(Error::BranchAmbiguity { arg });
    }
    if z.norm() == 0.0 {
        return Err(Error::InvalidArgument("K_n is singular at 0".into()));
    }
    if z.re > 0.0 && arg.abs() < PI / 2.0 - 0.2 && z.norm() > 2.0 {
        Ok(k_integral(n, z))
    } else {
        Ok(k_series(n, z))
    }
}

/// Zero of `K_2` near `guess` by Newton's method with `K_2' = -K_1 - (2/z) K_2`.
pub fn bessel_k2_zero(guess: Complex64) -> Result<QnmResult> {
    let mut z = guess;
    for it in 1..=100 {
        let k2 = bessel_k(2, z)?;
        let k1 = bessel_k(1, z)?;
        let step = k2 / (-k1 - k2 * 2.0 / z);
        z -= step;
        if step.norm() <= 1e-15 * z.norm() {
            let residual = bessel_k(2, z)?.norm();
            return Ok(QnmResult { s: z, method: QnmMethod::Bessel, residual, iterations: it });
        }
    }
    Err(Error::NotFound { iterations: 100, residual: bessel_k(2, z)?.norm() })
}
