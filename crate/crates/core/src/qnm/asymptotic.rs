//! Asymptotic branches `a_n^(+-) = n^(-3/4) exp(+-sqrt(8 s n)) sum_k c_k n^(-k/2)`
//! and the dominant-branch amplitude `C_+(s)`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use super::recurrence::{forward_recurrence, RecurrenceSystem};
use super::{QnmMethod, QnmResult};
use crate::error::{Error, Result};
use crate::roots::complex_secant;

/// Truncation order of the series in `eps = n^(-1/2)`.
const ORDER: usize = 16;
const RHO: f64 = -0.75;

type Series = [Complex64; ORDER];

fn zero() -> Series {
    [Complex64::new(0.0, 0.0); ORDER]
}

fn mul(a: &Series, b: &Series) -> Series {
    let mut c = zero();
    for i in 0..ORDER {
        if a[i] == Complex64::new(0.0, 0.0) {
            continue;
        }
        for j in 0..ORDER - i {
            c[i + j] += a[i] * b[j];
        }
    }
    c
}

/// `exp(a)` for a series with `a[0] = 0`.
fn exp0(a: &Series) -> Series {
    // e' = a' e
    let mut e = zero();
    e[0] = Complex64::new(1.0, 0.0);
    for m in 1..ORDER {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=m {
            acc += a[k] * e[m - k] * k as f64;
        }
        e[m] = acc / m as f64;
    }
    e
}

/// `(1 - j eps^2)^p`.
fn binomial_power(j: f64, p: f64) -> Series {
    let mut out = zero();
    let mut coef = 1.0;
    let mut k = 0;
    while 2 * k < ORDER {
        out[2 * k] = Complex64::new(coef * (-j).powi(k as i32), 0.0);
        coef *= (p - k as f64) / (k as f64 + 1.0);
        k += 1;
    }
    out
}

/// `sigma (sqrt(n - j) - sqrt(n))` as a series in `eps`.
fn shift_exponent(sigma: Complex64, j: f64) -> Series {
    // eps^-1 (sqrt(1 - j eps^2) - 1)
    let root = binomial_power(j, 0.5);
    let mut out = zero();
    for m in 1..ORDER {
        if m + 1 < ORDER {
            out[m] = root[m + 1] * sigma;
        }
    }
    out
}

/// Coefficients `c_0 = 1, c_1..c_kmax` of one asymptotic branch.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticBranch {
    pub sigma: Complex64,
    pub coefficients: Vec<Complex64>,
}

impl AsymptoticBranch {
    /// `ln a_n` of the truncated branch.
    pub fn ln_value(&self, n: f64) -> Complex64 {
        let eps = n.powf(-0.5);
        let mut s = Complex64::new(0.0, 0.0);
        let mut p = 1.0;
        for c in &self.coefficients {
            s += c * p;
            p *= eps;
        }
        Complex64::new(RHO * n.ln(), 0.0) + self.sigma * n.sqrt() + s.ln()
    }
}

/// Substitutes the branch ansatz with `sigma = +-sqrt(8 s)` into the
/// recurrence, expands in `eps = n^(-1/2)` and fixes `c_k` (`c_0 = 1`) order by
/// order. Fails if orders that do not involve any `c_k` fail to vanish, which
/// would mean the leading exponents are wrong.
pub fn asymptotic_coefficients(
    sys: &RecurrenceSystem,
    s: Complex64,
    plus: bool,
    kmax: usize,
) -> Result<AsymptoticBranch> {
    let root = (s * 8.0).sqrt();
    let sigma = if plus { root } else { -root };
    let bw = sys.bandwidth();
    // T_k(eps) = eps^4 sum_j c_j(n) ratio_j(eps) eps^k (1 - j eps^2)^(-k/2)
    let mut t: Vec<Series> = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut total = zero();
        for j in 0..bw {
            let jf = j as f64;
            let [p2, p1a, p1b, p0] = sys.base_coefficients(j);
            let (p2, p0) = (p2.to_f64(), p0.to_f64());
            let p1 = Complex64::new(p1a.to_f64(), 0.0) + s * p1b.to_f64();
            // c_j(n) eps^4 with m = n - j: p2 m (m-1) - p1 m - p0
            let mut poly = zero();
            poly[0] = Complex64::new(p2, 0.0);
            poly[2] = Complex64::new(-p2 * (2.0 * jf + 1.0), 0.0) - p1;
            poly[4] = Complex64::new(p2 * jf * (jf + 1.0) - p0, 0.0) + p1 * jf;
            let ratio = mul(&binomial_power(jf, RHO - k as f64 / 2.0), &exp0(&shift_exponent(sigma, jf)));
            let term = mul(&poly, &ratio);
            for m in 0..ORDER {
                total[m] += term[m];
            }
        }
        let mut shifted = zero();
        shifted[k..ORDER].copy_from_slice(&total[..ORDER - k]);
        t.push(shifted);
    }
    let scale = t.iter().flat_map(|s| s.iter()).fold(0.0f64, |m, v| m.max(v.norm()));
    let tiny = 1e-9 * scale;
    let mut c = vec![Complex64::new(1.0, 0.0)];
    let mut checked = 0;
    for k in 1..=kmax {
        let Some(m) = (0..ORDER).find(|&m| t[k][m].norm() > tiny) else {
            return Err(Error::InvalidData("asymptotic order exceeds the series truncation".into()));
        };
        if (k + 1..=kmax).any(|kk| t[kk][m].norm() > tiny) {
            return Err(Error::InvalidData("asymptotic system is not triangular".into()));
        }
        let known: Complex64 = (0..k).map(|kk| t[kk][m] * c[kk]).sum();
        // orders below m involve only c_0..c_{k-1} and must already vanish
        for mm in checked..m {
            let r: Complex64 = (0..k).map(|kk| t[kk][mm] * c[kk]).sum();
            if r.norm() > 1e-8 * scale {
                return Err(Error::InvalidData(alloc::format!("asymptotic residual at order {mm} is {:e}", r.norm())));
            }
        }
        checked = m;
        c.push(-known / t[k][m]);
    }
    Ok(AsymptoticBranch { sigma, coefficients: c })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominantEstimate {
    /// `a_N / a_N^(+)` at the larger `N`.
    pub c_plus: Complex64,
    /// `|C(2N) - C(N)|`.
    pub change: f64,
    pub n: usize,
    /// Round-off level of the estimate.
    pub noise_floor: f64,
}

/// Estimates `C_+(s)` from the forward solution at `N` and `2N`. Fails when
/// the two disagree by more than `tol` relative to the estimate (or the
/// round-off floor, near a root).
pub fn dominant_branch_estimate(sys: &RecurrenceSystem, s: Complex64, n: usize, tol: f64) -> Result<DominantEstimate> {
    let branch = asymptotic_coefficients(sys, s, true, 3)?;
    let series = forward_recurrence(sys, s, 2 * n)?;
    let est = |m: usize| series.ratio(m, branch.ln_value(m as f64));
    let (c1, c2) = (est(n), est(2 * n));
    // rounding at step m feeds the growing branch with relative size eps |a_m / a_m^+|
    let noise_floor = 1e3 * f64::EPSILON * (1..=2 * n).map(|m| est(m).norm()).fold(0.0, f64::max);
    let change = (c2 - c1).norm();
    let size = c1.norm().max(c2.norm()).max(noise_floor);
    if !(change <= tol * size) && change > noise_floor {
        return Err(Error::EstimateNotStabilized { n: 2 * n, change: change / size });
    }
    Ok(DominantEstimate { c_plus: c2, change, n: 2 * n, noise_floor })
}

/// Quasinormal frequency as a zero of the forward-recurrence estimate of `C_+`.
pub fn find_qnm_dominant(sys: &RecurrenceSystem, guess: Complex64, n: usize) -> Result<QnmResult> {
    let f = |s: Complex64| -> Result<Complex64> {
        let branch = asymptotic_coefficients(sys, s, true, 3)?;
        let series = forward_recurrence(sys, s, n)?;
        Ok(series.ratio(n, branch.ln_value(n as f64)))
    };
    let reference = f(guess)?.norm();
    let root = complex_secant(f, guess, guess + Complex64::new(1e-3, 1e-3), 0.0, 1e-12, 200)?;
    Ok(QnmResult {
        s: root.z,
        method: QnmMethod::ForwardRecurrence,
        residual: root.residual / reference.max(f64::MIN_POSITIVE),
        iterations: root.iterations,
    })
}
