//! Least-squares fit of `A e^(sigma u) cos(omega u + phi) + sum_j B_j u^(-k-j)`,
//! a damped oscillation on top of a polynomial tail in `1/u`.
//!
//! The model is linear in the amplitudes, so they are projected out and only
//! `(sigma, omega)` are searched: a coarse grid followed by Levenberg-Marquardt.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use super::{QnmMethod, QnmResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingdownOptions {
    /// Leading tail exponent `k`.
    pub tail_power: f64,
    /// Number of tail terms `u^(-k)`, `u^(-k-1)`, ...; 0 fits the oscillation alone.
    pub tail_terms: usize,
    pub sigma_range: (f64, f64),
    pub omega_range: (f64, f64),
    pub max_condition: f64,
}

impl Default for RingdownOptions {
    fn default() -> Self {
        Self {
            tail_power: 5.0,
            tail_terms: 4,
            sigma_range: (-2.0, -0.01),
            omega_range: (0.05, 3.0),
            max_condition: 1e8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingdownFit {
    pub s: Complex64,
    /// Amplitude of the damped oscillation at the start of the window.
    pub amplitude: f64,
    pub phase: f64,
    /// `B_j`, the coefficients of `u^(-k-j)`.
    pub tail_amplitudes: Vec<f64>,
    pub tail_power: f64,
    /// RMS residual.
    pub residual: f64,
    /// Condition estimate of the column-scaled design matrix.
    pub condition: f64,
    pub window: (f64, f64),
}

impl RingdownFit {
    pub fn as_qnm(&self) -> QnmResult {
        QnmResult { s: self.s, method: QnmMethod::RingdownFit, residual: self.residual, iterations: 0 }
    }
}

struct Projection {
    coef: Vec<f64>,
    residual: Vec<f64>,
    condition: f64,
}

fn project(u: &[f64], y: &[f64], u0: f64, sigma: f64, omega: f64, opts: &RingdownOptions) -> Projection {
    let p = 2 + opts.tail_terms;
    let n = u.len();
    let mut cols: Vec<Vec<f64>> = vec![vec![0.0; n]; p];
    for (i, &ui) in u.iter().enumerate() {
        let e = (sigma * (ui - u0)).exp();
        cols[0][i] = e * (omega * ui).cos();
        cols[1][i] = e * (omega * ui).sin();
        for (j, c) in cols[2..].iter_mut().enumerate() {
            c[i] = (ui / u0).powf(-opts.tail_power - j as f64);
        }
    }
    // column scaling, then modified Gram-Schmidt with one reorthogonalisation
    let scale: Vec<f64> =
        cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE)).collect();
    for (c, s) in cols.iter_mut().zip(&scale) {
        c.iter_mut().for_each(|v| *v /= s);
    }
    let mut r = vec![vec![0.0; p]; p];
    let mut q = cols;
    for j in 0..p {
        for _ in 0..2 {
            for k in 0..j {
                let d: f64 = q[k].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
                r[k][j] += d;
                let qk = q[k].clone();
                q[j].iter_mut().zip(&qk).for_each(|(v, w)| *v -= d * w);
            }
        }
        let nrm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        r[j][j] = nrm;
        if nrm > 0.0 {
            q[j].iter_mut().for_each(|v| *v /= nrm);
        }
    }
    let qty: Vec<f64> = q.iter().map(|c| c.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let mut residual = y.to_vec();
    for (c, &d) in q.iter().zip(&qty) {
        residual.iter_mut().zip(c).for_each(|(v, w)| *v -= d * w);
    }
    // back substitution for the scaled coefficients, and ||R||_F ||R^-1||_F
    let mut coef = vec![0.0; p];
    let mut rinv = vec![vec![0.0; p]; p];
    let singular = (0..p).any(|j| r[j][j] <= 1e-300);
    if !singular {
        for i in (0..p).rev() {
            let s: f64 = (i + 1..p).map(|k| r[i][k] * coef[k]).sum();
            coef[i] = (qty[i] - s) / r[i][i];
            rinv[i][i] = 1.0 / r[i][i];
            for j in i + 1..p {
                let s: f64 = (i + 1..=j).map(|k| r[i][k] * rinv[k][j]).sum();
                rinv[i][j] = -s / r[i][i];
            }
        }
    }
    let fro = |m: &Vec<Vec<f64>>| m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let condition = if singular { f64::INFINITY } else { fro(&r) * fro(&rinv) };
    let coef = coef.iter().zip(&scale).map(|(c, s)| c / s).collect();
    Projection { coef, residual, condition }
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Fits the samples with `u` in `window`.
pub fn fit_ringdown(samples: &[(f64, f64)], window: (f64, f64), opts: &RingdownOptions) -> Result<RingdownFit> {
    let (u, y): (Vec<f64>, Vec<f64>) = samples.iter().copied().filter(|&(t, _)| t >= window.0 && t <= window.1).unzip();
    let needed = 8;
    if u.len() < needed {
        return Err(Error::InsufficientData { needed, got: u.len() });
    }
    if u.iter().chain(&y).any(|v| !v.is_finite()) || (opts.tail_terms > 0 && u[0] <= 0.0) {
        return Err(Error::InvalidData("ringdown samples must be finite with u > 0".into()));
    }
    let u0 = u[0];
    let cost = |th: [f64; 2]| sum_sq(&project(&u, &y, u0, th[0], th[1], opts).residual);
    let (ns, nw) = (40, 60);
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..ns {
        let sg = opts.sigma_range.0 + (opts.sigma_range.1 - opts.sigma_range.0) * i as f64 / (ns - 1) as f64;
        for j in 0..nw {
            let om = opts.omega_range.0 + (opts.omega_range.1 - opts.omega_range.0) * j as f64 / (nw - 1) as f64;
            let c = cost([sg, om]);
            if c < best.1 {
                best = ([sg, om], c);
            }
        }
    }
    let mut th = best.0;
    let mut mu = 1e-3;
    let mut res = project(&u, &y, u0, th[0], th[1], opts).residual;
    let mut c0 = sum_sq(&res);
    for _ in 0..200 {
        // forward-difference Jacobian of the projected residual
        let hstep = [1e-7 * th[0].abs().max(1e-3), 1e-7 * th[1].abs().max(1e-3)];
        let mut jac = [vec![0.0; u.len()], vec![0.0; u.len()]];
        for k in 0..2 {
            let mut tp = th;
            tp[k] += hstep[k];
            let rp = project(&u, &y, u0, tp[0], tp[1], opts).residual;
            for i in 0..u.len() {
                jac[k][i] = (rp[i] - res[i]) / hstep[k];
            }
        }
        let a00 = sum_sq(&jac[0]);
        let a11 = sum_sq(&jac[1]);
        let a01: f64 = jac[0].iter().zip(&jac[1]).map(|(a, b)| a * b).sum();
        let g0: f64 = jac[0].iter().zip(&res).map(|(a, b)| a * b).sum();
        let g1: f64 = jac[1].iter().zip(&res).map(|(a, b)| a * b).sum();
        let mut improved = false;
        for _ in 0..20 {
            let (b00, b11) = (a00 * (1.0 + mu), a11 * (1.0 + mu));
            let det = b00 * b11 - a01 * a01;
            if det == 0.0 {
                break;
            }
            let d0 = -(b11 * g0 - a01 * g1) / det;
            let d1 = -(b00 * g1 - a01 * g0) / det;
            let cand = [th[0] + d0, th[1] + d1];
            let r = project(&u, &y, u0, cand[0], cand[1], opts).residual;
            let c = sum_sq(&r);
            if c < c0 {
                let small = d0.abs() <= 1e-13 * th[0].abs().max(1e-3) && d1.abs() <= 1e-13 * th[1].abs().max(1e-3);
                th = cand;
                res = r;
                c0 = c;
                mu = (mu * 0.3).max(1e-12);
                improved = !small;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let pr = project(&u, &y, u0, th[0], th[1], opts);
    if !(pr.condition <= opts.max_condition) {
        return Err(Error::IllConditioned { condition: pr.condition });
    }
    let (a, b) = (pr.coef[0], pr.coef[1]);
    // a cos(wu) + b sin(wu) = A cos(wu + phi)
    let amplitude = (a * a + b * b).sqrt();
    let phase = (-b).atan2(a);
    let tail_amplitudes =
        pr.coef[2..].iter().enumerate().map(|(j, c)| c * u0.powf(opts.tail_power + j as f64)).collect();
    Ok(RingdownFit {
        s: Complex64::new(th[0], th[1]),
        amplitude,
        phase,
        tail_amplitudes,
        tail_power: opts.tail_power,
        residual: (c0 / u.len() as f64).sqrt(),
        condition: pr.condition,
        window,
    })
}
