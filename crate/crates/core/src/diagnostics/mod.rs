//! Observables of a field state and of time series built from them.

mod classify;
mod fit;

use alloc::vec::Vec;

pub use classify::{classify_endstate, ClassifierConfig, Endstate};
pub use fit::{fit_power_law, power_index, FitResult};

use crate::error::{Error, Result};
use crate::evolution::{half_kink, half_kink_dx, Evolver, Output};
use crate::roots::brent;
use crate::spectral::{DiffOps, Grid};
use num_traits::Float;

/// Scalars recorded at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub u: f64,
    pub energy: f64,
    pub c1: f64,
    pub c1_dot: f64,
    pub c2: f64,
    pub x0: Option<f64>,
    /// `(x, f(u, x))` at the configured probe points.
    pub probes: Vec<(f64, f64)>,
}

impl DiagnosticsRecord {
    pub fn from_output(ev: &Evolver, out: &Output<'_>) -> Self {
        let grid = ev.grid();
        let (c1, c1_dot) = radiation_c1(out.f, out.dfdu);
        let probes =
            ev.params().probe_points.iter().map(|&x| (x, grid.interpolate(out.f, x).unwrap_or(f64::NAN))).collect();
        Self {
            u: out.u,
            energy: bondi_energy(out.f, grid, ev.ops()),
            c1,
            c1_dot,
            c2: np_constant(out.f, ev.ops()),
            x0: zero_crossing(out.f, grid),
            probes,
        }
    }
}

/// Bondi energy of `w = q + x f`,
/// `E = int_0^1 (w_x^2 / 4 + (1 - w^2)^2 / x^2) x dx`.
///
/// Uses `(1 - w^2)/x = 4x^3/(1 + x^4)^2 - 2 q f - x f^2`, so nothing is divided by `x`.
pub fn bondi_energy(f: &[f64], grid: &Grid, ops: &DiffOps) -> f64 {
    let fx = ops.dx().mul_vec(f);
    let integrand: Vec<f64> = grid
        .x()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let q = half_kink(x);
            let wx = half_kink_dx(x) + f[i] + x * fx[i];
            let d = 1.0 + x.powi(4);
            let s = 4.0 * x.powi(3) / (d * d) - 2.0 * q * f[i] - x * f[i] * f[i];
            (0.25 * wx * wx + s * s) * x
        })
        .collect();
    ops.integrate(&integrand)
}

/// `(c1, dc1/du)`, read off at `x = 0`.
pub fn radiation_c1(f: &[f64], dfdu: &[f64]) -> (f64, f64) {
    (f[f.len() - 1], dfdu[dfdu.len() - 1])
}

/// Newman-Penrose constant `c2 = f_x(u, 0)`.
pub fn np_constant(f: &[f64], ops: &DiffOps) -> f64 {
    let dx = ops.dx();
    crate::linalg::dot(dx.row(dx.rows() - 1), f)
}

/// Largest zero of `w = q + x f` in `(0, 1)`, if `w` changes sign between nodes.
pub fn zero_crossing(f: &[f64], grid: &Grid) -> Option<f64> {
    let xs = grid.x();
    let w = |i: usize| half_kink(xs[i]) + xs[i] * f[i];
    // node 0 is x = 1 where w vanishes by the boundary condition
    for i in 1..xs.len() - 1 {
        let (wa, wb) = (w(i), w(i + 1));
        if wa == 0.0 {
            return Some(xs[i]);
        }
        if wa.signum() != wb.signum() && wb != 0.0 {
            let wi = |x: f64| half_kink(x) + x * grid.interpolate(f, x).unwrap_or(f64::NAN);
            return brent(wi, xs[i + 1], xs[i], 1e-12, 200).ok();
        }
    }
    None
}

/// `Q_l(r) = (r^2 - l^2)/(r^2 + l^2)`.
pub fn kink(lambda: f64, r: f64) -> f64 {
    (r * r - lambda * lambda) / (r * r + lambda * lambda)
}

/// Converts a zero `x0` of `w` at retarded time `u` into `(t, lambda)` by
/// matching the zero of `1 - Q_mu(r) + Q_lambda(r)` at `r = x0^-2`.
pub fn lambda_from_zero(u: f64, x0: f64) -> Result<(f64, f64)> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::InvalidArgument("zero must lie in (0, 1)".into()));
    }
    let r0 = 1.0 / (x0 * x0);
    let t = u + r0;
    let ansatz = |ln_l: f64| {
        let l = ln_l.exp();
        let mu = crate::effective::mu_of_lambda(l).unwrap_or(0.0);
        1.0 - kink(mu, r0) + kink(l, r0)
    };
    let mut hi = (r0 * 4.0).ln();
    while ansatz(hi) > 0.0 {
        hi += 2.0;
        if hi > 700.0 {
            return Err(Error::NoBracket { lo: 1.0, hi: hi.exp() });
        }
    }
    let ln_l = brent(ansatz, 1e-12, hi, 1e-14, 200)?;
    Ok((t, ln_l.exp()))
}
