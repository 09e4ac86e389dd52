//! Right-hand side of the semi-discrete system `M df/du = G(f)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::spectral::{DiffOps, Grid};
use num_traits::Float;

/// Which terms of the field equation for `f` are evolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Full equation including the quadratic and cubic terms.
    Nonlinear,
    /// Linearised about the half-kink with the full potential `U(x)`.
    LinearFullU,
    /// Linearised with the potential truncated to `15x/4` (linearisation about `w = 1`).
    LinearTruncated,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Nonlinear => "nonlinear",
            Mode::LinearFullU => "linear_full_U",
            Mode::LinearTruncated => "linear_truncated",
        }
    }

    pub fn is_linear(self) -> bool {
        !matches!(self, Mode::Nonlinear)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonlinear" => Ok(Mode::Nonlinear),
            "linear_full_U" | "linear_full_u" => Ok(Mode::LinearFullU),
            "linear_truncated" => Ok(Mode::LinearTruncated),
            other => Err(Error::InvalidArgument(alloc::format!("unknown mode `{other}`"))),
        }
    }
}

/// The half-kink `q(x) = (1 - x^4)/(1 + x^4)`.
pub fn half_kink(x: f64) -> f64 {
    let x4 = x.powi(4);
    (1.0 - x4) / (1.0 + x4)
}

pub fn half_kink_dx(x: f64) -> f64 {
    let x4 = x.powi(4);
    -8.0 * x.powi(3) / ((1.0 + x4) * (1.0 + x4))
}

/// Potential of the linearised operator about `q`:
/// `U(x) = x (15 - 66 x^4 + 15 x^8) / (4 (1 + x^4)^2) = 15x/4 + O(x^5)`.
pub fn potential(x: f64) -> f64 {
    let x4 = x.powi(4);
    x * (15.0 - 66.0 * x4 + 15.0 * x4 * x4) / (4.0 * (1.0 + x4) * (1.0 + x4))
}

/// Nodal data for evaluating `G(f) = -1/4 d_x(x^3 f_x) + U f + 6 q x^2 f^2 + 2 x^3 f^3`
/// (quadratic and cubic terms only in [`Mode::Nonlinear`]). Row 0, the ball
/// boundary, is replaced by the boundary condition and always returns 0.
#[derive(Debug, Clone)]
pub struct FieldOperator {
    mode: Mode,
    linear: Matrix,
    quad: Vec<f64>,
    cubic: Vec<f64>,
}

impl FieldOperator {
    pub fn new(mode: Mode, grid: &Grid, ops: &DiffOps) -> Self {
        let k = grid.len();
        let x = grid.x();
        let (dx, dxx) = (ops.dx(), ops.dxx());
        let mut linear = Matrix::zeros(k, k);
        for i in 1..k {
            let xi = x[i];
            let (a, b) = (-0.25 * xi.powi(3), -0.75 * xi * xi);
            let row = linear.row_mut(i);
            for j in 0..k {
                row[j] = a * dxx[(i, j)] + b * dx[(i, j)];
            }
            row[i] += match mode {
                Mode::LinearTruncated => 3.75 * xi,
                _ => potential(xi),
            };
        }
        let (quad, cubic) = if mode == Mode::Nonlinear {
            let mut quad: Vec<f64> = x.iter().map(|&x| 6.0 * half_kink(x) * x * x).collect();
            let mut cubic: Vec<f64> = x.iter().map(|&x| 2.0 * x.powi(3)).collect();
            quad[0] = 0.0;
            cubic[0] = 0.0;
            (quad, cubic)
        } else {
            (vec![0.0; k], vec![0.0; k])
        };
        Self { mode, linear, quad, cubic }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The linear part of `G`, row 0 zero.
    pub fn linear_part(&self) -> &Matrix {
        &self.linear
    }

    pub fn eval_into(&self, f: &[f64], out: &mut [f64]) {
        self.linear.mul_vec_into(f, out);
        if self.mode == Mode::Nonlinear {
            for i in 1..f.len() {
                let fi = f[i];
                out[i] += fi * fi * (self.quad[i] + self.cubic[i] * fi);
            }
        }
        out[0] = 0.0;
    }

    pub fn eval(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.eval_into(f, &mut out);
        out
    }

    /// `dG/df` at `f`.
    pub fn jacobian(&self, f: &[f64]) -> Matrix {
        let mut j = self.linear.clone();
        if self.mode == Mode::Nonlinear {
            for i in 1..f.len() {
                let fi = f[i];
                j[(i, i)] += fi * (2.0 * self.quad[i] + 3.0 * self.cubic[i] * fi);
            }
        }
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_values() {
        assert_eq!(potential(0.0), 0.0);
        // (15 - 66 + 15)/16
        assert!((potential(1.0) + 2.25).abs() < 1e-15);
        let x = 1e-3;
        assert!((potential(x) - 3.75 * x).abs() < 3e-14);
    }

    #[test]
    fn potential_matches_half_kink_linearisation() {
        // U = x (6 q^2 - 9/4) follows from linearising 8x^2 w (1 - w^2) about q.
        for x in [0.1, 0.37, 0.8, 1.0] {
            let q = half_kink(x);
            assert!((potential(x) - x * (6.0 * q * q - 2.25)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_field_is_fixed_point() {
        let g = Grid::new(17).unwrap();
        let ops = DiffOps::new(&g);
        for mode in [Mode::Nonlinear, Mode::LinearFullU, Mode::LinearTruncated] {
            let op = FieldOperator::new(mode, &g, &ops);
            assert!(op.eval(&[0.0; 17]).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = Grid::new(9).unwrap();
        let ops = DiffOps::new(&g);
        let op = FieldOperator::new(Mode::Nonlinear, &g, &ops);
        let f: Vec<f64> = g.x().iter().map(|x| (1.0 - x) * (0.3 + x * x)).collect();
        let jac = op.jacobian(&f);
        let h = 1e-6;
        for j in 0..9 {
            let (mut fp, mut fm) = (f.clone(), f.clone());
            fp[j] += h;
            fm[j] -= h;
            let (gp, gm) = (op.eval(&fp), op.eval(&fm));
            for i in 0..9 {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                assert!((fd - jac[(i, j)]).abs() < 1e-6 * (1.0 + jac[(i, j)].abs()), "({i},{j})");
            }
        }
    }

    #[test]
    fn mode_strings_round_trip() {
        for m in [Mode::Nonlinear, Mode::LinearFullU, Mode::LinearTruncated] {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("quadratic".parse::<Mode>().is_err());
    }
}
