//! Chebyshev collocation on `x in [0, 1]`.
//!
//! Nodes are the Chebyshev points of the second kind in `z = 2x - 1`,
//! `z_j = cos(j pi / (K - 1))` for `j = 0..K`, so node `0` is the ball
//! boundary `x = 1` and node `K - 1` is null infinity `x = 0`. The
//! differentiation operators are stored in `z`; [`DiffOps::dx`] and
//! [`DiffOps::dxx`] return the chain-ruled `x`-derivatives.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    z: Vec<f64>,
    x: Vec<f64>,
}

impl Grid {
    pub fn new(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidArgument(alloc::format!("grid needs K >= 3 nodes, got {k}")));
        }
        Ok(Self::chebyshev(k))
    }

    /// Unchecked constructor; also accepts `K = 2`.
    pub(crate) fn chebyshev(k: usize) -> Self {
        let n = (k - 1) as f64;
        // sin form keeps the nodes exactly antisymmetric about z = 0
        let z: Vec<f64> = (0..k).map(|j| (PI * (n - 2.0 * j as f64) / (2.0 * n)).sin()).collect();
        let x = z.iter().map(|z| 0.5 * (z + 1.0)).collect();
        Self { z, x }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Index of the node at null infinity, `x = 0`.
    pub fn scri(&self) -> usize {
        self.z.len() - 1
    }

    /// Samples `g` at the `x` nodes.
    pub fn sample(&self, mut g: impl FnMut(f64) -> f64) -> Vec<f64> {
        self.x.iter().map(|&x| g(x)).collect()
    }

    fn bary_weights(&self) -> Vec<f64> {
        let k = self.len();
        (0..k)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == k - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect()
    }

    /// Barycentric evaluation of the degree-(K-1) interpolant of nodal
    /// `values` at `x_star in [0, 1]`.
    pub fn interpolate(&self, values: &[f64], x_star: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x_star) {
            return Err(Error::InvalidArgument(alloc::format!("x* = {x_star} outside [0, 1]")));
        }
        debug_assert_eq!(values.len(), self.len());
        let w = self.bary_weights();
        let (mut num, mut den) = (0.0, 0.0);
        for ((&xj, &fj), &wj) in self.x.iter().zip(values).zip(&w) {
            let d = x_star - xj;
            if d == 0.0 {
                return Ok(fj);
            }
            let t = wj / d;
            num += t * fj;
            den += t;
        }
        Ok(num / den)
    }
}

/// Collocation differentiation matrices in `z` and quadrature weights on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct DiffOps {
    d1: Matrix,
    d2: Matrix,
    dx: Matrix,
    dxx: Matrix,
    weights: Vec<f64>,
}

impl DiffOps {
    pub fn new(grid: &Grid) -> Self {
        let (d1, d2) = cheb_matrices(grid.len());
        let mut dx = d1.clone();
        dx.scale(2.0);
        let mut dxx = d2.clone();
        dxx.scale(4.0);
        let weights = clenshaw_curtis(grid.len()).into_iter().map(|w| 0.5 * w).collect();
        Self { d1, d2, dx, dxx, weights }
    }

    /// First derivative in `z`.
    pub fn d1(&self) -> &Matrix {
        &self.d1
    }

    /// Second derivative in `z`.
    pub fn d2(&self) -> &Matrix {
        &self.d2
    }

    /// First derivative in `x` (`2 D1`).
    pub fn dx(&self) -> &Matrix {
        &self.dx
    }

    /// Second derivative in `x` (`4 D2`).
    pub fn dxx(&self) -> &Matrix {
        &self.dxx
    }

    /// Quadrature weights for `int_0^1 g(x) dx`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// First and second derivative matrices on the Chebyshev extreme points.
///
/// Off-diagonal entries use trigonometric differences of the nodes; the
/// second derivative uses the closed-form recursion
/// `D2_ij = 2 D1_ij (D1_ii - 1/(z_i - z_j))`. Diagonals come from the
/// negative-sum condition so both operators annihilate constants.
fn cheb_matrices(k: usize) -> (Matrix, Matrix) {
    let n = k - 1;
    let nf = n as f64;
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let sign = |j: usize| if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    // z_i - z_j = 2 sin((i+j) pi / 2n) sin((j-i) pi / 2n)
    let diff = |i: usize, j: usize| {
        2.0 * ((i + j) as f64 * PI / (2.0 * nf)).sin() * ((j as f64 - i as f64) * PI / (2.0 * nf)).sin()
    };
    let mut d1 = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if i != j {
                d1[(i, j)] = c(i) / c(j) * sign(i + j) / diff(i, j);
            }
        }
    }
    for i in 0..k {
        d1[(i, i)] = -compensated_sum((0..k).filter(|&j| j != i).map(|j| d1[(i, j)]));
    }
    let mut d2 = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if i != j {
                d2[(i, j)] = 2.0 * d1[(i, j)] * (d1[(i, i)] - 1.0 / diff(i, j));
            }
        }
    }
    for i in 0..k {
        d2[(i, i)] = -compensated_sum((0..k).filter(|&j| j != i).map(|j| d2[(i, j)]));
    }
    (d1, d2)
}

/// Neumaier summation.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Clenshaw-Curtis weights on `[-1, 1]` for the Chebyshev extreme points.
fn clenshaw_curtis(k: usize) -> Vec<f64> {
    let n = k - 1;
    let nf = n as f64;
    let mut w = vec![0.0; k];
    let theta = |j: usize| j as f64 * PI / nf;
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
    }
    for j in 1..n {
        let mut v = 1.0;
        if n.is_multiple_of(2) {
            v -= (nf * theta(j)).cos() / (nf * nf - 1.0);
            for m in 1..n / 2 {
                let mf = m as f64;
                v -= 2.0 * (2.0 * mf * theta(j)).cos() / (4.0 * mf * mf - 1.0);
            }
        } else {
            for m in 1..=(n - 1) / 2 {
                let mf = m as f64;
                v -= 2.0 * (2.0 * mf * theta(j)).cos() / (4.0 * mf * mf - 1.0);
            }
        }
        w[j] = 2.0 * v / nf;
    }
    w
}
