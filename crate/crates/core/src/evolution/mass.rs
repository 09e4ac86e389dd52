use alloc::vec::Vec;

use crate::error::Result;
use crate::linalg::{Lu, Matrix};
use crate::spectral::DiffOps;

/// The `x`-derivative operator with its first row replaced by the boundary
/// row `e_0`, so that `M df/du = G` carries `df_0/du = 0`.
#[derive(Debug, Clone)]
pub struct MassOperator {
    matrix: Matrix,
    lu: Lu,
}

impl MassOperator {
    pub fn new(ops: &DiffOps) -> Result<Self> {
        let mut matrix = ops.dx().clone();
        let row = matrix.row_mut(0);
        row.iter_mut().for_each(|a| *a = 0.0);
        row[0] = 1.0;
        let lu = Lu::factor(&matrix)?;
        Ok(Self { matrix, lu })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(v)
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.lu.solve(rhs)
    }

    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) {
        self.lu.solve_into(rhs, out)
    }
}
