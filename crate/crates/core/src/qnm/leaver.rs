use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use super::recurrence::RecurrenceSystem;
use super::{QnmMethod, QnmResult};
use crate::error::{Error, Result};
use crate::roots::complex_secant;

const PIVOT_MIN: f64 = 1e-300;
const START_DEPTH: usize = 500;
const MAX_DEPTH: usize = 1 << 17;
const DEPTH_TOL: f64 = 1e-13;

/// `alpha_n a_n + beta_n a_{n-1} + gamma_n a_{n-2} = 0` for `n = 2..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeTerm {
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    pub gamma: Vec<Complex64>,
}

impl ThreeTerm {
    /// Largest `n` with coefficients.
    pub fn n_max(&self) -> usize {
        self.alpha.len() + 1
    }

    /// `(alpha_n, beta_n, gamma_n)`.
    pub fn at(&self, n: usize) -> (Complex64, Complex64, Complex64) {
        let i = n - 2;
        (self.alpha[i], self.beta[i], self.gamma[i])
    }
}

/// Gaussian elimination of the longest-range term, one level at a time: at
/// each level equation `n` loses its lowest-index term using the already
/// reduced equation `n - 1`. Terms multiplying `a_{<=0}` are dropped.
pub fn reduce_to_three_term(sys: &RecurrenceSystem, s: Complex64, n_max: usize) -> Result<ThreeTerm> {
    let bw = sys.bandwidth();
    if n_max < 3 {
        return Err(Error::InvalidArgument("N_max must be at least 3".into()));
    }
    let mut eqs: Vec<Vec<Complex64>> = (2..=n_max).map(|n| sys.coeff(n, s)).collect();
    for width in (4..=bw).rev() {
        let mut reduced: Vec<Vec<Complex64>> = Vec::with_capacity(eqs.len());
        for (i, eq) in eqs.iter().enumerate() {
            let n = i + 2;
            let mut new = eq[..width - 1].to_vec();
            if n + 1 > width {
                // a_{n-width+1} has index >= 1 and must go
                let prev: &Vec<Complex64> = &reduced[i - 1];
                let pivot = prev[width - 2];
                if pivot.norm() < PIVOT_MIN || !pivot.norm().is_finite() {
                    return Err(Error::EliminationBreakdown { n });
                }
                let factor = eq[width - 1] / pivot;
                for j in 1..width - 1 {
                    new[j] -= factor * prev[j - 1];
                }
            }
            let lead = new[0];
            if lead.norm() < PIVOT_MIN {
                return Err(Error::EliminationBreakdown { n });
            }
            new.iter_mut().for_each(|c| *c /= lead);
            reduced.push(new);
        }
        eqs = reduced;
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut tt = ThreeTerm { alpha: vec![zero; eqs.len()], beta: vec![zero; eqs.len()], gamma: vec![zero; eqs.len()] };
    for (i, eq) in eqs.iter().enumerate() {
        tt.alpha[i] = eq[0];
        tt.beta[i] = eq[1];
        tt.gamma[i] = if eq.len() > 2 { eq[2] } else { zero };
    }
    Ok(tt)
}

/// `a^-_N / a^-_{N-1}` for the decaying branch `N^(-3/4) exp(-sqrt(8 s N))`.
pub fn tail_ratio(s: Complex64, n: usize) -> Complex64 {
    let sigma = (s * 8.0).sqrt();
    let (nf, nm) = (n as f64, n as f64 - 1.0);
    (-sigma * (nf.sqrt() - nm.sqrt())).exp() * (nf / nm).powf(-0.75)
}

/// Characteristic function `beta_2 + alpha_2 r_2` with the minimal-solution
/// ratio `r_n = a_n / a_{n-1}` evaluated backwards from depth `depth`.
pub fn cf_at_depth(tt: &ThreeTerm, s: Complex64, depth: usize) -> Complex64 {
    let depth = depth.min(tt.n_max() - 1).max(2);
    let mut r = tail_ratio(s, depth);
    for n in (2..depth).rev() {
        let (a, b, g) = tt.at(n + 1);
        r = -g / (b + a * r);
    }
    let (a, b, _) = tt.at(2);
    (b + a * r) / a
}

/// Continued-fraction characteristic function; zero exactly at quasinormal
/// frequencies. The depth doubles from 500 until consecutive values agree
/// to `1e-13`.
pub fn cf_value(sys: &RecurrenceSystem, s: Complex64) -> Result<Complex64> {
    cf_value_with_depth(sys, s).map(|(v, _)| v)
}

/// As [`cf_value`], also returning the depth used.
pub fn cf_value_with_depth(sys: &RecurrenceSystem, s: Complex64) -> Result<(Complex64, usize)> {
    let mut depth = START_DEPTH;
    let mut tt = reduce_to_three_term(sys, s, 2 * depth + 1)?;
    let mut prev = cf_at_depth(&tt, s, depth);
    loop {
        let next = cf_at_depth(&tt, s, 2 * depth);
        let change = (next - prev).norm();
        if change <= DEPTH_TOL * next.norm().max(1.0) {
            return Ok((next, 2 * depth));
        }
        depth *= 2;
        if depth >= MAX_DEPTH {
            return Err(Error::DepthNotConverged { depth, change });
        }
        tt = reduce_to_three_term(sys, s, 2 * depth + 1)?;
        prev = next;
    }
}

/// Quasinormal frequency near `guess` by secant iteration on [`cf_value`].
pub fn find_qnm(sys: &RecurrenceSystem, guess: Complex64) -> Result<QnmResult> {
    if !(guess.re < 0.0) {
        return Err(Error::InvalidArgument("initial guess must have negative real part".into()));
    }
    let z1 = guess + Complex64::new(1e-3, 1e-3);
    let root = complex_secant(|s| cf_value(sys, s), guess, z1, 1e-10, 1e-15, 200)?;
    let residual = cf_value(sys, root.z)?.norm();
    if residual > 1e-10 {
        return Err(Error::NotFound { iterations: root.iterations, residual });
    }
    Ok(QnmResult { s: root.z, method: QnmMethod::ContinuedFraction, residual, iterations: root.iterations })
}
