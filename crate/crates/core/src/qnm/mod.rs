//! Quasinormal frequencies of the linearised problem about the half-kink and
//! about the vacuum `w = 1`.
//!
//! Writing `w - q = sqrt(y) e^(s u) v(y)`, `y = x^2`, gives
//! `y^2 v'' + (2y + 2s) v' - V(y) v = 0` with `v(1) = 0` and
//! `V = 15/4 - 24 y^2/(1 + y^2)^2` (half-kink) or `V = 15/4` (vacuum).
//! Expanding `v` about `y = 1` gives a finite recurrence whose solutions
//! behave like `n^(-3/4) exp(+-sqrt(8 s n))`; frequencies are the `s` where
//! the solution with `a_1 = 1` has no growing component.

mod asymptotic;
mod bessel;
mod leaver;
mod rational;
mod recurrence;
mod ringdown;
mod scan;

use core::fmt;
use core::str::FromStr;
use num_complex::Complex64;

pub use asymptotic::{
    asymptotic_coefficients, dominant_branch_estimate, find_qnm_dominant, AsymptoticBranch, DominantEstimate,
};
pub use bessel::{bessel_k, bessel_k2_zero};
pub use leaver::{cf_at_depth, cf_value, cf_value_with_depth, find_qnm, reduce_to_three_term, tail_ratio, ThreeTerm};
pub use rational::{Poly, Rational};
pub use recurrence::{build_recurrence, forward_recurrence, ForwardSeries, RecurrenceSystem};
pub use ringdown::{fit_ringdown, RingdownFit, RingdownOptions};
pub use scan::{scan_cf, ScanPoint, ScanResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    HalfKink,
    Vacuum,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::HalfKink => "halfkink",
            Problem::Vacuum => "vacuum",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Problem {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "halfkink" => Ok(Problem::HalfKink),
            "vacuum" => Ok(Problem::Vacuum),
            _ => Err(crate::Error::InvalidArgument(alloc::format!("unknown problem {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QnmMethod {
    ContinuedFraction,
    ForwardRecurrence,
    Bessel,
    RingdownFit,
}

impl QnmMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            QnmMethod::ContinuedFraction => "continued_fraction",
            QnmMethod::ForwardRecurrence => "forward_recurrence",
            QnmMethod::Bessel => "bessel",
            QnmMethod::RingdownFit => "ringdown_fit",
        }
    }
}

impl fmt::Display for QnmMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QnmResult {
    pub s: Complex64,
    pub method: QnmMethod,
    pub residual: f64,
    pub iterations: usize,
}

#[cfg(test)]
mod tests;
