use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use super::leaver::{cf_at_depth, find_qnm, reduce_to_three_term};
use super::recurrence::RecurrenceSystem;
use super::QnmResult;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub s: Complex64,
    /// `None` where the evaluation broke down.
    pub value: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Row-major over `Im s`, then `Re s`.
    pub points: Vec<ScanPoint>,
    pub n_re: usize,
    pub n_im: usize,
    /// Distinct roots reached from local minima of `|cf|`.
    pub roots: Vec<QnmResult>,
}

/// Evaluates the continued fraction at fixed `depth` over a rectangle in the
/// upper half-plane, then refines every interior local minimum of `|cf|`.
pub fn scan_cf(sys: &RecurrenceSystem, re: (f64, f64), im: (f64, f64), step: f64, depth: usize) -> Result<ScanResult> {
    let n_re = ((re.1 - re.0) / step).round() as usize + 1;
    let n_im = ((im.1 - im.0) / step).round() as usize + 1;
    let mut points = Vec::with_capacity(n_re * n_im);
    for i in 0..n_im {
        for j in 0..n_re {
            let s = Complex64::new(re.0 + j as f64 * step, im.0 + i as f64 * step);
            let value = reduce_to_three_term(sys, s, depth + 1).ok().map(|tt| cf_at_depth(&tt, s, depth));
            let value = value.filter(|v| v.re.is_finite() && v.im.is_finite());
            points.push(ScanPoint { s, value });
        }
    }
    let norm = |i: usize, j: usize| points[i * n_re + j].value.map_or(f64::NAN, |v| v.norm());
    let mut roots: Vec<QnmResult> = Vec::new();
    for i in 1..n_im.saturating_sub(1) {
        for j in 1..n_re.saturating_sub(1) {
            let c = norm(i, j);
            let s = points[i * n_re + j].s;
            if !c.is_finite() || s.im <= 0.0 || s.re >= 0.0 {
                continue;
            }
            let is_min = (0..3).all(|di| (0..3).all(|dj| (di == 1 && dj == 1) || c < norm(i + di - 1, j + dj - 1)));
            if !is_min {
                continue;
            }
            let Ok(root) = find_qnm(sys, s) else { continue };
            let inside = root.s.re >= re.0 && root.s.re <= re.1 && root.s.im > 0.0 && root.s.im <= im.1;
            if inside && !roots.iter().any(|r| (r.s - root.s).norm() < 1e-6) {
                roots.push(root);
            }
        }
    }
    Ok(ScanResult { points, n_re, n_im, roots })
}
