use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub exponent: f64,
    pub amplitude: f64,
    /// RMS deviation in `ln y`.
    pub residual: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Least-squares fit of `y = A u^p` on the samples with `u` in `window`.
pub fn fit_power_law(samples: &[(f64, f64)], window: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidArgument("fit window is empty".into()));
    }
    let pts: Vec<(f64, f64)> = samples.iter().copied().filter(|&(u, _)| u >= lo && u <= hi).collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData { needed: 5, got: pts.len() });
    }
    if pts.iter().any(|&(u, y)| !(u > 0.0 && y > 0.0)) {
        return Err(Error::InvalidData("power-law fit needs positive u and y".into()));
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(u, y)| (a + u.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(u, y) in &pts {
        let dx = u.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (y.ln() - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidData("all samples at the same u".into()));
    }
    let p = sxy / sxx;
    let c = my - p * mx;
    let ss: f64 = pts.iter().map(|&(u, y)| (y.ln() - c - p * u.ln()).powi(2)).sum();
    Ok(FitResult { exponent: p, amplitude: c.exp(), residual: (ss / n).sqrt(), window, points: pts.len() })
}

/// Local power index `p = u d/du ln|y|` by three-point differences in `ln u`.
/// Entries are `None` at the ends and where `y` vanishes or changes sign.
pub fn power_index(u: &[f64], y: &[f64]) -> Vec<Option<f64>> {
    let n = u.len().min(y.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i == 0 || i + 1 == n {
            out.push(None);
            continue;
        }
        let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
        let same_sign = a * b > 0.0 && b * c > 0.0;
        if !same_sign || !(u[i - 1] > 0.0) {
            out.push(None);
            continue;
        }
        let (s0, s1, s2) = (u[i - 1].ln(), u[i].ln(), u[i + 1].ln());
        let (h1, h2) = (s1 - s0, s2 - s1);
        if !(h1 > 0.0 && h2 > 0.0) {
            out.push(None);
            continue;
        }
        let (g0, g1, g2) = (a.abs().ln(), b.abs().ln(), c.abs().ln());
        let d = -h2 / (h1 * (h1 + h2)) * g0 + (h2 - h1) / (h1 * h2) * g1 + h1 / (h2 * (h1 + h2)) * g2;
        out.push(Some(d));
    }
    out
}
