//! Collective-coordinate model for the anti-half-kink plus an expanding kink,
//! `W = 1 - Q_mu + Q_lambda` with `mu^2 = (lambda^2 - 1)/(lambda^2 + 3)`.
//!
//! Keeping the two leading terms of the effective Lagrangian gives
//! `A(l) l'^2 + P(l) = E` with `A = 4/3 - 32/l^4`, `P = 2 - 16/l^2`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use num_traits::Float;

/// `lambda` below which the kinetic coefficient is not positive: `24^(1/4)`.
pub fn lambda_min() -> f64 {
    24f64.powf(0.25)
}

pub fn mu_of_lambda(lambda: f64) -> Result<f64> {
    if !(lambda >= 1.0) {
        return Err(Error::InvalidArgument("lambda must be at least 1".into()));
    }
    if lambda.is_infinite() {
        return Ok(1.0);
    }
    let l2 = lambda * lambda;
    Ok(((l2 - 1.0) / (l2 + 3.0)).sqrt())
}

/// Kinetic coefficient `A(lambda) = 4/3 - 32/lambda^4`.
pub fn kinetic(lambda: f64) -> f64 {
    4.0 / 3.0 - 32.0 / lambda.powi(4)
}

/// Potential `P(lambda) = 2 - 16/lambda^2`.
pub fn potential(lambda: f64) -> f64 {
    2.0 - 16.0 / (lambda * lambda)
}

/// `A(lambda) lambda_dot^2 + P(lambda)`.
pub fn effective_energy(lambda: f64, lambda_dot: f64) -> Result<f64> {
    let a = kinetic(lambda);
    if !(a > 0.0) {
        return Err(Error::ModelDomain("kinetic coefficient is not positive".into()));
    }
    Ok(a * lambda_dot * lambda_dot + potential(lambda))
}

/// Speed with which a trajectory at `lambda` has energy `energy`.
pub fn speed_for_energy(lambda: f64, energy: f64) -> Result<f64> {
    let a = kinetic(lambda);
    if !(a > 0.0) {
        return Err(Error::ModelDomain("kinetic coefficient is not positive".into()));
    }
    let k = (energy - potential(lambda)) / a;
    if k < 0.0 {
        return Err(Error::InvalidArgument("energy below the potential at this lambda".into()));
    }
    Ok(k.sqrt())
}

/// `lambda'' = -(A' lambda'^2 + P') / (2A)`.
pub fn acceleration(lambda: f64, lambda_dot: f64) -> f64 {
    let da = 128.0 / lambda.powi(5);
    let dp = 32.0 / lambda.powi(3);
    -(da * lambda_dot * lambda_dot + dp) / (2.0 * kinetic(lambda))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveState {
    pub t: f64,
    pub lambda: f64,
    pub lambda_dot: f64,
}

impl EffectiveState {
    pub fn energy(&self) -> Result<f64> {
        effective_energy(self.lambda, self.lambda_dot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// `lambda` exceeded the escape radius at time `t`.
    Escape { t: f64 },
    /// `lambda_dot` changed sign from positive to negative.
    Turning { t_r: f64, lambda_r: f64 },
    /// The trajectory reached `lambda <= 24^(1/4)`.
    InvalidDomain { t: f64 },
    /// `t_end` was reached before any of the above.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTrajectory {
    pub samples: Vec<EffectiveState>,
    pub outcome: Outcome,
    /// Largest relative deviation of the energy from its initial value.
    pub energy_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub escape_lambda: f64,
    /// Stop at the first turning point instead of continuing.
    pub stop_at_turning: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-13, abs_tol: 1e-13, escape_lambda: 1e6, stop_at_turning: true }
    }
}

// Dormand-Prince 5(4)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

fn rhs(y: [f64; 2]) -> [f64; 2] {
    [y[1], acceleration(y[0], y[1])]
}

/// One Dormand-Prince step; returns the new state and the error estimate.
fn dp_step(y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(y);
    for s in 1..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            ys[0] += h * A[s][j] * kj[0];
            ys[1] += h * A[s][j] * kj[1];
        }
        if !(ys[0] > 0.0) {
            return ([f64::NAN; 2], [f64::INFINITY; 2]);
        }
        k[s] = rhs(ys);
    }
    let mut y_new = y;
    let mut err = [0.0; 2];
    // first-same-as-last: the weights of the solution are the last row of A
    for s in 0..7 {
        if s < 6 {
            y_new[0] += h * A[6][s] * k[s][0];
            y_new[1] += h * A[6][s] * k[s][1];
        }
        err[0] += h * E[s] * k[s][0];
        err[1] += h * E[s] * k[s][1];
    }
    (y_new, err)
}

/// Integrates the effective equation of motion from `initial` to `t_end`.
pub fn integrate_trajectory(
    initial: EffectiveState,
    t_end: f64,
    opts: &TrajectoryOptions,
) -> Result<EffectiveTrajectory> {
    let e0 = initial.energy()?;
    if !(t_end > initial.t) {
        return Err(Error::InvalidArgument("t_end must exceed the initial time".into()));
    }
    let lmin = lambda_min();
    let mut samples = alloc::vec![initial];
    let mut drift: f64 = 0.0;
    let mut y = [initial.lambda, initial.lambda_dot];
    let mut t = initial.t;
    let mut h = 1e-3 * (1.0 + initial.lambda.abs() / initial.lambda_dot.abs().max(1e-300)).min(1.0);
    let mut outcome = Outcome::Unresolved;
    while t < t_end {
        h = h.min(t_end - t);
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { u: t, step: h });
        }
        let (y_new, err) = dp_step(y, h);
        let sc = |i: usize| opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
        let en = ((err[0] / sc(0)).powi(2) + (err[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
        if !en.is_finite() || en > 1.0 {
            let r = if en.is_finite() { 0.9 * en.powf(-0.2) } else { 0.1 };
            h *= r.clamp(0.1, 0.9);
            continue;
        }
        let t_new = t + h;
        if y_new[0] <= lmin {
            samples.push(EffectiveState { t: t_new, lambda: y_new[0], lambda_dot: y_new[1] });
            outcome = Outcome::InvalidDomain { t: t_new };
            break;
        }
        let state = EffectiveState { t: t_new, lambda: y_new[0], lambda_dot: y_new[1] };
        let e = effective_energy(y_new[0], y_new[1])?;
        drift = drift.max(((e - e0) / e0.abs().max(1e-300)).abs());
        if y[1] > 0.0 && y_new[1] <= 0.0 {
            let (t_r, lambda_r) = locate_turning(t, y, h);
            if opts.stop_at_turning {
                samples.push(state);
                outcome = Outcome::Turning { t_r, lambda_r };
                break;
            }
            if matches!(outcome, Outcome::Unresolved) {
                outcome = Outcome::Turning { t_r, lambda_r };
            }
        }
        samples.push(state);
        y = y_new;
        t = t_new;
        if y[0] > opts.escape_lambda {
            outcome = Outcome::Escape { t };
            break;
        }
        let r = if en > 0.0 { 0.9 * en.powf(-0.2) } else { 5.0 };
        h *= r.clamp(0.2, 5.0);
    }
    Ok(EffectiveTrajectory { samples, outcome, energy_drift: drift })
}

/// Zero of `lambda_dot` inside the step `[t, t + h]`, by bisection on
/// sub-steps of the same scheme.
fn locate_turning(t: f64, y: [f64; 2], h: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dp_step(y, mid).0[1] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    (t + s, dp_step(y, s).0[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::fit_power_law;
    use std::vec::Vec;

    #[test]
    fn constraint_values() {
        assert_eq!(mu_of_lambda(1.0).unwrap(), 0.0);
        let m = mu_of_lambda(3f64.sqrt()).unwrap();
        assert!((m * m - 1.0 / 3.0).abs() < 1e-15);
        assert!((mu_of_lambda(1e8).unwrap() - 1.0).abs() < 1e-15);
        assert!(mu_of_lambda(0.5).is_err());
    }

    #[test]
    fn energy_values() {
        assert!(effective_energy(8f64.sqrt(), 0.0).unwrap().abs() < 1e-15);
        let e = effective_energy(1e6, 0.5).unwrap();
        assert!((e - (4.0 / 3.0 * 0.25 + 2.0)).abs() < 1e-10);
        assert!(matches!(effective_energy(2.0, 1.0), Err(Error::ModelDomain(_))));
    }

    fn start(lambda: f64, energy: f64) -> EffectiveState {
        EffectiveState { t: 0.0, lambda, lambda_dot: speed_for_energy(lambda, energy).unwrap() }
    }

    #[test]
    fn escape_above_threshold() {
        let tr = integrate_trajectory(start(10.0, 2.1), 1e8, &TrajectoryOptions::default()).unwrap();
        assert!(matches!(tr.outcome, Outcome::Escape { .. }), "{:?}", tr.outcome);
        assert!(tr.energy_drift < 1e-9);
    }

    #[test]
    fn turning_below_threshold() {
        let tr = integrate_trajectory(start(10.0, 1.9), 1e6, &TrajectoryOptions::default()).unwrap();
        let Outcome::Turning { lambda_r, .. } = tr.outcome else { panic!("{:?}", tr.outcome) };
        assert!((lambda_r - (16.0f64 / 0.1).sqrt()).abs() < 1e-6 * lambda_r, "{lambda_r}");
        assert!(tr.energy_drift < 1e-9);
    }

    #[test]
    fn separatrix_grows_like_sqrt_t() {
        let tr = integrate_trajectory(start(10.0, 2.0), 1e5, &TrajectoryOptions::default()).unwrap();
        assert_eq!(tr.outcome, Outcome::Unresolved);
        assert!(tr.energy_drift < 1e-9, "{}", tr.energy_drift);
        let pts: Vec<(f64, f64)> = tr.samples.iter().map(|s| (s.t, s.lambda)).collect();
        let fit = fit_power_law(&pts, (1e3, 1e5)).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.01, "{}", fit.exponent);
    }
}
