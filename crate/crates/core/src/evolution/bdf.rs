//! Variable-step BDF of orders 1 and 2 in fixed-leading-coefficient form.
//!
//! A step to `u + h` predicts `y_p`, `y'_p` from the interpolating polynomial
//! through the last `k + 1` accepted values and then solves the corrector
//!
//! ```text
//! M (y'_p + (alpha_k / h) (y - y_p)) = G(y),   alpha_1 = 1, alpha_2 = 3/2,
//! ```
//!
//! by modified Newton with iteration matrix `(alpha_k / h) M - dG/dy`. This is
//! the mass-matrix form of `y' = M^-1 G(y)` and keeps a single factorisation
//! of `M`. Row 0 of the corrector fixes `y_0`, so the boundary value is
//! reproduced exactly.

use alloc::vec;
use alloc::vec::Vec;

use super::{Evolver, FieldState};
use crate::error::{Error, Result};
use crate::linalg::Lu;
use num_traits::Float;

const MAX_NEWTON: usize = 4;
const NEWTON_TOL: f64 = 0.33;
/// Corrections this small (in tolerance units) are round-off; the rate test
/// is meaningless there.
const NEWTON_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub steps: usize,
    pub rejected_steps: usize,
    pub newton_iterations: usize,
    pub newton_failures: usize,
    pub jacobian_evaluations: usize,
    pub factorizations: usize,
}

struct NewtonMatrix {
    c: f64,
    lu: Lu,
    fresh: bool,
}

/// Stateful integrator over one evolution.
pub struct Integrator<'a> {
    ev: &'a Evolver,
    /// Accepted `(u, y)`, newest last, at most three.
    history: Vec<(f64, Vec<f64>)>,
    dydu0: Vec<f64>,
    h: f64,
    max_order: usize,
    newton: Option<NewtonMatrix>,
    rate: Option<f64>,
    consecutive_failures: usize,
    counters: Counters,
    scratch: Scratch,
}

struct Scratch {
    pred: Vec<f64>,
    dpred: Vec<f64>,
    y: Vec<f64>,
    v: Vec<f64>,
    g: Vec<f64>,
    res: Vec<f64>,
    delta: Vec<f64>,
    weights: Vec<f64>,
}

impl<'a> Integrator<'a> {
    pub(super) fn new(ev: &'a Evolver, initial: FieldState) -> Self {
        let k = initial.f.len();
        let dydu0 = ev.derivative_at(initial.u, &initial.f);
        let h = ev.params.initial_step.min(ev.params.max_step);
        let scratch = Scratch {
            pred: vec![0.0; k],
            dpred: vec![0.0; k],
            y: vec![0.0; k],
            v: vec![0.0; k],
            g: vec![0.0; k],
            res: vec![0.0; k],
            delta: vec![0.0; k],
            weights: vec![0.0; k],
        };
        Self {
            ev,
            history: vec![(initial.u, initial.f)],
            dydu0,
            h,
            max_order: 2,
            newton: None,
            rate: None,
            consecutive_failures: 0,
            counters: Counters::default(),
            scratch,
        }
    }

    pub fn u(&self) -> f64 {
        self.history.last().unwrap().0
    }

    pub fn f(&self) -> &[f64] {
        &self.history.last().unwrap().1
    }

    pub fn state(&self) -> FieldState {
        let (u, f) = self.history.last().unwrap();
        FieldState { u: *u, f: f.clone() }
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Caps the order (1 or 2) used from the next step on.
    pub fn set_max_order(&mut self, order: usize) {
        self.max_order = order.clamp(1, 2);
    }

    /// Advances by one accepted step without passing `u_stop`.
    pub fn step(&mut self, u_stop: f64) -> Result<()> {
        let ev = self.ev;
        let params = &ev.params;
        loop {
            let u = self.u();
            let proposed = self.h;
            let gap = u_stop - u;
            // Approach u_stop in equal steps so neighbouring step sizes stay comparable.
            let cap = proposed.min(params.max_step);
            let h = if cap < gap { gap / (gap / cap).ceil() } else { gap };
            if h < params.min_step {
                return Err(Error::StepSizeUnderflow { u, step: h });
            }
            let order = self.order();
            let coeff = self.predict(h, order);
            self.set_weights();
            match self.correct(h, order) {
                Ok(()) => {}
                Err(NewtonOutcome::Failed) => {
                    self.counters.newton_failures += 1;
                    if self.newton.as_ref().is_some_and(|n| !n.fresh) {
                        self.newton = None;
                    } else {
                        self.h = h * 0.25;
                        self.newton = None;
                    }
                    self.note_failure();
                    continue;
                }
                Err(NewtonOutcome::Singular(e)) => return Err(e),
            }
            let s = &self.scratch;
            let err = wrms_diff(&s.y, &s.pred, &s.weights) * coeff;
            let exponent = 1.0 / (order as f64 + 1.0);
            if err > 1.0 || !err.is_finite() {
                self.counters.rejected_steps += 1;
                let r = if err.is_finite() { 0.9 * err.powf(-exponent) } else { 0.25 };
                self.h = h * r.clamp(0.2, 0.9);
                self.note_failure();
                continue;
            }
            self.accept(if h == gap { u_stop } else { u + h });
            self.consecutive_failures = 0;
            let r = if err > 0.0 { 0.9 * err.powf(-exponent) } else { 2.0 };
            // Holding h fixed keeps the Newton factorisation valid.
            self.h = if r >= 1.5 { h * r.min(2.0) } else { h };
            if h < proposed {
                // h was clipped to land on u_stop
                self.h = self.h.max(proposed);
            }
            self.h = self.h.min(params.max_step);
            return Ok(());
        }
    }

    fn note_failure(&mut self) {
        self.consecutive_failures += 1;
        if self.consecutive_failures >= 3 && self.history.len() > 2 {
            // restart at first order from the newest two points
            self.history.remove(0);
        }
    }

    fn order(&self) -> usize {
        match self.history.len() {
            1 | 2 => 1,
            _ => self.max_order,
        }
    }

    /// Fills `pred`/`dpred` and returns the local-error scaling of `y - y_p`.
    fn predict(&mut self, h: f64, order: usize) -> f64 {
        let n = self.history.len();
        let (u_n, y_n) = &self.history[n - 1];
        let u_new = u_n + h;
        let s = &mut self.scratch;
        if n == 1 {
            for i in 0..y_n.len() {
                s.pred[i] = y_n[i] + h * self.dydu0[i];
                s.dpred[i] = self.dydu0[i];
            }
            return 1.0;
        }
        let pts: Vec<(f64, &[f64])> = self.history[n - 1 - order..].iter().map(|(u, y)| (*u, y.as_slice())).collect();
        let nodes: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let (wv, wd) = lagrange_weights(&nodes, u_new);
        for i in 0..y_n.len() {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, (_, y)) in pts.iter().enumerate() {
                a += wv[j] * y[i];
                b += wd[j] * y[i];
            }
            s.pred[i] = a;
            s.dpred[i] = b;
        }
        // extrapolation error over the BDF truncation error
        let mut prod = 1.0;
        for &uj in &nodes {
            prod *= u_new - uj;
        }
        let hk = h.powi(order as i32 + 1);
        match order {
            1 => hk / prod,
            _ => 2.0 * hk / prod,
        }
    }

    fn set_weights(&mut self) {
        let ev = self.ev;
        let p = &ev.params;
        let y_n = &self.history.last().unwrap().1;
        for (w, y) in self.scratch.weights.iter_mut().zip(y_n) {
            *w = 1.0 / (p.rel_tol * y.abs() + p.abs_tol);
        }
        self.scratch.weights[0] = 0.0;
    }

    fn correct(&mut self, h: f64, order: usize) -> core::result::Result<(), NewtonOutcome> {
        let u_new = self.u() + h;
        let alpha = if order == 1 { 1.0 } else { 1.5 };
        let c = alpha / h;
        let ev = self.ev;
        // A stale c only slows Newton convergence; the rate test catches divergence.
        if self.newton.as_ref().is_none_or(|n| !((c / n.c - 1.0).abs() <= 0.3)) {
            let jac = ev.op.jacobian(&self.scratch.pred);
            self.counters.jacobian_evaluations += 1;
            let mut m = ev.mass.matrix().clone();
            m.scale(c);
            let m = m.add_scaled(-1.0, &jac);
            let lu = Lu::factor(&m).map_err(NewtonOutcome::Singular)?;
            self.counters.factorizations += 1;
            self.newton = Some(NewtonMatrix { c, lu, fresh: true });
            self.rate = None;
        }
        let newton = self.newton.as_ref().unwrap();
        let s = &mut self.scratch;
        s.y.copy_from_slice(&s.pred);
        let mut first = 0.0;
        let mut iterations = 0;
        for m in 0..MAX_NEWTON {
            iterations += 1;
            for i in 0..s.y.len() {
                s.v[i] = s.dpred[i] + c * (s.y[i] - s.pred[i]);
            }
            ev.mass.matrix().mul_vec_into(&s.v, &mut s.res);
            ev.op.eval_into(&s.y, &mut s.g);
            for (r, g) in s.res.iter_mut().zip(&s.g) {
                *r = g - *r;
            }
            if let Some(b) = ev.boundary {
                s.res[0] = c * (b(u_new).0 - s.y[0]);
            }
            newton.lu.solve_into(&s.res, &mut s.delta);
            let mut finite = true;
            for (y, d) in s.y.iter_mut().zip(&s.delta) {
                *y += d;
                finite &= y.is_finite();
            }
            if !finite {
                break;
            }
            let norm = wrms(&s.delta, &s.weights);
            let converged = if norm <= NEWTON_FLOOR {
                true
            } else if m == 0 {
                first = norm;
                norm == 0.0 || self.rate.is_some_and(|r| r < 0.9 && r / (1.0 - r) * norm <= NEWTON_TOL)
            } else {
                let rate = (norm / first).powf(1.0 / m as f64);
                if rate > 0.9 {
                    break;
                }
                self.rate = Some(rate);
                rate / (1.0 - rate) * norm <= NEWTON_TOL || norm == 0.0
            };
            if converged {
                self.counters.newton_iterations += iterations;
                if iterations >= 3 {
                    // refresh dG/dy at the next step
                    self.newton.as_mut().unwrap().c = f64::NAN;
                } else {
                    self.newton.as_mut().unwrap().fresh = false;
                }
                return Ok(());
            }
        }
        self.counters.newton_iterations += iterations;
        Err(NewtonOutcome::Failed)
    }

    fn accept(&mut self, u_new: f64) {
        self.counters.steps += 1;
        let mut y = self.scratch.y.clone();
        // row 0 fixes f(u, 1); remove Newton round-off
        y[0] = match self.ev.boundary {
            Some(b) => b(u_new).0,
            None => self.history[self.history.len() - 1].1[0],
        };
        if self.history.len() == 3 {
            let (_, mut recycled) = self.history.remove(0);
            recycled.copy_from_slice(&y);
            self.history.push((u_new, recycled));
        } else {
            self.history.push((u_new, y));
        }
        if let Some(n) = self.newton.as_mut() {
            n.fresh = false;
        }
    }
}

enum NewtonOutcome {
    Failed,
    Singular(Error),
}

fn wrms(v: &[f64], w: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(w).map(|(a, b)| (a * b) * (a * b)).sum();
    (s / (v.len() - 1) as f64).sqrt()
}

fn wrms_diff(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).zip(w).map(|((a, b), w)| ((a - b) * w).powi(2)).sum();
    (s / (a.len() - 1) as f64).sqrt()
}

/// Lagrange weights for the value and first derivative at `t`.
fn lagrange_weights(nodes: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut wv = vec![0.0; n];
    let mut wd = vec![0.0; n];
    for j in 0..n {
        let mut denom = 1.0;
        for m in 0..n {
            if m != j {
                denom *= nodes[j] - nodes[m];
            }
        }
        let mut val = 1.0;
        for m in 0..n {
            if m != j {
                val *= t - nodes[m];
            }
        }
        let mut der = 0.0;
        for l in 0..n {
            if l == j {
                continue;
            }
            let mut p = 1.0;
            for m in 0..n {
                if m != j && m != l {
                    p *= t - nodes[m];
                }
            }
            der += p;
        }
        wv[j] = val / denom;
        wd[j] = der / denom;
    }
    (wv, wd)
}
