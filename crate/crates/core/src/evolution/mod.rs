//! Method-of-lines evolution of the rescaled field `f(u, x)`, with
//! `w = q(x) + x f(u, x)` and boundary condition `f(u, 1) = 0`.
//!
//! The semi-discrete system is `M df/du = G(f)`, where `M` is the collocation
//! `x`-derivative with its first row replaced by `e_0` and `G` is given by
//! [`FieldOperator`]. Time stepping is by implicit BDF of order at most two.

mod bdf;
mod initial;
mod mass;
mod model;

use alloc::vec;
use alloc::vec::Vec;

pub use bdf::{Counters, Integrator};
pub use initial::{cos_squared, cos_squared_np, family_profile, initial_data_family, initial_data_linear};
pub use mass::MassOperator;
pub use model::{half_kink, half_kink_dx, potential, FieldOperator, Mode};

use crate::error::{Error, Result};
use crate::spectral::{DiffOps, Grid};
use num_traits::Float;

/// Retarded time and nodal values of `f(u, .)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u: f64,
    pub f: Vec<f64>,
}

impl FieldState {
    pub fn new(u: f64, f: Vec<f64>) -> Self {
        Self { u, f }
    }

    pub fn zero(grid: &Grid) -> Self {
        Self { u: 0.0, f: vec![0.0; grid.len()] }
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.f.iter().all(|v| v.is_finite())
    }

    /// `w = q + x f` at the nodes.
    pub fn w(&self, grid: &Grid) -> Vec<f64> {
        grid.x().iter().zip(&self.f).map(|(&x, &f)| half_kink(x) + x * f).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionParams {
    pub k: usize,
    pub mode: Mode,
    pub u_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub probe_points: Vec<f64>,
    /// Interval in `u` between diagnostic outputs.
    pub output_stride: f64,
    /// Additional logarithmically spaced outputs; 0 disables them.
    pub log_outputs_per_decade: usize,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            k: 257,
            mode: Mode::Nonlinear,
            u_end: 1e4,
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: 1e-4,
            min_step: 1e-12,
            probe_points: Vec::new(),
            output_stride: 1.0,
            log_outputs_per_decade: 0,
        }
    }
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.k < 3 {
            return bad("K must be at least 3");
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.u_end > 0.0) {
            return bad("u_end must be positive");
        }
        if !(self.max_step > 0.0 && self.initial_step > 0.0 && self.min_step > 0.0) {
            return bad("step sizes must be positive");
        }
        if !(self.output_stride > 0.0) {
            return bad("output_stride must be positive");
        }
        if self.probe_points.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return bad("probe points must lie in [0, 1]");
        }
        Ok(())
    }
}

/// What a sink wants the evolution to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Data handed to diagnostic sinks at each output time.
#[derive(Debug, Clone, Copy)]
pub struct Output<'a> {
    pub u: f64,
    pub f: &'a [f64],
    /// `df/du = M^-1 G(f)` at the output.
    pub dfdu: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_state: FieldState,
    pub counters: Counters,
    pub outputs: usize,
    /// A sink asked to stop before `u_end`.
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("evolution failed at u = {}: {error}", last_good.u)]
pub struct RunFailure {
    pub error: Error,
    pub last_good: FieldState,
    pub counters: Counters,
    pub outputs: usize,
}

/// Time-dependent boundary value `f(u, 1)` and its `u`-derivative.
pub type BoundaryData = fn(f64) -> (f64, f64);

/// Grid, operators and factorised mass matrix for one configuration. Immutable
/// after construction; share it across threads to run independent evolutions.
#[derive(Debug, Clone)]
pub struct Evolver {
    grid: Grid,
    ops: DiffOps,
    op: FieldOperator,
    mass: MassOperator,
    params: EvolutionParams,
    boundary: Option<BoundaryData>,
}

impl Evolver {
    pub fn new(params: EvolutionParams) -> Result<Self> {
        params.validate()?;
        let grid = Grid::new(params.k)?;
        let ops = DiffOps::new(&grid);
        Self::with_operators(grid, ops, params)
    }

    pub fn with_operators(grid: Grid, ops: DiffOps, params: EvolutionParams) -> Result<Self> {
        params.validate()?;
        if grid.len() != params.k {
            return Err(Error::InvalidArgument("grid size does not match K".into()));
        }
        let op = FieldOperator::new(params.mode, &grid, &ops);
        let mass = MassOperator::new(&ops)?;
        Ok(Self { grid, ops, op, mass, params, boundary: None })
    }

    /// Replaces `f(u, 1) = 0` by prescribed boundary data. Only meaningful for
    /// the linear modes, where it allows comparison with exact solutions that
    /// do not vanish at `x = 1`.
    pub fn with_boundary(mut self, boundary: BoundaryData) -> Self {
        self.boundary = Some(boundary);
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ops(&self) -> &DiffOps {
        &self.ops
    }

    pub fn params(&self) -> &EvolutionParams {
        &self.params
    }

    pub fn mass(&self) -> &MassOperator {
        &self.mass
    }

    pub fn operator(&self) -> &FieldOperator {
        &self.op
    }

    /// `G(f)`.
    pub fn rhs(&self, f: &[f64]) -> Vec<f64> {
        self.op.eval(f)
    }

    /// `df/du = M^-1 G(f)`.
    pub fn time_derivative(&self, f: &[f64]) -> Vec<f64> {
        self.mass.solve(&self.op.eval(f))
    }

    /// `df/du` including the boundary row.
    pub fn derivative_at(&self, u: f64, f: &[f64]) -> Vec<f64> {
        let mut g = self.op.eval(f);
        if let Some(b) = self.boundary {
            g[0] = b(u).1;
        }
        self.mass.solve(&g)
    }

    pub fn integrator(&self, initial: FieldState) -> Integrator<'_> {
        Integrator::new(self, initial)
    }

    /// Integrates from `initial` to `params.u_end`, calling `sink` at the
    /// initial time, at every output time (steps are shortened to land on it), and at the end.
    pub fn evolve(
        &self,
        initial: FieldState,
        sink: &mut dyn FnMut(&Output<'_>) -> Control,
    ) -> core::result::Result<RunSummary, RunFailure> {
        let fail = |error, last_good, counters, outputs| RunFailure { error, last_good, counters, outputs };
        let boundary_ok = match self.boundary {
            Some(b) => initial.f.first() == Some(&b(initial.u).0),
            None => initial.f.first() == Some(&0.0),
        };
        if initial.f.len() != self.grid.len() || !boundary_ok {
            return Err(fail(
                Error::InvalidData("initial state must have K values matching the boundary data".into()),
                initial,
                Counters::default(),
                0,
            ));
        }
        if !initial.is_finite() {
            let u = initial.u;
            return Err(fail(Error::NonFinite { u }, initial, Counters::default(), 0));
        }
        let u0 = initial.u;
        let u_end = self.params.u_end;
        let mut schedule = Schedule::new(u0, &self.params);
        let mut outputs = 0;
        let mut emit = |u: f64, f: &[f64], outputs: &mut usize| {
            *outputs += 1;
            let dfdu = self.derivative_at(u, f);
            sink(&Output { u, f, dfdu: &dfdu })
        };
        if emit(u0, &initial.f, &mut outputs) == Control::Stop {
            return Ok(RunSummary {
                final_state: initial,
                counters: Counters::default(),
                outputs,
                stopped_early: true,
            });
        }
        let mut integ = self.integrator(initial);
        let mut last_emitted = u0;
        while integ.u() < u_end {
            let mut target = schedule.next();
            // a sliver below min_step (or below what u can resolve) would be unreachable
            if target > u_end - self.params.min_step.max(1e-12 * u_end) {
                target = u_end;
            }
            if let Err(error) = integ.step(target) {
                return Err(fail(error, integ.state(), integ.counters(), outputs));
            }
            if !integ.f().iter().all(|v| v.is_finite()) {
                let u = integ.u();
                return Err(fail(Error::NonFinite { u }, integ.state(), integ.counters(), outputs));
            }
            let u = integ.u();
            let is_end = u >= u_end;
            if schedule.due(u) || is_end {
                last_emitted = u;
                if emit(u, integ.f(), &mut outputs) == Control::Stop {
                    return Ok(RunSummary {
                        final_state: integ.state(),
                        counters: integ.counters(),
                        outputs,
                        stopped_early: !is_end,
                    });
                }
            }
        }
        debug_assert!(last_emitted >= u_end);
        Ok(RunSummary { final_state: integ.state(), counters: integ.counters(), outputs, stopped_early: false })
    }
}

/// Output times `u0 + n stride` and, optionally, `10^(n / per_decade)`.
/// Both are computed from their index so rounding does not accumulate.
struct Schedule {
    u0: f64,
    stride: f64,
    linear_index: f64,
    per_decade: f64,
    log_index: f64,
}

impl Schedule {
    fn new(u0: f64, p: &EvolutionParams) -> Self {
        let per_decade = p.log_outputs_per_decade as f64;
        let log_index = if per_decade > 0.0 && u0 > 0.0 { (u0.log10() * per_decade).floor() + 1.0 } else { 0.0 };
        Self { u0, stride: p.output_stride, linear_index: 1.0, per_decade, log_index }
    }

    fn linear(&self) -> f64 {
        self.u0 + self.linear_index * self.stride
    }

    fn log(&self) -> f64 {
        if self.per_decade > 0.0 {
            10f64.powf(self.log_index / self.per_decade)
        } else {
            f64::INFINITY
        }
    }

    fn next(&self) -> f64 {
        self.linear().min(self.log())
    }

    fn due(&mut self, u: f64) -> bool {
        let hit = u >= self.next();
        while self.linear() <= u {
            self.linear_index += 1.0;
        }
        while self.log() <= u {
            self.log_index += 1.0;
        }
        hit
    }
}
