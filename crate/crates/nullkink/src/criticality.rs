//! Experiments along the family `w(0, x) = 1 + b x^4 - (1 + b) x^6`: endstate
//! probes, bisection for critical values of `b`, sweeps, near-critical
//! scaling and the energy of the initial data.

use log::{debug, info, warn};
use nullkink_core::diagnostics::{
    bondi_energy, classify_endstate, fit_power_law, ClassifierConfig, DiagnosticsRecord, Endstate, FitResult,
};
use nullkink_core::evolution::{initial_data_family, Control, EvolutionParams, Evolver, FieldState};
use nullkink_core::roots::{brent, golden_section};
use nullkink_core::spectral::{DiffOps, Grid};
use nullkink_core::Error;
use rayon::prelude::*;
use serde::Serialize;

/// Outputs per evolution segment.
const SEGMENT_OUTPUTS: f64 = 200.0;

/// Shared grid and operators; cheap to clone into per-probe evolvers.
#[derive(Debug, Clone)]
pub struct Setup {
    pub params: EvolutionParams,
    grid: Grid,
    ops: DiffOps,
}

impl Setup {
    pub fn new(params: EvolutionParams) -> nullkink_core::Result<Self> {
        params.validate()?;
        let grid = Grid::new(params.k)?;
        let ops = DiffOps::new(&grid);
        Ok(Self { params, grid, ops })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn evolver(&self, u_end: f64, stride: f64) -> nullkink_core::Result<Evolver> {
        let params = EvolutionParams { u_end, output_stride: stride, log_outputs_per_decade: 0, ..self.params.clone() };
        Evolver::with_operators(self.grid.clone(), self.ops.clone(), params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSettings {
    pub classifier: ClassifierConfig,
    pub initial_u_end: f64,
    pub max_u_end: f64,
    /// `N1` is only accepted from this `u` on.
    pub n1_min_u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub b: f64,
    pub classification: &'static str,
    pub u_reached: f64,
    pub final_energy: f64,
    pub final_x0: Option<f64>,
    pub steps: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ProbeRun {
    pub endstate: Endstate,
    pub report: ProbeReport,
    pub history: Vec<DiagnosticsRecord>,
}

/// Evolves the family member `b` in segments of doubling length until the
/// classifier decides or `max_u_end` is reached.
pub fn run_probe(setup: &Setup, b: f64, np_term: bool, settings: &ProbeSettings) -> ProbeRun {
    let mut state = initial_data_family(b, np_term, &setup.grid);
    let mut history: Vec<DiagnosticsRecord> = Vec::new();
    let mut steps = 0;
    let mut error = None;
    let mut endstate = Endstate::Undecided;
    let mut seg_end = settings.initial_u_end.min(settings.max_u_end);
    let accept = |e: Endstate, u: f64| match e {
        Endstate::N0 => true,
        Endstate::N1 => u >= settings.n1_min_u,
        Endstate::Undecided => false,
    };
    loop {
        let stride = (seg_end - state.u) / SEGMENT_OUTPUTS;
        let ev = match setup.evolver(seg_end, stride) {
            Ok(ev) => ev,
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        };
        let start_u = state.u;
        let mut sink = |out: &nullkink_core::evolution::Output<'_>| {
            // the first output of a continued segment repeats the last record
            if !history.is_empty() && out.u <= start_u {
                return Control::Continue;
            }
            history.push(DiagnosticsRecord::from_output(&ev, out));
            endstate = classify_endstate(&history, &settings.classifier);
            if accept(endstate, out.u) {
                Control::Stop
            } else {
                Control::Continue
            }
        };
        match ev.evolve(state.clone(), &mut sink) {
            Ok(summary) => {
                steps += summary.counters.steps;
                state = summary.final_state;
            }
            Err(failure) => {
                steps += failure.counters.steps;
                warn!("probe b = {b}: {failure}");
                error = Some(failure.to_string());
                endstate = Endstate::Undecided;
                break;
            }
        }
        if accept(endstate, state.u) || seg_end >= settings.max_u_end {
            break;
        }
        seg_end = (2.0 * seg_end).min(settings.max_u_end);
    }
    if !accept(endstate, state.u) {
        endstate = Endstate::Undecided;
    }
    let last = history.last();
    debug!("probe b = {b}: {endstate} at u = {}", state.u);
    ProbeRun {
        endstate,
        report: ProbeReport {
            b,
            classification: endstate.as_str(),
            u_reached: state.u,
            final_energy: last.map_or(f64::NAN, |r| r.energy),
            final_x0: last.and_then(|r| r.x0),
            steps,
            error,
        },
        history,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectionOutcome {
    pub b_lo: f64,
    pub b_hi: f64,
    pub class_lo: &'static str,
    pub class_hi: &'static str,
    pub evolutions_used: usize,
    /// The bracket is at most `tol` wide with decided, differing ends.
    pub converged: bool,
    pub message: Option<String>,
    pub probes: Vec<ProbeReport>,
}

impl BisectionOutcome {
    pub fn width(&self) -> f64 {
        self.b_hi - self.b_lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.b_lo + self.b_hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectSettings {
    pub classifier: ClassifierConfig,
    pub initial_u_end: f64,
    pub max_u_end: f64,
    pub cap_factor: f64,
}

impl BisectSettings {
    /// `N1` is accepted only from `u = cap_factor / tol` on. A probe within
    /// `eps` below a critical value looks like `N1` until it returns at
    /// `u_R ~ C / eps`, so this horizon misplaces the bracket by at most
    /// `C tol / cap_factor`. (`C` is about 2.5 near `b0` and 14 near `b-1`.)
    fn probe(&self, tol: f64) -> ProbeSettings {
        ProbeSettings {
            classifier: self.classifier,
            initial_u_end: self.initial_u_end,
            max_u_end: self.max_u_end,
            n1_min_u: (self.cap_factor / tol).min(self.max_u_end),
        }
    }
}

/// Bisection on `b` between endpoints with different endstates.
///
/// `progress` sees every finished probe, so callers can flush partial results.
pub fn bisect_critical(
    setup: &Setup,
    b_lo: f64,
    b_hi: f64,
    tol: f64,
    np_term: bool,
    settings: &BisectSettings,
    progress: &mut dyn FnMut(&BisectionOutcome),
) -> BisectionOutcome {
    let probe = settings.probe(tol);
    let (lo, hi) = rayon::join(|| run_probe(setup, b_lo, np_term, &probe), || run_probe(setup, b_hi, np_term, &probe));
    let mut out = BisectionOutcome {
        b_lo,
        b_hi,
        class_lo: lo.endstate.as_str(),
        class_hi: hi.endstate.as_str(),
        evolutions_used: 2,
        converged: false,
        message: None,
        probes: vec![lo.report, hi.report],
    };
    if !lo.endstate.is_decided() || !hi.endstate.is_decided() || lo.endstate == hi.endstate {
        out.message = Some(format!(
            "bracket ends must have different decided endstates, got {} and {}",
            lo.endstate, hi.endstate
        ));
        progress(&out);
        return out;
    }
    let lo_state = lo.endstate;
    progress(&out);
    while out.width() > tol {
        let mid = out.midpoint();
        let run = run_probe(setup, mid, np_term, &probe);
        out.evolutions_used += 1;
        out.probes.push(run.report);
        info!("b = {mid:.9}: {} (bracket width {:.3e})", run.endstate, out.width());
        match run.endstate {
            Endstate::Undecided => {
                out.message = Some(format!("probe at b = {mid} stayed undecided up to the u_end cap"));
                progress(&out);
                return out;
            }
            e if e == lo_state => out.b_lo = mid,
            _ => out.b_hi = mid,
        }
        progress(&out);
    }
    out.converged = true;
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub b: f64,
    pub classification: &'static str,
    pub final_energy: f64,
    pub u_reached: f64,
    pub final_x0: Option<f64>,
    pub steps: usize,
    pub error: Option<String>,
}

/// Classifies every `b` independently; failed runs are recorded and skipped.
pub fn sweep(setup: &Setup, bs: &[f64], np_term: bool, settings: &ProbeSettings) -> Vec<SweepRow> {
    bs.par_iter()
        .map(|&b| {
            let r = run_probe(setup, b, np_term, settings).report;
            SweepRow {
                b,
                classification: r.classification,
                final_energy: r.final_energy,
                u_reached: r.u_reached,
                final_x0: r.final_x0,
                steps: r.steps,
                error: r.error,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyWindow {
    /// Lower and upper `b` with `E = 2`.
    pub b_minus: f64,
    pub b_plus: f64,
    pub b_min: f64,
    pub e_min: f64,
}

/// Bondi energy of the family member `b` at `u = 0`.
pub fn family_energy(b: f64, grid: &Grid, ops: &DiffOps) -> f64 {
    bondi_energy(initial_data_family(b, false, grid).f(), grid, ops)
}

/// Minimum of the initial energy over `b` and the two solutions of `E = 2`.
pub fn energy_window(k: usize, tol: f64) -> nullkink_core::Result<EnergyWindow> {
    let grid = Grid::new(k)?;
    let ops = DiffOps::new(&grid);
    let e = |b: f64| family_energy(b, &grid, &ops);
    let (b_min, e_min) = golden_section(e, -10.0, 5.0, tol);
    let crossing = |dir: f64| -> nullkink_core::Result<f64> {
        let mut step = 1.0;
        while e(b_min + dir * step) < 2.0 {
            step *= 2.0;
            if step > 1e6 {
                return Err(Error::NoBracket { lo: b_min, hi: b_min + dir * step });
            }
        }
        let end = b_min + dir * step;
        brent(|b| e(b) - 2.0, b_min.min(end), b_min.max(end), tol, 200)
    };
    Ok(EnergyWindow { b_minus: crossing(-1.0)?, b_plus: crossing(1.0)?, b_min, e_min })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnPoint {
    pub epsilon: f64,
    pub b: f64,
    pub u_r: f64,
    pub x0_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub b0: f64,
    pub points: Vec<ReturnPoint>,
    /// `u_R` against `epsilon`.
    pub u_r_fit: Option<FitResult>,
    /// `x0(u_R)` against `epsilon`.
    pub x0_r_fit: Option<FitResult>,
    /// `x0(u)` during the expansion at the smallest `epsilon`.
    pub expansion_fit: Option<FitResult>,
    /// `(epsilon, reason)` for points that were dropped.
    pub dropped: Vec<(f64, String)>,
}

/// Where the expansion-phase fit of `x0(u)` is taken: from `u = 100`, past the
/// initial transient, to `0.05 u_R`. Later on the kink already feels the
/// turning point (`x0(u)` flattens when `u / u_R` is a fixed fraction, however
/// small `epsilon` is), so the window must stay at `epsilon u << 1`.
pub const EXPANSION_WINDOW: (f64, f64) = (100.0, 0.05);

/// Retarded time and position of the innermost excursion of the outer zero,
/// refined by a parabola through the smallest recorded `x0` and its neighbours.
pub fn return_point(history: &[DiagnosticsRecord]) -> Option<(f64, f64)> {
    let (i, _) =
        history.iter().enumerate().filter_map(|(i, r)| r.x0.map(|x| (i, x))).min_by(|a, b| a.1.total_cmp(&b.1))?;
    let prev = history.get(i.checked_sub(1)?)?;
    let next = history.get(i + 1)?;
    let (Some(xa), Some(xc)) = (prev.x0, next.x0) else {
        return None;
    };
    let (ua, ub, uc) = (prev.u, history[i].u, next.u);
    let xb = history[i].x0?;
    // vertex of the interpolating parabola
    let num = (ub - ua).powi(2) * (xb - xc) - (ub - uc).powi(2) * (xb - xa);
    let den = (ub - ua) * (xb - xc) - (ub - uc) * (xb - xa);
    if den == 0.0 {
        return Some((ub, xb));
    }
    let u_r = ub - 0.5 * num / den;
    let u_r = u_r.clamp(ua, uc);
    let l = |u: f64| {
        xa * (u - ub) * (u - uc) / ((ua - ub) * (ua - uc))
            + xb * (u - ua) * (u - uc) / ((ub - ua) * (ub - uc))
            + xc * (u - ua) * (u - ub) / ((uc - ua) * (uc - ub))
    };
    Some((u_r, l(u_r)))
}

/// Evolves `b = b0 - epsilon` until the outer zero has turned back and
/// disappeared, and returns its history.
pub fn near_critical_run(setup: &Setup, b: f64, u_cap: f64, stride: f64) -> Result<Vec<DiagnosticsRecord>, String> {
    let ev = setup.evolver(u_cap, stride).map_err(|e| e.to_string())?;
    let mut history: Vec<DiagnosticsRecord> = Vec::new();
    let mut seen_zero = false;
    let mut sink = |out: &nullkink_core::evolution::Output<'_>| {
        let r = DiagnosticsRecord::from_output(&ev, out);
        let gone = seen_zero && r.x0.is_none();
        seen_zero |= r.x0.is_some();
        history.push(r);
        if gone {
            Control::Stop
        } else {
            Control::Continue
        }
    };
    let initial: FieldState = initial_data_family(b, false, setup.grid());
    ev.evolve(initial, &mut sink).map_err(|f| f.to_string())?;
    Ok(history)
}

/// Return times and radii below the critical value `b0`.
///
/// Each run is capped at `cap_factor / epsilon` and sampled `samples_per_unit`
/// times per `1/epsilon`.
pub fn return_time_study(
    setup: &Setup,
    b0: f64,
    epsilons: &[f64],
    cap_factor: f64,
    samples_per_unit: f64,
) -> ScalingStudy {
    let runs: Vec<(f64, Result<Vec<DiagnosticsRecord>, String>)> = epsilons
        .par_iter()
        .map(|&eps| {
            let stride = 1.0 / (eps * samples_per_unit);
            (eps, near_critical_run(setup, b0 - eps, cap_factor / eps, stride))
        })
        .collect();
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    let mut smallest: Option<(f64, f64, &[DiagnosticsRecord])> = None;
    for (eps, run) in &runs {
        let history = match run {
            Ok(h) => h,
            Err(e) => {
                warn!("epsilon = {eps:e}: {e}");
                dropped.push((*eps, e.clone()));
                continue;
            }
        };
        let turned = history.last().is_some_and(|r| r.x0.is_none()) && history.iter().any(|r| r.x0.is_some());
        match return_point(history).filter(|_| turned) {
            Some((u_r, x0_r)) => {
                points.push(ReturnPoint { epsilon: *eps, b: b0 - eps, u_r, x0_r });
                if smallest.is_none_or(|(e, _, _)| *eps < e) {
                    smallest = Some((*eps, u_r, history));
                }
            }
            None => {
                warn!("epsilon = {eps:e}: no return before the cap");
                dropped.push((*eps, "no return before the u_end cap".into()));
            }
        }
    }
    points.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let lo = points.first().map_or(0.0, |p| p.epsilon);
    let hi = points.last().map_or(0.0, |p| p.epsilon);
    let u_r: Vec<(f64, f64)> = points.iter().map(|p| (p.epsilon, p.u_r)).collect();
    let x0_r: Vec<(f64, f64)> = points.iter().map(|p| (p.epsilon, p.x0_r)).collect();
    let expansion_fit = smallest.and_then(|(_, u_r, h)| {
        let samples: Vec<(f64, f64)> = h.iter().filter_map(|r| r.x0.map(|x| (r.u, x))).collect();
        fit_power_law(&samples, (EXPANSION_WINDOW.0, EXPANSION_WINDOW.1 * u_r)).ok()
    });
    ScalingStudy {
        b0,
        u_r_fit: fit_power_law(&u_r, (lo, hi)).ok(),
        x0_r_fit: fit_power_law(&x0_r, (lo, hi)).ok(),
        expansion_fit,
        points,
        dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(u: f64, x0: Option<f64>) -> DiagnosticsRecord {
        DiagnosticsRecord { u, energy: 2.0, c1: 0.0, c1_dot: 0.0, c2: 0.0, x0, probes: vec![] }
    }

    #[test]
    fn return_point_of_parabola() {
        let h: Vec<_> = (0..20)
            .map(|i| {
                let u = i as f64;
                record(u, Some(0.1 + 0.01 * (u - 7.3).powi(2)))
            })
            .collect();
        let (u, x) = return_point(&h).unwrap();
        assert!((u - 7.3).abs() < 1e-12);
        assert!((x - 0.1).abs() < 1e-12);
    }

    #[test]
    fn return_point_needs_neighbours() {
        assert!(return_point(&[record(0.0, Some(0.1))]).is_none());
        assert!(return_point(&[record(0.0, None), record(1.0, None)]).is_none());
    }

    #[test]
    fn energy_window_small_grid() {
        let w = energy_window(65, 1e-10).unwrap();
        assert!(w.b_minus < w.b_min && w.b_min < w.b_plus);
        assert!((w.e_min - 0.6672).abs() < 1e-3);
    }
}
