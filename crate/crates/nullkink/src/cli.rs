//! The five subcommands. Each reads one configuration file and writes its
//! results into an output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use nullkink_core::diagnostics::{classify_endstate, fit_power_law, DiagnosticsRecord, FitResult};
use nullkink_core::effective::{integrate_trajectory, speed_for_energy, EffectiveState, Outcome};
use nullkink_core::evolution::{
    cos_squared, cos_squared_np, initial_data_family, initial_data_linear, Control, Counters, Evolver, FieldState,
};
use nullkink_core::qnm::{
    bessel_k2_zero, build_recurrence, find_qnm, find_qnm_dominant, fit_ringdown, scan_cf, QnmResult, RingdownOptions,
};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::config::{
    self, BisectConfig, ConfigError, EffectiveConfig, EvolveConfig, InitialData, Loaded, MethodName, QnmConfig,
    SweepConfig,
};
use crate::criticality::{self, BisectSettings, ProbeSettings, Setup};
use crate::output::{fmt_f64, prepare_dir, probe_column, write_json, CsvWriter, WriteError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] WriteError),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Output(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

fn output_dir(configured: &Option<PathBuf>, override_dir: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = override_dir.map(Path::to_path_buf).or_else(|| configured.clone()).unwrap_or_else(|| ".".into());
    prepare_dir(&dir)?;
    Ok(dir)
}

#[derive(Debug, Clone, Serialize)]
struct CounterSummary {
    steps: usize,
    rejected_steps: usize,
    newton_iterations: usize,
    newton_failures: usize,
    jacobian_evaluations: usize,
    factorizations: usize,
}

impl From<Counters> for CounterSummary {
    fn from(c: Counters) -> Self {
        Self {
            steps: c.steps,
            rejected_steps: c.rejected_steps,
            newton_iterations: c.newton_iterations,
            newton_failures: c.newton_failures,
            jacobian_evaluations: c.jacobian_evaluations,
            factorizations: c.factorizations,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct FitSummary {
    series: String,
    exponent: f64,
    amplitude: f64,
    residual: f64,
    window: [f64; 2],
    points: usize,
}

fn fit_summary(series: String, fit: &FitResult) -> FitSummary {
    FitSummary {
        series,
        exponent: fit.exponent,
        amplitude: fit.amplitude,
        residual: fit.residual,
        window: [fit.window.0, fit.window.1],
        points: fit.points,
    }
}

fn qnm_json(r: &QnmResult) -> serde_json::Value {
    json!({
        "method": r.method.as_str(),
        "re": r.s.re,
        "im": r.s.im,
        "residual": r.residual,
        "iterations": r.iterations,
    })
}

/// Builds the initial state for `evolve`.
pub fn initial_state(data: &InitialData, ev: &Evolver) -> Result<FieldState, CliError> {
    let grid = ev.grid();
    match *data {
        InitialData::Family { b, np_term } => Ok(initial_data_family(b, np_term, grid)),
        InitialData::CosSquared { np_term } => {
            let profile = if np_term { cos_squared_np } else { cos_squared };
            initial_data_linear(profile, grid).map_err(|e| CliError::Solver(e.to_string()))
        }
        InitialData::Zero => Ok(FieldState::zero(grid)),
    }
}

/// Runs one evolution and writes `series.csv`, `snapshots.csv` and
/// `summary.json`. Partial outputs are flushed when the solver fails.
pub fn cmd_evolve(loaded: &Loaded<EvolveConfig>, dir_override: Option<&Path>) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let dir = output_dir(&cfg.output_dir, dir_override)?;
    let ev = Evolver::new(cfg.evolution.params()).map_err(|e| CliError::Solver(e.to_string()))?;
    let initial = initial_state(&cfg.initial, &ev)?;
    info!("evolve {} with K = {} to u = {}", cfg.initial, ev.grid().len(), ev.params().u_end);

    let mut header: Vec<String> = ["u", "energy", "c1", "c1_dot", "c2", "x0"].map(String::from).to_vec();
    header.extend(cfg.evolution.probes.iter().map(|&x| probe_column(x)));
    let mut series = CsvWriter::create(&dir.join("series.csv"), &loaded.hash, &header)?;
    let mut snaps =
        CsvWriter::create(&dir.join("snapshots.csv"), &loaded.hash, &["u", "x", "w", "f"].map(String::from))?;
    let mut pending: Vec<f64> = cfg.snapshots.clone();
    pending.sort_by(|a, b| b.total_cmp(a));

    let mut history: Vec<DiagnosticsRecord> = Vec::new();
    let mut write_error: Option<WriteError> = None;
    let started = Instant::now();
    let grid = ev.grid().clone();
    let result = ev.evolve(initial, &mut |out| {
        let rec = DiagnosticsRecord::from_output(&ev, out);
        let mut row = vec![rec.u, rec.energy, rec.c1, rec.c1_dot, rec.c2, rec.x0.unwrap_or(f64::NAN)];
        row.extend(rec.probes.iter().map(|p| p.1));
        let mut res = series.numbers(&row);
        // each snapshot is taken at the first output at or after its time
        while res.is_ok() && pending.last().is_some_and(|&t| t <= out.u) {
            pending.pop();
            for (&x, &f) in grid.x().iter().zip(out.f) {
                res = res.and_then(|_| snaps.numbers(&[out.u, x, nullkink_core::evolution::half_kink(x) + x * f, f]));
            }
        }
        history.push(rec);
        match res {
            Ok(()) => Control::Continue,
            Err(e) => {
                write_error = Some(e);
                Control::Stop
            }
        }
    });
    series.finish()?;
    snaps.finish()?;
    if let Some(e) = write_error {
        return Err(e.into());
    }

    let classifier = cfg.classifier.into();
    let classification = classify_endstate(&history, &classifier);
    let (final_u, counters, outputs, error) = match &result {
        Ok(s) => (s.final_state.u, s.counters, s.outputs, None),
        Err(f) => (f.last_good.u, f.counters, f.outputs, Some(f.to_string())),
    };

    let mut fits = Vec::new();
    if let Some([a, b]) = cfg.tail_window {
        let abs_series = |pick: &dyn Fn(&DiagnosticsRecord) -> f64| -> Vec<(f64, f64)> {
            history.iter().map(|r| (r.u, pick(r).abs())).collect()
        };
        for (i, &x) in cfg.evolution.probes.iter().enumerate() {
            match fit_power_law(&abs_series(&|r| r.probes[i].1), (a, b)) {
                Ok(fit) => fits.push(fit_summary(probe_column(x), &fit)),
                Err(e) => warn!("tail fit of {}: {e}", probe_column(x)),
            }
        }
        match fit_power_law(&abs_series(&|r| r.c1), (a, b)) {
            Ok(fit) => fits.push(fit_summary("c1".into(), &fit)),
            Err(e) => warn!("tail fit of c1: {e}"),
        }
    }

    let ringdown = cfg.ringdown.as_ref().map(|r| {
        let i = cfg.evolution.probes.iter().position(|&x| x == r.probe).unwrap_or(0);
        let samples: Vec<(f64, f64)> = history.iter().map(|rec| (rec.u, rec.probes[i].1)).collect();
        let opts = RingdownOptions { tail_power: r.tail_power, tail_terms: r.tail_terms, ..Default::default() };
        match fit_ringdown(&samples, (r.window[0], r.window[1]), &opts) {
            Ok(fit) => json!({
                "probe": r.probe,
                "re": fit.s.re,
                "im": fit.s.im,
                "amplitude": fit.amplitude,
                "phase": fit.phase,
                "tail_amplitudes": fit.tail_amplitudes,
                "tail_power": fit.tail_power,
                "residual": fit.residual,
                "condition": fit.condition,
                "window": [fit.window.0, fit.window.1],
            }),
            Err(e) => json!({ "probe": r.probe, "error": e.to_string() }),
        }
    });

    let summary = json!({
        "config_hash": loaded.hash,
        "config": cfg,
        "classification": classification.as_str(),
        "initial_energy": history.first().map(|r| r.energy),
        "final_energy": history.last().map(|r| r.energy),
        "final_u": final_u,
        "outputs": outputs,
        "counters": CounterSummary::from(counters),
        "stopped_early": result.as_ref().map(|s| s.stopped_early).unwrap_or(false),
        "runtime_seconds": started.elapsed().as_secs_f64(),
        "tail_fits": fits,
        "ringdown": ringdown,
        "error": error,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    match error {
        Some(e) => Err(CliError::Solver(e)),
        None => Ok(()),
    }
}

/// Quasinormal frequency by every configured method, cross-method deltas and
/// an optional `|cf|` map.
pub fn cmd_qnm(loaded: &Loaded<QnmConfig>, dir_override: Option<&Path>) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let dir = output_dir(&cfg.output_dir, dir_override)?;
    let sys = build_recurrence(cfg.problem.into());
    let [re, im] = cfg.guess();
    let guess = Complex64::new(re, im);

    let mut found: Vec<QnmResult> = Vec::new();
    let mut entries = Vec::new();
    for m in cfg.methods() {
        let t = Instant::now();
        let r = match m {
            MethodName::ContinuedFraction => find_qnm(&sys, guess),
            MethodName::ForwardRecurrence => find_qnm_dominant(&sys, guess, cfg.forward_n),
            MethodName::Bessel => bessel_k2_zero(guess),
        };
        let seconds = t.elapsed().as_secs_f64();
        let name = nullkink_core::qnm::QnmMethod::from(m).as_str();
        match r {
            Ok(r) => {
                info!("{name}: s = {:.12} {:+.12}i", r.s.re, r.s.im);
                let mut v = qnm_json(&r);
                v["runtime_seconds"] = json!(seconds);
                entries.push(v);
                found.push(r);
            }
            Err(e) => {
                warn!("{name}: {e}");
                entries.push(json!({ "method": name, "error": e.to_string(), "runtime_seconds": seconds }));
            }
        }
    }
    let mut deltas = Vec::new();
    for (i, a) in found.iter().enumerate() {
        for b in &found[i + 1..] {
            deltas.push(json!({
                "a": a.method.as_str(),
                "b": b.method.as_str(),
                "abs": (a.s - b.s).norm(),
                "re": (a.s.re - b.s.re).abs(),
                "im": (a.s.im - b.s.im).abs(),
            }));
        }
    }

    let mut scan_roots = None;
    if let Some(s) = &cfg.scan {
        let res = scan_cf(&sys, (s.re[0], s.re[1]), (s.im[0], s.im[1]), s.step, s.depth)
            .map_err(|e| CliError::Solver(e.to_string()))?;
        let mut w =
            CsvWriter::create(&dir.join("qnm_scan.csv"), &loaded.hash, &["re", "im", "abs_cf"].map(String::from))?;
        for p in &res.points {
            w.numbers(&[p.s.re, p.s.im, p.value.map_or(f64::NAN, |v| v.norm())])?;
        }
        w.finish()?;
        scan_roots = Some(res.roots.iter().map(qnm_json).collect::<Vec<_>>());
    }

    let report = json!({
        "config_hash": loaded.hash,
        "problem": Into::<nullkink_core::qnm::Problem>::into(cfg.problem).as_str(),
        "guess": [re, im],
        "results": entries,
        "deltas": deltas,
        "scan_roots": scan_roots,
    });
    write_json(&dir.join("qnm.json"), &report)?;
    if found.is_empty() {
        return Err(CliError::Solver("every method failed".into()));
    }
    Ok(())
}

fn setup_for(section: &config::EvolutionSection) -> Result<Setup, CliError> {
    Setup::new(section.params()).map_err(|e| CliError::Solver(e.to_string()))
}

/// Bisection for a critical value of `b`; `bisect.json` is rewritten after
/// every probe.
pub fn cmd_bisect(loaded: &Loaded<BisectConfig>, dir_override: Option<&Path>) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let dir = output_dir(&cfg.output_dir, dir_override)?;
    let setup = setup_for(&cfg.evolution)?;
    let settings = BisectSettings {
        classifier: cfg.classifier.into(),
        initial_u_end: cfg.probe.initial_u_end,
        max_u_end: cfg.probe.max_u_end,
        cap_factor: cfg.probe.cap_factor,
    };
    let path = dir.join("bisect.json");
    let mut write_error = None;
    let doc = |o: &criticality::BisectionOutcome| json!({ "config_hash": loaded.hash, "config": cfg, "outcome": o });
    let outcome = criticality::bisect_critical(
        &setup,
        cfg.bracket[0],
        cfg.bracket[1],
        cfg.tol,
        cfg.np_term,
        &settings,
        &mut |o| {
            if let Err(e) = write_json(&path, &doc(o)) {
                write_error.get_or_insert(e);
            }
        },
    );
    write_json(&path, &doc(&outcome))?;
    if let Some(e) = write_error {
        return Err(e.into());
    }
    info!("bracket [{}, {}] after {} evolutions", outcome.b_lo, outcome.b_hi, outcome.evolutions_used);
    match outcome.message {
        Some(m) if !outcome.converged => Err(CliError::Solver(m)),
        _ => Ok(()),
    }
}

/// Endstate of every listed `b`, one row each in `sweep.csv`.
pub fn cmd_sweep(loaded: &Loaded<SweepConfig>, dir_override: Option<&Path>) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let dir = output_dir(&cfg.output_dir, dir_override)?;
    let setup = setup_for(&cfg.evolution)?;
    let settings = ProbeSettings {
        classifier: cfg.classifier.into(),
        initial_u_end: cfg.probe.initial_u_end,
        max_u_end: cfg.probe.max_u_end,
        n1_min_u: 0.0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let rows = pool.install(|| criticality::sweep(&setup, &cfg.b, cfg.np_term, &settings));
    let header = ["b", "classification", "final_energy", "u_reached", "x0", "steps", "error"].map(String::from);
    let mut w = CsvWriter::create(&dir.join("sweep.csv"), &loaded.hash, &header)?;
    for r in &rows {
        w.row(&[
            fmt_f64(r.b),
            r.classification.to_string(),
            fmt_f64(r.final_energy),
            fmt_f64(r.u_reached),
            fmt_f64(r.final_x0.unwrap_or(f64::NAN)),
            r.steps.to_string(),
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        ])?;
    }
    w.finish()?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed == rows.len() {
        return Err(CliError::Solver("every sweep point failed".into()));
    }
    Ok(())
}

/// Collective-coordinate trajectory, written to `effective.csv` with its
/// outcome in `effective.json`.
pub fn cmd_effective(loaded: &Loaded<EffectiveConfig>, dir_override: Option<&Path>) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let dir = output_dir(&cfg.output_dir, dir_override)?;
    let lambda_dot = match (cfg.lambda_dot0, cfg.energy) {
        (Some(v), _) => v,
        (None, Some(e)) => speed_for_energy(cfg.lambda0, e).map_err(|e| CliError::Solver(e.to_string()))?,
        (None, None) => unreachable!("rejected by validation"),
    };
    let initial = EffectiveState { t: 0.0, lambda: cfg.lambda0, lambda_dot };
    let traj = integrate_trajectory(initial, cfg.t_end, &cfg.options()).map_err(|e| CliError::Solver(e.to_string()))?;

    let header = ["t", "lambda", "lambda_dot", "E_eff"].map(String::from);
    let mut w = CsvWriter::create(&dir.join("effective.csv"), &loaded.hash, &header)?;
    let n = traj.samples.len();
    for (i, s) in traj.samples.iter().enumerate() {
        if i % cfg.sample_stride == 0 || i + 1 == n {
            w.numbers(&[s.t, s.lambda, s.lambda_dot, s.energy().unwrap_or(f64::NAN)])?;
        }
    }
    w.finish()?;

    let outcome = match traj.outcome {
        Outcome::Escape { t } => json!({ "kind": "escape", "t": t }),
        Outcome::Turning { t_r, lambda_r } => json!({ "kind": "turning", "t": t_r, "lambda": lambda_r }),
        Outcome::InvalidDomain { t } => json!({ "kind": "invalid_domain", "t": t }),
        Outcome::Unresolved => json!({ "kind": "unresolved" }),
    };
    let last = traj.samples.last().copied().unwrap_or(initial);
    let report = json!({
        "config_hash": loaded.hash,
        "config": cfg,
        "initial_energy": initial.energy().ok(),
        "energy_drift": traj.energy_drift,
        "outcome": outcome,
        "final": { "t": last.t, "lambda": last.lambda, "lambda_dot": last.lambda_dot },
        "samples": traj.samples.len(),
    });
    write_json(&dir.join("effective.json"), &report)?;
    Ok(())
}
