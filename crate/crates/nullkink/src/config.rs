//! Run configuration files.
//!
//! One TOML file per run. Every table rejects unknown keys, and every key
//! except the ones naming the experiment has a default.

use std::fmt;
use std::path::{Path, PathBuf};

use nullkink_core::diagnostics::ClassifierConfig;
use nullkink_core::effective::TrajectoryOptions;
use nullkink_core::evolution::{EvolutionParams, Mode};
use nullkink_core::qnm::{Problem, QnmMethod};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: invalid value for `{key}`: {message}")]
    Invalid { path: PathBuf, key: String, message: String },
}

/// A parsed configuration together with the SHA-256 of the file it came from.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub config: T,
    pub hash: String,
    pub path: PathBuf,
}

pub trait Validate {
    /// Returns the offending key and a message.
    fn validate(&self) -> Result<(), (String, String)>;
}

pub fn load<T>(path: &Path) -> Result<Loaded<T>, ConfigError>
where
    T: for<'de> Deserialize<'de> + Validate,
{
    let bytes = std::fs::read(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string() })?;
    let config: T = toml::from_str(&text)
        .map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string().trim_end().to_string() })?;
    config.validate().map_err(|(key, message)| ConfigError::Invalid { path: path.into(), key, message })?;
    Ok(Loaded { config, hash: hex::encode(Sha256::digest(&bytes)), path: path.into() })
}

fn check(ok: bool, key: &str, message: &str) -> Result<(), (String, String)> {
    if ok {
        Ok(())
    } else {
        Err((key.to_string(), message.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Nonlinear,
    #[serde(rename = "linear_full_U", alias = "linear_full_u")]
    LinearFullU,
    LinearTruncated,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Nonlinear => Mode::Nonlinear,
            ModeName::LinearFullU => Mode::LinearFullU,
            ModeName::LinearTruncated => Mode::LinearTruncated,
        }
    }
}

/// Grid, model and integrator settings shared by all evolution commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    pub k: usize,
    pub mode: ModeName,
    pub u_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    pub initial_step: f64,
    pub min_step: f64,
    /// `x` locations recorded as `f_at_<x>` columns.
    pub probes: Vec<f64>,
    pub output_stride: f64,
    pub log_outputs_per_decade: usize,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let p = EvolutionParams::default();
        Self {
            k: p.k,
            mode: ModeName::Nonlinear,
            u_end: p.u_end,
            rel_tol: p.rel_tol,
            abs_tol: p.abs_tol,
            max_step: None,
            initial_step: p.initial_step,
            min_step: p.min_step,
            probes: Vec::new(),
            output_stride: p.output_stride,
            log_outputs_per_decade: 0,
        }
    }
}

impl EvolutionSection {
    pub fn params(&self) -> EvolutionParams {
        EvolutionParams {
            k: self.k,
            mode: self.mode.into(),
            u_end: self.u_end,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            initial_step: self.initial_step,
            min_step: self.min_step,
            probe_points: self.probes.clone(),
            output_stride: self.output_stride,
            log_outputs_per_decade: self.log_outputs_per_decade,
        }
    }
}

impl Validate for EvolutionSection {
    fn validate(&self) -> Result<(), (String, String)> {
        check(self.k >= 3, "evolution.k", "must be at least 3")?;
        check(self.u_end > 0.0, "evolution.u_end", "must be positive")?;
        check(self.rel_tol > 0.0, "evolution.rel_tol", "must be positive")?;
        check(self.abs_tol > 0.0, "evolution.abs_tol", "must be positive")?;
        check(self.max_step.is_none_or(|h| h > 0.0), "evolution.max_step", "must be positive")?;
        check(self.initial_step > 0.0, "evolution.initial_step", "must be positive")?;
        check(self.min_step > 0.0, "evolution.min_step", "must be positive")?;
        check(self.output_stride > 0.0, "evolution.output_stride", "must be positive")?;
        check(self.probes.iter().all(|x| (0.0..=1.0).contains(x)), "evolution.probes", "entries must lie in [0, 1]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierSection {
    pub delta: f64,
    pub u_min: f64,
    pub window_fraction: f64,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let c = ClassifierConfig::default();
        Self { delta: c.delta, u_min: c.u_min, window_fraction: c.window_fraction }
    }
}

impl From<ClassifierSection> for ClassifierConfig {
    fn from(c: ClassifierSection) -> Self {
        Self { delta: c.delta, u_min: c.u_min, window_fraction: c.window_fraction }
    }
}

impl Validate for ClassifierSection {
    fn validate(&self) -> Result<(), (String, String)> {
        check(self.delta > 0.0, "classifier.delta", "must be positive")?;
        check(self.u_min >= 0.0, "classifier.u_min", "must be non-negative")?;
        check(
            self.window_fraction > 0.0 && self.window_fraction < 1.0,
            "classifier.window_fraction",
            "must lie in (0, 1)",
        )
    }
}

/// Initial data for `evolve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `w = 1 + b x^4 - (1 + b) x^6`.
    Family {
        b: f64,
        #[serde(default)]
        np_term: bool,
    },
    /// `f = cos^2(pi x / 2)`, optionally plus `x (1 - x)`.
    CosSquared {
        #[serde(default)]
        np_term: bool,
    },
    /// `f = 0`, i.e. the static half-kink.
    Zero,
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Family { b, np_term } => write!(f, "family(b = {b}, np_term = {np_term})"),
            InitialData::CosSquared { np_term } => write!(f, "cos_squared(np_term = {np_term})"),
            InitialData::Zero => f.write_str("zero"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingdownSection {
    /// Probe location whose time series is fitted.
    pub probe: f64,
    pub window: [f64; 2],
    #[serde(default = "default_tail_power")]
    pub tail_power: f64,
    /// Terms of the polynomial tail; 0 fits the oscillation alone.
    #[serde(default = "default_tail_terms")]
    pub tail_terms: usize,
}

fn default_tail_power() -> f64 {
    5.0
}

fn default_tail_terms() -> usize {
    4
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub output_dir: Option<PathBuf>,
    pub initial: InitialData,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub classifier: ClassifierSection,
    /// Retarded times at which full profiles are written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Power-law fits of every probe and of `c1` over this window.
    #[serde(default)]
    pub tail_window: Option<[f64; 2]>,
    #[serde(default)]
    pub ringdown: Option<RingdownSection>,
}

impl Validate for EvolveConfig {
    fn validate(&self) -> Result<(), (String, String)> {
        self.evolution.validate()?;
        self.classifier.validate()?;
        if let InitialData::Family { b, .. } = self.initial {
            check(b.is_finite(), "initial.b", "must be finite")?;
        }
        check(self.snapshots.iter().all(|u| u.is_finite() && *u >= 0.0), "snapshots", "must be non-negative")?;
        if let Some([a, b]) = self.tail_window {
            check(a > 0.0 && b > a, "tail_window", "must be an increasing pair of positive times")?;
        }
        if let Some(r) = &self.ringdown {
            check(r.window[1] > r.window[0], "ringdown.window", "must be increasing")?;
            check(self.evolution.probes.contains(&r.probe), "ringdown.probe", "must be one of evolution.probes")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemName {
    #[serde(alias = "half_kink")]
    Halfkink,
    Vacuum,
}

impl From<ProblemName> for Problem {
    fn from(p: ProblemName) -> Self {
        match p {
            ProblemName::Halfkink => Problem::HalfKink,
            ProblemName::Vacuum => Problem::Vacuum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    ContinuedFraction,
    ForwardRecurrence,
    Bessel,
}

impl From<MethodName> for QnmMethod {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::ContinuedFraction => QnmMethod::ContinuedFraction,
            MethodName::ForwardRecurrence => QnmMethod::ForwardRecurrence,
            MethodName::Bessel => QnmMethod::Bessel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub step: f64,
    #[serde(default = "default_scan_depth")]
    pub depth: usize,
}

fn default_scan_depth() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QnmConfig {
    pub output_dir: Option<PathBuf>,
    pub problem: ProblemName,
    /// Starting point `[re, im]`; defaults to a point near the fundamental mode.
    #[serde(default)]
    pub guess: Option<[f64; 2]>,
    /// Defaults to every method that applies to the problem.
    #[serde(default)]
    pub methods: Option<Vec<MethodName>>,
    /// Truncation `N` of the forward-recurrence estimate.
    #[serde(default = "default_forward_n")]
    pub forward_n: usize,
    #[serde(default)]
    pub scan: Option<ScanSection>,
}

fn default_forward_n() -> usize {
    4000
}

impl QnmConfig {
    pub fn guess(&self) -> [f64; 2] {
        self.guess.unwrap_or(match self.problem {
            ProblemName::Halfkink => [-0.36, 0.48],
            ProblemName::Vacuum => [-1.28, 0.43],
        })
    }

    pub fn methods(&self) -> Vec<MethodName> {
        self.methods.clone().unwrap_or_else(|| match self.problem {
            ProblemName::Halfkink => vec![MethodName::ContinuedFraction, MethodName::ForwardRecurrence],
            ProblemName::Vacuum => {
                vec![MethodName::ContinuedFraction, MethodName::ForwardRecurrence, MethodName::Bessel]
            }
        })
    }
}

impl Validate for QnmConfig {
    fn validate(&self) -> Result<(), (String, String)> {
        let [re, im] = self.guess();
        check(re < 0.0 && im.is_finite(), "guess", "must have a negative real part")?;
        let methods = self.methods();
        check(!methods.is_empty(), "methods", "must not be empty")?;
        check(
            self.problem == ProblemName::Vacuum || !methods.contains(&MethodName::Bessel),
            "methods",
            "`bessel` applies to the vacuum problem only",
        )?;
        check(self.forward_n >= 100, "forward_n", "must be at least 100")?;
        if let Some(s) = &self.scan {
            check(s.re[1] > s.re[0] && s.im[1] > s.im[0], "scan", "ranges must be increasing")?;
            check(s.step > 0.0, "scan.step", "must be positive")?;
            check(s.depth >= 10, "scan.depth", "must be at least 10")?;
        }
        Ok(())
    }
}

/// How probe evolutions are extended until the classifier decides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSection {
    /// First `u_end`; doubled while the classifier is undecided.
    pub initial_u_end: f64,
    /// Largest `u_end` tried.
    pub max_u_end: f64,
    /// An `N1` decision is only accepted once `u >= cap_factor / tol`.
    pub cap_factor: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self { initial_u_end: 250.0, max_u_end: 1.0e5, cap_factor: 64.0 }
    }
}

impl Validate for ProbeSection {
    fn validate(&self) -> Result<(), (String, String)> {
        check(self.initial_u_end > 0.0, "probe.initial_u_end", "must be positive")?;
        check(self.max_u_end >= self.initial_u_end, "probe.max_u_end", "must be at least initial_u_end")?;
        check(self.cap_factor >= 0.0, "probe.cap_factor", "must be non-negative")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectConfig {
    pub output_dir: Option<PathBuf>,
    pub bracket: [f64; 2],
    pub tol: f64,
    #[serde(default)]
    pub np_term: bool,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub classifier: ClassifierSection,
    #[serde(default)]
    pub probe: ProbeSection,
}

impl Validate for BisectConfig {
    fn validate(&self) -> Result<(), (String, String)> {
        self.evolution.validate()?;
        self.classifier.validate()?;
        self.probe.validate()?;
        check(self.bracket[1] > self.bracket[0], "bracket", "must be increasing")?;
        check(self.tol > 0.0, "tol", "must be positive")?;
        check(
            self.probe.max_u_end >= self.probe.cap_factor / self.tol,
            "probe.max_u_end",
            "must be at least probe.cap_factor / tol, or N1 could never be accepted",
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub output_dir: Option<PathBuf>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub np_term: bool,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub classifier: ClassifierSection,
    #[serde(default)]
    pub probe: ProbeSection,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
}

impl Validate for SweepConfig {
    fn validate(&self) -> Result<(), (String, String)> {
        self.evolution.validate()?;
        self.classifier.validate()?;
        self.probe.validate()?;
        check(!self.b.is_empty(), "b", "must not be empty")?;
        check(self.b.iter().all(|b| b.is_finite()), "b", "entries must be finite")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveConfig {
    pub output_dir: Option<PathBuf>,
    pub lambda0: f64,
    /// Initial speed; exactly one of `lambda_dot0` and `energy` is required.
    #[serde(default)]
    pub lambda_dot0: Option<f64>,
    #[serde(default)]
    pub energy: Option<f64>,
    pub t_end: f64,
    #[serde(default = "default_ode_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_ode_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_escape")]
    pub escape_lambda: f64,
    #[serde(default = "yes")]
    pub stop_at_turning: bool,
    /// Write every n-th accepted step.
    #[serde(default = "one")]
    pub sample_stride: usize,
}

fn default_ode_tol() -> f64 {
    1e-13
}

fn default_escape() -> f64 {
    1e6
}

fn one() -> usize {
    1
}

impl EffectiveConfig {
    pub fn options(&self) -> TrajectoryOptions {
        TrajectoryOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            escape_lambda: self.escape_lambda,
            stop_at_turning: self.stop_at_turning,
        }
    }
}

impl Validate for EffectiveConfig {
    fn validate(&self) -> Result<(), (String, String)> {
        check(self.lambda0 > nullkink_core::effective::lambda_min(), "lambda0", "must exceed 24^(1/4)")?;
        check(
            self.lambda_dot0.is_some() != self.energy.is_some(),
            "lambda_dot0",
            "exactly one of `lambda_dot0` and `energy` must be given",
        )?;
        check(self.t_end > 0.0, "t_end", "must be positive")?;
        check(self.rel_tol > 0.0 && self.abs_tol > 0.0, "rel_tol", "tolerances must be positive")?;
        check(self.escape_lambda > self.lambda0, "escape_lambda", "must exceed lambda0")?;
        check(self.sample_stride >= 1, "sample_stride", "must be at least 1")
    }
}
