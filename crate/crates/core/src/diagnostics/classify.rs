use core::fmt;

use super::DiagnosticsRecord;

/// Attractor reached by an evolution: the half-kink (`N0`) or the half-kink
/// with an escaping kink (`N1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endstate {
    N0,
    N1,
    Undecided,
}

impl Endstate {
    pub fn as_str(self) -> &'static str {
        match self {
            Endstate::N0 => "N0",
            Endstate::N1 => "N1",
            Endstate::Undecided => "undecided",
        }
    }

    pub fn is_decided(self) -> bool {
        self != Endstate::Undecided
    }
}

impl fmt::Display for Endstate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    /// Energy tolerance around `2/3` (N0) and below `2` (N1).
    pub delta: f64,
    /// No decision before this retarded time.
    pub u_min: f64,
    /// Length of the trailing window as a fraction of the last `u`.
    pub window_fraction: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { delta: 0.05, u_min: 50.0, window_fraction: 0.25 }
    }
}

/// Classifies a run from its recorded history (ordered in `u`).
///
/// `N0`: final energy within `delta` of `2/3` and no zero of `w` in the
/// trailing window. `N1`: a zero in every trailing record, moving outwards,
/// and final energy at least `2 - delta`.
pub fn classify_endstate(history: &[DiagnosticsRecord], cfg: &ClassifierConfig) -> Endstate {
    let Some(last) = history.last() else {
        return Endstate::Undecided;
    };
    if last.u < cfg.u_min {
        return Endstate::Undecided;
    }
    let start = last.u - cfg.window_fraction * last.u;
    let tail: &[DiagnosticsRecord] = {
        let i = history.iter().position(|r| r.u >= start).unwrap_or(history.len() - 1);
        &history[i..]
    };
    if tail.len() < 2 {
        return Endstate::Undecided;
    }
    let e = last.energy;
    if tail.iter().all(|r| r.x0.is_none()) && (e - 2.0 / 3.0).abs() <= cfg.delta {
        return Endstate::N0;
    }
    let zeros: Option<alloc::vec::Vec<f64>> = tail.iter().map(|r| r.x0).collect();
    if let Some(z) = zeros {
        if z[z.len() - 1] < z[0] && e >= 2.0 - cfg.delta {
            return Endstate::N1;
        }
    }
    Endstate::Undecided
}
