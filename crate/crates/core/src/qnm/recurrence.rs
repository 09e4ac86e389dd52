use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use super::rational::{Poly, Rational};
use super::Problem;
use crate::error::{Error, Result};

/// Recurrence `sum_j c_j(n, s) a_{n-j} = 0`, `n >= 2`, `j = 0..bandwidth`,
/// for the coefficients of `v = sum_{n>=1} a_n (1 - y)^n`, with `a_1 = 1`.
///
/// With `t = 1 - y` the eigenvalue equation `P2 v'' + P1 v' - P0 v = 0`
/// becomes `P2 v_tt - P1 v_t - P0 v = 0`, and
/// `c_j(n) = p2_j (n-j)(n-j-1) - p1_{j-1} (n-j) - p0_{j-2}` where `pX_k` are
/// the coefficients of `t^k` in `PX(1 - t)`. Only `P1` depends on `s`, through
/// `P1 = P1a + s P1b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceSystem {
    problem: Problem,
    p2: Poly,
    p1a: Poly,
    p1b: Poly,
    p0: Poly,
}

/// Builds the recurrence of `problem` from its eigenvalue equation
/// `y^2 v'' + (2y + 2s) v' - V(y) v = 0`, multiplied by `(1 + y^2)^2` for the
/// half-kink to clear denominators.
pub fn build_recurrence(problem: Problem) -> RecurrenceSystem {
    let y2 = Poly::from_ints(&[0, 0, 1]);
    let two_y = Poly::from_ints(&[0, 2]);
    let two = Poly::from_ints(&[2]);
    let quarter15 = Poly::constant(Rational::new(15, 4));
    let (p2, p1a, p1b, p0) = match problem {
        Problem::Vacuum => (y2, two_y, two, quarter15),
        Problem::HalfKink => {
            // V = 15/4 - 24 y^2 / (1 + y^2)^2
            let w = Poly::from_ints(&[1, 0, 1]);
            let w2 = &w * &w;
            let p0 = &(&quarter15 * &w2) - &Poly::from_ints(&[0, 0, 24]);
            (&w2 * &y2, &w2 * &two_y, &w2 * &two, p0)
        }
    };
    RecurrenceSystem {
        problem,
        p2: p2.reflect_about_one(),
        p1a: p1a.reflect_about_one(),
        p1b: p1b.reflect_about_one(),
        p0: p0.reflect_about_one(),
    }
}

impl RecurrenceSystem {
    pub fn problem(&self) -> Problem {
        self.problem
    }

    /// Number of terms in each equation (7 or 3).
    pub fn bandwidth(&self) -> usize {
        let d = self.p2.degree().max(self.p1a.degree() + 1).max(self.p1b.degree() + 1).max(self.p0.degree() + 2);
        d + 1
    }

    /// Exact coefficient polynomials of `c_j`: returns `(p2_j, p1a_{j-1}, p1b_{j-1}, p0_{j-2})`.
    pub fn base_coefficients(&self, j: usize) -> [Rational; 4] {
        let shift = |p: &Poly, d: usize| if j >= d { p.coeff(j - d) } else { Rational::ZERO };
        [shift(&self.p2, 0), shift(&self.p1a, 1), shift(&self.p1b, 1), shift(&self.p0, 2)]
    }

    /// `c_j(n, s)` for `j = 0..bandwidth`.
    pub fn coeff(&self, n: usize, s: Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.bandwidth()];
        self.coeff_into(n as f64, s, &mut out);
        out
    }

    pub(crate) fn coeff_into(&self, n: f64, s: Complex64, out: &mut [Complex64]) {
        for (j, c) in out.iter_mut().enumerate() {
            let [p2, p1a, p1b, p0] = self.base_coefficients(j);
            let m = n - j as f64;
            let real = p2.to_f64() * m * (m - 1.0) - p1a.to_f64() * m - p0.to_f64();
            *c = Complex64::new(real, 0.0) - s * (p1b.to_f64() * m);
        }
    }

    /// Coefficient polynomials in `t = 1 - y`: `(P2, P1a, P1b, P0)`.
    pub fn polynomials(&self) -> (&Poly, &Poly, &Poly, &Poly) {
        (&self.p2, &self.p1a, &self.p1b, &self.p0)
    }
}

/// `a_1..a_N` stored as mantissa times `exp(log_scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSeries {
    mantissa: Vec<Complex64>,
    log_scale: Vec<f64>,
}

impl ForwardSeries {
    /// Number of stored coefficients (`a_1..a_len`).
    pub fn len(&self) -> usize {
        self.mantissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissa.is_empty()
    }

    /// `a_n`, which may overflow to infinity for large `n`.
    pub fn get(&self, n: usize) -> Complex64 {
        let i = n - 1;
        self.mantissa[i] * self.log_scale[i].exp()
    }

    /// `(mantissa, log_scale)` of `a_n`.
    pub fn scaled(&self, n: usize) -> (Complex64, f64) {
        (self.mantissa[n - 1], self.log_scale[n - 1])
    }

    pub fn ln_abs(&self, n: usize) -> f64 {
        let (m, l) = self.scaled(n);
        m.norm().ln() + l
    }

    /// `a_n / g` where `g = exp(ln_g)`, computed without overflow.
    pub fn ratio(&self, n: usize, ln_g: Complex64) -> Complex64 {
        let (m, l) = self.scaled(n);
        m * (Complex64::new(l, 0.0) - ln_g).exp()
    }
}

/// Iterates the recurrence forward from `a_1 = 1`, `a_{n<=0} = 0`, rescaling
/// to keep the working window bounded.
pub fn forward_recurrence(sys: &RecurrenceSystem, s: Complex64, n_max: usize) -> Result<ForwardSeries> {
    let bw = sys.bandwidth();
    if n_max < bw {
        return Err(Error::InvalidArgument("N must be at least the bandwidth".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut mantissa = Vec::with_capacity(n_max);
    let mut log_scale = Vec::with_capacity(n_max);
    // window[k] = a_{n-1-k} in the current scale
    let mut window = vec![zero; bw];
    window[0] = Complex64::new(1.0, 0.0);
    let mut scale = 0.0;
    mantissa.push(window[0]);
    log_scale.push(scale);
    let mut c = vec![zero; bw];
    for n in 2..=n_max {
        sys.coeff_into(n as f64, s, &mut c);
        let mut acc = zero;
        for j in 1..bw {
            acc += c[j] * window[j - 1];
        }
        let a = -acc / c[0];
        window.rotate_right(1);
        window[0] = a;
        let big = window.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if !big.is_finite() {
            return Err(Error::NonFinite { u: n as f64 });
        }
        if big > 1e100 || (big < 1e-100 && big > 0.0) {
            let inv = 1.0 / big;
            window.iter_mut().for_each(|v| *v *= inv);
            scale += big.ln();
        }
        mantissa.push(window[0]);
        log_scale.push(scale);
    }
    Ok(ForwardSeries { mantissa, log_scale })
}
