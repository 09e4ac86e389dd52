use alloc::vec::Vec;

use super::FieldState;
use crate::error::{Error, Result};
use crate::spectral::Grid;
use num_traits::Float;

/// `f(0, x)` for `w(0, x) = 1 + b x^4 - (1 + b) x^6`, in the cancellation-free
/// form `(b+2) x^3 - (1+b) x^5 - 2 x^7 / (1 + x^4)` which is regular at `x = 0`.
pub fn family_profile(b: f64, x: f64) -> f64 {
    let x3 = x.powi(3);
    let x4 = x3 * x;
    (b + 2.0) * x3 - (1.0 + b) * x3 * x * x - 2.0 * x3 * x4 / (1.0 + x4)
}

/// Initial data of the one-parameter family; `np_term` adds `x(1 - x)` to
/// `f`, which gives a Newman-Penrose constant of 1.
pub fn initial_data_family(b: f64, np_term: bool, grid: &Grid) -> FieldState {
    let mut f: Vec<f64> =
        grid.x().iter().map(|&x| family_profile(b, x) + if np_term { x * (1.0 - x) } else { 0.0 }).collect();
    f[0] = 0.0;
    FieldState::new(0.0, f)
}

/// Nodal samples of an arbitrary profile with `profile(1) = 0`.
pub fn initial_data_linear(profile: impl Fn(f64) -> f64, grid: &Grid) -> Result<FieldState> {
    let at_boundary = profile(1.0);
    if !(at_boundary.abs() <= 1e-12) {
        return Err(Error::InvalidData(alloc::format!("profile must vanish at x = 1, got {at_boundary:e}")));
    }
    let mut f = grid.sample(profile);
    f[0] = 0.0;
    Ok(FieldState::new(0.0, f))
}

/// `cos^2(pi x / 2)`: vanishing Newman-Penrose constant.
pub fn cos_squared(x: f64) -> f64 {
    let c = (core::f64::consts::FRAC_PI_2 * x).cos();
    c * c
}

/// `cos^2(pi x / 2) + (1 - x) x`: Newman-Penrose constant 1.
pub fn cos_squared_np(x: f64) -> f64 {
    cos_squared(x) + (1.0 - x) * x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::model::half_kink;

    #[test]
    fn family_profile_matches_direct_form() {
        for b in [-53.9, -2.1, 0.0, 1.0, 12.458, 47.9] {
            for x in [0.05, 0.3, 0.5f64.sqrt(), 0.9, 1.0] {
                let w0 = 1.0 + b * x.powi(4) - (1.0 + b) * x.powi(6);
                let direct = (w0 - half_kink(x)) / x;
                assert!((family_profile(b, x) - direct).abs() < 1e-14 * (1.0 + b.abs()), "b={b} x={x}");
            }
            assert_eq!(family_profile(b, 0.0), 0.0);
            assert!(family_profile(b, 1.0).abs() < 1e-13 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn boundary_enforced() {
        let g = Grid::new(9).unwrap();
        let s = initial_data_family(3.0, true, &g);
        assert_eq!(s.f()[0], 0.0);
        assert_eq!(s.f()[8], 0.0);
    }

    #[test]
    fn linear_profiles() {
        assert!(cos_squared(1.0).abs() < 1e-15);
        assert_eq!(cos_squared(0.0), 1.0);
        assert!((cos_squared_np(0.5) - 0.75).abs() < 1e-15);
        let g = Grid::new(9).unwrap();
        assert!(initial_data_linear(cos_squared_np, &g).is_ok());
        assert!(matches!(initial_data_linear(|x| x, &g), Err(Error::InvalidData(_))));
    }
}
