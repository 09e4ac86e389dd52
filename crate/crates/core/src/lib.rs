//! Numerical core for the characteristic initial-boundary value problem of the
//! energy-critical equivariant Yang-Mills equation outside the unit ball.
//!
//! The field is written in compactified retarded-time coordinates
//! `u = t - r`, `x = r^(-1/2)` as `w(u, x) = q(x) + x f(u, x)`, where
//! `q(x) = (1 - x^4)/(1 + x^4)` is the static half-kink. The crate provides
//!
//! * [`spectral`]: Chebyshev collocation on `x in [0, 1]`,
//! * [`evolution`]: the semi-discrete system and a BDF(1,2) integrator,
//! * [`diagnostics`]: Bondi energy, radiation data at null infinity, zero tracking, fits,
//! * [`qnm`]: quasinormal frequencies by continued fractions, forward recurrence and `K_2` zeros,
//! * [`effective`]: the collective-coordinate model of an expanding kink.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `f64` math comes from `Float` here, but becomes inherent as soon as anything in the
// build links `std`, which leaves those imports unused.
#![allow(unused_imports)]
// Index loops mirror the matrix formulas; `!(a <= b)` comparisons deliberately reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod effective;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod qnm;
pub mod roots;
pub mod spectral;

pub use error::{Error, Result};
