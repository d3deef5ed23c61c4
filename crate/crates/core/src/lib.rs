//! Racah coefficients (6j-symbols) for unitary principal series
//! representations of SL(2, C).
//!
//! The crate is organised bottom-up:
//!
//! * [`exponents`]: balanced exponents, spin labels, complex log-gamma and the
//!   `a`-function algebra;
//! * [`kernels`]: the Clebsch-Gordan kernel `W`, its coefficient functions and
//!   finite-difference generator checks;
//! * [`quad2d`]: adaptive integration over the complex plane, used as an
//!   independent oracle for the chain and star-triangle rules and for the
//!   integral representations of `Φ₁`, `Φ₂`;
//! * [`mellin_barnes`]: bilateral-sum contour engines for the propagator, the
//!   two Racah representations and the `Φ` reductions.

pub mod error;
pub mod exponents;
pub mod kernels;
pub mod mellin_barnes;
pub mod quad2d;
pub(crate) mod summation;

pub use error::{Error, Result};
pub use exponents::{
    a_func, a_prod, a_ratio, bar_reflect, bracket_pow, log_gamma, phase_pow, propagator,
    BalancedExponent, PhaseBase, PointPair, SpinLabel,
};
pub use num_complex::Complex64;
