//! Mellin-Barnes engines: bilateral sums over `n ∈ Z` of contour integrals in
//! `ν` along `Im ν = η`, with `s = (n + iν)/2`, `s̄ = (-n + iν)/2`.
//!
//! Two summation strategies are used.
//!
//! * Integrands carrying a phase `[w]^s` (the propagator and the `Φ`
//!   reductions) decay too slowly for plain truncation. They are summed
//!   under a Gaussian window `exp(-δ(n² + ν²))`, which is entire in `ν`, so
//!   each windowed sum is exactly independent of `η`. The windowed value is
//!   the heat-kernel smoothing of the target in `(arg w, ln|w|)` and is a power
//!   series in `δ`; Richardson extrapolation over halved `δ` removes it.
//! * The Racah integrands decay like `|s|^-4`. They are truncated sharply on
//!   nested boxes `(N, V)·2^k` and extrapolated in the box size.

mod integrand;
mod quadrature;
mod racah;
mod windowed;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::BalancedExponent;

pub use integrand::{pole_scan, Factor, MbIntegrand};
pub use racah::{racah_estimate, racah_integrand, racah_mb1, racah_mb2, racah_prefactor, RacahForm, RacahLabels};
pub use windowed::{
    mb_propagator, mb_propagator_estimate, phi1_mb, phi1_mb_estimate, phi2_mb, phi2_mb_estimate, triangle_mb,
    triangle_mb_estimate,
};

/// Contour and truncation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    /// `Im ν` of the integration line, in `(-1, 0)`.
    pub eta: f64,
    pub nu_max: f64,
    pub n_max: i64,
    /// Gauss-Legendre order per panel.
    pub nodes_per_unit: usize,
    pub pole_clearance: f64,
    /// Relative accuracy demanded of the extrapolated sum.
    pub tol: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self { eta: -0.5, nu_max: 60.0, n_max: 40, nodes_per_unit: 16, pole_clearance: 1e-3, tol: 1e-8 }
    }
}

impl ContourSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParameter(what));
        if !(self.eta > -1.0 && self.eta < 0.0) {
            return bad(format!("eta = {} must lie in (-1, 0)", self.eta));
        }
        if !(self.nu_max > 0.0 && self.nu_max.is_finite()) {
            return bad(format!("nu_max = {} must be positive", self.nu_max));
        }
        if self.n_max < 0 {
            return bad(format!("n_max = {} must be nonnegative", self.n_max));
        }
        if self.nodes_per_unit == 0 || self.nodes_per_unit > 128 {
            return bad(format!("nodes_per_unit = {} must lie in 1..=128", self.nodes_per_unit));
        }
        if !(self.pole_clearance > 0.0) {
            return bad(format!("pole_clearance = {} must be positive", self.pole_clearance));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol = {} must be positive", self.tol));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MbDiagnostics {
    /// `|Σ_ν term(n)|` for every `n` in the finest truncation.
    pub per_n_magnitudes: Vec<(i64, f64)>,
    /// Estimated error of the extrapolated value.
    pub tail_estimate: f64,
    pub min_pole_distance: f64,
    pub nearest_pole: Option<(i64, Complex64)>,
    pub crossed_poles: usize,
    /// Truncation `(n, ν)` of the largest box summed.
    pub n_cut: i64,
    pub nu_cut: f64,
    /// Successive extrapolation estimates, coarsest first.
    pub extrapolation: Vec<Complex64>,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbResult {
    pub value: Complex64,
    pub abs_err: f64,
    pub diagnostics: MbDiagnostics,
}

impl MbResult {
    pub fn converged(&self, tol: f64) -> bool {
        self.abs_err <= tol * self.value.norm()
    }

    /// Fails with [`Error::TruncationNotConverged`] unless the relative error
    /// estimate is within `tol`.
    pub fn require_converged(self, tol: f64) -> Result<Self> {
        if self.converged(tol) {
            Ok(self)
        } else {
            Err(Error::TruncationNotConverged { tail: self.abs_err / self.value.norm(), tol })
        }
    }
}

/// `s = ((n + iν)/2, (-n + iν)/2)`.
pub fn s_of(n: i64, nu: Complex64) -> BalancedExponent {
    let i_nu = Complex64::new(0.0, 1.0) * nu;
    BalancedExponent::from_mean(0.5 * i_nu, n)
}
