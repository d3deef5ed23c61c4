//! The Clebsch-Gordan kernel `W`, its coefficient functions and the
//! infinitesimal covariance check.
//!
//! `W(a₁,a₂,a₃; z₁,z₂,z₃)` is the conformal triangle
//!
//! ```text
//! [z₂-z₁]^-(1+a₁+a₂+a₃)/2 · [z₃-z₁]^-(1+a₁-a₂-a₃)/2 · [z₂-z₃]^-(1-a₁+a₂-a₃)/2
//! ```
//!
//! which is single valued only when `m₁+m₂+m₃` is even.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{a_ratio, bracket_pow, propagator, sign, BalancedExponent, PointPair, SpinLabel};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;

/// The three propagator indices of `W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgExponentTriple {
    pub e12: BalancedExponent,
    pub e13: BalancedExponent,
    pub e23: BalancedExponent,
}

pub(crate) fn check_parity(what: &str, ms: &[i64]) -> Result<()> {
    if ms.iter().sum::<i64>().rem_euclid(2) != 0 {
        return Err(Error::ParityViolation(format!(
            "{what} = {}",
            ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" + ")
        )));
    }
    Ok(())
}

/// `(c + s₁a₁ + s₂a₂ + s₃a₃) / 2` for parity-checked labels.
pub(crate) fn half_combo(c: f64, terms: &[(f64, &SpinLabel)]) -> BalancedExponent {
    let mut e = BalancedExponent::scalar(Complex64::new(c, 0.0));
    for &(s, label) in terms {
        let x = label.exponent();
        e = if s > 0.0 { e + x } else { e - x };
    }
    e.half().expect("parity checked by caller")
}

pub fn cg_exponents(a1: &SpinLabel, a2: &SpinLabel, a3: &SpinLabel) -> Result<CgExponentTriple> {
    check_parity("m1 + m2 + m3", &[a1.m, a2.m, a3.m])?;
    Ok(CgExponentTriple {
        e12: half_combo(1.0, &[(1.0, a1), (1.0, a2), (1.0, a3)]),
        e13: half_combo(1.0, &[(1.0, a1), (-1.0, a2), (-1.0, a3)]),
        e23: half_combo(1.0, &[(-1.0, a1), (1.0, a2), (-1.0, a3)]),
    })
}

fn distinct(p: &PointPair, q: &PointPair) -> bool {
    p.z != q.z || p.zbar != q.zbar
}

/// `W(a₁,a₂,a₃; z₁,z₂,z₃)`. Accepts independent pairs, which is how the
/// finite-difference generators probe `∂` and `∂̄` separately.
pub fn w_kernel(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    p1: &PointPair,
    p2: &PointPair,
    p3: &PointPair,
) -> Result<Complex64> {
    let e = cg_exponents(a1, a2, a3)?;
    w_from_exponents(&e, p1, p2, p3)
}

pub(crate) fn w_from_exponents(
    e: &CgExponentTriple,
    p1: &PointPair,
    p2: &PointPair,
    p3: &PointPair,
) -> Result<Complex64> {
    if !(distinct(p1, p2) && distinct(p1, p3) && distinct(p2, p3)) {
        return Err(Error::CoincidentPoints("W needs three distinct points".into()));
    }
    Ok(propagator(&(*p2 - *p1), &e.e12)?
        * propagator(&(*p3 - *p1), &e.e13)?
        * propagator(&(*p2 - *p3), &e.e23)?)
}

/// Distance of `[-z₁]^(1+a₁) W` from its two-point limit
/// `[z₂-z₃]^-(1-a₁+a₂-a₃)/2`, with `z₁ = R e^{iφ}` on a fixed ray.
pub fn w_asymptotic_residual(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    radius: f64,
) -> Result<f64> {
    let e = cg_exponents(a1, a2, a3)?;
    let p1 = PointPair::new(Complex64::from_polar(radius, 0.7));
    let p2 = PointPair::xy(0.4, -0.3);
    let p3 = PointPair::xy(-0.2, 0.5);
    let w = w_from_exponents(&e, &p1, &p2, &p3)?;
    let leading = a1.exponent().offset(1.0);
    let scaled = bracket_pow(&-p1, &leading)? * w;
    let limit = propagator(&(p2 - p3), &e.e23)?;
    Ok((scaled - limit).norm())
}

/// `A(a₁,a₂,a₃) = π a((1+a₁-a₂-a₃)/2, 1+a₃) / a((1+a₁-a₂+a₃)/2)`, the
/// coefficient of the intertwiner acting on `W`.
pub fn coefficient_a(a1: &SpinLabel, a2: &SpinLabel, a3: &SpinLabel) -> Result<Complex64> {
    check_parity("m1 + m2 + m3", &[a1.m, a2.m, a3.m])?;
    let num = [
        half_combo(1.0, &[(1.0, a1), (-1.0, a2), (-1.0, a3)]),
        a3.exponent().offset(1.0),
    ];
    let den = [half_combo(1.0, &[(1.0, a1), (-1.0, a2), (1.0, a3)])];
    Ok(PI * a_ratio(&num, &den)?)
}

/// `B(a₁,a₂,a₃) = 4π³ a((1-a₁+a₂-a₃)/2, 1+a₃) / a((1-a₁+a₂+a₃)/2)`.
pub fn coefficient_b(a1: &SpinLabel, a2: &SpinLabel, a3: &SpinLabel) -> Result<Complex64> {
    check_parity("m1 + m2 + m3", &[a1.m, a2.m, a3.m])?;
    let num = [
        half_combo(1.0, &[(-1.0, a1), (1.0, a2), (-1.0, a3)]),
        a3.exponent().offset(1.0),
    ];
    let den = [half_combo(1.0, &[(-1.0, a1), (1.0, a2), (1.0, a3)])];
    Ok(4.0 * PI.powi(3) * a_ratio(&num, &den)?)
}

/// Plancherel weight `ρ(a) = -a ā / 4π⁴ = (m²/4 + σ²) / 4π⁴`.
pub fn weight_rho(a: &SpinLabel) -> f64 {
    let m = a.m as f64;
    (0.25 * m * m + a.sigma * a.sigma) / (4.0 * PI.powi(4))
}

/// `ρ(a) A(-a₁,-a₂,-a) B(a₁,a₂,a) - (-1)^m`, which vanishes identically.
pub fn completeness_residual(a1: &SpinLabel, a2: &SpinLabel, a: &SpinLabel) -> Result<Complex64> {
    check_parity("m1 + m2 + m", &[a1.m, a2.m, a.m])?;
    let lhs = weight_rho(a)
        * coefficient_a(&a1.negate(), &a2.negate(), &a.negate())?
        * coefficient_b(a1, a2, a)?;
    Ok(lhs - sign(a.m))
}

/// Matrix entry of the generator matrix `E^(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorIndex {
    E11,
    E12,
    E21,
    E22,
}

impl GeneratorIndex {
    pub const INDEPENDENT: [GeneratorIndex; 3] =
        [GeneratorIndex::E11, GeneratorIndex::E12, GeneratorIndex::E21];
}

/// One generator `E_ik` (or `Ē_ik` when `barred`) of the representation with
/// label `a`, using `s = (a-1)/2`, `s̄ = (ā-1)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorComponent {
    pub index: GeneratorIndex,
    pub barred: bool,
    pub spin: SpinLabel,
}

impl GeneratorComponent {
    pub fn new(index: GeneratorIndex, barred: bool, spin: SpinLabel) -> Self {
        Self { index, barred, spin }
    }

    fn s(&self) -> Complex64 {
        let a = if self.barred { self.spin.a_bar() } else { self.spin.a() };
        0.5 * (a - 1.0)
    }
}

/// Applies a generator to `f` at `p`, realising `∂` (or `∂̄`) as a central
/// difference in `z` (or `z̄`) with the other coordinate held fixed.
///
/// `E₁₁ = z∂ - s`, `E₂₁ = -∂`, `E₁₂ = z²∂ - 2sz`, `E₂₂ = -E₁₁`.
pub fn generator_apply<F>(g: &GeneratorComponent, f: F, p: &PointPair, h: f64) -> Result<Complex64>
where
    F: Fn(&PointPair) -> Result<Complex64>,
{
    if !(1e-6..=1e-3).contains(&h) {
        return Err(Error::InvalidParameter(format!("step h = {h} outside [1e-6, 1e-3]")));
    }
    let (coord, plus, minus) = if g.barred {
        (p.zbar, p.shift_anti(h.into()), p.shift_anti((-h).into()))
    } else {
        (p.z, p.shift_hol(h.into()), p.shift_hol((-h).into()))
    };
    let deriv = || -> Result<Complex64> {
        let (fp, fm) = (f(&plus), f(&minus));
        match (fp, fm) {
            (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => Ok((a - b) / (2.0 * h)),
            _ => Err(Error::Domain("singularity inside the finite-difference stencil".into())),
        }
    };
    let s = g.s();
    Ok(match g.index {
        GeneratorIndex::E21 => -deriv()?,
        GeneratorIndex::E11 => coord * deriv()? - s * f(p)?,
        GeneratorIndex::E22 => -(coord * deriv()? - s * f(p)?),
        GeneratorIndex::E12 => coord * coord * deriv()? - 2.0 * s * coord * f(p)?,
    })
}

/// `(E^(-a₁)_{z₁} + E^(-a₂)_{z₂} + E^(a₃)_{z₃}) W` for one generator entry.
pub fn covariance_residual(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    points: [&PointPair; 3],
    index: GeneratorIndex,
    barred: bool,
    h: f64,
) -> Result<Complex64> {
    let e = cg_exponents(a1, a2, a3)?;
    let [p1, p2, p3] = points;
    let labels = [a1.negate(), a2.negate(), *a3];
    let mut total = Complex64::new(0.0, 0.0);
    for (slot, label) in labels.iter().enumerate() {
        let g = GeneratorComponent::new(index, barred, *label);
        let at = [*p1, *p2, *p3][slot];
        let f = |q: &PointPair| {
            let mut pts = [*p1, *p2, *p3];
            pts[slot] = *q;
            w_from_exponents(&e, &pts[0], &pts[1], &pts[2])
        };
        total += generator_apply(&g, f, &at, h)?;
    }
    Ok(total)
}
