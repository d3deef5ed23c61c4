//! Plane integrals with known closed forms (chain and star-triangle) and the
//! three-propagator integrals that define `Φ₁`, `Φ₂`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{integrate_plane, PlaneOptions, PlanePoint, QuadratureResult, Singularity};
use crate::error::{Error, Result};
use crate::exponents::{a_prod, propagator, BalancedExponent, PointPair, SpinLabel, BALANCE_TOL};
use crate::kernels::{check_parity, half_combo};

/// Quadrature against a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    /// `|quadrature - closed| / |closed|`.
    pub residual: f64,
    pub closed_form: Complex64,
    pub quadrature: QuadratureResult,
}

impl RelationCheck {
    fn new(quadrature: QuadratureResult, closed_form: Complex64) -> Self {
        let residual = (quadrature.value - closed_form).norm() / closed_form.norm();
        Self { residual, closed_form, quadrature }
    }
}

fn nan_on_err(v: Result<Complex64>) -> Complex64 {
    v.unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

fn two() -> BalancedExponent {
    BalancedExponent::scalar(Complex64::new(2.0, 0.0))
}

/// `∫ d²w / ([z₁-w]^α [w-z₂]^β)` against `π a(α, β, γ) / [z₂-z₁]^(α+β-1)`
/// with `γ = 2 - α - β`.
pub fn verify_chain(
    alpha: &BalancedExponent,
    beta: &BalancedExponent,
    z1: Complex64,
    z2: Complex64,
    opts: &PlaneOptions,
) -> Result<RelationCheck> {
    if z1 == z2 {
        return Err(Error::CoincidentPoints("chain endpoints coincide".into()));
    }
    let gamma = two() - *alpha - *beta;
    let closed = PI
        * a_prod(&[*alpha, *beta, gamma])?
        * propagator(&PointPair::new(z2 - z1), &(*alpha + *beta).offset(-1.0))?;
    let (a, b) = (*alpha, *beta);
    let f = move |p: &PlanePoint| {
        nan_on_err(propagator(&-p.offset_from(0, z1), &a).and_then(|x| Ok(x * propagator(&p.offset_from(1, z2), &b)?)))
    };
    let sing = [Singularity::new(z1, a), Singularity::new(z2, b)];
    let decay = 2.0 * (a.mean_re() + b.mean_re());
    let quad = integrate_plane(f, &sing, decay, opts.tol, opts.budget)?;
    Ok(RelationCheck::new(quad, closed))
}

/// `∫ d²w / ([z₁-w]^α [z₂-w]^β [z₃-w]^γ)` against
/// `π a(α, β, γ) / ([z₂-z₁]^(1-γ) [z₁-z₃]^(1-β) [z₃-z₂]^(1-α))`, which needs
/// `α + β + γ = 2` in both layers.
pub fn verify_star(
    alpha: &BalancedExponent,
    beta: &BalancedExponent,
    gamma: &BalancedExponent,
    points: [Complex64; 3],
    opts: &PlaneOptions,
) -> Result<RelationCheck> {
    let total = *alpha + *beta + *gamma;
    if (total.hol() - 2.0).norm() > BALANCE_TOL || (total.anti() - 2.0).norm() > BALANCE_TOL {
        return Err(Error::UniquenessViolation { hol: total.hol(), anti: total.anti() });
    }
    let [z1, z2, z3] = points;
    if z1 == z2 || z1 == z3 || z2 == z3 {
        return Err(Error::CoincidentPoints("star vertices must be distinct".into()));
    }
    let exps = [*alpha, *beta, *gamma];
    let line = |from: Complex64, to: Complex64, e: &BalancedExponent| propagator(&PointPair::new(to - from), &e.one_minus());
    let closed = PI * a_prod(&exps)? * line(z1, z2, gamma)? * line(z3, z1, beta)? * line(z2, z3, alpha)?;
    let f = move |p: &PlanePoint| {
        let mut acc = Complex64::new(1.0, 0.0);
        for (k, (z, e)) in points.iter().zip(&exps).enumerate() {
            acc *= nan_on_err(propagator(&-p.offset_from(k, *z), e));
        }
        acc
    };
    let sing = [0, 1, 2].map(|k| Singularity::new(points[k], exps[k]));
    let decay = 2.0 * total.mean_re();
    let quad = integrate_plane(f, &sing, decay, opts.tol, opts.budget)?;
    Ok(RelationCheck::new(quad, closed))
}

/// `∫ d²y / ([y-1]^A₁ [-y]^A₂ [z-y]^A₃)`, the common shape of `Φ₁` and `Φ₂`.
pub fn triangle_direct(
    exps: [BalancedExponent; 3],
    z: &PointPair,
    opts: &PlaneOptions,
) -> Result<QuadratureResult> {
    if !z.conjugate {
        return Err(Error::InvalidParameter("the evaluation point must be a conjugate pair".into()));
    }
    let zv = z.z;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if zv == zero || zv == one {
        return Err(Error::CoincidentPoints(format!("z = {zv} sits on a fixed vertex")));
    }
    let [e1, e2, e3] = exps;
    let f = move |p: &PlanePoint| {
        nan_on_err((|| {
            Ok(propagator(&p.offset_from(0, one), &e1)?
                * propagator(&-p.offset_from(1, zero), &e2)?
                * propagator(&-p.offset_from(2, zv), &e3)?)
        })())
    };
    let sing = [Singularity::new(one, e1), Singularity::new(zero, e2), Singularity::new(zv, e3)];
    let decay = 2.0 * (e1.mean_re() + e2.mean_re() + e3.mean_re());
    integrate_plane(f, &sing, decay, opts.tol, opts.budget)
}

pub(crate) fn phi1_exponents(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    l: &SpinLabel,
    cp: &SpinLabel,
) -> Result<[BalancedExponent; 3]> {
    check_parity("m1 + m2 + m_c'", &[a1.m, a2.m, cp.m])?;
    check_parity("m_c' + m3 + m_l", &[cp.m, a3.m, l.m])?;
    Ok([
        half_combo(1.0, &[(-1.0, a1), (1.0, a2), (1.0, cp)]),
        half_combo(1.0, &[(1.0, a1), (-1.0, a2), (1.0, cp)]),
        half_combo(1.0, &[(-1.0, a3), (-1.0, l), (1.0, cp)]),
    ])
}

/// `Φ₂` exponents `[B₁, B₂, B₃]` and the prefactor exponent `(1+a₂+a₃+c)/2`.
pub(crate) fn phi2_exponents(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    l: &SpinLabel,
    c: &SpinLabel,
) -> Result<([BalancedExponent; 3], BalancedExponent)> {
    check_parity("m2 + m3 + m_c", &[a2.m, a3.m, c.m])?;
    check_parity("m1 + m_c + m_l", &[a1.m, c.m, l.m])?;
    Ok((
        [
            half_combo(1.0, &[(1.0, a1), (1.0, l), (1.0, c)]),
            half_combo(1.0, &[(1.0, a2), (-1.0, a3), (-1.0, c)]),
            half_combo(1.0, &[(-1.0, a2), (1.0, a3), (-1.0, c)]),
        ],
        half_combo(1.0, &[(1.0, a2), (1.0, a3), (1.0, c)]),
    ))
}

/// Direct quadrature of `Φ̄₁(z) = ∫ d²y [y-1]^-A₁ [-y]^-A₂ [z-y]^-A₃`.
pub fn phi1_direct(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    l: &SpinLabel,
    cp: &SpinLabel,
    z: &PointPair,
    opts: &PlaneOptions,
) -> Result<QuadratureResult> {
    triangle_direct(phi1_exponents(a1, a2, a3, l, cp)?, z, opts)
}

/// How to read the third propagator of `Φ₂`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum Phi2Reading {
    /// `[z₀ - z]`: the integration variable, as the diagram dictates.
    #[default]
    IntegrationVariable,
    /// `[z₁ - z]` taken literally, with `z₁` a fixed external point. The
    /// factor leaves the integral, whose remaining decay is too weak for the
    /// unitary series.
    Literal { z1: Complex64 },
}

/// `Φ₂(z) = [z]^-(1+a₂+a₃+c)/2 ∫ d²z₀ [z₀-1]^-B₁ [-z₀]^-B₂ [z₀-z]^-B₃`.
pub fn phi2_direct(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    l: &SpinLabel,
    c: &SpinLabel,
    z: &PointPair,
    opts: &PlaneOptions,
) -> Result<QuadratureResult> {
    phi2_direct_with([a1, a2, a3, l, c], z, opts, Phi2Reading::default())
}

pub fn phi2_direct_with(
    labels: [&SpinLabel; 5],
    z: &PointPair,
    opts: &PlaneOptions,
    reading: Phi2Reading,
) -> Result<QuadratureResult> {
    let [a1, a2, a3, l, c] = labels;
    let ([b1, b2, b3], pre) = phi2_exponents(a1, a2, a3, l, c)?;
    let prefactor = propagator(z, &pre)?;
    match reading {
        Phi2Reading::IntegrationVariable => {
            // [z₀ - z]^-B₃ = (-1)^n [z - z₀]^-B₃
            let flip = crate::exponents::sign(b3.n());
            Ok(triangle_direct([b1, b2, b3], z, opts)?.scaled(prefactor * flip))
        }
        Phi2Reading::Literal { z1 } => {
            let fixed = propagator(&PointPair::new(z1 - z.z), &b3)?;
            let one = Complex64::new(1.0, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            let f = move |p: &PlanePoint| {
                nan_on_err((|| Ok(propagator(&p.offset_from(0, one), &b1)? * propagator(&-p.offset_from(1, zero), &b2)?))())
            };
            let sing = [Singularity::new(one, b1), Singularity::new(zero, b2)];
            let decay = 2.0 * (b1.mean_re() + b2.mean_re());
            Ok(integrate_plane(f, &sing, decay, opts.tol, opts.budget)?.scaled(prefactor * fixed))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{a_func, bracket_pow};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn opts(tol: f64) -> PlaneOptions {
        PlaneOptions { tol, budget: 4_000_000 }
    }

    #[test]
    fn chain_closed_form_value() {
        let al = BalancedExponent::real(0.75, 0.75).unwrap();
        let r = verify_chain(&al, &al, c(0.0, 0.0), c(1.0, 0.0), &opts(1e-5)).unwrap();
        let g = a_func(&al).unwrap();
        assert!((r.closed_form - PI * g * g).norm() < 1e-12 * r.closed_form.norm());
        assert!(r.residual < 1e-4, "{r:?}");
    }

    #[test]
    fn chain_with_integer_part() {
        let al = BalancedExponent::real(1.25, 0.25).unwrap();
        let be = BalancedExponent::real(0.75, 0.75).unwrap();
        let r = verify_chain(&al, &be, c(0.0, 0.0), c(1.0, 0.0), &opts(1e-5)).unwrap();
        assert!(r.residual < 1e-4, "{r:?}");
    }

    #[test]
    fn chain_pole_in_closed_form() {
        // γ = (1, 1): Γ(1 - γ̄) = Γ(0)
        let al = BalancedExponent::real(0.5, 0.5).unwrap();
        assert!(matches!(
            verify_chain(&al, &al, c(0.0, 0.0), c(1.0, 0.0), &opts(1e-4)),
            Err(Error::PoleAtArgument { .. })
        ));
    }

    #[test]
    fn star_symmetric_point() {
        let e = BalancedExponent::real(2.0 / 3.0, 2.0 / 3.0).unwrap();
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        let r = verify_star(&e, &e, &e, pts, &opts(1e-5)).unwrap();
        assert!(r.residual < 1e-4, "{r:?}");
    }

    #[test]
    fn star_permutation_symmetry() {
        let al = BalancedExponent::new(c(1.2, 0.1), c(0.2, 0.1)).unwrap();
        let be = BalancedExponent::new(c(0.3, -0.4), c(1.3, -0.4)).unwrap();
        let ga = two() - al - be;
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(0.3, 0.8)];
        let o = opts(1e-4);
        let r1 = verify_star(&al, &be, &ga, pts, &o).unwrap();
        let r2 = verify_star(&be, &al, &ga, [pts[1], pts[0], pts[2]], &o).unwrap();
        let r3 = verify_star(&ga, &be, &al, [pts[2], pts[1], pts[0]], &o).unwrap();
        assert!((r1.closed_form - r2.closed_form).norm() < 1e-12 * r1.closed_form.norm());
        assert!((r1.residual - r2.residual).abs() < 1e-10);
        assert!((r1.residual - r3.residual).abs() < 1e-10);
        assert!(r1.residual < 1e-3, "{r1:?}");
    }

    #[test]
    fn star_requires_uniqueness() {
        let e = BalancedExponent::real(0.5, 0.5).unwrap();
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        assert!(matches!(verify_star(&e, &e, &e, pts, &opts(1e-4)), Err(Error::UniquenessViolation { .. })));
    }

    #[test]
    fn phi_preconditions() {
        let s = |m, sg| SpinLabel::new(m, sg);
        let z = PointPair::new(c(2.0, 1.0));
        let o = opts(1e-4);
        assert!(matches!(
            phi1_direct(&s(0, 0.2), &s(0, 0.5), &s(0, 0.9), &s(0, 1.3), &s(1, 0.7), &z, &o),
            Err(Error::ParityViolation(_))
        ));
        assert!(matches!(
            phi2_direct(&s(0, 0.2), &s(0, 0.5), &s(1, 0.9), &s(0, 1.3), &s(0, 0.7), &z, &o),
            Err(Error::ParityViolation(_))
        ));
        let labels = [&s(0, 0.2), &s(0, 0.5), &s(0, 0.9), &s(0, 1.3), &s(0, 0.7)];
        assert!(matches!(
            phi2_direct_with(labels, &z, &o, Phi2Reading::Literal { z1: c(0.5, 0.5) }),
            Err(Error::InsufficientDecay { .. })
        ));
    }

    #[test]
    fn phi2_reading_matches_explicit_integrand() {
        let s = |m, sg| SpinLabel::new(m, sg);
        let (a1, a2, a3, l, cc) = (s(1, 0.2), s(1, -0.5), s(0, 0.9), s(0, 1.3), s(1, 0.4));
        let z = PointPair::new(c(0.7, -1.2));
        let o = opts(1e-6);
        let got = phi2_direct(&a1, &a2, &a3, &l, &cc, &z, &o).unwrap();
        let ([b1, b2, b3], pre) = phi2_exponents(&a1, &a2, &a3, &l, &cc).unwrap();
        let zv = z.z;
        let f = move |p: &PlanePoint| {
            let y = p.z();
            bracket_pow(&PointPair::new(y - 1.0), &-b1).unwrap()
                * bracket_pow(&PointPair::new(-y), &-b2).unwrap()
                * bracket_pow(&PointPair::new(y - zv), &-b3).unwrap()
        };
        let sing = [Singularity::new(c(1.0, 0.0), b1), Singularity::new(c(0.0, 0.0), b2), Singularity::new(zv, b3)];
        let decay = 2.0 * (b1.mean_re() + b2.mean_re() + b3.mean_re());
        let raw = integrate_plane(f, &sing, decay, 1e-6, 4_000_000).unwrap();
        let want = raw.value * bracket_pow(&z, &-pre).unwrap();
        assert!((got.value - want).norm() < 1e-5 * want.norm(), "{} vs {want}", got.value);
    }
}
