//! Balanced exponents, spin labels and the `a`-function.
//!
//! A [`BalancedExponent`] is a pair `(α, ᾱ)` of complex numbers whose
//! difference is an integer. It is the index carried by every propagator
//! `1/[z]^α = 1/(z^α z̄^ᾱ)`, and the argument of the coefficient function
//! `a(α) = Γ(1 - ᾱ) / Γ(α)`. Unitary principal series labels
//! ([`SpinLabel`]) embed as `(m/2 + iσ, -m/2 + iσ)`.

mod gamma;

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use gamma::log_gamma;

/// Tolerance on `hol - anti` being an integer.
pub const BALANCE_TOL: f64 = 1e-9;
/// Distance below which an argument counts as sitting on the gamma lattice.
pub const LATTICE_TOL: f64 = 1e-8;
/// Distance from the pole lattice used by identity suites when sampling.
pub const POLE_CLEARANCE: f64 = 0.05;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalancedExponent {
    hol: Complex64,
    anti: Complex64,
    n: i64,
}

impl BalancedExponent {
    /// Builds `(hol, anti)`, snapping the difference to the nearest integer.
    ///
    /// The snap keeps `hol + anti` fixed and moves both parts symmetrically.
    pub fn new(hol: Complex64, anti: Complex64) -> Result<Self> {
        let diff = hol - anti;
        let n = diff.re.round();
        if (diff - n).norm() > BALANCE_TOL || !n.is_finite() {
            return Err(Error::NotBalanced { difference: diff });
        }
        Ok(Self::from_mean(0.5 * (hol + anti), n as i64))
    }

    /// `(mean + n/2, mean - n/2)`.
    pub fn from_mean(mean: Complex64, n: i64) -> Self {
        let half = 0.5 * n as f64;
        Self { hol: mean + half, anti: mean - half, n }
    }

    /// Both parts equal to `x`.
    pub fn scalar(x: Complex64) -> Self {
        Self { hol: x, anti: x, n: 0 }
    }

    pub fn real(hol: f64, anti: f64) -> Result<Self> {
        Self::new(Complex64::new(hol, 0.0), Complex64::new(anti, 0.0))
    }

    pub fn hol(&self) -> Complex64 {
        self.hol
    }

    pub fn anti(&self) -> Complex64 {
        self.anti
    }

    /// The integer `hol - anti`.
    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn sum(&self) -> Complex64 {
        self.hol + self.anti
    }

    /// `Re(hol + anti) / 2`, the exponent felt by `|z|` in `[z]^α = |z|^(α+ᾱ) ...`.
    pub fn mean_re(&self) -> f64 {
        0.5 * self.sum().re
    }

    /// `(anti, hol)`.
    pub fn swap(&self) -> Self {
        Self { hol: self.anti, anti: self.hol, n: -self.n }
    }

    /// `(1 - hol, 1 - anti)`.
    pub fn one_minus(&self) -> Self {
        Self { hol: 1.0 - self.hol, anti: 1.0 - self.anti, n: -self.n }
    }

    /// Adds `c` to both parts.
    pub fn offset(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        Self { hol: self.hol + c, anti: self.anti + c, n: self.n }
    }

    /// Halves both parts; fails unless `n` is even.
    pub fn half(&self) -> Result<Self> {
        if self.n % 2 != 0 {
            return Err(Error::NotBalanced { difference: 0.5 * (self.hol - self.anti) });
        }
        Ok(Self { hol: 0.5 * self.hol, anti: 0.5 * self.anti, n: self.n / 2 })
    }
}

impl Add for BalancedExponent {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { hol: self.hol + rhs.hol, anti: self.anti + rhs.anti, n: self.n + rhs.n }
    }
}

impl Sub for BalancedExponent {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { hol: self.hol - rhs.hol, anti: self.anti - rhs.anti, n: self.n - rhs.n }
    }
}

impl Neg for BalancedExponent {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hol: -self.hol, anti: -self.anti, n: -self.n }
    }
}

impl fmt::Display for BalancedExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.hol, self.anti)
    }
}

#[derive(Serialize, Deserialize)]
struct ExponentRepr {
    hol: [f64; 2],
    anti: [f64; 2],
}

impl Serialize for BalancedExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExponentRepr {
            hol: [self.hol.re, self.hol.im],
            anti: [self.anti.re, self.anti.im],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BalancedExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ExponentRepr::deserialize(d)?;
        Self::new(Complex64::new(r.hol[0], r.hol[1]), Complex64::new(r.anti[0], r.anti[1]))
            .map_err(serde::de::Error::custom)
    }
}

/// Unitary principal series label `a = m/2 + iσ`, `ā = -m/2 + iσ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinLabel {
    pub m: i64,
    pub sigma: f64,
}

impl SpinLabel {
    pub fn new(m: i64, sigma: f64) -> Self {
        Self { m, sigma }
    }

    pub fn a(&self) -> Complex64 {
        Complex64::new(0.5 * self.m as f64, self.sigma)
    }

    pub fn a_bar(&self) -> Complex64 {
        Complex64::new(-0.5 * self.m as f64, self.sigma)
    }

    pub fn exponent(&self) -> BalancedExponent {
        BalancedExponent { hol: self.a(), anti: self.a_bar(), n: self.m }
    }

    /// The label of the equivalent representation, `a -> -a`.
    pub fn negate(&self) -> Self {
        Self { m: -self.m, sigma: -self.sigma }
    }
}

impl From<SpinLabel> for BalancedExponent {
    fn from(s: SpinLabel) -> Self {
        s.exponent()
    }
}

/// A point `(z, z̄)`; conjugate pairs are the physical locus, independent
/// pairs exist for one-sided finite differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointPair {
    pub z: Complex64,
    pub zbar: Complex64,
    pub conjugate: bool,
}

impl PointPair {
    pub fn new(z: Complex64) -> Self {
        Self { z, zbar: z.conj(), conjugate: true }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self::new(Complex64::new(x, y))
    }

    pub fn independent(z: Complex64, zbar: Complex64) -> Self {
        Self { z, zbar, conjugate: false }
    }

    /// Moves only the holomorphic coordinate.
    pub fn shift_hol(&self, dz: Complex64) -> Self {
        Self::independent(self.z + dz, self.zbar)
    }

    /// Moves only the antiholomorphic coordinate.
    pub fn shift_anti(&self, dzbar: Complex64) -> Self {
        Self::independent(self.z, self.zbar + dzbar)
    }
}

impl From<Complex64> for PointPair {
    fn from(z: Complex64) -> Self {
        Self::new(z)
    }
}

impl Sub for PointPair {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            z: self.z - rhs.z,
            zbar: self.zbar - rhs.zbar,
            conjugate: self.conjugate && rhs.conjugate,
        }
    }
}

impl Add for PointPair {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            z: self.z + rhs.z,
            zbar: self.zbar + rhs.zbar,
            conjugate: self.conjugate && rhs.conjugate,
        }
    }
}

impl Neg for PointPair {
    type Output = Self;
    fn neg(self) -> Self {
        Self { z: -self.z, zbar: -self.zbar, conjugate: self.conjugate }
    }
}

/// Result of an `a`-function evaluation in log space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum LogA {
    Finite(Complex64),
    Zero,
}

fn lattice_index(w: Complex64) -> Option<i64> {
    // nonpositive integer within LATTICE_TOL
    let k = w.re.round();
    if k <= 0.0 && (w - k).norm() < LATTICE_TOL {
        Some(-k as i64)
    } else {
        None
    }
}

fn ln_factorial(k: i64) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// `ln a(α)` from raw parts; `index` tags the factor in errors.
pub(crate) fn log_a_parts(hol: Complex64, anti: Complex64, index: usize) -> Result<LogA> {
    let num = 1.0 - anti;
    match (lattice_index(num), lattice_index(hol)) {
        (Some(k), Some(j)) => {
            // Both gammas singular; the balanced limit is -(-1)^(k+j) j!/k!.
            let phase = if (k + j) % 2 == 0 { std::f64::consts::PI } else { 0.0 };
            Ok(LogA::Finite(Complex64::new(ln_factorial(j) - ln_factorial(k), phase)))
        }
        (Some(_), None) => Err(Error::PoleAtArgument { argument: num, index }),
        (None, Some(_)) => Ok(LogA::Zero),
        (None, None) => Ok(LogA::Finite(
            gamma::log_gamma_raw(num) - gamma::log_gamma_raw(hol),
        )),
    }
}

/// `a(α) = Γ(1 - ᾱ) / Γ(α)`.
pub fn a_func(alpha: &BalancedExponent) -> Result<Complex64> {
    Ok(match log_a_parts(alpha.hol, alpha.anti, 0)? {
        LogA::Finite(l) => l.exp(),
        LogA::Zero => Complex64::new(0.0, 0.0),
    })
}

/// `a(α₁) a(α₂) ...`, accumulated as a single log-space sum.
pub fn a_prod(alphas: &[BalancedExponent]) -> Result<Complex64> {
    let mut log = Complex64::new(0.0, 0.0);
    let mut zero = false;
    for (i, alpha) in alphas.iter().enumerate() {
        match log_a_parts(alpha.hol, alpha.anti, i)? {
            LogA::Finite(l) => log += l,
            LogA::Zero => zero = true,
        }
    }
    Ok(if zero { Complex64::new(0.0, 0.0) } else { log.exp() })
}

/// `a(numerators...) / a(denominators...)`.
pub fn a_ratio(num: &[BalancedExponent], den: &[BalancedExponent]) -> Result<Complex64> {
    let mut log = Complex64::new(0.0, 0.0);
    let mut zero = false;
    for (i, alpha) in num.iter().enumerate() {
        match log_a_parts(alpha.hol, alpha.anti, i)? {
            LogA::Finite(l) => log += l,
            LogA::Zero => zero = true,
        }
    }
    for (i, alpha) in den.iter().enumerate() {
        match log_a_parts(alpha.hol, alpha.anti, num.len() + i)? {
            LogA::Finite(l) => log -= l,
            LogA::Zero => {
                return Err(Error::PoleAtArgument { argument: alpha.hol, index: num.len() + i })
            }
        }
    }
    Ok(if zero { Complex64::new(0.0, 0.0) } else { log.exp() })
}

/// `α ↦ (1 - ᾱ, 1 - α)`, the argument map of `a(α) a(1 - ᾱ) = 1`.
pub fn bar_reflect(alpha: &BalancedExponent) -> BalancedExponent {
    BalancedExponent { hol: 1.0 - alpha.anti, anti: 1.0 - alpha.hol, n: alpha.n }
}

/// `[z]^α = z^α z̄^ᾱ`.
///
/// On conjugate pairs this is the single-valued `|z|^(α+ᾱ) e^(i n arg z)`.
/// Independent pairs use `exp(α Log z + ᾱ conj(Log conj(z̄)))`, which agrees
/// with the conjugate formula whenever `z̄ = conj(z)`.
pub fn bracket_pow(p: &PointPair, alpha: &BalancedExponent) -> Result<Complex64> {
    if p.conjugate {
        let r = p.z.norm();
        if r == 0.0 {
            return if alpha.sum().re > 0.0 {
                Ok(Complex64::new(0.0, 0.0))
            } else {
                Err(Error::Domain(format!("[0]^{alpha} with Re(hol + anti) <= 0")))
            };
        }
        let modulus = (alpha.sum() * r.ln()).exp();
        Ok(modulus * (I * (alpha.n as f64) * p.z.arg()).exp())
    } else {
        if p.z == Complex64::new(0.0, 0.0) || p.zbar == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("bracket power of an independent pair at zero".into()));
        }
        let log_z = p.z.ln();
        let log_zbar = p.zbar.conj().ln().conj();
        Ok((alpha.hol * log_z + alpha.anti * log_zbar).exp())
    }
}

/// `1/[z]^α`.
pub fn propagator(p: &PointPair, alpha: &BalancedExponent) -> Result<Complex64> {
    bracket_pow(p, &-*alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseBase {
    MinusOne,
    I,
}

/// `base^n` as an exact unit complex number.
pub fn phase_pow(n: i64, base: PhaseBase) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    match base {
        PhaseBase::MinusOne => {
            if n.rem_euclid(2) == 0 {
                one
            } else {
                -one
            }
        }
        PhaseBase::I => match n.rem_euclid(4) {
            0 => one,
            1 => I,
            2 => -one,
            _ => -I,
        },
    }
}

/// `(-1)^n`.
pub fn sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn be(h: f64, a: f64) -> BalancedExponent {
        BalancedExponent::real(h, a).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(matches!(
            BalancedExponent::real(0.5, 0.25),
            Err(Error::NotBalanced { .. })
        ));
        let snapped = BalancedExponent::real(1.5 + 1e-11, 0.5).unwrap();
        assert_eq!(snapped.n(), 1);
        assert_eq!(snapped.hol() - snapped.anti(), c(1.0, 0.0));
    }

    #[test]
    fn spin_label_embedding() {
        let s = SpinLabel::new(3, -0.4);
        let e = s.exponent();
        assert_eq!(e.n(), 3);
        assert_eq!(e.hol() - e.anti(), c(3.0, 0.0));
        assert_eq!(s.negate().exponent(), -e);
    }

    #[test]
    fn a_func_examples() {
        assert!((a_func(&be(0.5, 0.5)).unwrap() - 1.0).norm() < 1e-15);
        assert!((a_func(&be(1.5, 0.5)).unwrap() - 2.0).norm() < 1e-14);
        assert!(matches!(a_func(&be(1.0, 1.0)), Err(Error::PoleAtArgument { .. })));
        assert_eq!(a_func(&be(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        // both gammas singular: balanced limit
        assert!((a_func(&be(0.0, 1.0)).unwrap() + 1.0).norm() < 1e-15);
        assert!((a_func(&be(-1.0, 1.0)).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn a_prod_examples() {
        assert!((a_prod(&[be(0.5, 0.5), be(0.5, 0.5)]).unwrap() - 1.0).norm() < 1e-15);
        assert_eq!(a_prod(&[be(1.5, 0.5), be(0.0, 0.0)]).unwrap(), c(0.0, 0.0));
        // (Γ(1/4)/Γ(3/4))^2, Γ values from a 30-digit reference
        let ratio = 3.625_609_908_221_908_3 / 1.225_416_702_465_177_6;
        let got = a_prod(&[be(0.75, 0.75), be(0.75, 0.75), be(0.5, 0.5)]).unwrap();
        assert!((got - ratio * ratio).norm() < 1e-13 * ratio * ratio);
        match a_prod(&[be(0.5, 0.5), be(2.0, 2.0)]) {
            Err(Error::PoleAtArgument { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected pole, got {other:?}"),
        }
    }

    #[test]
    fn bar_reflect_examples() {
        assert_eq!(bar_reflect(&be(0.5, 0.5)), be(0.5, 0.5));
        assert_eq!(bar_reflect(&be(1.5, 0.5)), be(0.5, -0.5));
    }

    #[test]
    fn bracket_pow_examples() {
        let alpha = BalancedExponent::new(c(0.7, 0.3), c(-0.3, 0.3)).unwrap();
        assert!((bracket_pow(&PointPair::xy(1.0, 0.0), &alpha).unwrap() - 1.0).norm() < 1e-15);
        let v = bracket_pow(&PointPair::xy(-1.0, 0.0), &be(1.5, 0.5)).unwrap();
        assert!((v + 1.0).norm() < 1e-15);
        let v = bracket_pow(&PointPair::xy(0.0, 2.0), &be(1.0, 0.0)).unwrap();
        assert!((v - c(0.0, 2.0)).norm() < 1e-15);
        // flip rule
        let z = PointPair::xy(1.3, 0.4);
        let w = PointPair::xy(0.0, -0.2);
        let lhs = bracket_pow(&(z - w), &alpha).unwrap();
        let rhs = sign(alpha.n()) * bracket_pow(&(w - z), &alpha).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
        assert!(bracket_pow(&PointPair::xy(0.0, 0.0), &be(-0.5, -0.5)).is_err());
    }

    #[test]
    fn independent_pair_agrees_on_conjugate_locus() {
        let alpha = BalancedExponent::new(c(1.7, 0.3), c(-0.3, 0.3)).unwrap();
        for &(x, y) in &[(1.0, 2.0), (-1.0, 0.5), (-2.0, -0.1), (0.3, -4.0)] {
            let p = PointPair::xy(x, y);
            let q = PointPair::independent(p.z, p.zbar);
            let a = bracket_pow(&p, &alpha).unwrap();
            let b = bracket_pow(&q, &alpha).unwrap();
            assert!((a - b).norm() < 1e-13 * a.norm(), "{p:?}: {a} vs {b}");
        }
    }

    #[test]
    fn phase_pow_examples() {
        assert_eq!(phase_pow(2, PhaseBase::MinusOne), c(1.0, 0.0));
        assert_eq!(phase_pow(3, PhaseBase::MinusOne), c(-1.0, 0.0));
        assert_eq!(phase_pow(1, PhaseBase::I), c(0.0, 1.0));
        assert_eq!(phase_pow(-1, PhaseBase::I), c(0.0, -1.0));
    }

    #[test]
    fn json_shapes() {
        let e = BalancedExponent::new(c(1.5, 0.25), c(0.5, 0.25)).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"hol":[1.5,0.25],"anti":[0.5,0.25]}"#);
        let back: BalancedExponent = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        let spin: SpinLabel = serde_json::from_str(r#"{"m":2,"sigma":0.5}"#).unwrap();
        assert_eq!(spin, SpinLabel::new(2, 0.5));
        assert!(serde_json::from_str::<BalancedExponent>(r#"{"hol":[0.5,0],"anti":[0.2,0]}"#).is_err());
    }

    fn exponent_strategy() -> impl Strategy<Value = BalancedExponent> {
        (-4.0..4.0f64, -1.5..1.5f64, -3i64..=3).prop_map(|(re, im, n)| {
            BalancedExponent::from_mean(Complex64::new(re, im), n)
        })
    }

    proptest! {
        #[test]
        fn bar_reflect_is_an_involution(alpha in exponent_strategy()) {
            let twice = bar_reflect(&bar_reflect(&alpha));
            prop_assert!((twice.hol() - alpha.hol()).norm() < 1e-14);
            prop_assert!((twice.anti() - alpha.anti()).norm() < 1e-14);
            prop_assert_eq!(bar_reflect(&alpha).n(), alpha.n());
        }

        #[test]
        fn flip_rule_holds(alpha in exponent_strategy(), x in -3.0..3.0f64, y in -3.0..3.0f64) {
            let p = PointPair::xy(x, y);
            prop_assume!(p.z.norm() > 1e-3);
            let lhs = bracket_pow(&p, &alpha).unwrap();
            let rhs = sign(alpha.n()) * bracket_pow(&-p, &alpha).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1e-300));
        }
    }
}
