//! Products of `a`-functions of `x ± s` and the geometry of their poles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{s_of, ContourSpec, MbDiagnostics};
use crate::error::{Error, Result};
use crate::exponents::{log_a_parts, BalancedExponent, LogA};

/// `a(x + s)` or `a(x - s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub x: BalancedExponent,
    pub plus: bool,
}

impl Factor {
    pub fn plus(x: BalancedExponent) -> Self {
        Self { x, plus: true }
    }

    pub fn minus(x: BalancedExponent) -> Self {
        Self { x, plus: false }
    }

    fn sigma(&self) -> f64 {
        if self.plus {
            1.0
        } else {
            -1.0
        }
    }

    fn at(&self, s: &BalancedExponent) -> BalancedExponent {
        if self.plus {
            self.x + *s
        } else {
            self.x - *s
        }
    }

    /// Pole family in `ν` for fixed `n`: `base + 2 i dir k`, `k >= k0`.
    /// As a numerator factor the family comes from poles of `Γ(1 - β̄)`, as a
    /// denominator factor from zeros of `1/Γ(β)`.
    fn family(&self, n: i64, numerator: bool) -> PoleFamily {
        let sigma = self.sigma();
        let n_beta = self.x.n() + if self.plus { n } else { -n };
        let i = Complex64::new(0.0, 1.0);
        let nf = n as f64;
        if numerator {
            PoleFamily {
                base: 2.0 * i * sigma * self.x.anti() - i * nf,
                dir: -sigma,
                k0: (1 - n_beta).max(1),
            }
        } else {
            PoleFamily {
                base: 2.0 * i * sigma * self.x.hol() + i * nf,
                dir: sigma,
                k0: (-n_beta).max(0),
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct PoleFamily {
    base: Complex64,
    /// +1 when the family climbs away from the contour, -1 when it descends.
    dir: f64,
    k0: i64,
}

impl PoleFamily {
    fn at(&self, k: i64) -> Complex64 {
        self.base + Complex64::new(0.0, 2.0 * self.dir * k as f64)
    }

    /// The member closest to the contour; it must sit on the `dir` side.
    fn first(&self) -> Complex64 {
        self.at(self.k0)
    }

    /// Members with `|Im ν - eta| <= reach`.
    fn near(&self, eta: f64, reach: f64) -> impl Iterator<Item = Complex64> + '_ {
        let b = self.base.im;
        let (lo, hi) = if self.dir > 0.0 {
            (((eta - reach - b) / 2.0).ceil(), ((eta + reach - b) / 2.0).floor())
        } else {
            (((b - eta - reach) / 2.0).ceil(), ((b - eta + reach) / 2.0).floor())
        };
        let lo = (lo.max(self.k0 as f64)) as i64;
        let hi = hi as i64;
        (lo..=hi.max(lo - 1)).map(move |k| self.at(k))
    }
}

/// `Π a(num) / Π a(den)` as a function of `s = s_of(n, ν)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MbIntegrand {
    pub num: Vec<Factor>,
    pub den: Vec<Factor>,
}

/// Signed distance of a pole from the contour: positive on the side its family
/// runs towards, negative once it has crossed.
fn signed_distance(pole: Complex64, dir: f64, eta: f64) -> f64 {
    dir * (pole.im - eta)
}

impl MbIntegrand {
    pub fn new(num: Vec<Factor>, den: Vec<Factor>) -> Self {
        Self { num, den }
    }

    /// `ln` of the integrand, `None` where it vanishes.
    pub(crate) fn log_value(&self, n: i64, nu: Complex64) -> Result<Option<Complex64>> {
        let s = s_of(n, nu);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zero = false;
        for (i, f) in self.num.iter().enumerate() {
            let b = f.at(&s);
            match log_a_parts(b.hol(), b.anti(), i)? {
                LogA::Finite(l) => acc += l,
                LogA::Zero => zero = true,
            }
        }
        for (i, f) in self.den.iter().enumerate() {
            let b = f.at(&s);
            match log_a_parts(b.hol(), b.anti(), self.num.len() + i)? {
                LogA::Finite(l) => acc -= l,
                LogA::Zero => {
                    return Err(Error::PoleAtArgument { argument: b.hol(), index: self.num.len() + i })
                }
            }
        }
        Ok(if zero { None } else { Some(acc) })
    }

    pub fn value(&self, n: i64, nu: Complex64) -> Result<Complex64> {
        Ok(self.log_value(n, nu)?.map_or(Complex64::new(0.0, 0.0), |l| l.exp()))
    }

    fn families(&self, n: i64) -> impl Iterator<Item = PoleFamily> + '_ {
        self.num
            .iter()
            .map(move |f| f.family(n, true))
            .chain(self.den.iter().map(move |f| f.family(n, false)))
    }

    /// Poles within `reach` of the line, as `(Re ν, |Im ν - eta|)`.
    pub(crate) fn poles_near(&self, n: i64, eta: f64, reach: f64) -> Vec<(f64, f64)> {
        self.families(n)
            .flat_map(|fam| fam.near(eta, reach).collect::<Vec<_>>())
            .map(|p| (p.re, (p.im - eta).abs()))
            .collect()
    }

    /// The pole nearest to the contour for this `n`, with its signed distance.
    fn nearest(&self, n: i64, eta: f64) -> Option<(Complex64, f64)> {
        self.families(n)
            .map(|fam| {
                let p = fam.first();
                (p, signed_distance(p, fam.dir, eta))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Fails with [`Error::ContourPinch`] if, for some `|n| <= n_max`, a pole
    /// is closer than `pole_clearance` to the line or on the wrong side of it.
    pub(crate) fn check_contour(&self, spec: &ContourSpec, n_max: i64) -> Result<f64> {
        let mut min = f64::INFINITY;
        for n in -n_max..=n_max {
            if let Some((pole, d)) = self.nearest(n, spec.eta) {
                if d < spec.pole_clearance {
                    return Err(Error::ContourPinch { n, pole, distance: d });
                }
                min = min.min(d);
            }
        }
        Ok(min)
    }
}

/// Pole geometry of `integrand` for `|n| <= spec.n_max`.
///
/// `min_pole_distance` is the smallest distance of any pole from the line
/// `Im ν = eta`; poles that lie on the wrong side of the line are counted in
/// `crossed_poles` and also contribute their (absolute) distance.
pub fn pole_scan(integrand: &MbIntegrand, spec: &ContourSpec) -> MbDiagnostics {
    let n_max = spec.n_max.max(0);
    let mut diag = MbDiagnostics::default();
    let mut best = f64::INFINITY;
    for n in -n_max..=n_max {
        for fam in integrand.families(n) {
            let p = fam.first();
            let d = signed_distance(p, fam.dir, spec.eta);
            if d < 0.0 {
                diag.crossed_poles += 1;
            }
            if d.abs() < best {
                best = d.abs();
                diag.nearest_pole = Some((n, p));
            }
        }
    }
    diag.min_pole_distance = if best.is_finite() { best } else { 0.0 };
    diag
}
