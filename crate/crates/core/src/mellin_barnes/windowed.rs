//! Gaussian-windowed bilateral sums for integrands carrying `[w]^s`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::integrand::{Factor, MbIntegrand};
use super::quadrature::{graded, refine_near_poles, GaussLegendre};
use super::{ContourSpec, MbDiagnostics, MbResult};
use crate::error::{Error, Result};
use crate::exponents::{a_func, propagator, sign, BalancedExponent, PointPair, SpinLabel};
use crate::quad2d::relations::{phi1_exponents, phi2_exponents};
use crate::summation::CompensatedSum;

/// Largest window `δ_max = D² / LEAK`; the heat kernel then leaks
/// `exp(-LEAK/4)` of the nearest singularity into the value.
const LEAK: f64 = 144.0;
const LEVELS: usize = 6;
const MIN_LEVELS: usize = 3;
/// The window is negligible once `δ(n² + ν²)` exceeds this.
const WINDOW_LOG: f64 = 40.0;

/// `Σ_n ∫ dν G(n, ν) e^{i n θ + i ν L}`, where `(θ, L) = (arg w, ln|w|)` and
/// the target is smooth within distance `distance` of `(θ, L)`.
struct Window<'a> {
    integrand: &'a MbIntegrand,
    theta: f64,
    ell: f64,
    distance: f64,
}

fn wrap_angle(t: f64) -> f64 {
    let r = (t + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Sums in the fixed order `n = 0, 1, -1, 2, -2, ...`.
fn ordered_sum<T>(terms: &[(i64, T)], get: impl Fn(&T) -> Complex64) -> Complex64 {
    let mut idx: Vec<usize> = (0..terms.len()).collect();
    idx.sort_by_key(|&i| (terms[i].0.abs(), terms[i].0 < 0));
    idx.iter().map(|&i| get(&terms[i].1)).collect::<CompensatedSum>().value()
}

/// Richardson table for `V(δ) = F + c₁δ + c₂δ² + ...` with `δ` halving.
/// Returns the diagonal and the last row.
pub(crate) fn richardson(
    values: &[Complex64],
    ratio_powers: impl Fn(usize) -> f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut table = values.to_vec();
    let mut diag = vec![table[0]];
    let mut last = vec![table[values.len() - 1]];
    for k in 1..values.len() {
        let f = ratio_powers(k);
        let prev = table.clone();
        for j in k..values.len() {
            table[j] = (f * prev[j] - prev[j - 1]) / (f - 1.0);
        }
        diag.push(table[k]);
        last.push(table[values.len() - 1]);
    }
    (diag, last)
}

impl Window<'_> {
    fn sum(&self, spec: &ContourSpec, prefactor: Complex64) -> Result<MbResult> {
        spec.validate()?;
        if !(self.distance > 0.0) {
            return Err(Error::Domain("evaluation point sits on the singularity of the representation".into()));
        }
        let delta_max_ideal = self.distance * self.distance / LEAK;
        let delta_min_ideal = delta_max_ideal / f64::powi(2.0, LEVELS as i32 - 1);
        let lam_ideal = (WINDOW_LOG / delta_min_ideal).sqrt();
        let n_cut = (lam_ideal.ceil() as i64).min(spec.n_max);
        let nu_cut = lam_ideal.min(spec.nu_max);
        let lam = (n_cut as f64).min(nu_cut);
        if lam < 1.0 {
            return Err(Error::TruncationNotConverged { tail: f64::INFINITY, tol: spec.tol });
        }
        let delta_min = delta_min_ideal.max(WINDOW_LOG / (lam * lam));
        let mut levels = ((delta_max_ideal / delta_min).log2().floor() as usize + 1).min(LEVELS);
        if levels < MIN_LEVELS {
            levels = MIN_LEVELS;
        }
        let delta_max = delta_min * f64::powi(2.0, levels as i32 - 1);
        let min_pole_distance = self.integrand.check_contour(spec, n_cut)?;

        let gl = GaussLegendre::new(spec.nodes_per_unit);
        let width = if self.ell.abs() > 8.0 { 8.0 / self.ell.abs() } else { 1.0 };
        let eta = spec.eta;
        let i = Complex64::new(0.0, 1.0);

        let per_n: Vec<(i64, (Vec<Complex64>, usize))> = (-n_cut..=n_cut)
            .into_par_iter()
            .map(|n| -> Result<(i64, (Vec<Complex64>, usize))> {
                let panels = refine_near_poles(
                    graded(-nu_cut, nu_cut, |_| width),
                    &self.integrand.poles_near(n, eta, width),
                );
                let mut sums = vec![CompensatedSum::new(); levels];
                let mut evals = 0;
                let nf = n as f64;
                for p in &panels {
                    let (h, m) = (0.5 * (p.b - p.a), 0.5 * (p.b + p.a));
                    for (x, w) in gl.x.iter().zip(&gl.w) {
                        let nu = Complex64::new(m + h * x, eta);
                        evals += 1;
                        let Some(log) = self.integrand.log_value(n, nu)? else { continue };
                        let base = (log + i * (nf * self.theta + nu * self.ell)).exp() * (w * h);
                        // finest window first, squaring doubles δ
                        let mut win = (-delta_min * (nf * nf + nu * nu)).exp();
                        for k in (0..levels).rev() {
                            sums[k].add(base * win);
                            win = win * win;
                        }
                    }
                }
                Ok((n, (sums.iter().map(|s| s.value()).collect(), evals)))
            })
            .collect::<Result<_>>()?;

        let level_values: Vec<Complex64> =
            (0..levels).map(|k| ordered_sum(&per_n, |(v, _)| v[k])).collect();
        let (diag, _) = richardson(&level_values, |k| f64::powi(2.0, k as i32));
        let best = diag[levels - 1];
        let step = (best - diag[levels - 2]).norm();
        let leak = best.norm() * (-self.distance * self.distance / (4.0 * delta_max)).exp();
        let scale = prefactor.norm();

        let diagnostics = MbDiagnostics {
            per_n_magnitudes: per_n.iter().map(|(n, (v, _))| (*n, v[levels - 1].norm() * scale)).collect(),
            tail_estimate: (step + leak) * scale,
            min_pole_distance,
            nearest_pole: None,
            crossed_poles: 0,
            n_cut,
            nu_cut,
            extrapolation: diag.iter().map(|v| v * prefactor).collect(),
            evaluations: per_n.iter().map(|(_, (_, e))| e).sum(),
        };
        Ok(MbResult { value: best * prefactor, abs_err: (step + leak) * scale, diagnostics })
    }
}

fn conjugate_only(p: &PointPair, name: &str) -> Result<()> {
    if p.conjugate {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be a conjugate pair")))
    }
}

/// `1/[z-y]^α` from its Mellin-Barnes representation
/// `(1/(4π a(1-α))) Σ_n ∫ dν a(1-s, 1+s-α) / ([z]^(α-s) [-y]^s)`.
///
/// Valid for `0 < Re(α+ᾱ)/2 < 1` with the contour separating the two pole
/// families; the latter is enforced by [`Error::ContourPinch`].
pub fn mb_propagator(
    z: &PointPair,
    y: &PointPair,
    alpha: &BalancedExponent,
    spec: &ContourSpec,
) -> Result<MbResult> {
    mb_propagator_estimate(z, y, alpha, spec)?.require_converged(spec.tol)
}

/// [`mb_propagator`] without the final accuracy check.
pub fn mb_propagator_estimate(
    z: &PointPair,
    y: &PointPair,
    alpha: &BalancedExponent,
    spec: &ContourSpec,
) -> Result<MbResult> {
    conjugate_only(z, "z")?;
    conjugate_only(y, "y")?;
    let zero = Complex64::new(0.0, 0.0);
    if z.z == zero || y.z == zero || z.z == y.z {
        return Err(Error::CoincidentPoints("z, y and z - y must be nonzero".into()));
    }
    let mu = alpha.mean_re();
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain(format!("Re(hol + anti)/2 = {mu} outside the validity window (0, 1)")));
    }
    let one = BalancedExponent::scalar(Complex64::new(1.0, 0.0));
    let integrand = MbIntegrand::new(vec![Factor::minus(one), Factor::plus(one - *alpha)], vec![]);
    let theta = z.z.arg() - (-y.z).arg();
    let ell = z.z.norm().ln() - y.z.norm().ln();
    let window = Window {
        integrand: &integrand,
        theta,
        ell,
        distance: wrap_angle(theta - PI).hypot(ell),
    };
    let prefactor = propagator(z, alpha)? / (4.0 * PI * a_func(&alpha.one_minus())?);
    window.sum(spec, prefactor)
}

/// `∫ d²y / ([y-1]^A₁ [-y]^A₂ [z-y]^A₃)` from the representation
/// `a(A₁)/(4 a(1-A₃)) Σ_n ∫ dν a(1-s, 1+s-A₃, A₂+s, 2-A₁-A₂-s) [z]^(s-A₃)`,
/// obtained by expanding `[z-y]` and collapsing the `y`-integral with the
/// chain rule.
pub fn triangle_mb(exps: [BalancedExponent; 3], z: &PointPair, spec: &ContourSpec) -> Result<MbResult> {
    triangle_mb_estimate(exps, z, spec)?.require_converged(spec.tol)
}

/// [`triangle_mb`] without the final accuracy check.
pub fn triangle_mb_estimate(exps: [BalancedExponent; 3], z: &PointPair, spec: &ContourSpec) -> Result<MbResult> {
    conjugate_only(z, "z")?;
    let [a1, a2, a3] = exps;
    if z.z == Complex64::new(0.0, 0.0) || z.z == Complex64::new(1.0, 0.0) {
        return Err(Error::CoincidentPoints(format!("z = {} sits on a fixed vertex", z.z)));
    }
    let one = BalancedExponent::scalar(Complex64::new(1.0, 0.0));
    let two = BalancedExponent::scalar(Complex64::new(2.0, 0.0));
    let integrand = MbIntegrand::new(
        vec![Factor::minus(one), Factor::plus(one - a3), Factor::plus(a2), Factor::minus(two - a1 - a2)],
        vec![],
    );
    let (theta, ell) = (z.z.arg(), z.z.norm().ln());
    let window = Window { integrand: &integrand, theta, ell, distance: wrap_angle(theta).hypot(ell) };
    let prefactor = a_func(&a1)? * propagator(z, &a3)? / (4.0 * a_func(&a3.one_minus())?);
    window.sum(spec, prefactor)
}

/// `Φ̄₁(z)` through [`triangle_mb`].
pub fn phi1_mb(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    l: &SpinLabel,
    cp: &SpinLabel,
    z: &PointPair,
    spec: &ContourSpec,
) -> Result<MbResult> {
    triangle_mb(phi1_exponents(a1, a2, a3, l, cp)?, z, spec)
}

/// [`phi1_mb`] without the final accuracy check.
pub fn phi1_mb_estimate(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    l: &SpinLabel,
    cp: &SpinLabel,
    z: &PointPair,
    spec: &ContourSpec,
) -> Result<MbResult> {
    triangle_mb_estimate(phi1_exponents(a1, a2, a3, l, cp)?, z, spec)
}

/// `Φ₂(z) = [z]^-(1+a₂+a₃+c)/2 (-1)^n(B₃) T(B₁, B₂, B₃; z)`.
pub fn phi2_mb(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    l: &SpinLabel,
    c: &SpinLabel,
    z: &PointPair,
    spec: &ContourSpec,
) -> Result<MbResult> {
    phi2_mb_estimate(a1, a2, a3, l, c, z, spec)?.require_converged(spec.tol)
}

/// [`phi2_mb`] without the final accuracy check.
pub fn phi2_mb_estimate(
    a1: &SpinLabel,
    a2: &SpinLabel,
    a3: &SpinLabel,
    l: &SpinLabel,
    c: &SpinLabel,
    z: &PointPair,
    spec: &ContourSpec,
) -> Result<MbResult> {
    let ([b1, b2, b3], pre) = phi2_exponents(a1, a2, a3, l, c)?;
    let k = propagator(z, &pre)? * sign(b3.n());
    let mut r = triangle_mb_estimate([b1, b2, b3], z, spec)?;
    r.value *= k;
    r.abs_err *= k.norm();
    r.diagnostics.tail_estimate *= k.norm();
    for v in &mut r.diagnostics.extrapolation {
        *v *= k;
    }
    for (_, m) in &mut r.diagnostics.per_n_magnitudes {
        *m *= k.norm();
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::bracket_pow;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn wide() -> ContourSpec {
        ContourSpec { nu_max: 600.0, n_max: 600, ..ContourSpec::default() }
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        let f = |d: f64| c(1.0 + 0.3 * d - 2.0 * d * d + d * d * d, 0.5 * d);
        let vals: Vec<_> = (0..5).map(|k| f(0.1 / f64::powi(2.0, k))).collect();
        let (diag, last) = richardson(&vals, |k| f64::powi(2.0, k as i32));
        assert_eq!(diag[4], last[4]);
        assert!((diag[4] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn propagator_real_exponent() {
        let al = BalancedExponent::real(0.6, 0.6).unwrap();
        let (z, y) = (PointPair::xy(1.0, 0.0), PointPair::xy(-1.0, 0.0));
        let r = mb_propagator(&z, &y, &al, &wide()).unwrap();
        let want = f64::powf(2.0, -1.2);
        assert!((r.value - want).norm() < 1e-6 * want, "{} vs {want}", r.value);
    }

    #[test]
    fn propagator_with_integer_part() {
        let al = BalancedExponent::real(1.1, 0.1).unwrap();
        let (z, y) = (PointPair::xy(1.0, 1.0), PointPair::xy(0.3, 0.0));
        let r = mb_propagator(&z, &y, &al, &wide()).unwrap();
        let want = bracket_pow(&(z - y), &-al).unwrap();
        assert!((r.value - want).norm() < 1e-6 * want.norm(), "{} vs {want}", r.value);
    }

    #[test]
    fn propagator_preconditions() {
        let (z, y) = (PointPair::xy(1.0, 0.0), PointPair::xy(-1.0, 0.0));
        let outside = BalancedExponent::real(1.2, 1.2).unwrap();
        assert!(matches!(mb_propagator(&z, &y, &outside, &wide()), Err(Error::Domain(_))));
        let al = BalancedExponent::real(0.6, 0.6).unwrap();
        assert!(matches!(mb_propagator(&z, &z, &al, &wide()), Err(Error::CoincidentPoints(_))));
        // default truncation is far too small for the window this point needs
        assert!(matches!(
            mb_propagator(&z, &y, &al, &ContourSpec { n_max: 4, nu_max: 4.0, ..ContourSpec::default() }),
            Err(Error::TruncationNotConverged { .. })
        ));
        let pinch = ContourSpec { eta: -0.0005, ..wide() };
        assert!(matches!(mb_propagator(&z, &y, &al, &pinch), Err(Error::ContourPinch { .. })));
    }
}
