//! The two Mellin-Barnes representations of the Racah coefficient
//! `R_ℓ(c, c')`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrand::{Factor, MbIntegrand};
use super::quadrature::{graded, refine_near_poles, GaussLegendre, Panel};
use super::windowed::richardson;
use super::{ContourSpec, MbDiagnostics, MbResult};
use crate::error::Result;
use crate::exponents::{a_ratio, sign, SpinLabel};
use crate::kernels::{check_parity, half_combo};
use crate::summation::CompensatedSum;

/// Box doublings; the extrapolation uses every level.
const LEVELS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RacahLabels {
    pub a1: SpinLabel,
    pub a2: SpinLabel,
    pub a3: SpinLabel,
    pub l: SpinLabel,
    pub c: SpinLabel,
    pub cp: SpinLabel,
}

impl RacahLabels {
    /// All four vertex parities.
    pub fn check_parity(&self) -> Result<()> {
        check_parity("m1 + m2 + m_c'", &[self.a1.m, self.a2.m, self.cp.m])?;
        check_parity("m_c' + m3 + m_l", &[self.cp.m, self.a3.m, self.l.m])?;
        check_parity("m2 + m3 + m_c", &[self.a2.m, self.a3.m, self.c.m])?;
        check_parity("m1 + m_c + m_l", &[self.a1.m, self.c.m, self.l.m])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RacahForm {
    Mb1,
    Mb2,
}

/// `(-1)^m_c' (π²/4) a((1-a₃-ℓ+c')/2, (1+a₁+c+ℓ)/2) / a((1+a₁-a₂+c')/2, (1+a₂-a₃+c)/2)`.
pub fn racah_prefactor(r: &RacahLabels) -> Result<Complex64> {
    r.check_parity()?;
    let RacahLabels { a1, a2, a3, l, c, cp } = r;
    let ratio = a_ratio(
        &[
            half_combo(1.0, &[(-1.0, a3), (-1.0, l), (1.0, cp)]),
            half_combo(1.0, &[(1.0, a1), (1.0, c), (1.0, l)]),
        ],
        &[
            half_combo(1.0, &[(1.0, a1), (-1.0, a2), (1.0, cp)]),
            half_combo(1.0, &[(1.0, a2), (-1.0, a3), (1.0, c)]),
        ],
    )?;
    Ok(sign(cp.m) * PI * PI / 4.0 * ratio)
}

/// The `a`-ratio under the sum of the chosen representation.
pub fn racah_integrand(r: &RacahLabels, form: RacahForm) -> Result<MbIntegrand> {
    r.check_parity()?;
    let RacahLabels { a1, a2, a3, l, c, cp } = r;
    let zero = crate::exponents::BalancedExponent::scalar(Complex64::new(0.0, 0.0));
    let (num, den) = match form {
        RacahForm::Mb1 => (
            [
                half_combo(1.0, &[(1.0, a1), (-1.0, a2), (1.0, cp)]),
                half_combo(1.0, &[(-1.0, a1), (-1.0, a2), (1.0, cp)]),
                half_combo(1.0, &[(1.0, a3), (1.0, l), (1.0, cp)]),
                half_combo(1.0, &[(-1.0, a3), (1.0, l), (1.0, cp)]),
            ],
            [
                zero,
                cp.exponent(),
                half_combo(0.0, &[(1.0, cp), (1.0, l), (-1.0, a2), (-1.0, c)]),
                half_combo(0.0, &[(1.0, c), (1.0, cp), (1.0, l), (-1.0, a2)]),
            ],
        ),
        RacahForm::Mb2 => (
            [
                half_combo(1.0, &[(1.0, a2), (-1.0, a3), (1.0, c)]),
                half_combo(1.0, &[(1.0, a1), (-1.0, l), (1.0, c)]),
                half_combo(1.0, &[(1.0, a2), (1.0, a3), (1.0, c)]),
                half_combo(1.0, &[(-1.0, a1), (-1.0, l), (1.0, c)]),
            ],
            [
                zero,
                c.exponent(),
                half_combo(0.0, &[(1.0, a2), (1.0, c), (-1.0, l), (-1.0, cp)]),
                half_combo(0.0, &[(1.0, a2), (1.0, c), (-1.0, l), (1.0, cp)]),
            ],
        ),
    };
    Ok(MbIntegrand::new(num.map(Factor::plus).to_vec(), den.map(Factor::plus).to_vec()))
}

/// Sharp truncation on the boxes `|n| <= N₀2^k`, `|ν| <= V₀2^k`, followed by
/// Richardson extrapolation in the box size. The integrand falls off like
/// `|s|^-4`, so the truncation error is a series in `1/N` starting at `1/N²`.
fn nested_boxes(g: &MbIntegrand, spec: &ContourSpec, prefactor: Complex64) -> Result<MbResult> {
    spec.validate()?;
    let n0 = spec.n_max.max(1);
    let v0 = spec.nu_max;
    let n_cut = n0 << (LEVELS - 1);
    let nu_cut = v0 * f64::powi(2.0, LEVELS as i32 - 1);
    let min_pole_distance = g.check_contour(spec, n_cut)?;
    let gl = GaussLegendre::new(spec.nodes_per_unit);
    let eta = spec.eta;

    // shell j covers V_{j-1} < |ν| <= V_j; shell 0 is the whole of [-V₀, V₀]
    let bounds: Vec<f64> = (0..LEVELS).map(|k| v0 * f64::powi(2.0, k as i32)).collect();

    let per_n: Vec<(i64, (Vec<Complex64>, usize))> = (-n_cut..=n_cut)
        .into_par_iter()
        .map(|n| -> Result<(i64, (Vec<Complex64>, usize))> {
            let nf = n as f64;
            let width = |x: f64| (nf.hypot(x) / 8.0).max(1.0);
            let reach = 0.5 * width(nu_cut);
            let poles = g.poles_near(n, eta, reach);
            let mut evals = 0;
            let mut integrate = |a: f64, b: f64| -> Result<Complex64> {
                let panels: Vec<Panel> = refine_near_poles(graded(a, b, |x| width(x.abs().min(b.abs()))), &poles);
                let mut acc = CompensatedSum::new();
                for p in &panels {
                    let (h, m) = (0.5 * (p.b - p.a), 0.5 * (p.b + p.a));
                    for (x, w) in gl.x.iter().zip(&gl.w) {
                        evals += 1;
                        if let Some(log) = g.log_value(n, Complex64::new(m + h * x, eta))? {
                            acc.add(log.exp() * (w * h));
                        }
                    }
                }
                Ok(acc.value())
            };
            let mut shells = vec![integrate(-bounds[0], bounds[0])?];
            for j in 1..LEVELS {
                let right = integrate(bounds[j - 1], bounds[j])?;
                let left = integrate(-bounds[j], -bounds[j - 1])?;
                shells.push(right + left);
            }
            Ok((n, (shells, evals)))
        })
        .collect::<Result<_>>()?;

    // fixed order: |n| ascending, non-negative first
    let mut order: Vec<usize> = (0..per_n.len()).collect();
    order.sort_by_key(|&i| (per_n[i].0.abs(), per_n[i].0 < 0));
    let levels: Vec<Complex64> = (0..LEVELS)
        .map(|k| {
            let nk = n0 << k;
            order
                .iter()
                .filter(|&&i| per_n[i].0.abs() <= nk)
                .flat_map(|&i| per_n[i].1 .0[..=k].iter().copied())
                .collect::<CompensatedSum>()
                .value()
        })
        .collect();
    let (diag, last) = richardson(&levels, |k| f64::powi(2.0, k as i32 + 1));
    let best = diag[LEVELS - 1];
    // the next-lower order on the same boxes, which bounds the final error
    let err = (best - last[LEVELS - 2]).norm() * prefactor.norm();

    let diagnostics = MbDiagnostics {
        per_n_magnitudes: per_n
            .iter()
            .map(|(n, (shells, _))| (*n, shells.iter().sum::<Complex64>().norm() * prefactor.norm()))
            .collect(),
        tail_estimate: err,
        min_pole_distance,
        nearest_pole: None,
        crossed_poles: 0,
        n_cut,
        nu_cut,
        extrapolation: diag.iter().map(|v| v * prefactor).collect(),
        evaluations: per_n.iter().map(|(_, (_, e))| e).sum(),
    };
    Ok(MbResult { value: best * prefactor, abs_err: err, diagnostics })
}

/// `R_ℓ(c, c')` from the representation whose integrand is built on `c'`.
pub fn racah_mb1(labels: &RacahLabels, spec: &ContourSpec) -> Result<MbResult> {
    racah_estimate(labels, RacahForm::Mb1, spec)?.require_converged(spec.tol)
}

/// `R_ℓ(c, c')` from the representation whose integrand is built on `c`; it
/// differs from [`racah_mb1`] by a shift of `s`.
pub fn racah_mb2(labels: &RacahLabels, spec: &ContourSpec) -> Result<MbResult> {
    racah_estimate(labels, RacahForm::Mb2, spec)?.require_converged(spec.tol)
}

/// Either representation, without the final accuracy check.
pub fn racah_estimate(labels: &RacahLabels, form: RacahForm, spec: &ContourSpec) -> Result<MbResult> {
    let pre = racah_prefactor(labels)?;
    nested_boxes(&racah_integrand(labels, form)?, spec, pre)
}
