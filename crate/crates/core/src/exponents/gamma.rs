//! Principal-branch complex log-gamma.
//!
//! The evaluation strategy follows the classic split used by most libraries:
//! Stirling's series far from the origin, a Taylor expansion of `ln Γ(1 + w)`
//! near the two zeros of `ln Γ`, the reflection formula in the left half-plane
//! and an upward recurrence everywhere else. Branch bookkeeping keeps the
//! result on the principal sheet, i.e. continuous away from the negative real
//! axis and real for positive real arguments.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const SMALL_RE: f64 = 7.0;
const SMALL_IM: f64 = 7.0;
const TAYLOR_RADIUS: f64 = 0.2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Bernoulli-derived coefficients `B_2k / (2k (2k - 1))`, highest order first.
const STIRLING: [f64; 10] = [
    -174_611.0 / 125_400.0,
    43_867.0 / 244_188.0,
    -3617.0 / 122_400.0,
    1.0 / 156.0,
    -691.0 / 360_360.0,
    1.0 / 1188.0,
    -1.0 / 1680.0,
    1.0 / 1260.0,
    -1.0 / 360.0,
    1.0 / 12.0,
];

/// ζ(k) for k = 2..=24, used by the Taylor branch.
const ZETA: [f64; 23] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_370_0,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308_0,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307_0,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265_0,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_925_9,
    1.000_000_059_608_189_1,
];

/// Principal branch of `ln Γ(w)`.
///
/// Fails with [`Error::PoleAtArgument`] when `w` lies within `1e-12` of a
/// nonpositive integer.
pub fn log_gamma(w: Complex64) -> Result<Complex64> {
    if w.re.is_nan() || w.im.is_nan() {
        return Err(Error::Domain(format!("log_gamma of NaN argument {w}")));
    }
    if w.re <= 0.5 && w.im.abs() < 1e-12 && (w.re - w.re.round()).abs() < 1e-12 {
        return Err(Error::PoleAtArgument { argument: w, index: 0 });
    }
    Ok(log_gamma_raw(w))
}

pub(crate) fn log_gamma_raw(z: Complex64) -> Complex64 {
    if z.re > SMALL_RE || z.im.abs() > SMALL_IM {
        stirling(z)
    } else if (z - 1.0).norm() <= TAYLOR_RADIUS {
        taylor(z - 1.0)
    } else if (z - 2.0).norm() <= TAYLOR_RADIUS {
        // ln Γ(z) = ln(z - 1) + ln Γ(z - 1), with z - 1 near 1
        (z - 1.0).ln() + taylor(z - 2.0)
    } else if z.re < 0.1 {
        reflection(z)
    } else if !z.im.is_sign_negative() {
        recurrence(z)
    } else {
        recurrence(z.conj()).conj()
    }
}

fn stirling(z: Complex64) -> Complex64 {
    let rz = z.inv();
    let rzz = rz * rz;
    // STIRLING holds the coefficients of z^-19 ... z^-1; evaluate as a
    // polynomial in 1/z^2 and multiply by 1/z.
    let mut poly = Complex64::new(STIRLING[0], 0.0);
    for c in &STIRLING[1..] {
        poly = poly * rzz + c;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + rz * poly
}

/// `ln Γ(1 + w)` for `|w| <= TAYLOR_RADIUS`.
fn taylor(w: Complex64) -> Complex64 {
    // ln Γ(1 + w) = -γ w + Σ_{k>=2} ζ(k) (-w)^k / k
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, zeta) in ZETA.iter().enumerate().rev() {
        let k = (i + 2) as f64;
        let sign = if (i + 2) % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * w + sign * zeta / k;
    }
    // acc now holds Σ c_k w^(k-2); restore the w^2 factor
    w * (-EULER_GAMMA + w * acc)
}

fn recurrence(mut z: Complex64) -> Complex64 {
    let mut sign_flips = 0.0;
    let mut prev_negative = false;
    let mut shift_prod = z;
    z += 1.0;
    while z.re <= SMALL_RE {
        shift_prod *= z;
        let negative = shift_prod.im.is_sign_negative();
        if negative && !prev_negative {
            sign_flips += 1.0;
        }
        prev_negative = negative;
        z += 1.0;
    }
    stirling(z) - shift_prod.ln() - Complex64::new(0.0, 2.0 * PI * sign_flips)
}

fn reflection(z: Complex64) -> Complex64 {
    let branch = (2.0 * PI).copysign(z.im) * (0.5 * z.re + 0.25).floor();
    Complex64::new(LN_PI, branch) - sin_pi(z).ln() - log_gamma_raw(Complex64::new(1.0, 0.0) - z)
}

/// `sin(π z)` with exact argument reduction of the real part.
pub(crate) fn sin_pi(z: Complex64) -> Complex64 {
    let x = z.re;
    let y = PI * z.im;
    Complex64::new(sin_pi_real(x) * y.cosh(), cos_pi_real(x) * y.sinh())
}

fn sin_pi_real(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

fn cos_pi_real(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.5 || r == 1.5 {
        return 0.0;
    }
    (PI * r).cos()
}
