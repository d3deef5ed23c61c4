//! Property suites driven by `sixj verify`.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sixj_core::kernels::{completeness_residual, covariance_residual, w_kernel, GeneratorIndex};
use sixj_core::mellin_barnes::{mb_propagator, phi1_mb, racah_mb1, racah_mb2, ContourSpec, RacahLabels};
use sixj_core::quad2d::{phi1_direct, verify_chain, verify_star};
use sixj_core::{
    a_func, bar_reflect, bracket_pow, phase_pow, BalancedExponent, Complex64, Error, PhaseBase, PointPair, Result,
    SpinLabel,
};

use crate::config::RunConfig;
use crate::record::{ErrorInfo, PropertyRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    AIdentities,
    Chain,
    Star,
    Covariance,
    Completeness,
    MbPropagator,
    MbConsistency,
    PhiOracle,
    All,
}

impl Suite {
    const EACH: [Suite; 8] = [
        Suite::AIdentities,
        Suite::Chain,
        Suite::Star,
        Suite::Covariance,
        Suite::Completeness,
        Suite::MbPropagator,
        Suite::MbConsistency,
        Suite::PhiOracle,
    ];

    fn name(self) -> &'static str {
        match self {
            Suite::AIdentities => "a-identities",
            Suite::Chain => "chain",
            Suite::Star => "star",
            Suite::Covariance => "covariance",
            Suite::Completeness => "completeness",
            Suite::MbPropagator => "mb-propagator",
            Suite::MbConsistency => "mb-consistency",
            Suite::PhiOracle => "phi-oracle",
            Suite::All => "all",
        }
    }

    /// Threshold of the suite's main property when `--tol` is not given.
    fn default_threshold(self) -> f64 {
        match self {
            Suite::AIdentities => 1e-10,
            Suite::Chain | Suite::Star | Suite::PhiOracle => 1e-3,
            Suite::Covariance => 1e-6,
            Suite::Completeness => 1e-12,
            Suite::MbPropagator => 1e-6,
            Suite::MbConsistency => 1e-8,
            Suite::All => f64::NAN,
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn be(h: Complex64, a: Complex64) -> BalancedExponent {
    BalancedExponent::new(h, a).expect("built-in exponents are balanced")
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

struct Ctx<'a> {
    suite: Suite,
    cfg: &'a RunConfig,
    scale: f64,
    threshold: f64,
}

impl Ctx<'_> {
    fn count(&self, base: usize) -> usize {
        ((base as f64 * self.scale).round() as usize).max(1)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed ^ salt)
    }

    fn record(&self, property: &str, outcome: Result<(f64, usize)>, threshold: f64) -> PropertyRecord {
        let (worst, samples, error) = match outcome {
            Ok((w, n)) => (w, n, None),
            Err(e) => (f64::INFINITY, 0, Some(ErrorInfo::from(&e))),
        };
        PropertyRecord {
            suite: self.suite.name().into(),
            property: property.into(),
            passed: error.is_none() && worst <= threshold,
            worst_residual: worst,
            threshold,
            samples,
            error,
        }
    }
}

/// Worst residual over independent samples, computed in parallel and reduced
/// in input order.
fn worst_of<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync + Send) -> Result<(f64, usize)> {
    let rs: Vec<Result<f64>> = items.par_iter().map(f).collect();
    let mut worst = 0.0f64;
    for r in rs {
        worst = worst.max(r?);
    }
    Ok((worst, items.len()))
}

fn random_exponent(rng: &mut ChaCha8Rng) -> BalancedExponent {
    loop {
        let n: i64 = rng.gen_range(-4..=4);
        let hol = c(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)) + 0.5 * n as f64;
        let lattice = (hol - c(hol.re.round(), 0.0)).norm();
        if hol.re.abs() <= 4.0 && (hol.re - n as f64).abs() <= 4.0 && lattice >= 0.05 {
            return be(hol, hol - n as f64);
        }
    }
}

fn random_label(rng: &mut ChaCha8Rng, parity: Option<i64>) -> SpinLabel {
    let mut m: i64 = rng.gen_range(-3..=3);
    if let Some(p) = parity {
        if (m - p).rem_euclid(2) != 0 {
            m += if m < 3 { 1 } else { -1 };
        }
    }
    SpinLabel::new(m, rng.gen_range(-2.0..2.0))
}

fn random_racah(rng: &mut ChaCha8Rng) -> RacahLabels {
    let a1 = random_label(rng, None);
    let a2 = random_label(rng, None);
    let a3 = random_label(rng, None);
    let cp = random_label(rng, Some(a1.m + a2.m));
    let l = random_label(rng, Some(cp.m + a3.m));
    let cl = random_label(rng, Some(a2.m + a3.m));
    RacahLabels { a1, a2, a3, l, c: cl, cp }
}

fn a_identities(x: &Ctx) -> Vec<PropertyRecord> {
    let mut rng = x.rng(1);
    let samples: Vec<BalancedExponent> = (0..x.count(10_000)).map(|_| random_exponent(&mut rng)).collect();
    type Identity = (&'static str, fn(&BalancedExponent, Complex64) -> Result<f64>);
    let identities: [Identity; 4] = [
        ("a(α) a(1-ᾱ) = 1", |al, a| Ok((a * a_func(&bar_reflect(al))? - 1.0).norm())),
        ("a(α+1) = -a(α)/(α ᾱ)", |al, a| Ok(rel(a_func(&al.offset(1.0))? / a, -1.0 / (al.hol() * al.anti())))),
        ("a(α) a(1-α) = (-1)^n", |al, a| {
            Ok((a * a_func(&al.one_minus())? - phase_pow(al.n(), PhaseBase::MinusOne)).norm())
        }),
        ("a(α) = (-1)^n a(ᾱ, α)", |al, a| Ok(rel(a, phase_pow(al.n(), PhaseBase::MinusOne) * a_func(&al.swap())?))),
    ];
    identities
        .iter()
        .map(|(name, f)| {
            let outcome = worst_of(&samples, |al| f(al, a_func(al)?));
            x.record(name, outcome, x.threshold)
        })
        .collect()
}

fn chain(x: &Ctx) -> Vec<PropertyRecord> {
    let sets = [
        (be(c(0.75, 0.0), c(0.75, 0.0)), be(c(0.75, 0.0), c(0.75, 0.0)), c(0.0, 0.0), c(1.0, 0.0)),
        (be(c(1.25, 0.0), c(0.25, 0.0)), be(c(0.75, 0.0), c(0.75, 0.0)), c(0.0, 0.0), c(1.0, 0.0)),
        (be(c(0.6, 0.3), c(0.6, 0.3)), be(c(0.7, -0.2), c(0.7, -0.2)), c(0.0, 0.3), c(1.2, -0.4)),
        (be(c(0.9, 0.2), c(-0.1, 0.2)), be(c(0.35, 0.0), c(1.35, 0.0)), c(-0.5, 0.5), c(0.5, -0.2)),
        (be(c(0.55, 0.0), c(0.55, 0.0)), be(c(0.8, -0.4), c(0.8, -0.4)), c(-1.0, 0.5), c(0.7, 0.0)),
    ];
    let opts = x.cfg.plane(x.threshold * 1e-2);
    sets.iter()
        .enumerate()
        .map(|(k, (al, bt, z1, z2))| {
            let outcome = verify_chain(al, bt, *z1, *z2, &opts).map(|r| (r.residual, 1));
            x.record(&format!("chain set {}", k + 1), outcome, x.threshold)
        })
        .collect()
}

fn star(x: &Ctx) -> Vec<PropertyRecord> {
    let two = BalancedExponent::scalar(c(2.0, 0.0));
    let pairs = [
        (be(c(2.0 / 3.0, 0.0), c(2.0 / 3.0, 0.0)), be(c(2.0 / 3.0, 0.0), c(2.0 / 3.0, 0.0))),
        (be(c(1.2, 0.1), c(0.2, 0.1)), be(c(0.3, -0.4), c(1.3, -0.4))),
        (be(c(0.5, 0.0), c(0.5, 0.0)), be(c(0.7, 0.2), c(0.7, 0.2))),
        (be(c(1.4, 0.0), c(0.4, 0.0)), be(c(0.3, 0.0), c(0.3, 0.0))),
        (be(c(0.45, 0.5), c(0.45, 0.5)), be(c(0.75, -0.1), c(0.75, -0.1))),
    ];
    let pts = [c(0.0, 0.0), c(1.0, 0.0), c(0.3, 0.8)];
    let opts = x.cfg.plane(x.threshold * 1e-2);
    let mut out: Vec<PropertyRecord> = pairs
        .iter()
        .enumerate()
        .map(|(k, (al, bt))| {
            let outcome = verify_star(al, bt, &(two - *al - *bt), pts, &opts).map(|r| (r.residual, 1));
            x.record(&format!("star set {}", k + 1), outcome, x.threshold)
        })
        .collect();
    let symmetry = worst_of(&pairs, |&(al, bt)| {
        let ga = two - al - bt;
        let r = verify_star(&al, &bt, &ga, pts, &opts)?;
        let mut asym = 0.0f64;
        for (e, p) in [([bt, al, ga], [pts[1], pts[0], pts[2]]), ([ga, bt, al], [pts[2], pts[1], pts[0]])] {
            let q = verify_star(&e[0], &e[1], &e[2], p, &opts)?;
            asym = asym.max(rel(q.closed_form, r.closed_form)).max(rel(q.quadrature.value, r.quadrature.value));
        }
        Ok(asym)
    });
    out.push(x.record("permutation symmetry", symmetry, 1e-10));
    let half = pairs[2].0;
    let unbalanced = match verify_star(&half, &half, &half, pts, &opts) {
        Err(Error::UniquenessViolation { .. }) => Ok((0.0, 1)),
        Err(e) => Err(e),
        Ok(_) => Ok((f64::INFINITY, 1)),
    };
    out.push(x.record("alpha + beta + gamma = 2 enforced", unbalanced, 0.0));
    out
}

fn covariance(x: &Ctx) -> Vec<PropertyRecord> {
    let s = SpinLabel::new;
    let sets = [
        ([s(0, 0.3), s(0, 0.7), s(0, 1.1)], [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)]),
        ([s(1, -0.4), s(2, 0.9), s(-1, 0.2)], [c(0.3, -0.2), c(-1.1, 0.8), c(0.9, 1.4)]),
        ([s(-2, 1.5), s(1, -0.6), s(1, 0.0)], [c(-0.5, -0.5), c(0.6, 0.1), c(0.2, 1.3)]),
    ];
    let mut out = Vec::new();
    for index in GeneratorIndex::INDEPENDENT {
        for barred in [false, true] {
            let name = format!("{index:?}{}", if barred { " (barred)" } else { "" });
            let residuals: Result<Vec<(f64, f64)>> = sets
                .iter()
                .map(|([a1, a2, a3], zs)| {
                    let ps = zs.map(PointPair::new);
                    let pts = [&ps[0], &ps[1], &ps[2]];
                    let w = w_kernel(a1, a2, a3, pts[0], pts[1], pts[2])?.norm();
                    let r1 = covariance_residual(a1, a2, a3, pts, index, barred, 1e-4)?.norm();
                    let r2 = covariance_residual(a1, a2, a3, pts, index, barred, 5e-5)?.norm();
                    Ok((r1 / w, r1 / r2))
                })
                .collect();
            let size = residuals.as_ref().map(|v| (v.iter().map(|r| r.0).fold(0.0, f64::max), v.len()));
            out.push(x.record(&format!("{name} residual at h = 1e-4"), size.map_err(Clone::clone), x.threshold));
            let order = residuals.map(|v| (v.iter().map(|r| (r.1 / 4.0 - 1.0).abs()).fold(0.0, f64::max), v.len()));
            out.push(x.record(&format!("{name} O(h^2) ratio, |ratio/4 - 1|"), order, 0.2));
        }
    }
    out
}

fn completeness(x: &Ctx) -> Vec<PropertyRecord> {
    let mut rng = x.rng(6);
    let sets: Vec<[SpinLabel; 3]> = (0..x.count(100))
        .map(|_| {
            let a1 = random_label(&mut rng, None);
            let a2 = random_label(&mut rng, None);
            let a = random_label(&mut rng, Some(a1.m + a2.m));
            [a1, a2, a]
        })
        .collect();
    let outcome = worst_of(&sets, |[a1, a2, a]| Ok(completeness_residual(a1, a2, a)?.norm()));
    vec![x.record("rho A B = (-1)^m", outcome, x.threshold)]
}

fn mb_propagator_suite(x: &Ctx) -> Vec<PropertyRecord> {
    let cases = [
        (c(1.0, 0.0), c(-1.0, 0.0), be(c(0.6, 0.0), c(0.6, 0.0))),
        (c(1.0, 1.0), c(0.3, 0.0), be(c(1.1, 0.0), c(0.1, 0.0))),
        (c(0.5, -0.8), c(-1.2, 0.3), be(c(0.7, 0.4), c(0.7, 0.4))),
        (c(0.0, 2.0), c(0.4, -0.1), be(c(0.3, 0.2), c(1.3, 0.2))),
        (c(-0.7, 0.2), c(0.9, 0.9), be(c(0.9, -0.3), c(0.9, -0.3))),
    ];
    let spec = x.cfg.contour(true);
    let per_case: Vec<Result<(f64, f64)>> = cases
        .par_iter()
        .map(|(z, y, al)| {
            let (z, y) = (PointPair::new(*z), PointPair::new(*y));
            let direct = bracket_pow(&(z - y), &-*al)?;
            let mut values = Vec::new();
            for eta in [-0.25, -0.5, -0.75] {
                values.push(mb_propagator(&z, &y, al, &ContourSpec { eta, ..spec })?.value);
            }
            let err = values.iter().map(|v| rel(*v, direct)).fold(0.0, f64::max);
            Ok((err, rel(values[0], values[1]).max(rel(values[2], values[1]))))
        })
        .collect();
    let mut out = Vec::new();
    for (k, r) in per_case.into_iter().enumerate() {
        let (z, y, al) = cases[k];
        let label = format!("z = {z}, y = {y}, alpha {al}");
        out.push(x.record(&format!("{label}: matches 1/[z-y]^alpha"), r.clone().map(|v| (v.0, 3)), x.threshold));
        out.push(x.record(&format!("{label}: eta invariance"), r.map(|v| (v.1, 3)), 1e-8));
    }
    out
}

fn mb_consistency(x: &Ctx) -> Vec<PropertyRecord> {
    let mut rng = x.rng(5);
    let sets: Vec<RacahLabels> = (0..x.count(10)).map(|_| random_racah(&mut rng)).collect();
    let spec = x.cfg.contour(false);
    let doubled = ContourSpec { nu_max: 2.0 * spec.nu_max, n_max: 2 * spec.n_max, ..spec };
    let pairs: Vec<Result<(f64, f64)>> = sets
        .par_iter()
        .map(|l| {
            let one = racah_mb1(l, &spec)?.value;
            let two = racah_mb2(l, &spec)?.value;
            let wide = racah_mb1(l, &doubled)?.value;
            Ok((rel(two, one), rel(wide, one)))
        })
        .collect();
    let fold = |pick: fn(&(f64, f64)) -> f64| -> Result<(f64, usize)> {
        let mut worst = 0.0f64;
        for p in &pairs {
            worst = worst.max(pick(p.as_ref().map_err(Clone::clone)?));
        }
        Ok((worst, pairs.len()))
    };
    vec![
        x.record("MB1 = MB2", fold(|p| p.0), x.threshold),
        x.record("doubling nu_max, n_max", fold(|p| p.1), x.threshold),
    ]
}

fn phi_oracle(x: &Ctx) -> Vec<PropertyRecord> {
    let s = SpinLabel::new;
    let points = [
        ([s(0, 0.2), s(0, 0.5), s(0, 0.9), s(0, 1.3), s(0, 0.7)], c(2.0, 1.0)),
        ([s(1, -0.4), s(1, 0.8), s(1, 0.3), s(-1, 1.1), s(0, -0.6)], c(-0.6, 0.9)),
    ];
    let base = x.cfg.contour(true);
    let spec = ContourSpec {
        tol: 1e-5,
        nu_max: x.cfg.nu_max.unwrap_or(300.0),
        n_max: x.cfg.n_max.unwrap_or(300),
        ..base
    };
    let opts = x.cfg.plane(1e-6);
    points
        .iter()
        .map(|([a1, a2, a3, l, cp], z)| {
            let z = PointPair::new(*z);
            let outcome = (|| {
                let d = phi1_direct(a1, a2, a3, l, cp, &z, &opts)?;
                let m = phi1_mb(a1, a2, a3, l, cp, &z, &spec)?;
                Ok((rel(m.value, d.value), 1))
            })();
            x.record(&format!("phi1 direct = MB at z = {}", z.z), outcome, x.threshold)
        })
        .collect()
}

/// Runs `suite` and returns one record per property, in a fixed order.
pub fn run(suite: Suite, cfg: &RunConfig, scale: f64) -> Vec<PropertyRecord> {
    if suite == Suite::All {
        return Suite::EACH.iter().flat_map(|s| run(*s, cfg, scale)).collect();
    }
    let x = Ctx { suite, cfg, scale, threshold: cfg.tolerance.unwrap_or(suite.default_threshold()) };
    match suite {
        Suite::AIdentities => a_identities(&x),
        Suite::Chain => chain(&x),
        Suite::Star => star(&x),
        Suite::Covariance => covariance(&x),
        Suite::Completeness => completeness(&x),
        Suite::MbPropagator => mb_propagator_suite(&x),
        Suite::MbConsistency => mb_consistency(&x),
        Suite::PhiOracle => phi_oracle(&x),
        Suite::All => unreachable!(),
    }
}
