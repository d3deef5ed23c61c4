//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints one PASS/FAIL line; the process exits non-zero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sixj_core::kernels::{
    completeness_residual, covariance_residual, w_asymptotic_residual, w_kernel, GeneratorIndex,
};
use sixj_core::mellin_barnes::{
    mb_propagator, phi1_mb, racah_mb1, racah_mb2, ContourSpec, RacahLabels,
};
use sixj_core::quad2d::{phi1_direct, verify_chain, verify_star, PlaneOptions};
use sixj_core::*;

type Outcome = std::result::Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn be(h: Complex64, a: Complex64) -> BalancedExponent {
    BalancedExponent::new(h, a).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn lattice_distance(x: Complex64) -> f64 {
    (x - c(x.re.round(), 0.0)).norm()
}

/// Balanced exponent with parts in [-4, 4], at least `clearance` from the
/// integer lattice.
fn random_exponent(rng: &mut ChaCha8Rng, clearance: f64) -> BalancedExponent {
    loop {
        let n: i64 = rng.gen_range(-4..=4);
        let mean = c(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        let hol = mean + 0.5 * n as f64;
        if hol.re.abs() <= 4.0 && (hol.re - n as f64).abs() <= 4.0 && lattice_distance(hol) >= clearance {
            return be(hol, hol - n as f64);
        }
    }
}

fn random_label(rng: &mut ChaCha8Rng, m_parity: Option<i64>) -> SpinLabel {
    let mut m: i64 = rng.gen_range(-3..=3);
    if let Some(p) = m_parity {
        if (m - p).rem_euclid(2) != 0 {
            m += if m < 3 { 1 } else { -1 };
        }
    }
    SpinLabel::new(m, rng.gen_range(-2.0..2.0))
}

fn parity_valid_racah(rng: &mut ChaCha8Rng) -> RacahLabels {
    let a1 = random_label(rng, None);
    let a2 = random_label(rng, None);
    let a3 = random_label(rng, None);
    let cp = random_label(rng, Some(a1.m + a2.m));
    let l = random_label(rng, Some(cp.m + a3.m));
    let cl = random_label(rng, Some(a2.m + a3.m));
    RacahLabels { a1, a2, a3, l, c: cl, cp }
}

fn a_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 4];
    for _ in 0..10_000 {
        let al = random_exponent(&mut rng, 0.05);
        let n = al.n();
        let a = a_func(&al).map_err(|e| e.to_string())?;
        let residuals = [
            (a * a_func(&bar_reflect(&al)).unwrap() - 1.0).norm(),
            rel(a_func(&al.offset(1.0)).unwrap() / a, -1.0 / (al.hol() * al.anti())),
            (a * a_func(&al.one_minus()).unwrap() - phase_pow(n, PhaseBase::MinusOne)).norm(),
            rel(a, phase_pow(n, PhaseBase::MinusOne) * a_func(&al.swap()).unwrap()),
        ];
        for (w, r) in worst.iter_mut().zip(residuals) {
            *w = w.max(r);
        }
    }
    ensure(worst.iter().all(|&w| w < 1e-10), format!("10^4 samples, worst residuals {}", worst.map(|w| format!("{w:.1e}")).join(", ")))
}

fn plane_opts() -> PlaneOptions {
    PlaneOptions { tol: 1e-5, budget: 10_000_000 }
}

fn chain() -> Outcome {
    let sets = [
        (be(c(0.75, 0.0), c(0.75, 0.0)), be(c(0.75, 0.0), c(0.75, 0.0)), c(0.0, 0.0), c(1.0, 0.0)),
        (be(c(1.25, 0.0), c(0.25, 0.0)), be(c(0.75, 0.0), c(0.75, 0.0)), c(0.0, 0.0), c(1.0, 0.0)),
        (be(c(0.6, 0.3), c(0.6, 0.3)), be(c(0.7, -0.2), c(0.7, -0.2)), c(0.0, 0.3), c(1.2, -0.4)),
        (be(c(0.9, 0.2), c(-0.1, 0.2)), be(c(0.35, 0.0), c(1.35, 0.0)), c(-0.5, 0.5), c(0.5, -0.2)),
        (be(c(0.55, 0.0), c(0.55, 0.0)), be(c(0.8, -0.4), c(0.8, -0.4)), c(-1.0, 0.5), c(0.7, 0.0)),
    ];
    let mut worst = 0.0f64;
    for (al, bt, z1, z2) in sets {
        let r = verify_chain(&al, &bt, z1, z2, &plane_opts()).map_err(|e| e.to_string())?;
        worst = worst.max(r.residual);
    }
    ensure(worst < 1e-3, format!("5 sets (two with n != 0), worst relative residual {worst:.1e}"))
}

fn star() -> Outcome {
    let two = BalancedExponent::scalar(c(2.0, 0.0));
    let pairs = [
        (be(c(2.0 / 3.0, 0.0), c(2.0 / 3.0, 0.0)), be(c(2.0 / 3.0, 0.0), c(2.0 / 3.0, 0.0))),
        (be(c(1.2, 0.1), c(0.2, 0.1)), be(c(0.3, -0.4), c(1.3, -0.4))),
        (be(c(0.5, 0.0), c(0.5, 0.0)), be(c(0.7, 0.2), c(0.7, 0.2))),
        (be(c(1.4, 0.0), c(0.4, 0.0)), be(c(0.3, 0.0), c(0.3, 0.0))),
        (be(c(0.45, 0.5), c(0.45, 0.5)), be(c(0.75, -0.1), c(0.75, -0.1))),
    ];
    let pts = [c(0.0, 0.0), c(1.0, 0.0), c(0.3, 0.8)];
    let (mut worst, mut asym) = (0.0f64, 0.0f64);
    for (al, bt) in pairs {
        let ga = two - al - bt;
        let r = verify_star(&al, &bt, &ga, pts, &plane_opts()).map_err(|e| e.to_string())?;
        worst = worst.max(r.residual);
        for (e, p) in [([bt, al, ga], [pts[1], pts[0], pts[2]]), ([ga, bt, al], [pts[2], pts[1], pts[0]])] {
            let q = verify_star(&e[0], &e[1], &e[2], p, &plane_opts()).map_err(|e| e.to_string())?;
            asym = asym.max(rel(q.closed_form, r.closed_form)).max(rel(q.quadrature.value, r.quadrature.value));
        }
    }
    let unbalanced = verify_star(&pairs[2].0, &pairs[2].0, &pairs[2].0, pts, &plane_opts());
    ensure(
        worst < 1e-3 && asym < 1e-10 && matches!(unbalanced, Err(Error::UniquenessViolation { .. })),
        format!("5 sets, worst residual {worst:.1e}, permutation asymmetry {asym:.1e}, unbalanced set rejected"),
    )
}

fn mb_propagator_check() -> Outcome {
    let cases = [
        (PointPair::xy(1.0, 0.0), PointPair::xy(-1.0, 0.0), be(c(0.6, 0.0), c(0.6, 0.0))),
        (PointPair::xy(1.0, 1.0), PointPair::xy(0.3, 0.0), be(c(1.1, 0.0), c(0.1, 0.0))),
        (PointPair::xy(0.5, -0.8), PointPair::xy(-1.2, 0.3), be(c(0.7, 0.4), c(0.7, 0.4))),
        (PointPair::xy(0.0, 2.0), PointPair::xy(0.4, -0.1), be(c(0.3, 0.2), c(1.3, 0.2))),
        (PointPair::xy(-0.7, 0.2), PointPair::xy(0.9, 0.9), be(c(0.9, -0.3), c(0.9, -0.3))),
    ];
    let (mut worst, mut spread, mut slowest) = (0.0f64, 0.0f64, Duration::ZERO);
    for (z, y, al) in cases {
        let t = Instant::now();
        let direct = bracket_pow(&(z - y), &-al).map_err(|e| e.to_string())?;
        let mut values = Vec::new();
        for eta in [-0.25, -0.5, -0.75] {
            let spec = ContourSpec { eta, nu_max: 400.0, n_max: 400, ..ContourSpec::default() };
            let r = mb_propagator(&z, &y, &al, &spec).map_err(|e| e.to_string())?;
            worst = worst.max(rel(r.value, direct));
            values.push(r.value);
        }
        spread = spread.max(rel(values[0], values[1])).max(rel(values[2], values[1]));
        slowest = slowest.max(t.elapsed());
    }
    ensure(
        worst < 1e-6 && spread < 1e-8 && slowest < Duration::from_secs(60),
        format!("5 cases, worst error {worst:.1e}, eta spread {spread:.1e}, slowest case {slowest:.1?}"),
    )
}

fn racah_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = ContourSpec::default();
    let doubled = ContourSpec { nu_max: 2.0 * spec.nu_max, n_max: 2 * spec.n_max, ..spec };
    let (mut worst, mut moved) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let labels = parity_valid_racah(&mut rng);
        let one = racah_mb1(&labels, &spec).map_err(|e| format!("{labels:?}: {e}"))?;
        let two = racah_mb2(&labels, &spec).map_err(|e| format!("{labels:?}: {e}"))?;
        let wide = racah_mb1(&labels, &doubled).map_err(|e| format!("{labels:?}: {e}"))?;
        worst = worst.max(rel(two.value, one.value));
        moved = moved.max(rel(wide.value, one.value));
    }
    ensure(
        worst < 1e-8 && moved < 1e-8,
        format!("10 random sets, |MB1 - MB2|/|MB1| <= {worst:.1e}, doubling moved <= {moved:.1e}"),
    )
}

fn completeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a1 = random_label(&mut rng, None);
        let a2 = random_label(&mut rng, None);
        let a = random_label(&mut rng, Some(a1.m + a2.m));
        worst = worst.max(completeness_residual(&a1, &a2, &a).map_err(|e| e.to_string())?.norm());
    }
    ensure(worst < 1e-12, format!("100 random sets, worst residual {worst:.1e}"))
}

fn covariance() -> Outcome {
    let sets = [
        ([SpinLabel::new(0, 0.3), SpinLabel::new(0, 0.7), SpinLabel::new(0, 1.1)], [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)]),
        ([SpinLabel::new(1, -0.4), SpinLabel::new(2, 0.9), SpinLabel::new(-1, 0.2)], [c(0.3, -0.2), c(-1.1, 0.8), c(0.9, 1.4)]),
        ([SpinLabel::new(-2, 1.5), SpinLabel::new(1, -0.6), SpinLabel::new(1, 0.0)], [c(-0.5, -0.5), c(0.6, 0.1), c(0.2, 1.3)]),
    ];
    let (mut worst, mut ratio_lo, mut ratio_hi) = (0.0f64, f64::INFINITY, 0.0f64);
    for ([a1, a2, a3], zs) in sets {
        let ps = zs.map(PointPair::new);
        let pts = [&ps[0], &ps[1], &ps[2]];
        let w = w_kernel(&a1, &a2, &a3, pts[0], pts[1], pts[2]).map_err(|e| e.to_string())?.norm();
        for index in GeneratorIndex::INDEPENDENT {
            for barred in [false, true] {
                let r = |h| covariance_residual(&a1, &a2, &a3, pts, index, barred, h).map(|r| r.norm());
                let (r1, r2) = (r(1e-4).map_err(|e| e.to_string())?, r(5e-5).map_err(|e| e.to_string())?);
                worst = worst.max(r1 / w);
                ratio_lo = ratio_lo.min(r1 / r2);
                ratio_hi = ratio_hi.max(r1 / r2);
            }
        }
    }
    ensure(
        worst < 1e-6 && ratio_lo > 3.2 && ratio_hi < 4.8,
        format!("3 sets x 6 components, worst residual {worst:.1e}, halving ratios in [{ratio_lo:.2}, {ratio_hi:.2}]"),
    )
}

fn phi_oracle() -> Outcome {
    let s = SpinLabel::new;
    let spec = ContourSpec { nu_max: 300.0, n_max: 300, tol: 1e-5, ..ContourSpec::default() };
    let opts = PlaneOptions { tol: 1e-6, budget: 10_000_000 };
    let mut worst = 0.0f64;
    for (labels, z) in [
        ([s(0, 0.2), s(0, 0.5), s(0, 0.9), s(0, 1.3), s(0, 0.7)], c(2.0, 1.0)),
        ([s(1, -0.4), s(1, 0.8), s(1, 0.3), s(-1, 1.1), s(0, -0.6)], c(-0.6, 0.9)),
    ] {
        let [a1, a2, a3, l, cp] = labels;
        let z = PointPair::new(z);
        let direct = phi1_direct(&a1, &a2, &a3, &l, &cp, &z, &opts).map_err(|e| e.to_string())?;
        let mb = phi1_mb(&a1, &a2, &a3, &l, &cp, &z, &spec).map_err(|e| e.to_string())?;
        worst = worst.max(rel(mb.value, direct.value));
    }
    ensure(worst < 1e-3, format!("2 points, worst |direct - MB|/|direct| {worst:.1e}"))
}

fn conjugation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a1 = random_label(&mut rng, None);
        let a2 = random_label(&mut rng, None);
        let a3 = random_label(&mut rng, Some(a1.m + a2.m));
        let mut pt = || PointPair::xy(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let ps = [pt(), pt(), pt()];
        let w = w_kernel(&a1, &a2, &a3, &ps[0], &ps[1], &ps[2]).map_err(|e| e.to_string())?;
        let wn = w_kernel(&a1.negate(), &a2.negate(), &a3.negate(), &ps[0], &ps[1], &ps[2]).unwrap();
        worst = worst.max(rel(wn, w.conj()));
    }
    ensure(worst < 1e-12, format!("10^3 random points and labels, worst {worst:.1e}"))
}

fn asymptotics() -> Outcome {
    let s = SpinLabel::new;
    let mut ratios = Vec::new();
    for labels in [[s(2, 0.4), s(0, -0.9), s(2, 0.6)], [s(0, 0.3), s(0, 0.7), s(0, 1.1)], [s(1, -1.2), s(1, 0.5), s(0, 0.8)]] {
        let [a1, a2, a3] = labels;
        let r3 = w_asymptotic_residual(&a1, &a2, &a3, 1e3).map_err(|e| e.to_string())?;
        let r4 = w_asymptotic_residual(&a1, &a2, &a3, 1e4).map_err(|e| e.to_string())?;
        ratios.push(r3 / r4);
    }
    ensure(
        ratios.iter().all(|r| (r / 10.0 - 1.0).abs() < 0.3),
        format!("residual ratio R=1e3 over R=1e4: {ratios:.2?} (expected 10)"),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 10] = [
        ("a-function identities", a_identities, Duration::from_secs(10)),
        ("chain relation", chain, Duration::from_secs(600)),
        ("star-triangle relation", star, Duration::from_secs(1800)),
        ("MB propagator", mb_propagator_check, Duration::from_secs(300)),
        ("Racah MB1 = MB2", racah_consistency, Duration::from_secs(600)),
        ("completeness residual", completeness, Duration::from_secs(5)),
        ("covariance", covariance, Duration::from_secs(60)),
        ("phi oracle", phi_oracle, Duration::from_secs(1200)),
        ("conjugation symmetry", conjugation, Duration::from_secs(5)),
        ("W asymptotics", asymptotics, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let took = t.elapsed();
        let (tag, msg) = match outcome {
            Ok(m) if took <= *budget => ("PASS", m),
            Ok(m) => ("FAIL", format!("{m}; took {took:.1?}, limit {budget:?}")),
            Err(m) => ("FAIL", m),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{tag} {:>2} {name}: {msg} [{took:.1?}]", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
