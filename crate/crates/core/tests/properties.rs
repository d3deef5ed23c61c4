use proptest::prelude::*;
use sixj_core::kernels::{completeness_residual, w_kernel};
use sixj_core::mellin_barnes::{pole_scan, racah_integrand, racah_prefactor, s_of, ContourSpec, RacahForm, RacahLabels};
use sixj_core::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn off_lattice() -> impl Strategy<Value = BalancedExponent> {
    (-4.0..4.0f64, -4.0..4.0f64, -4i64..=4)
        .prop_map(|(re, im, n)| BalancedExponent::from_mean(c(re, im), n))
        .prop_filter("pole clearance", |a| (a.hol() - c(a.hol().re.round(), 0.0)).norm() >= 0.05)
}

fn label() -> impl Strategy<Value = SpinLabel> {
    (-3i64..=3, -2.0..2.0f64).prop_map(|(m, s)| SpinLabel::new(m, s))
}

fn with_parity(l: SpinLabel, p: i64) -> SpinLabel {
    let m = if (l.m - p).rem_euclid(2) == 0 { l.m } else { l.m + 1 };
    SpinLabel::new(m, l.sigma)
}

fn racah_labels() -> impl Strategy<Value = RacahLabels> {
    (label(), label(), label(), label(), label(), label()).prop_map(|(a1, a2, a3, l, cl, cp)| {
        let cp = with_parity(cp, a1.m + a2.m);
        let l = with_parity(l, cp.m + a3.m);
        let cl = with_parity(cl, a2.m + a3.m);
        RacahLabels { a1, a2, a3, l, c: cl, cp }
    })
}

fn point() -> impl Strategy<Value = PointPair> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| PointPair::xy(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn a_function_identities(al in off_lattice()) {
        let a = a_func(&al).unwrap();
        let minus_one_n = phase_pow(al.n(), PhaseBase::MinusOne);
        prop_assert!((a * a_func(&bar_reflect(&al)).unwrap() - 1.0).norm() < 1e-10);
        let shifted = a_func(&al.offset(1.0)).unwrap() / a;
        let want = -1.0 / (al.hol() * al.anti());
        prop_assert!((shifted - want).norm() < 1e-10 * want.norm());
        prop_assert!((a * a_func(&al.one_minus()).unwrap() - minus_one_n).norm() < 1e-10);
        prop_assert!((a - minus_one_n * a_func(&al.swap()).unwrap()).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn s_lattice_is_balanced(n in -1000i64..1000, re in -1e3..1e3f64, im in -1.0..0.0f64) {
        let s = s_of(n, c(re, im));
        prop_assert_eq!(s.n(), n);
        prop_assert!((s.hol() - s.anti() - n as f64).norm() < 1e-9);
        prop_assert!((s.hol() + s.anti() - c(-im, re)).norm() < 1e-9);
    }

    #[test]
    fn completeness_vanishes(a1 in label(), a2 in label(), a in label()) {
        let a = with_parity(a, a1.m + a2.m);
        prop_assert!(completeness_residual(&a1, &a2, &a).unwrap().norm() < 1e-12);
    }

    #[test]
    fn conjugation_flips_labels(a1 in label(), a2 in label(), a3 in label(), p1 in point(), p2 in point(), p3 in point()) {
        let a3 = with_parity(a3, a1.m + a2.m);
        prop_assume!((p1.z - p2.z).norm() > 1e-3 && (p1.z - p3.z).norm() > 1e-3 && (p2.z - p3.z).norm() > 1e-3);
        let w = w_kernel(&a1, &a2, &a3, &p1, &p2, &p3).unwrap();
        let wn = w_kernel(&a1.negate(), &a2.negate(), &a3.negate(), &p1, &p2, &p3).unwrap();
        prop_assert!((w.conj() - wn).norm() <= 1e-12 * w.norm());
    }

    #[test]
    fn odd_parity_is_rejected(r in racah_labels(), bump in 0usize..6) {
        let mut r = r;
        let slot = [&mut r.a1, &mut r.a2, &mut r.a3, &mut r.l, &mut r.c, &mut r.cp];
        slot.into_iter().nth(bump).unwrap().m += 1;
        prop_assert!(matches!(racah_prefactor(&r), Err(Error::ParityViolation(_))));
    }

    #[test]
    fn unitary_racah_poles_stay_off_the_strip(r in racah_labels(), eta in -0.95..-0.05f64) {
        for form in [RacahForm::Mb1, RacahForm::Mb2] {
            let g = racah_integrand(&r, form).unwrap();
            let spec = ContourSpec { eta, n_max: 12, ..ContourSpec::default() };
            let d = pole_scan(&g, &spec);
            prop_assert_eq!(d.crossed_poles, 0);
            prop_assert!(d.min_pole_distance >= eta.abs().min(1.0 + eta) - 1e-9);
        }
    }
}
