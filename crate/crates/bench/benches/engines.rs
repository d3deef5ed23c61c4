use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use sixj_core::mellin_barnes::{mb_propagator, racah_mb1, ContourSpec, RacahLabels};
use sixj_core::quad2d::{verify_chain, PlaneOptions};
use sixj_core::{a_func, BalancedExponent, Complex64, PointPair, SpinLabel};

fn closed_forms(c: &mut Criterion) {
    let al = BalancedExponent::new(Complex64::new(0.6, 0.1), Complex64::new(1.6, 0.1)).unwrap();
    c.bench_function("a_func", |b| b.iter(|| a_func(black_box(&al)).unwrap()));
}

fn racah(c: &mut Criterion) {
    let s = SpinLabel::new;
    let labels = RacahLabels { a1: s(0, 0.2), a2: s(0, 0.5), a3: s(0, 0.9), l: s(0, 1.3), c: s(0, 0.4), cp: s(0, 0.7) };
    let spec = ContourSpec::default();
    let mut g = c.benchmark_group("mellin_barnes");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    g.bench_function("racah_mb1_default", |b| b.iter(|| racah_mb1(black_box(&labels), &spec).unwrap()));
    let al = BalancedExponent::real(0.6, 0.6).unwrap();
    let (z, y) = (PointPair::xy(1.0, 0.0), PointPair::xy(-1.0, 0.0));
    let caps = ContourSpec { nu_max: 150.0, n_max: 150, ..ContourSpec::default() };
    g.bench_function("propagator_cap_150", |b| b.iter(|| mb_propagator(black_box(&z), &y, &al, &caps).unwrap()));
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let al = BalancedExponent::real(0.75, 0.75).unwrap();
    let opts = PlaneOptions { tol: 1e-5, budget: 10_000_000 };
    let (z1, z2) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let mut g = c.benchmark_group("quad2d");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    g.bench_function("chain_tol_1e-5", |b| b.iter(|| verify_chain(black_box(&al), &al, z1, z2, &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, closed_forms, racah, quadrature);
criterion_main!(benches);
