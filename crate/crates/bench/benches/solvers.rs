use criterion::{black_box, criterion_group, criterion_main, Criterion};
use momentumian_core::classical::{self, ClassicalSetup};
use momentumian_core::pide::{PidePair, SeparationConstants};
use momentumian_core::specfun::{self, caputo_half, CaputoGrid, MlEvalPolicy};
use momentumian_core::tide::{HoRun, HydrogenRun};
use momentumian_core::{Branch, Complex64, Potential};

fn classical(c: &mut Criterion) {
    let s = ClassicalSetup::new(Potential::harmonic(1.0).unwrap(), 0.5, Branch::Minus).unwrap();
    c.bench_function("time_of_flight to turning point", |b| {
        b.iter(|| classical::time_of_flight(&s, black_box(-0.3), 1.0).unwrap())
    });
    c.bench_function("trajectory 1001 points", |b| {
        b.iter(|| classical::trajectory(&s, -0.99, 0.99, 1001).unwrap())
    });
}

fn special(c: &mut Criterion) {
    let p = MlEvalPolicy::default();
    c.bench_function("E_1/2 series", |b| {
        b.iter(|| specfun::mittag_leffler(0.5, black_box(Complex64::new(1.2, -0.7)), &p).unwrap())
    });
    c.bench_function("E_1/2 erfc branch", |b| {
        b.iter(|| specfun::mittag_leffler(0.5, black_box(Complex64::new(12.0, -30.0)), &p).unwrap())
    });
    let g = CaputoGrid::sample(1.0, 4001, |t| Complex64::new(t, 0.0)).unwrap();
    c.bench_function("caputo_half 4001", |b| {
        b.iter(|| caputo_half(black_box(&g)))
    });
    let pair = PidePair::unit_initial(SeparationConstants::from_k0(1.0, 1.0).unwrap()).unwrap();
    c.bench_function("pide psi", |b| {
        b.iter(|| pair.psi(black_box(37.5)).unwrap())
    });
}

fn tide(c: &mut Criterion) {
    let mut g = c.benchmark_group("tide");
    g.sample_size(10);
    g.bench_function("HO k = 2, 4001 points", |b| {
        b.iter(|| HoRun::new(2.0, 2.84, 4001).solve().unwrap())
    });
    g.bench_function("hydrogen K0 = -0.5", |b| {
        b.iter(|| HydrogenRun::new(-0.5).solve().unwrap())
    });
    g.finish();
}

criterion_group!(benches, classical, special, tide);
criterion_main!(benches);
