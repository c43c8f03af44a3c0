use aaklab::catalog::{fourier_coefficients, AnalyticFunctionSpec};
use aaklab::cut::{geodesic_cut, CutOptions};
use aaklab::diagnostics::{equilibrium_reference, weak_star_distance};
use aaklab::hankel::{build_section, singular_system};
use aaklab::num::{Mp, C64};
use aaklab::par::set_parallel;
use aaklab::potential::{equilibrium, Arc, ArcChain, DiscreteMeasure};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn modes() -> [(&'static str, bool); 2] {
    [("parallel", true), ("sequential", false)]
}

fn nystrom(c: &mut Criterion) {
    let arms: Vec<Arc> = (0..3)
        .map(|k| Arc::Segment { a: C64::new(0.0, 0.0), b: C64::from_polar(0.5, 2.0 * std::f64::consts::PI * k as f64 / 3.0) })
        .collect();
    let chain = ArcChain::new(arms, 0.05).unwrap();
    let mut g = c.benchmark_group("equilibrium_tripod_48");
    g.sample_size(10);
    for (name, on) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            set_parallel(on);
            b.iter(|| equilibrium(&chain, 48).unwrap())
        });
    }
    g.finish();
}

fn hankel(c: &mut Criterion) {
    let f = AnalyticFunctionSpec::sqrt_pair(C64::new(0.6, 0.0), C64::new(-0.6, 0.0)).unwrap();
    let mut g = c.benchmark_group("mp_hankel_64");
    g.sample_size(10);
    for (name, on) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            set_parallel(on);
            b.iter(|| {
                let w = fourier_coefficients::<Mp>(&f, 256, None).unwrap();
                let s = build_section(&w, 64).unwrap();
                singular_system(&s).unwrap()
            })
        });
    }
    g.finish();
}

fn weak_star(c: &mut Criterion) {
    let cut = geodesic_cut(C64::new(-0.5, 0.0), C64::new(0.5, 0.0), &CutOptions::default()).unwrap();
    let reference = equilibrium_reference(&cut, 1024);
    let emp = DiscreteMeasure::uniform_circle(C64::new(0.0, 0.0), 0.3, 30);
    let mut g = c.benchmark_group("weak_star_distance");
    g.sample_size(10);
    for (name, on) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            set_parallel(on);
            b.iter(|| weak_star_distance(&emp, &reference, &cut))
        });
    }
    g.finish();
}

criterion_group!(benches, nystrom, hankel, weak_star);
criterion_main!(benches);
