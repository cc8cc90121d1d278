use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use fracsep_bench::{paper_coeff, paper_rhs};
use fracsep_core::bounds::linear_bounds;
use fracsep_core::envelope::linear_coeff_envelope;
use fracsep_core::solver::{solve_abm, solve_pi_trapezoidal, uniform_times, FracIVP};
use fracsep_core::special::ml;

fn bench_mittag_leffler(c: &mut Criterion) {
    let mut group = c.benchmark_group("ml");
    for &(label, z) in &[
        ("series_small", -2.0),
        ("series_deep", -6.5),
        ("asymptotic", -40.0),
        ("exp_branch", 20.0),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &z, |b, &z| {
            b.iter(|| ml(black_box(0.65), black_box(z)).unwrap())
        });
    }
    group.finish();
}

fn bench_solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("pi_trapezoidal");
    group.sample_size(10);
    for &n in &[256usize, 1024, 4096] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let h = 6.0 / n as f64;
            b.iter(|| {
                let ivp = FracIVP::new(0.65, paper_rhs, 1.0, 6.0).unwrap();
                solve_pi_trapezoidal(&ivp, black_box(h)).unwrap()
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group("abm");
    group.sample_size(10);
    group.bench_function("n1024", |b| {
        b.iter(|| {
            let ivp = FracIVP::new(0.65, paper_rhs, 1.0, 6.0).unwrap();
            solve_abm(&ivp, black_box(6.0 / 1024.0)).unwrap()
        })
    });
    group.finish();
}

fn bench_envelope_and_bounds(c: &mut Criterion) {
    let times = uniform_times(6.0, 6.0 / 1024.0).unwrap();
    c.bench_function("linear_envelope_n1024", |b| {
        b.iter(|| linear_coeff_envelope(paper_coeff, black_box(&times)).unwrap())
    });
    let env = linear_coeff_envelope(paper_coeff, &times).unwrap();
    c.bench_function("linear_bounds_n1024", |b| {
        b.iter(|| linear_bounds(black_box(1.0), 0.65, &env).unwrap())
    });
}

criterion_group!(benches, bench_mittag_leffler, bench_solver, bench_envelope_and_bounds);
criterion_main!(benches);
