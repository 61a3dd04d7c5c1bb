use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fato::qmat::expm_hermitian;
use fato::{
    build_swap_schedule, fato_swap_fidelity, kron, magnus_effective, pauli, pi_sequence, propagate_waveform,
    search_to_sequence, series_of, Axis, CMat, DriveParams, Gate,
};

fn synthesis(c: &mut Criterion) {
    let weak = DriveParams::from_theta(1.0, PI / 10.0).unwrap();
    let strong = DriveParams::from_theta(1.0, PI / 3.0).unwrap();
    let mut g = c.benchmark_group("synthesis");
    g.bench_function("weak_x_pi10", |b| b.iter(|| pi_sequence(Gate::X, black_box(weak)).unwrap()));
    g.bench_function("strong_y_pi3", |b| b.iter(|| pi_sequence(Gate::Y, black_box(strong)).unwrap()));
    g.sample_size(10);
    let mid = DriveParams::from_theta(1.0, PI / 4.0).unwrap();
    g.bench_function("search_x_pi4", |b| {
        b.iter(|| search_to_sequence(&Gate::X.target(), black_box(mid), 4, 1e-10).unwrap())
    });
    g.finish();
}

fn fourier(c: &mut Criterion) {
    let p = DriveParams::from_theta(1.0, PI / 10.0).unwrap();
    let seq = pi_sequence(Gate::X, p).unwrap();
    let mut g = c.benchmark_group("series");
    for k in [23usize, 57, 400] {
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| b.iter(|| series_of(&seq, k).unwrap()));
    }
    g.finish();
}

fn exponentials(c: &mut Criterion) {
    let zz = kron(&pauli(Axis::Z), &pauli(Axis::Z)).unwrap().scale_re(0.5);
    let xx = kron(&pauli(Axis::X), &CMat::identity(2)).unwrap();
    let h = zz + xx.scale_re(3e-4);
    c.bench_function("expm_4x4_near_degenerate", |b| b.iter(|| expm_hermitian(black_box(&h), 1e-3).unwrap()));
}

fn dynamics(c: &mut Criterion) {
    let mut g = c.benchmark_group("propagate");
    g.sample_size(20);
    let p = DriveParams::from_theta(1.0, PI / 10.0).unwrap();
    let seq = pi_sequence(Gate::X, p).unwrap();
    for k in [4usize, 23] {
        let wf = series_of(&seq, k).unwrap();
        g.bench_with_input(BenchmarkId::new("x_pi10", k), &wf, |b, wf| {
            b.iter(|| propagate_waveform(wf, &p, &Gate::X.target(), 0.0).unwrap())
        });
    }
    let py = DriveParams::from_theta(1.0, PI / 8.0).unwrap();
    let seq_y = pi_sequence(Gate::Y, py).unwrap();
    g.bench_function("magnus_y_pi8_k18", |b| b.iter(|| magnus_effective(&seq_y, 18).unwrap()));
    g.finish();

    let mut g = c.benchmark_group("swap");
    g.sample_size(10);
    let s = build_swap_schedule(1.0, 20.0).unwrap();
    g.bench_function("amp20_bw100", |b| b.iter(|| fato_swap_fidelity(&s, 100.0).unwrap()));
    g.finish();
}

criterion_group!(benches, synthesis, fourier, exponentials, dynamics);
criterion_main!(benches);
