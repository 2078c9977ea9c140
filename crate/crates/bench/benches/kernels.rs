//! Hot paths: the exact oracle near its size ceiling, the greedy
//! estimator on a large sampled space, the depth-averaged matrix
//! stream, and the subadditive hull on a long horizon.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

use scalent_core::rng::stream_rng;
use scalent_core::suites::random_triple;
use scalent_core::{
    averaged_matrix_stream, cut_semimetric, exact_entropy_limited, greedy_entropy,
    subadditive_hull, DistanceMatrix, Labeling, System, SystemSpec,
};

fn arc(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

fn torus_instance(n: usize, seed: u64) -> (DistanceMatrix, Vec<f64>) {
    let mut rng = stream_rng(seed, 0);
    let points: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let matrix = DistanceMatrix::from_fn(n, 0.5, |i, j| arc(points[i], points[j]));
    (matrix, vec![1.0 / n as f64; n])
}

fn bench_exact_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_oracle");
    for &n in &[8usize, 10, 12] {
        let (matrix, weights) = torus_instance(n, 0xBE);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| exact_entropy_limited(&matrix, &weights, 0.15, 15).unwrap())
        });
    }
    group.finish();
}

fn bench_greedy_cover(c: &mut Criterion) {
    let (matrix, weights) = torus_instance(2048, 0x9D);
    let mut group = c.benchmark_group("greedy_cover");
    group.sample_size(10);
    group.bench_function("n2048", |b| {
        b.iter(|| greedy_entropy(&matrix, &weights, 0.1).unwrap())
    });
    group.finish();
}

fn bench_matrix_stream(c: &mut Criterion) {
    let spec = SystemSpec::BernoulliShift {
        alphabet: 2,
        probs: vec![0.5, 0.5],
        word_len: 12,
        cyclic: true,
    };
    let system = System::build(&spec, 512, 3, false, 16).unwrap();
    let rho = cut_semimetric(Labeling::WordPrefix { len: 1 }).unwrap();
    let mut group = c.benchmark_group("matrix_stream");
    group.sample_size(10);
    group.bench_function("n512_depth16", |b| {
        b.iter(|| {
            averaged_matrix_stream(&system.space, &system.orbit, &rho, &[1, 2, 4, 8, 16]).unwrap()
        })
    });
    group.finish();
}

fn bench_hull(c: &mut Criterion) {
    let mut rng = stream_rng(5, 0x2);
    let triple = random_triple(&mut rng, 1024).unwrap();
    c.bench_function("subadditive_hull_1024", |b| {
        b.iter(|| subadditive_hull(&triple).unwrap())
    });
}

criterion_group!(
    kernels,
    bench_exact_oracle,
    bench_greedy_cover,
    bench_matrix_stream,
    bench_hull
);
criterion_main!(kernels);
