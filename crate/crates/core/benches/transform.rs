use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;
use neurochaos::{transform_matrix_with, Execution, GlsParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bench_transform(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples = Array2::from_shape_fn((400, 32), |_| rng.random_range(0.0..1.0));
    let params = GlsParams::new(0.52, 0.75, 0.01).unwrap();
    let mut group = c.benchmark_group("transform_matrix");
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |bch, &exec| {
            bch.iter(|| transform_matrix_with(black_box(samples.view()), &params, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_transform);
criterion_main!(benches);
