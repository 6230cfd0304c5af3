//! Parallel versus single-threaded execution of the hot paths. Without the
//! `parallel` feature both variants run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mfif::dataset::manifest::procedural_samples;
use mfif::dataset::{example_rng, make_commutative_batch, synthesize_example, SynthesisConfig, TrainingExample};
use mfif::imaging::{blur, GaussianKernel};
use mfif::metrics::evaluate;
use mfif::network::{batch_gradient, init_parameters, Head, HourglassConfig, Objective};
use mfif::par;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn examples(n: usize, size: usize) -> Vec<TrainingExample> {
    let cfg = SynthesisConfig {
        crop: size,
        ..SynthesisConfig::default()
    };
    procedural_samples(1, n, size, size, 3)
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, s)| synthesize_example(s, &cfg, &mut example_rng(0, i as u64)).unwrap())
        .collect()
}

fn bench(c: &mut Criterion) {
    let ex = examples(3, 64);
    let batch = make_commutative_batch(&ex).unwrap();
    let params = init_parameters(HourglassConfig::desk(Head::Seg), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let mut g = c.benchmark_group("batch_gradient_64px");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| batch_gradient(black_box(&params), &batch, Objective::Bce).unwrap()));
    g.bench_function("sequential", |b| {
        b.iter(|| par::sequential(|| batch_gradient(black_box(&params), &batch, Objective::Bce).unwrap()))
    });
    g.finish();

    let big = &examples(1, 256)[0];
    let kernel = GaussianKernel::new(3.0).unwrap();
    let mut g = c.benchmark_group("blur_256px");
    g.bench_function("parallel", |b| b.iter(|| blur(black_box(&big.truth), &kernel)));
    g.bench_function("sequential", |b| b.iter(|| par::sequential(|| blur(black_box(&big.truth), &kernel))));
    g.finish();

    let mut g = c.benchmark_group("metrics_256px");
    g.sample_size(10);
    let run = || evaluate(&big.pair.a, &big.pair.b, &big.truth, Some(&big.truth)).unwrap();
    g.bench_function("parallel", |b| b.iter(run));
    g.bench_function("sequential", |b| b.iter(|| par::sequential(run)));
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
