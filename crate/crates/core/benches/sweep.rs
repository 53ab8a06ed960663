use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ensavg_core::ensemble::{average_with, enumerate_subsets, SubsetRange};
use ensavg_core::ingest::{align, ModelPredictionSet};
use ensavg_core::sweep::sweep;
use ensavg_core::{default_catalog, F1Mode, LabelVector, Parallelism, ProbabilityMatrix, SampleId};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODELS: [&str; 5] = ["effnet", "incep", "res101", "res152", "res50"];

fn random_set(n: usize) -> ModelPredictionSet {
    let catalog = default_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ids: Vec<SampleId> = (0..n).map(|i| SampleId::new(format!("s{i}")).unwrap()).collect();
    let labels: Vec<usize> = (0..n).map(|_| (rng.next_u32() % 4) as usize).collect();
    let labels = LabelVector::new(ids.clone(), labels, &catalog).unwrap();
    let predictions = MODELS
        .iter()
        .map(|&model| {
            let rows = (0..n)
                .map(|_| {
                    let w: Vec<f64> = (0..4).map(|_| (rng.next_u32() % 1000 + 1) as f64).collect();
                    let s: f64 = w.iter().sum();
                    w.into_iter().map(|v| v / s).collect()
                })
                .collect();
            let m = ProbabilityMatrix::new(ids.clone(), rows, catalog.clone()).unwrap();
            (model.to_owned(), m)
        })
        .collect();
    align(predictions, labels).unwrap()
}

fn modes() -> [(&'static str, Parallelism); 2] {
    [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)]
}

fn bench_sweep(c: &mut Criterion) {
    let set = random_set(20_000);
    let specs = enumerate_subsets(&set.model_ids(), SubsetRange::new(1, 5).unwrap()).unwrap();
    let mut group = c.benchmark_group("sweep_31_subsets_20k");
    group.sample_size(10);
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| sweep(black_box(&set), &specs, F1Mode::Definition, mode).unwrap())
        });
    }
    group.finish();
}

fn bench_average(c: &mut Criterion) {
    let set = random_set(100_000);
    let ids = set.model_ids();
    let members: Vec<&ProbabilityMatrix> = ids.iter().map(|id| set.get(id).unwrap()).collect();
    let mut group = c.benchmark_group("average_5x100k");
    group.sample_size(10);
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| average_with(black_box(&members), mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_average);
criterion_main!(benches);
