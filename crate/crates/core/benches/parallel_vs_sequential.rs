//! Rayon pool against a one-thread pool on the data-parallel kernels.
//!
//! Build with `--no-default-features` to time the plain-iterator fallback.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sclab_core::funclass::{forward, ClassTag, FunctionClassSpec, RepresentationModel};
use sclab_core::objective::{population_loss_and_cotangent, train, Objective, TrainConfig};
use sclab_core::posgraph::PositivePairGraph;
use sclab_core::septest::{estimate_br, BrOptions};
use sclab_core::spectral::eigendecompose;
use sclab_core::synthdata::{example1_graph, random_graph, Example1Spec};

#[cfg(feature = "parallel")]
fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()),
    ]
}

#[cfg(feature = "parallel")]
fn run<R>(pool: &rayon::ThreadPool, f: impl FnOnce() -> R + Send) -> R
where
    R: Send,
{
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn pools() -> Vec<(&'static str, ())> {
    vec![("fallback", ())]
}

#[cfg(not(feature = "parallel"))]
fn run<R>(_: &(), f: impl FnOnce() -> R) -> R {
    f()
}

fn example1() -> PositivePairGraph {
    example1_graph(&Example1Spec::new(7, 2, vec![0.5, 1.0])).unwrap().graph
}

fn bench_loss(c: &mut Criterion) {
    let graph = example1();
    let shape = FunctionClassSpec::new(ClassTag::Relu, 8).shape_for(&graph).unwrap();
    let model = RepresentationModel::random(shape, 0.5, 1).unwrap();
    let mut group = c.benchmark_group("loss_and_cotangent");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, graph.n()), |b| {
            b.iter(|| {
                run(&pool, || {
                    let f = forward(&model, &graph).unwrap();
                    black_box(population_loss_and_cotangent(&graph, &f, 1.0))
                })
            })
        });
    }
    group.finish();
}

fn bench_eigen(c: &mut Criterion) {
    let graph = random_graph(1200, 6, 0.02, 2, 7).unwrap();
    let mut group = c.benchmark_group("eigendecompose_components");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, graph.n()), |b| {
            b.iter(|| run(&pool, || black_box(eigendecompose(&graph, 12).unwrap())))
        });
    }
    group.finish();
}

fn bench_multistart(c: &mut Criterion) {
    let graph = random_graph(60, 1, 0.2, 4, 3).unwrap();
    let class = FunctionClassSpec::new(ClassTag::Relu, 3);
    let config = TrainConfig {
        max_iters: 200,
        ..TrainConfig::default()
    };
    let mut group = c.benchmark_group("multistart_relu");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| run(&pool, || black_box(train(&graph, Objective::Population, &class, 1.0, &config).unwrap())))
        });
    }
    group.finish();
}

fn bench_br_grid(c: &mut Criterion) {
    let graph = random_graph(40, 2, 0.2, 2, 5).unwrap();
    let class = FunctionClassSpec::new(ClassTag::Tabular, 4);
    let options = BrOptions {
        seeds_per_cell: 2,
        train: TrainConfig {
            max_iters: 300,
            ..TrainConfig::default()
        },
        ..BrOptions::default()
    };
    let mut group = c.benchmark_group("br_grid");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| run(&pool, || black_box(estimate_br(&graph, &class, 4, &options).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_loss, bench_eigen, bench_multistart, bench_br_grid);
criterion_main!(benches);
