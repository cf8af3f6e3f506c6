//! Fast vs naive transform, and the data-parallel kernels on a one-thread
//! pool vs the default pool. Built without the `parallel` feature, the pool
//! comparison collapses to the sequential path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vilenkin::group::GeneratorSequence;
use vilenkin::kernels::{kernel_l1_scan, Convention};
use vilenkin::operators::{maximal_fejer, WeightSpec};
use vilenkin::step::StepFunction;
use vilenkin::transform::{forward, forward_naive};

fn random_step(g: &GeneratorSequence, rank: usize) -> StepFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let values = (0..g.size(rank))
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StepFunction::new(g, rank, values).unwrap()
}

fn fast_vs_naive(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for (label, g) in [
        ("walsh", GeneratorSequence::walsh(10).unwrap()),
        ("m2-3", GeneratorSequence::periodic(&[2, 3], 6).unwrap()),
    ] {
        let mut ranks = vec![6, g.n_max()];
        ranks.dedup();
        for rank in ranks {
            let f = random_step(&g, rank);
            let id = format!("{label}/M={}", g.size(rank));
            group.bench_with_input(BenchmarkId::new("fast", &id), &f, |b, f| {
                b.iter(|| forward(black_box(f)))
            });
            // Quadratic; only the smaller size is worth timing.
            if rank == 6 {
                group.bench_with_input(BenchmarkId::new("naive", &id), &f, |b, f| {
                    b.iter(|| forward_naive(black_box(f)))
                });
            }
        }
    }
    group.finish();
}

/// Runs `body` on a pool of `threads` workers, or the default pool for `None`.
#[cfg(feature = "parallel")]
fn on_pool<R: Send>(threads: Option<usize>, body: impl FnOnce() -> R + Send) -> R {
    match threads {
        None => body(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(body),
    }
}

#[cfg(not(feature = "parallel"))]
fn on_pool<R: Send>(_threads: Option<usize>, body: impl FnOnce() -> R + Send) -> R {
    body()
}

fn pools(c: &mut Criterion) {
    let g = GeneratorSequence::walsh(11).unwrap();
    let f = random_step(&g, 11);
    let w = WeightSpec::Power { p: 1.0 / 3.0 };
    let mut group = c.benchmark_group("pool");
    group.sample_size(10);
    for (name, threads) in [("one_thread", Some(1)), ("default", None)] {
        group.bench_function(BenchmarkId::new("maximal_fejer", name), |b| {
            on_pool(threads, || {
                b.iter(|| maximal_fejer(black_box(&f), 2048, &w, Convention::Lagged).unwrap())
            })
        });
        group.bench_function(BenchmarkId::new("kernel_l1_scan", name), |b| {
            on_pool(threads, || {
                b.iter(|| kernel_l1_scan(&g, 512, 9, Convention::Lagged).unwrap())
            })
        });
        group.bench_function(BenchmarkId::new("forward", name), |b| {
            on_pool(threads, || b.iter(|| forward(black_box(&f))))
        });
    }
    group.finish();
}

criterion_group!(benches, fast_vs_naive, pools);
criterion_main!(benches);
