//! Compares the data-parallel payoff-tensor build against a single-thread
//! run of the same code (a one-thread rayon pool), plus the sequential-only
//! path when the `parallel` feature is disabled. The downstream consumers
//! (payoff evaluation, best response) are included as scale references.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qgame_core::channels::{depolarizing_chi, OperatorBasis};
use qgame_core::constructors::diagonal_game;
use qgame_core::game::build_payoff_tensor;
use qgame_core::solvers::best_response;

fn bench_tensor_build(c: &mut Criterion) {
    for n in [2usize, 4] {
        let game = diagonal_game(n);
        let basis = OperatorBasis::matrix_units(n);
        let mut group = c.benchmark_group(format!("payoff_tensor_n{n}"));
        group.sample_size(10);

        #[cfg(feature = "parallel")]
        {
            group.bench_function("parallel", |b| {
                b.iter(|| black_box(build_payoff_tensor(&game, &basis, 16).unwrap()))
            });
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .expect("single-thread pool");
            group.bench_function("single_thread", |b| {
                b.iter(|| {
                    pool.install(|| black_box(build_payoff_tensor(&game, &basis, 16).unwrap()))
                })
            });
        }

        #[cfg(not(feature = "parallel"))]
        group.bench_function("sequential", |b| {
            b.iter(|| black_box(build_payoff_tensor(&game, &basis, 16).unwrap()))
        });

        group.finish();
    }
}

fn bench_evaluation(c: &mut Criterion) {
    let game = diagonal_game(2);
    let basis = OperatorBasis::matrix_units(2);
    let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
    let dep = depolarizing_chi(&basis);

    c.bench_function("payoff_evaluate_n2", |b| {
        b.iter(|| black_box(tensor.evaluate(&[&dep, &dep]).unwrap()))
    });

    let mut group = c.benchmark_group("best_response_n2");
    group.sample_size(10);
    group.bench_function("diagonal_game", |b| {
        b.iter(|| black_box(best_response(&tensor, 0, &[&dep], 1e-4)))
    });
    group.finish();
}

criterion_group!(benches, bench_tensor_build, bench_evaluation);
criterion_main!(benches);
