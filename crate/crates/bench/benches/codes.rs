use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use prm_pir::pirsim::{execute, make_query_plan, ClientKind};
use prm_pir::{best_code, build_prm, build_sprm};
use prm_pir_bench::provisioned;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("construct");
    for (m, r) in [(5, 2), (6, 3), (8, 4)] {
        group.bench_with_input(
            BenchmarkId::new("prm", format!("{r},{}", m - 1)),
            &(m, r),
            |b, &(m, r)| b.iter(|| build_prm(black_box(m), black_box(r)).unwrap()),
        );
    }
    group.bench_function("sprm 3,7,17", |b| {
        b.iter(|| build_sprm(black_box(8), 3, black_box(17)).unwrap())
    });
    group.bench_function("best_code k=100 tau=8", |b| {
        b.iter(|| best_code(black_box(100), 8).unwrap())
    });
    group.finish();
}

fn distances(c: &mut Criterion) {
    let mut group = c.benchmark_group("distance");
    group.sample_size(10);
    let small = build_prm(5, 2).unwrap();
    group.bench_function("d1 PRM(2,4)", |b| {
        b.iter(|| small.generator().min_distance().unwrap())
    });
    let wide = build_prm(6, 3).unwrap();
    group.bench_function("d1 PRM(3,5)", |b| {
        b.iter(|| wide.generator().min_distance().unwrap())
    });
    group.bench_function("d2 PRM(2,4)", |b| {
        b.iter(|| small.generator().ghw(2).unwrap())
    });
    group.finish();
}

fn retrieval(c: &mut Criterion) {
    let mut group = c.benchmark_group("retrieve");
    for records in [64usize, 4096] {
        let code = build_prm(6, 3).unwrap();
        let mut array = provisioned(&code, records, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        group.bench_with_input(
            BenchmarkId::new("PRM(3,5)", records),
            &records,
            |b, &records| {
                b.iter(|| {
                    array.clear_transcript();
                    let plan = make_query_plan(
                        &code,
                        7,
                        records / 2,
                        records,
                        ClientKind::Honest,
                        &mut rng,
                    )
                    .unwrap();
                    execute(&mut array, &plan).unwrap()
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, construction, distances, retrieval);
criterion_main!(benches);
