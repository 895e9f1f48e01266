use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use sindex_bench::{corpus, embeddings, similarity};
use sindex_core::evaluation::score_corpus;
use sindex_core::{
    greedy_cluster, hac_average_linkage, pairwise_similarity, Measure, ScoringConfig,
    DEFAULT_DISTANCE_THRESHOLD,
};

const SIZES: [usize; 4] = [10, 50, 100, 200];

fn bench_similarity(c: &mut Criterion) {
    let mut group = c.benchmark_group("pairwise_similarity");
    for p in SIZES {
        let em = embeddings(p);
        group.throughput(Throughput::Elements((p * (p - 1) / 2) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(p), &em, |b, em| {
            b.iter(|| pairwise_similarity(em))
        });
    }
    group.finish();
}

fn bench_clustering(c: &mut Criterion) {
    let mut group = c.benchmark_group("cluster");
    for p in SIZES {
        let sm = similarity(p);
        group.bench_with_input(BenchmarkId::new("hac_average", p), &sm, |b, sm| {
            b.iter(|| hac_average_linkage(sm, DEFAULT_DISTANCE_THRESHOLD).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("greedy", p), &sm, |b, sm| {
            b.iter(|| greedy_cluster(sm, DEFAULT_DISTANCE_THRESHOLD).unwrap())
        });
    }
    group.finish();
}

fn bench_scoring(c: &mut Criterion) {
    let prepared = corpus(200);
    c.bench_function("score_corpus/200x10", |b| {
        b.iter(|| score_corpus(&prepared, &ScoringConfig::default(), &Measure::ALL).unwrap())
    });
}

criterion_group!(benches, bench_similarity, bench_clustering, bench_scoring);
criterion_main!(benches);
