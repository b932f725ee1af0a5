use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use grometrics::synth::{citation_corpus, world_proportional_sample, CorpusParams, SampleParams};
use grometrics::{
    build_reports, covariance_pca, hcluster, indicator_comparison, CountPair, Distance,
    IndexValues, Linkage,
};
use grometrics_bench::baseline;

fn bench_indexes(c: &mut Criterion) {
    let pair = CountPair::new(12_669_278, 213_945_356);
    c.bench_function("index_values_world_scale", |b| {
        b.iter(|| IndexValues::compute(black_box(pair), black_box(16.89)).unwrap())
    });
}

fn bench_reports(c: &mut Criterion) {
    let world = baseline();
    let entities = world_proportional_sample(
        &world,
        &SampleParams {
            entity_count: 189,
            ..SampleParams::default()
        },
        0,
    );
    c.bench_function("build_reports_189_entities", |b| {
        b.iter(|| build_reports(black_box(&entities), black_box(&world)).unwrap())
    });
}

fn bench_pca(c: &mut Criterion) {
    let mut state = 0x9E3779B97F4A7C15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let data: Vec<Vec<f64>> = (0..56)
        .map(|_| (0..5).map(|_| next() * 100.0).collect())
        .collect();
    c.bench_function("covariance_pca_56x5", |b| {
        b.iter(|| covariance_pca(black_box(&data)).unwrap())
    });
}

fn bench_cluster(c: &mut Criterion) {
    let mut state = 0xD1B54A32D192ED03u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let profiles: Vec<Vec<f64>> = (0..22)
        .map(|_| (0..50).map(|_| next() * 10.0).collect())
        .collect();
    c.bench_function("hcluster_22x50_average_pearson", |b| {
        b.iter(|| {
            hcluster(
                black_box(&profiles),
                Linkage::Average,
                Distance::OneMinusPearson,
            )
            .unwrap()
        })
    });
}

fn bench_comparison(c: &mut Criterion) {
    let corpus = citation_corpus(
        &CorpusParams {
            entity_count: 50,
            ..CorpusParams::default()
        },
        0,
    );
    c.bench_function("indicator_comparison_50_entities", |b| {
        b.iter(|| indicator_comparison(black_box(&corpus)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_indexes,
    bench_reports,
    bench_pca,
    bench_cluster,
    bench_comparison
);
criterion_main!(benches);
