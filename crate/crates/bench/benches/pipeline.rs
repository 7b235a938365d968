use std::collections::HashMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};

use poslink_core::corpus::{clean_text, tokenize};
use poslink_core::features::{build_dataset, count_tags, FeatureMode};
use poslink_core::models::{train_forest, tree, ForestKind, TreeOptions};
use poslink_core::rng::Rng;
use poslink_core::stats::welch_t_test;
use poslink_core::synth::{generate, SynthConfig};
use poslink_core::tagger::fallback_tag;
use poslink_core::TagSet;

fn bench_cleaning_and_tagging(c: &mut Criterion) {
    let corpus = generate(&SynthConfig { n_nodes: 100, n_pairs: 100, ..SynthConfig::default() });
    let text: String = corpus
        .nodes
        .iter()
        .map(|(_, t)| t.as_str())
        .collect::<Vec<_>>()
        .join(" { | } ");
    let mut group = c.benchmark_group("text");
    group.throughput(Throughput::Bytes(text.len() as u64));
    group.bench_function("clean", |b| b.iter(|| clean_text(black_box(&text))));
    let cleaned = clean_text(&text);
    let tokens = tokenize(&cleaned);
    group.throughput(Throughput::Elements(tokens.len() as u64));
    group.bench_function("fallback_tag", |b| b.iter(|| fallback_tag(black_box(&tokens))));
    group.finish();
}

fn bench_welch(c: &mut Criterion) {
    let mut rng = Rng::seed_from(1);
    let a: Vec<f64> = (0..2000).map(|_| rng.next_f64()).collect();
    let b: Vec<f64> = (0..2000).map(|_| rng.next_f64() + 0.01).collect();
    c.bench_function("welch_t_test_2000x2000", |bench| {
        bench.iter(|| welch_t_test(black_box(&a), black_box(&b)).unwrap())
    });
}

fn bench_trees(c: &mut Criterion) {
    let mut rng = Rng::seed_from(2);
    let x: Vec<Vec<f64>> = (0..1000)
        .map(|_| (0..6).map(|_| rng.next_f64() * 10.0).collect())
        .collect();
    let y: Vec<u8> = x.iter().map(|r| u8::from(r[0] + r[3] > 10.0)).collect();
    c.bench_function("cart_fit_1000x6", |b| {
        b.iter(|| {
            tree::fit_classification(
                black_box(&x),
                black_box(&y),
                (0..x.len()).collect(),
                &TreeOptions::default(),
                None,
            )
        })
    });
    c.bench_function("forest_fit_20_trees", |b| {
        b.iter(|| train_forest(black_box(&x), black_box(&y), ForestKind::Bagged, 20, None, 7, 1))
    });
}

fn bench_featurize(c: &mut Criterion) {
    let corpus = generate(&SynthConfig::default());
    let tagset = TagSet::penn_treebank();
    let vectors: HashMap<_, _> = corpus
        .nodes
        .iter()
        .map(|(id, text)| {
            let tokens = tokenize(text);
            (*id, count_tags(&fallback_tag(&tokens), &tagset).unwrap())
        })
        .collect();
    let tags = tagset.labels().to_vec();
    c.bench_function("build_dataset_3000x37", |b| {
        b.iter(|| {
            build_dataset(
                black_box(&corpus.train_pairs),
                &vectors,
                &tagset,
                &tags,
                FeatureMode::Min,
                false,
                None,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_cleaning_and_tagging,
    bench_welch,
    bench_trees,
    bench_featurize
);
criterion_main!(benches);
