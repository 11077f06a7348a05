use std::hint::black_box;

use coauthor_core::centrality::{betweenness_exact, betweenness_sampled};
use coauthor_core::corpus::{self, YearWindow};
use coauthor_core::diversity::DisciplineCount;
use coauthor_core::fixture::{generate_corpus, planted_topic_corpus, FixtureConfig};
use coauthor_core::graph;
use coauthor_core::nullmodel::{self, NullConfig};
use coauthor_core::profiles::AuthorProfile;
use coauthor_core::stats::{self, Alternative, PermutationStatistic};
use coauthor_core::textprep::{self, build_dtm};
use coauthor_core::topicmodel::{fit_lda, LdaParams};
use coauthor_core::Gender;
use criterion::{criterion_group, criterion_main, Criterion};

fn fixture_records(publications: usize, authors: usize) -> Vec<corpus::PublicationRecord> {
    let fx = generate_corpus(&FixtureConfig { publications, authors, ..FixtureConfig::default() });
    let mut records = fx.records;
    corpus::assign_genders(&mut records, &fx.lexicon);
    corpus::filter_corpus(records, YearWindow::default())
}

fn preprocessing(c: &mut Criterion) {
    let records = fixture_records(2000, 800);
    let stop = textprep::default_stopwords();
    c.bench_function("preprocess_2000_docs", |b| {
        b.iter(|| {
            let docs: Vec<_> = records.iter().map(|r| textprep::preprocess(&r.pub_id, &r.title, &r.abstract_text, &stop)).collect();
            black_box(build_dtm(&docs, 1).unwrap())
        })
    });
}

fn lda(c: &mut Criterion) {
    let (docs, _) = planted_topic_corpus(300, 3, 30, 50, 1);
    let dtm = build_dtm(&docs, 1).unwrap().matrix;
    let params = LdaParams { k: 3, iterations: 100, seed: 1, ..LdaParams::default() };
    let mut group = c.benchmark_group("lda");
    group.sample_size(10);
    group.bench_function("gibbs_300_docs_100_iters", |b| b.iter(|| black_box(fit_lda(&dtm, &params).unwrap())));
    group.finish();
}

fn betweenness(c: &mut Criterion) {
    let g = graph::project(&fixture_records(3000, 1500));
    let mut group = c.benchmark_group("betweenness");
    group.sample_size(10);
    group.bench_function(format!("exact_{}_nodes", g.node_count()), |b| b.iter(|| black_box(betweenness_exact(&g))));
    group.bench_function("sampled_k100", |b| b.iter(|| black_box(betweenness_sampled(&g, 100, 7).unwrap())));
    group.finish();
}

fn null_model(c: &mut Criterion) {
    let pool: Vec<AuthorProfile> = (0..500)
        .map(|i| {
            let mut v = vec![0.02; 8];
            v[i % 8] += 0.84;
            AuthorProfile::from_vector(format!("a{i}"), if i % 3 == 0 { Gender::F } else { Gender::M }, v, vec![], 0.05)
        })
        .collect();
    let config = NullConfig::new(3, DisciplineCount::Global(8));
    let mut group = c.benchmark_group("nullmodel");
    group.sample_size(10);
    group.bench_function("moments_size4", |b| {
        b.iter(|| {
            let teams = nullmodel::synthetic_teams(&pool, None, 4, &config).unwrap();
            black_box(nullmodel::null_moments_of(&teams, &pool, config.disciplines).unwrap())
        })
    });
    group.finish();
}

fn statistics(c: &mut Criterion) {
    let a: Vec<f64> = (0..2000).map(|i| ((i * 37) % 101) as f64).collect();
    let b: Vec<f64> = (0..2500).map(|i| ((i * 53) % 97) as f64 + 0.5).collect();
    c.bench_function("mann_whitney_4500", |bch| bch.iter(|| black_box(stats::mann_whitney_u(&a, &b, Alternative::TwoSided).unwrap())));
    let mut group = c.benchmark_group("permutation");
    group.sample_size(10);
    group.bench_function("median_diff_1000_rounds", |bch| {
        bch.iter(|| black_box(stats::permutation_test(&a, &b, PermutationStatistic::MedianDiff, 1000, Alternative::TwoSided, 1).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, preprocessing, lda, betweenness, null_model, statistics);
criterion_main!(benches);
