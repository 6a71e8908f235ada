use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use parksense::classify::{cross_validate, load_labeled, Grid, ModelKind, TfidfConfig};
use parksense::corpus::Corpus;
use parksense::lsva::{compute_lsva, LsvaSentence, Stopwords, Subset};
use parksense::spatial::{build_knn_weights, lisa, morans_i};
use parksense::textfilter::extract_parking_sentences;
use parksense::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn permutation_tests(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 500;
    let ids: Vec<String> = (0..n).map(|i| format!("r{i:04}")).collect();
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(30.0..35.0), rng.random_range(-100.0..-95.0))).collect();
    let v: Vec<f64> = pts.iter().map(|p| p.0.sin() + rng.random::<f64>()).collect();
    let w = build_knn_weights(&ids, &pts, 8).unwrap();
    let mut g = c.benchmark_group("spatial");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("morans_i_999", name), &exec, |b, &e| {
            b.iter(|| morans_i(&v, &w, 999, 7, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("lisa_199", name), &exec, |b, &e| {
            b.iter(|| lisa(&v, &w, 199, 0.05, 7, e).unwrap())
        });
    }
    g.finish();
}

fn text(c: &mut Criterion) {
    let mini = |f: &str| data(&format!("mini/{f}"));
    let (corpus, _) =
        Corpus::load(&mini("reviews.jsonl"), &mini("pois.csv"), &mini("regions.csv"), &mini("covariates.csv")).unwrap();
    let reviews: Vec<_> = (0..8).flat_map(|_| corpus.reviews.iter().cloned()).collect();
    let ex = load_labeled(&mini("labeled.csv")).unwrap();
    let texts: Vec<&str> = ex.iter().map(|e| e.text.as_str()).collect();
    let labels: Vec<_> = ex.iter().map(|e| e.label).collect();
    let grid = Grid::load(&data("../grids/logistic_mini.toml")).unwrap().points();
    let sentences: Vec<LsvaSentence> = (0..20)
        .flat_map(|_| ex.iter())
        .map(|e| LsvaSentence {
            text: e.text.clone(),
            label: e.label,
            category: None,
            is_urban: None,
        })
        .collect();
    let stop = Stopwords::bundled();

    let mut g = c.benchmark_group("text");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("extract_4000_reviews", name), &exec, |b, &e| {
            b.iter(|| extract_parking_sentences(&reviews, e))
        });
        g.bench_with_input(BenchmarkId::new("cv_logistic_5fold", name), &exec, |b, &e| {
            b.iter(|| cross_validate(ModelKind::Logistic, &grid, &texts, &labels, 5, &TfidfConfig::default(), 1, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("lsva_10000_sentences", name), &exec, |b, &e| {
            b.iter(|| compute_lsva(&sentences, Subset::All, 5, &stop, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, permutation_tests, text);
criterion_main!(benches);
