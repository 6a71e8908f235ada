use std::path::PathBuf;

use parksense::spatial::{
    build_adjacency_weights, build_knn_weights, haversine_km, lisa, load_edge_list, morans_i, SpatialWeights,
};
use parksense::{Error, Exec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid_ids() -> Vec<String> {
    (0..5).flat_map(|r| (0..5).map(move |c| format!("r{r}c{c}"))).collect()
}

fn rook_grid() -> SpatialWeights {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fixtures/rook_grid_5x5.csv");
    build_adjacency_weights(&grid_ids(), &load_edge_list(&path).unwrap()).unwrap()
}

/// Moran's I from a dense weight matrix, written out term by term.
fn dense_moran(values: &[f64], w: &SpatialWeights) -> f64 {
    let n = values.len();
    let mut dense = vec![vec![0.0; n]; n];
    for (i, row) in dense.iter_mut().enumerate() {
        for (k, &j) in w.neighbors[i].iter().enumerate() {
            row[j] = w.weights[i][k];
        }
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let (mut num, mut den, mut s0) = (0.0, 0.0, 0.0);
    for i in 0..n {
        den += (values[i] - mean).powi(2);
        for j in 0..n {
            num += dense[i][j] * (values[i] - mean) * (values[j] - mean);
            s0 += dense[i][j];
        }
    }
    n as f64 / s0 * num / den
}

#[test]
fn knn_matches_all_pairs_scan() {
    let ids = grid_ids();
    let pts: Vec<(f64, f64)> = (0..25).map(|i| (40.0 + 0.01 * (i / 5) as f64, -75.0 + 0.013 * (i % 5) as f64)).collect();
    let w = build_knn_weights(&ids, &pts, 4).unwrap();
    for i in 0..25 {
        let mut all: Vec<(f64, &String, usize)> =
            (0..25).filter(|&j| j != i).map(|j| (haversine_km(pts[i], pts[j]), &ids[j], j)).collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(b.1)));
        let mut want: Vec<usize> = all[..4].iter().map(|x| x.2).collect();
        want.sort();
        assert_eq!(w.neighbors[i], want, "region {i}");
        assert!((w.weights[i].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn rook_degrees_follow_grid_formula() {
    let w = rook_grid();
    for (i, nb) in w.neighbors.iter().enumerate() {
        let (r, c) = (i / 5, i % 5);
        let border = [r == 0, r == 4, c == 0, c == 4].iter().filter(|&&b| b).count();
        assert_eq!(nb.len(), 4 - border);
    }
    // 2 * (rows * (cols - 1) + cols * (rows - 1)) directed links
    assert_eq!(w.neighbors.iter().map(Vec::len).sum::<usize>(), 80);
    assert!(w.islands().is_empty());
}

#[test]
fn forced_cases() {
    let w = rook_grid();
    let checker: Vec<f64> = (0..25).map(|i| if (i / 5 + i % 5) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let r = morans_i(&checker, &w, 199, 4, Exec::default()).unwrap();
    assert!((r.i + 1.0).abs() < 1e-9);
    assert_eq!(r.expected_i, -1.0 / 24.0);
    let gradient: Vec<f64> = (0..25).map(|i| (i / 5 + i % 5) as f64).collect();
    let g = morans_i(&gradient, &w, 0, 0, Exec::default()).unwrap();
    assert!(g.i > 0.0);
    assert!((g.i - dense_moran(&gradient, &w)).abs() < 1e-12);
    assert!(matches!(morans_i(&[3.5; 25], &w, 9, 0, Exec::default()), Err(Error::ZeroVariance)));
    assert!(matches!(lisa(&[3.5; 25], &w, 9, 0.05, 0, Exec::default()), Err(Error::ZeroVariance)));
    let local = lisa(&checker, &w, 999, 0.05, 4, Exec::default()).unwrap();
    for l in &local {
        assert!(matches!(l.cluster, parksense::spatial::Cluster::HL | parksense::spatial::Cluster::LH | parksense::spatial::Cluster::NotSignificant));
    }
    assert!(local.iter().any(|l| l.cluster != parksense::spatial::Cluster::NotSignificant));
}

#[test]
fn affine_invariance_on_random_fixtures() {
    let w = rook_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let v: Vec<f64> = (0..25).map(|_| rng.random_range(-2.0..2.0)).collect();
        let t: Vec<f64> = v.iter().map(|x| 3.0 * x + 7.0).collect();
        let a = morans_i(&v, &w, 0, 0, Exec::Sequential).unwrap().i;
        let b = morans_i(&t, &w, 0, 0, Exec::Sequential).unwrap().i;
        assert!((a - b).abs() < 1e-9);
        assert!((a - dense_moran(&v, &w)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lisa_sums_to_n_times_global(seed in any::<u64>(), k in 1..6usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<String> = (0..30).map(|i| format!("g{i:02}")).collect();
        let pts: Vec<(f64, f64)> = (0..30).map(|_| (rng.random_range(30.0..31.0), rng.random_range(-90.0..-89.0))).collect();
        let v: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = build_knn_weights(&ids, &pts, k).unwrap();
        let global = morans_i(&v, &w, 0, 0, Exec::Sequential).unwrap();
        let local = lisa(&v, &w, 49, 0.05, seed, Exec::Sequential).unwrap();
        let sum: f64 = local.iter().map(|l| l.local_i).sum();
        prop_assert!((sum - 30.0 * global.i).abs() < 1e-9);
        let again = lisa(&v, &w, 49, 0.05, seed, Exec::Parallel).unwrap();
        prop_assert_eq!(local, again);
    }

    #[test]
    fn moran_p_is_reproducible(seed in any::<u64>()) {
        let w = rook_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..25).map(|_| rng.random::<f64>()).collect();
        let a = morans_i(&v, &w, 99, seed, Exec::Sequential).unwrap();
        let b = morans_i(&v, &w, 99, seed, Exec::Parallel).unwrap();
        prop_assert_eq!(&a, &b);
        let p = a.p_value.unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
    }
}
