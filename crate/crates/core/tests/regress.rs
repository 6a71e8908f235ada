use std::collections::BTreeSet;

use parksense::corpus::{CovariateRow, CovariateTable};
use parksense::regress::{
    aic, cohort_difference, bspline_basis, build_design, fit_gam, fit_gam_fixed, lstsq, pearson, quantile_knots, stepwise_aic,
    sum_to_zero, vif_filter, vif_values, within_cbsa_correlations, CbgRow, CbgTable, DesignOptions, Direction,
    StepAction,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn table(y: &[f64], cols: &[Vec<f64>], lat: &[f64], lng: &[f64], cbsa: &[usize]) -> CbgTable {
    CbgTable {
        variables: (0..cols.len()).map(|j| format!("x{}", j + 1)).collect(),
        rows: (0..y.len())
            .map(|i| CbgRow {
                cbg_id: format!("g{i:05}"),
                cbsa_id: format!("c{:02}", cbsa[i]),
                lat: lat[i],
                lng: lng[i],
                sentiment: y[i],
                n_reviews: 1,
                category: None,
                covariates: cols.iter().map(|c| c[i]).collect(),
            })
            .collect(),
        dropped: vec![],
    }
}

/// Covariance over the product of standard deviations, via explicit sums.
fn corr_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

#[test]
fn pearson_line_and_covariance() {
    let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
    assert!((pearson(&x, &y).unwrap().r - 1.0).abs() < 1e-12);
    let z = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0];
    assert!((pearson(&x, &z).unwrap().r - corr_oracle(&x, &z)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn pearson_bounded_symmetric_affine(
        pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 4..40),
        a in 0.1f64..10.0, b in -50.0f64..50.0,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        if let (Ok(c), Ok(d)) = (pearson(&x, &y), pearson(&y, &x)) {
            prop_assert!(c.r.abs() <= 1.0);
            prop_assert!((c.r - d.r).abs() < 1e-12);
            let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((pearson(&xs, &y).unwrap().r - c.r).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&c.p));
        }
    }
}

#[test]
fn within_cbsa_summary() {
    // two CBSAs, perfect positive in one, perfect negative in the other
    let x = vec![1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0];
    let y = vec![1.0, 2.0, 3.0, 4.0, 4.0, 3.0, 2.0, 1.0];
    let t = table(&y, &[x], &[0.0; 8], &[0.0; 8], &[0, 0, 0, 0, 1, 1, 1, 1]);
    let rep = within_cbsa_correlations(&t, &["x1"], 3).unwrap();
    assert_eq!(rep.per_cbsa.len(), 2);
    let s = &rep.summary[0];
    assert!(s.mean_r.unwrap().abs() < 1e-12);
    assert!(s.pooled_r.unwrap().abs() < 1e-12);
    assert_eq!(s.frac_significant, Some(1.0));
    let rep = within_cbsa_correlations(&t, &["x1"], 5).unwrap();
    assert_eq!(rep.skipped_cbsas, 2);
    assert!(rep.summary[0].mean_r.is_none());
}

#[test]
fn vif_orthogonal_duplicate_and_hand_case() {
    let a = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
    let b = [1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
    let c = [1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
    for v in vif_values(&[&a, &b, &c]).unwrap() {
        assert!((v.unwrap() - 1.0).abs() < 1e-12);
    }

    let names: Vec<String> = ["a", "b", "a_copy"].iter().map(|s| s.to_string()).collect();
    let rep = vif_filter(&[&a, &b, &a], &names, 10.0).unwrap();
    assert_eq!(rep.initial[0].1, None);
    assert_eq!(rep.steps.len(), 1);
    assert_eq!(rep.steps[0].dropped, "a_copy");
    assert_eq!(rep.kept, vec!["a", "b"]);

    // diag of the inverse correlation matrix, by cofactors
    let x1 = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let x2 = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
    let x3 = [1.0, 3.0, 2.0, 5.0, 4.0, 7.0];
    let (r12, r13, r23) = (corr_oracle(&x1, &x2), corr_oracle(&x1, &x3), corr_oracle(&x2, &x3));
    let det = 1.0 + 2.0 * r12 * r13 * r23 - r12 * r12 - r13 * r13 - r23 * r23;
    let want = [(1.0 - r23 * r23) / det, (1.0 - r13 * r13) / det, (1.0 - r12 * r12) / det];
    let got = vif_values(&[&x1, &x2, &x3]).unwrap();
    for (g, w) in got.iter().zip(want) {
        assert!((g.unwrap() - w).abs() < 1e-9 * w, "{g:?} vs {w}");
    }
}

#[test]
fn vif_filter_leaves_everything_under_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let base: Vec<f64> = (0..60).map(|_| normal(&mut rng)).collect();
    let cols: Vec<Vec<f64>> = (0..5)
        .map(|j| base.iter().map(|b| b * (j as f64) * 0.8 + normal(&mut rng) * 0.3).collect())
        .collect();
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    let names: Vec<String> = (0..5).map(|j| format!("v{j}")).collect();
    let rep = vif_filter(&refs, &names, 5.0).unwrap();
    assert!(rep.final_vif.iter().all(|(_, v)| v.is_some_and(|v| v <= 5.0)));
    assert!(!rep.steps.is_empty());
    assert_eq!(rep.kept.len() + rep.steps.len(), 5);
}

#[test]
fn stepwise_drops_noise_with_decreasing_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 200;
    let x1: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let x2: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let noise: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let y: Vec<f64> = (0..n).map(|i| 1.0 + 2.0 * x1[i] - x2[i] + 0.5 * normal(&mut rng)).collect();
    let names: Vec<String> = ["x1", "x2", "noise"].iter().map(|s| s.to_string()).collect();
    let cols: [&[f64]; 3] = [&x1, &x2, &noise];
    let res = stepwise_aic(&y, &cols, &names, Direction::Backward).unwrap();
    assert_eq!(res.selected, vec!["x1", "x2"]);
    assert!(res.trace.windows(2).all(|w| w[1].aic < w[0].aic));
    assert_eq!(res.trace[1].action, StepAction::Drop("noise".into()));

    let fwd = stepwise_aic(&y, &cols, &names, Direction::Forward).unwrap();
    assert_eq!(fwd.selected, vec!["x1", "x2"]);

    // AIC of the one-variable model from the closed-form slope
    let mx = x1.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxy: f64 = x1.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x1.iter().map(|a| (a - mx).powi(2)).sum();
    let beta = sxy / sxx;
    let rss: f64 = x1.iter().zip(&y).map(|(a, b)| (b - my - beta * (a - mx)).powi(2)).sum();
    let want = n as f64 * (rss / n as f64).ln() + 4.0;
    assert!((aic(&y, &[&x1]).unwrap() - want).abs() < 1e-8);
}

fn uniform_coords(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let lat = (0..n).map(|_| 33.0 + rng.random::<f64>() * 2.0).collect();
    let lng = (0..n).map(|_| -118.0 + rng.random::<f64>() * 3.0).collect();
    (lat, lng)
}

#[test]
fn tensor_block_is_orthogonal_to_main_effects() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 300;
    let (lat, lng) = uniform_coords(&mut rng, n);
    let y: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let t = table(&y, &[x], &lat, &lng, &vec![0; n]);
    let opts = DesignOptions { knots: 6, group: false, ..Default::default() };
    let d = build_design(&t, &["x1"], opts).unwrap();
    let b = &d.blocks[0];
    assert_eq!(b.len, 25);
    let tb = d.x.columns(b.start, b.len);
    let mut main = vec![DVector::from_element(n, 1.0)];
    for coord in [&lat, &lng] {
        let basis = bspline_basis(coord, &quantile_knots(coord, 6).unwrap());
        let m = &basis * sum_to_zero(&basis);
        main.extend(m.column_iter().map(|c| c.into_owned()));
    }
    let scale = tb.norm();
    for m in &main {
        assert!((tb.transpose() * m).norm() < 1e-9 * scale * m.norm());
    }
}

#[test]
fn gam_recovers_linear_effects_without_spatial_signal() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = 2000;
    let (lat, lng) = uniform_coords(&mut rng, n);
    let cbsa: Vec<usize> = (0..n).map(|i| i % 10).collect();
    let x1: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let x2: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    // regress on standardized columns, so generate from the standardized scale
    let sd = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let s = (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
        v.iter().map(|a| (a - m) / s).collect::<Vec<f64>>()
    };
    let (z1, z2) = (sd(&x1), sd(&x2));
    let y: Vec<f64> = (0..n).map(|i| 0.5 * z1[i] - 0.3 * z2[i] + 0.01 * normal(&mut rng)).collect();
    let t = table(&y, &[x1, x2], &lat, &lng, &cbsa);
    let d = build_design(&t, &["x1", "x2"], DesignOptions::default()).unwrap();
    let fit = fit_gam(&d, 20).unwrap();
    assert!(fit.converged);
    assert!((fit.coefficients[1].estimate - 0.5).abs() < 0.02);
    assert!((fit.coefficients[2].estimate + 0.3).abs() < 0.02);
    for s in &fit.smooths {
        assert!(s.edf < 2.0, "{} edf {}", s.name, s.edf);
    }
    assert!(fit.adj_r_squared <= fit.r_squared);
    assert!(fit.r_squared > 0.99);
}

#[test]
fn huge_smoothing_parameters_reduce_to_ols() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 150;
    let (lat, lng) = uniform_coords(&mut rng, n);
    let cbsa: Vec<usize> = (0..n).map(|i| i % 4).collect();
    let x1: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let y: Vec<f64> = (0..n).map(|i| 0.4 * x1[i] + (lat[i] - 34.0).sin() + normal(&mut rng) * 0.2).collect();
    let t = table(&y, &[x1], &lat, &lng, &cbsa);
    let d = build_design(&t, &["x1"], DesignOptions { knots: 5, ..Default::default() }).unwrap();
    let fit = fit_gam_fixed(&d, &[1e12, 1e12]).unwrap();
    let ols = lstsq(&d.x.columns(0, 2).into_owned(), &d.y).unwrap();
    assert!((fit.beta[0] - ols[0]).abs() < 1e-6);
    assert!((fit.beta[1] - ols[1]).abs() < 1e-6);
    assert!((fit.edf_total - 2.0).abs() < 1e-4);
}

#[test]
fn group_block_edf_matches_balanced_formula() {
    let (g, m) = (5usize, 12usize);
    let n = g * m;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cbsa: Vec<usize> = (0..n).map(|i| i / m).collect();
    let y: Vec<f64> = (0..n).map(|i| cbsa[i] as f64 + 0.05 * normal(&mut rng)).collect();
    let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let t = table(&y, &[x], &vec![0.0; n], &vec![0.0; n], &cbsa);
    let opts = DesignOptions { spatial: false, ..Default::default() };
    let d = build_design(&t, &[], opts).unwrap();
    for lambda in [0.5, 3.0, 40.0] {
        let fit = fit_gam_fixed(&d, &[lambda]).unwrap();
        let want = (g - 1) as f64 * m as f64 / (m as f64 + lambda);
        assert!((fit.smooths[0].edf - want).abs() < 1e-9, "{lambda}");
    }
    let fit = fit_gam(&d, 20).unwrap();
    assert!(fit.smooths[0].edf > (g - 1) as f64 - 0.05);
    assert!(fit.smooths[0].edf < (g - 1) as f64 + 1e-9);
}

fn penalized_identities(d: &parksense::regress::Design, fit: &parksense::regress::GamFit, lambdas: &[f64]) {
    let beta = DVector::from_column_slice(&fit.beta);
    let resid = &d.y - &d.x * &beta;
    let p = d.x.ncols();
    let mut s = DMatrix::zeros(p, p);
    for (b, l) in d.blocks.iter().zip(lambdas) {
        let mut v = s.view_mut((b.start, b.start), (b.len, b.len));
        v += &b.penalty * *l;
    }
    let score = d.x.transpose() * resid - &s * &beta;
    assert!(score.norm() < 1e-7 * (1.0 + d.y.norm() * d.x.norm()));
    let tot = fit.ess + fit.rss + fit.penalty_ss;
    assert!((tot - fit.tss).abs() < 1e-8 * fit.tss.max(1.0));
    assert!(fit.edf_total >= d.n_linear() as f64 - 1e-8);
    assert!(fit.edf_total <= p as f64 + 1e-8);
    for (sm, b) in fit.smooths.iter().zip(&d.blocks) {
        assert!(sm.edf >= -1e-8 && sm.edf <= b.len as f64 + 1e-8);
    }
    assert!(fit.adj_r_squared <= fit.r_squared + 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn penalized_fit_identities(seed in 0u64..1000, l1 in -3.0f64..4.0, l2 in -3.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 80;
        let (lat, lng) = uniform_coords(&mut rng, n);
        let cbsa: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let x1: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|i| x1[i] * 0.3 + (lng[i] + 117.0).cos() + normal(&mut rng)).collect();
        let t = table(&y, &[x1], &lat, &lng, &cbsa);
        let d = build_design(&t, &["x1"], DesignOptions { knots: 5, ..Default::default() }).unwrap();
        let lambdas = [10f64.powf(l1), 10f64.powf(l2)];
        let fit = fit_gam_fixed(&d, &lambdas).unwrap();
        penalized_identities(&d, &fit, &lambdas);
    }
}

#[test]
fn design_shapes_and_linear_edf() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 40;
    let (lat, lng) = uniform_coords(&mut rng, n);
    let x: Vec<f64> = (0..n).map(|_| 3.0 + 2.0 * normal(&mut rng)).collect();
    let y: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let cbsa: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let t = table(&y, &[x], &lat, &lng, &cbsa);
    let d = build_design(&t, &["x1"], DesignOptions { knots: 4, ..Default::default() }).unwrap();
    assert_eq!(d.blocks[1].len, 2);
    assert!(d.x.column(1).mean().abs() < 1e-9);
    assert!((d.x.column(1).variance() * n as f64 / (n - 1) as f64 - 1.0).abs() < 1e-9);
    let fit = fit_gam_fixed(&d, &[2.0, 2.0]).unwrap();
    let smooth: f64 = fit.smooths.iter().map(|s| s.edf).sum();
    assert!((fit.edf_total - smooth - d.n_linear() as f64).abs() < 1e-8);
}

#[test]
fn vif_ignores_row_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let base: Vec<f64> = (0..50).map(|_| normal(&mut rng)).collect();
    let cols: Vec<Vec<f64>> = (0..4).map(|j| base.iter().map(|b| b * j as f64 + normal(&mut rng) * 0.4).collect()).collect();
    let names: Vec<String> = (0..4).map(|j| format!("v{j}")).collect();
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    let a = vif_filter(&refs, &names, 5.0).unwrap();
    let rev: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().rev().copied().collect()).collect();
    let refs: Vec<&[f64]> = rev.iter().map(|c| c.as_slice()).collect();
    let b = vif_filter(&refs, &names, 5.0).unwrap();
    assert_eq!(a.kept, b.kept);
    for (x, y) in a.final_vif.iter().zip(&b.final_vif) {
        assert!((x.1.unwrap() - y.1.unwrap()).abs() < 1e-9);
    }
}

#[test]
fn stepwise_exact_and_empty() {
    let x1: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
    let noise: Vec<f64> = (0..12).map(|i| ((i * 7 % 5) as f64).cos()).collect();
    let names = vec!["x1".to_string(), "noise".to_string()];
    let res = stepwise_aic(&x1, &[&x1, &noise], &names, Direction::Backward).unwrap();
    assert_eq!(res.selected, vec!["x1"]);
    let empty = stepwise_aic(&x1, &[], &[], Direction::Backward).unwrap();
    assert!(empty.selected.is_empty());
    assert_eq!(empty.trace.len(), 1);
}

fn cov_table(rows: &[(&str, f64)]) -> CovariateTable {
    CovariateTable {
        variables: vec!["v".into()],
        rows: rows.iter().map(|(id, v)| CovariateRow { cbg_id: id.to_string(), values: vec![*v] }).collect(),
        ..Default::default()
    }
}

#[test]
fn cohort_cases() {
    let same = cov_table(&[("a", 1.0), ("b", 2.0), ("c", 1.0), ("d", 2.0)]);
    let with: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
    let r = cohort_difference(&same, &with).unwrap();
    assert_eq!(r[0].relative_difference, Some(0.0));

    let shifted = cov_table(&[("a", 11.0), ("b", 22.0), ("c", 10.0), ("d", 20.0)]);
    let r = cohort_difference(&shifted, &with).unwrap();
    assert!((r[0].relative_difference.unwrap() - 0.10).abs() < 1e-12);

    let zero = cov_table(&[("a", 1.0), ("b", 1.0), ("c", -1.0), ("d", 1.0)]);
    let r = cohort_difference(&zero, &with).unwrap();
    assert_eq!(r[0].relative_difference, None);
    assert_eq!(r[0].absolute_difference, 1.0);

    assert!(cohort_difference(&same, &BTreeSet::new()).is_err());
}
