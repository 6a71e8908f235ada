//! Two-sample Wilcoxon rank-sum (Mann-Whitney U) test.
//!
//! The exact null distribution is built by dynamic programming over doubled
//! mid-ranks, which keeps tied data on an integer lattice; p-values are
//! `P(|S - E| >= |s_obs - E|)` for the rank sum `S` of the first sample.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    /// Exact for at most 16 observations without ties, normal otherwise.
    #[default]
    Auto,
    Exact,
    Normal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WilcoxonResult {
    pub n_a: usize,
    pub n_b: usize,
    /// Mann-Whitney U of the first sample.
    pub u: f64,
    pub p_value: f64,
    pub method: WilcoxonMethod,
    pub ties: bool,
}

impl WilcoxonResult {
    /// U of the second sample; `u + u_prime = n_a * n_b`.
    pub fn u_prime(&self) -> f64 {
        (self.n_a * self.n_b) as f64 - self.u
    }
}

pub const EXACT_AUTO_LIMIT: usize = 16;

/// Doubled mid-ranks of the pooled sample (first `a`, then `b`) and the tie
/// group sizes.
fn doubled_ranks(a: &[f64], b: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 averaged, doubled
        let r2 = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = r2;
        }
        if j > i {
            ties.push(j - i + 1);
        }
        i = j + 1;
    }
    (ranks, ties)
}

/// `counts[s]`: number of `n_a`-subsets of `ranks` whose sum is `s`.
fn subset_sum_counts(ranks: &[u64], n_a: usize) -> Vec<u128> {
    let total: u64 = ranks.iter().sum();
    let width = total as usize + 1;
    let mut dp = vec![vec![0u128; width]; n_a + 1];
    dp[0][0] = 1;
    for &r in ranks {
        let r = r as usize;
        for j in (1..=n_a).rev() {
            let (lo, hi) = dp.split_at_mut(j);
            let prev = &lo[j - 1];
            let cur = &mut hi[0];
            for s in (r..width).rev() {
                if prev[s - r] != 0 {
                    cur[s] += prev[s - r];
                }
            }
        }
    }
    dp.pop().unwrap()
}

fn exact_p(ranks: &[u64], n_a: usize, observed: u64) -> f64 {
    let n = ranks.len() as i128;
    let expected = n_a as i128 * (n + 1);
    let dev = (observed as i128 - expected).abs();
    let counts = subset_sum_counts(ranks, n_a);
    let mut hit = 0u128;
    let mut all = 0u128;
    for (s, &c) in counts.iter().enumerate() {
        all += c;
        if (s as i128 - expected).abs() >= dev {
            hit += c;
        }
    }
    (hit as f64 / all as f64).min(1.0)
}

fn normal_p(u: f64, n_a: usize, n_b: usize, ties: &[usize]) -> f64 {
    let (na, nb) = (n_a as f64, n_b as f64);
    let n = na + nb;
    let tie_term: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let mean = na * nb / 2.0;
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let std = Normal::standard();
    (2.0 * (1.0 - std.cdf(z))).min(1.0)
}

pub fn wilcoxon_ranksum(a: &[f64], b: &[f64], method: WilcoxonMethod) -> Result<WilcoxonResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("rank-sum test needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("rank-sum test got NaN".into()));
    }
    let (ranks, ties) = doubled_ranks(a, b);
    let s2: u64 = ranks[..a.len()].iter().sum();
    let na = a.len() as f64;
    let u = s2 as f64 / 2.0 - na * (na + 1.0) / 2.0;
    let used = match method {
        WilcoxonMethod::Auto if ranks.len() <= EXACT_AUTO_LIMIT && ties.is_empty() => WilcoxonMethod::Exact,
        WilcoxonMethod::Auto => WilcoxonMethod::Normal,
        m => m,
    };
    let p_value = match used {
        WilcoxonMethod::Exact => exact_p(&ranks, a.len(), s2),
        _ => normal_p(u, a.len(), b.len(), &ties),
    };
    Ok(WilcoxonResult {
        n_a: a.len(),
        n_b: b.len(),
        u,
        p_value,
        method: used,
        ties: !ties.is_empty(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fully_separated_triples() {
        let r = wilcoxon_ranksum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], WilcoxonMethod::Auto).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert_eq!(r.p_value, 0.1);
        assert_eq!(r.u_prime(), 9.0);
    }

    #[test]
    fn identical_samples_give_one() {
        let a = [0.0, 1.0, -1.0, 1.0];
        let r = wilcoxon_ranksum(&a, &a, WilcoxonMethod::Exact).unwrap();
        assert!((r.p_value - 1.0).abs() < 1e-9);
        assert!(r.ties);
        let r = wilcoxon_ranksum(&[2.0; 5], &[2.0; 3], WilcoxonMethod::Normal).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(wilcoxon_ranksum(&[], &[1.0], WilcoxonMethod::Auto).is_err());
    }
}
