use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgreementReport {
    pub alpha: f64,
    pub observed: f64,
    pub expected: f64,
    /// Number of pairable values (labels in units with at least two labels).
    pub pairable: usize,
    /// Set when every pairable value is the same category, so the expected
    /// disagreement is zero and alpha is reported as 1.
    pub degenerate: bool,
}

/// Krippendorff's alpha at the nominal level from the coincidence matrix.
///
/// `units[u][c]` is coder `c`'s label for unit `u`, `None` when missing.
/// Units with fewer than two labels are not pairable and are skipped.
pub fn krippendorff_alpha<T: Ord + Clone>(units: &[Vec<Option<T>>]) -> Result<AgreementReport> {
    if units.len() < 2 {
        return Err(Error::InvalidInput("need at least two units".into()));
    }
    if units.iter().map(Vec::len).max().unwrap_or(0) < 2 {
        return Err(Error::InvalidInput("need at least two coders".into()));
    }
    let mut index: BTreeMap<T, usize> = BTreeMap::new();
    for u in units {
        for v in u.iter().flatten() {
            let next = index.len();
            index.entry(v.clone()).or_insert(next);
        }
    }
    let k = index.len();
    let mut o = vec![vec![0.0f64; k]; k];
    for u in units {
        let vals: Vec<usize> = u.iter().flatten().map(|v| index[v]).collect();
        let m = vals.len();
        if m < 2 {
            continue;
        }
        let w = 1.0 / (m as f64 - 1.0);
        for (i, &a) in vals.iter().enumerate() {
            for (j, &b) in vals.iter().enumerate() {
                if i != j {
                    o[a][b] += w;
                }
            }
        }
    }
    let nc: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = nc.iter().sum();
    if n < 2.0 {
        return Err(Error::InvalidInput("fewer than two pairable values".into()));
    }
    let mut disagree_obs = 0.0;
    let mut disagree_exp = 0.0;
    for a in 0..k {
        for b in 0..k {
            if a != b {
                disagree_obs += o[a][b];
                disagree_exp += nc[a] * nc[b];
            }
        }
    }
    let observed = disagree_obs / n;
    let expected = disagree_exp / (n * (n - 1.0));
    let pairable = n.round() as usize;
    if expected == 0.0 {
        return Ok(AgreementReport {
            alpha: 1.0,
            observed,
            expected,
            pairable,
            degenerate: true,
        });
    }
    Ok(AgreementReport {
        alpha: 1.0 - observed / expected,
        observed,
        expected,
        pairable,
        degenerate: false,
    })
}
