use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::CbgTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    /// Two-sided p from the t statistic with `n - 2` degrees of freedom.
    pub p: f64,
    pub n: usize,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::InvalidInput("pearson: x and y differ in length".into()));
    }
    if n < 3 {
        return Err(Error::InvalidInput("pearson needs at least three pairs".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput("pearson: an input has zero variance".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else if n == 2 {
        1.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numerical(e.to_string()))?;
        (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
    };
    Ok(Correlation { r, p, n })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupCorrelation {
    pub cbsa_id: String,
    pub factor: String,
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WithinSummary {
    pub factor: String,
    pub n_cbsas: usize,
    pub mean_r: Option<f64>,
    pub median_r: Option<f64>,
    /// Correlation of CBSA-demeaned values pooled over the included CBSAs.
    pub pooled_r: Option<f64>,
    /// Share of included CBSAs with p below 0.001.
    pub frac_significant: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WithinReport {
    pub per_cbsa: Vec<GroupCorrelation>,
    pub summary: Vec<WithinSummary>,
    /// CBSAs with fewer than the minimum number of CBGs.
    pub skipped_cbsas: usize,
}

pub const SIGNIFICANCE_DISPLAY: f64 = 0.001;

fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) })
}

/// Pearson r of sentiment against each factor inside every CBSA with at
/// least `min_cbgs` CBGs. Factor/CBSA pairs where either side is constant
/// are left out of the per-CBSA list.
pub fn within_cbsa_correlations(table: &CbgTable, factors: &[&str], min_cbgs: usize) -> Result<WithinReport> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in table.rows.iter().enumerate() {
        groups.entry(r.cbsa_id.as_str()).or_default().push(i);
    }
    let min = min_cbgs.max(3);
    let skipped = groups.values().filter(|g| g.len() < min).count();
    groups.retain(|_, g| g.len() >= min);
    let mut per_cbsa = Vec::new();
    let mut summary = Vec::new();
    for &f in factors {
        let j = table.variable_index(f)?;
        let mut rs = Vec::new();
        let mut sig = 0;
        let (mut px, mut py) = (Vec::new(), Vec::new());
        for (cbsa, idx) in &groups {
            let x: Vec<f64> = idx.iter().map(|&i| table.rows[i].covariates[j]).collect();
            let y: Vec<f64> = idx.iter().map(|&i| table.rows[i].sentiment).collect();
            let Ok(c) = pearson(&x, &y) else { continue };
            rs.push(c.r);
            if c.p < SIGNIFICANCE_DISPLAY {
                sig += 1;
            }
            per_cbsa.push(GroupCorrelation {
                cbsa_id: cbsa.to_string(),
                factor: f.to_string(),
                r: c.r,
                p: c.p,
                n: c.n,
            });
            let mx = x.iter().sum::<f64>() / x.len() as f64;
            let my = y.iter().sum::<f64>() / y.len() as f64;
            px.extend(x.iter().map(|v| v - mx));
            py.extend(y.iter().map(|v| v - my));
        }
        let n = rs.len();
        summary.push(WithinSummary {
            factor: f.to_string(),
            n_cbsas: n,
            mean_r: (n > 0).then(|| rs.iter().sum::<f64>() / n as f64),
            median_r: median(&mut rs),
            pooled_r: pearson(&px, &py).ok().map(|c| c.r),
            frac_significant: (n > 0).then(|| sig as f64 / n as f64),
        });
    }
    Ok(WithinReport {
        per_cbsa,
        summary,
        skipped_cbsas: skipped,
    })
}

/// One CBSA: its sentiment and the unweighted mean of each factor over its
/// CBGs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CbsaRow {
    pub cbsa_id: String,
    pub sentiment: f64,
    pub factors: Vec<f64>,
}

/// CBSA-level factor means over the CBG table, paired with the supplied
/// CBSA sentiments. CBSAs missing from either side are dropped.
pub fn cbsa_rows(table: &CbgTable, sentiment: &BTreeMap<String, f64>) -> Vec<CbsaRow> {
    let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for r in &table.rows {
        let e = sums
            .entry(r.cbsa_id.as_str())
            .or_insert_with(|| (vec![0.0; table.variables.len()], 0));
        for (s, v) in e.0.iter_mut().zip(&r.covariates) {
            *s += v;
        }
        e.1 += 1;
    }
    sums.into_iter()
        .filter_map(|(id, (s, n))| {
            sentiment.get(id).map(|&y| CbsaRow {
                cbsa_id: id.to_string(),
                sentiment: y,
                factors: s.into_iter().map(|v| v / n as f64).collect(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorCorrelation {
    pub factor: String,
    pub segment: String,
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub n: usize,
}

/// Pearson r across CBSAs for each factor. `segment` labels the POI subset
/// the sentiments came from ("all" or a category name).
pub fn between_cbsa_correlations(
    rows: &[CbsaRow],
    variables: &[String],
    factors: &[&str],
    segment: &str,
) -> Result<Vec<FactorCorrelation>> {
    let y: Vec<f64> = rows.iter().map(|r| r.sentiment).collect();
    factors
        .iter()
        .map(|&f| {
            let j = variables
                .iter()
                .position(|v| v == f)
                .ok_or_else(|| Error::InvalidInput(format!("unknown factor `{f}`")))?;
            let x: Vec<f64> = rows.iter().map(|r| r.factors[j]).collect();
            let c = pearson(&x, &y).ok();
            Ok(FactorCorrelation {
                factor: f.to_string(),
                segment: segment.to_string(),
                r: c.map(|c| c.r),
                p: c.map(|c| c.p),
                n: rows.len(),
            })
        })
        .collect()
}
