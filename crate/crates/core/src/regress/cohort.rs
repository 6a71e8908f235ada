use std::collections::BTreeSet;

use serde::Serialize;

use crate::corpus::CovariateTable;
use crate::error::{Error, Result};
use crate::sentiment::{wilcoxon_ranksum, WilcoxonMethod};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohortRow {
    pub variable: String,
    pub mean_with: f64,
    pub mean_without: f64,
    /// `(with - without) / |without|`; `None` when the baseline mean is 0.
    pub relative_difference: Option<f64>,
    pub absolute_difference: f64,
    pub p_value: f64,
}

/// Compares covariate means between CBGs in `cohort` (those with parking
/// sentiment) and all other CBGs of the covariate table.
pub fn cohort_difference(covariates: &CovariateTable, cohort: &BTreeSet<String>) -> Result<Vec<CohortRow>> {
    let (with, without): (Vec<_>, Vec<_>) = covariates.rows.iter().partition(|r| cohort.contains(&r.cbg_id));
    if with.is_empty() || without.is_empty() {
        return Err(Error::InvalidInput("cohort comparison needs CBGs on both sides".into()));
    }
    covariates
        .variables
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let a: Vec<f64> = with.iter().map(|r| r.values[j]).collect();
            let b: Vec<f64> = without.iter().map(|r| r.values[j]).collect();
            let ma = a.iter().sum::<f64>() / a.len() as f64;
            let mb = b.iter().sum::<f64>() / b.len() as f64;
            let test = wilcoxon_ranksum(&a, &b, WilcoxonMethod::Auto)?;
            Ok(CohortRow {
                variable: name.clone(),
                mean_with: ma,
                mean_without: mb,
                relative_difference: (mb != 0.0).then(|| (ma - mb) / mb.abs()),
                absolute_difference: ma - mb,
                p_value: test.p_value,
            })
        })
        .collect()
}
