//! CBG-level association analysis: correlations, cohort contrasts,
//! collinearity screening, stepwise selection and a penalized additive
//! model with a spatial tensor smooth and a CBSA random effect.

mod bspline;
mod cohort;
mod correlation;
mod gam;
mod linalg;
mod stepwise;
mod vif;

pub use bspline::{bspline_basis, difference_penalty, quantile_knots, sum_to_zero};
pub use cohort::{cohort_difference, CohortRow};
pub use correlation::{
    between_cbsa_correlations, cbsa_rows, pearson, within_cbsa_correlations, CbsaRow, Correlation,
    FactorCorrelation, GroupCorrelation, WithinReport, WithinSummary,
};
pub use gam::{
    build_design, fit_gam, fit_gam_fixed, significance_stars, Design, DesignOptions, GamFit, LinearTerm,
    PenaltyBlock, SmoothTerm,
};
pub use linalg::{lstsq, ols_rss};
pub use stepwise::{aic, stepwise_aic, Direction, StepAction, StepwiseResult, StepwiseStep};
pub use vif::{vif_filter, vif_values, VifReport, VifStep, DEFAULT_VIF_THRESHOLD};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{Corpus, PoiCategory};
use crate::error::{Error, Result};
use crate::sentiment::{score_label, LabeledSentence, RegionSentiment, ScoreOptions};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CbgRow {
    pub cbg_id: String,
    pub cbsa_id: String,
    pub lat: f64,
    pub lng: f64,
    pub sentiment: f64,
    pub n_reviews: usize,
    /// Category contributing the most scored sentences.
    pub category: Option<PoiCategory>,
    pub covariates: Vec<f64>,
}

/// CBGs that have both a sentiment and a complete covariate row.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CbgTable {
    pub variables: Vec<String>,
    pub rows: Vec<CbgRow>,
    /// Scored CBGs dropped for lacking covariates or a location.
    pub dropped: Vec<String>,
}

impl CbgTable {
    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown variable `{name}`")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.variable_index(name)?;
        Ok(self.rows.iter().map(|r| r.covariates[j]).collect())
    }

    pub fn response(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sentiment).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Modal POI category of the scored sentences in each CBG; ties go to the
/// earlier category in enumeration order.
pub fn modal_categories(
    sentences: &[LabeledSentence],
    corpus: &Corpus,
    opts: ScoreOptions,
) -> BTreeMap<String, PoiCategory> {
    let mut counts: BTreeMap<&str, BTreeMap<PoiCategory, usize>> = BTreeMap::new();
    for s in sentences {
        if score_label(s.label, opts).is_none() {
            continue;
        }
        let (Some(poi), Some(reg)) = (corpus.poi(&s.poi_id), corpus.region_of(&s.poi_id)) else {
            continue;
        };
        *counts.entry(reg.cbg_id.as_str()).or_default().entry(poi.category).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(cbg, c)| {
            let best = c.values().copied().max().unwrap_or(0);
            let cat = c.into_iter().find(|&(_, n)| n == best).map(|(k, _)| k).expect("non-empty");
            (cbg.to_string(), cat)
        })
        .collect()
}

/// Joins CBG sentiments with covariates (restricted to `variables`),
/// centroids and CBSA ids.
pub fn build_cbg_table(
    corpus: &Corpus,
    cbgs: &[RegionSentiment],
    variables: &[&str],
    categories: Option<&BTreeMap<String, PoiCategory>>,
) -> Result<CbgTable> {
    let cols: Vec<usize> = variables
        .iter()
        .map(|v| {
            corpus
                .covariates
                .variable_index(v)
                .ok_or_else(|| Error::InvalidInput(format!("covariate `{v}` not in the covariate table")))
        })
        .collect::<Result<_>>()?;
    let centroids = corpus.cbg_centroids();
    let cbsa_of = corpus.regions.cbsa_of_cbg();
    let cov = corpus.covariates.index();
    let mut table = CbgTable {
        variables: variables.iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    };
    for r in cbgs {
        let id = r.region_id.as_str();
        match (cov.get(id), centroids.get(id), cbsa_of.get(id)) {
            (Some(c), Some(&(lat, lng)), Some(cbsa)) => table.rows.push(CbgRow {
                cbg_id: id.to_string(),
                cbsa_id: cbsa.to_string(),
                lat,
                lng,
                sentiment: r.mean_sentiment,
                n_reviews: r.n_reviews,
                category: categories.and_then(|m| m.get(id).copied()),
                covariates: cols.iter().map(|&j| c.values[j]).collect(),
            }),
            _ => table.dropped.push(id.to_string()),
        }
    }
    Ok(table)
}

/// Column standardized to mean 0 and sample standard deviation 1.
pub fn standardize(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidInput("standardize needs at least two values".into()));
    }
    let m = x.iter().sum::<f64>() / n as f64;
    let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::ConstantInput("cannot standardize a constant column".into()));
    }
    Ok(x.iter().map(|v| (v - m) / sd).collect())
}
