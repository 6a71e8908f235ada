//! Numeric sentence scores and their POI, CBG and CBSA aggregates, plus
//! distribution comparisons and region rankings.
//!
//! Scores are +1 (positive), 0 (neutral) and -1 (negative); unrelated
//! sentences carry no score and never enter a mean or a count.

mod wilcoxon;

pub use wilcoxon::{wilcoxon_ranksum, WilcoxonMethod, WilcoxonResult, EXACT_AUTO_LIMIT};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::AttitudeLabel;
use crate::corpus::{Corpus, PoiCategory};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ScoreOptions {
    /// Treat neutral sentences like unrelated ones.
    pub exclude_neutral: bool,
}

pub fn score_label(label: AttitudeLabel, opts: ScoreOptions) -> Option<f64> {
    match label {
        AttitudeLabel::Positive => Some(1.0),
        AttitudeLabel::Negative => Some(-1.0),
        AttitudeLabel::Neutral if !opts.exclude_neutral => Some(0.0),
        _ => None,
    }
}

/// Scores of the included labels, in input order.
pub fn score_labels(labels: &[AttitudeLabel], opts: ScoreOptions) -> Vec<f64> {
    labels.iter().filter_map(|&l| score_label(l, opts)).collect()
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// A classified parking sentence attached to its POI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub sentence_uid: String,
    pub poi_id: String,
    pub label: AttitudeLabel,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoiSentiment {
    pub poi_id: String,
    pub category: PoiCategory,
    /// Scored (non-unrelated) sentences.
    pub n_parking_sentences: usize,
    pub weighted_sentiment: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PoiAggregation {
    /// POIs meeting the threshold, sorted by id.
    pub included: Vec<PoiSentiment>,
    /// POIs with at least one scored sentence but fewer than the threshold.
    pub excluded: Vec<PoiSentiment>,
    /// Sentences whose POI is not in the corpus.
    pub unknown_poi_sentences: usize,
}

/// Per-POI mean over included scores; POIs with fewer than `min_count`
/// scored sentences are reported as excluded.
pub fn aggregate_poi(
    sentences: &[LabeledSentence],
    corpus: &Corpus,
    min_count: usize,
    opts: ScoreOptions,
) -> PoiAggregation {
    let mut per: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut unknown = 0;
    for s in sentences {
        if corpus.poi(&s.poi_id).is_none() {
            unknown += 1;
            continue;
        }
        if let Some(v) = score_label(s.label, opts) {
            per.entry(s.poi_id.as_str()).or_default().push(v);
        }
    }
    let mut out = PoiAggregation {
        unknown_poi_sentences: unknown,
        ..Default::default()
    };
    for (poi_id, scores) in per {
        let poi = corpus.poi(poi_id).expect("checked above");
        let row = PoiSentiment {
            poi_id: poi_id.to_string(),
            category: poi.category,
            n_parking_sentences: scores.len(),
            weighted_sentiment: mean(&scores).expect("non-empty"),
        };
        if scores.len() >= min_count {
            out.included.push(row);
        } else {
            out.excluded.push(row);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RegionLevel {
    Cbg,
    Cbsa,
}

impl fmt::Display for RegionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionLevel::Cbg => "CBG",
            RegionLevel::Cbsa => "CBSA",
        })
    }
}

impl FromStr for RegionLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "cbg" => Ok(RegionLevel::Cbg),
            "cbsa" => Ok(RegionLevel::Cbsa),
            other => Err(Error::InvalidInput(format!("unknown region level `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionAgg {
    /// Mean over all sentence scores in the region.
    #[default]
    Pooled,
    /// Unweighted mean of the region's POI means.
    PoiMean,
}

impl FromStr for RegionAgg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(RegionAgg::Pooled),
            "poi-mean" => Ok(RegionAgg::PoiMean),
            other => Err(Error::InvalidInput(format!(
                "unknown region aggregation `{other}` (pooled or poi-mean)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionSentiment {
    pub region_id: String,
    pub level: RegionLevel,
    /// Scored parking sentences in the region.
    pub n_reviews: usize,
    pub n_pois: usize,
    /// Distinct CBGs contributing scores (1 at CBG level).
    pub n_cbgs: usize,
    pub mean_sentiment: f64,
    pub min_score: f64,
    pub max_score: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RegionAggregation {
    /// Regions meeting the threshold, sorted by id.
    pub regions: Vec<RegionSentiment>,
    pub excluded: Vec<RegionSentiment>,
    /// Scored sentences whose POI has no region assignment.
    pub unassigned_sentences: usize,
}

impl RegionAggregation {
    pub fn get(&self, region_id: &str) -> Option<&RegionSentiment> {
        self.regions.iter().find(|r| r.region_id == region_id)
    }
}

/// Region means over the scored sentences of the POIs assigned to each
/// region. Regions with fewer than `min_reviews` scored sentences are
/// excluded (and listed).
pub fn aggregate_region(
    sentences: &[LabeledSentence],
    corpus: &Corpus,
    level: RegionLevel,
    min_reviews: usize,
    agg: RegionAgg,
    opts: ScoreOptions,
) -> RegionAggregation {
    // region -> poi -> scores, plus the CBG of each poi
    let mut per: BTreeMap<&str, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    let mut cbg_of: BTreeMap<&str, &str> = BTreeMap::new();
    let mut unassigned = 0;
    for s in sentences {
        let Some(score) = score_label(s.label, opts) else { continue };
        let Some(a) = corpus.region_of(&s.poi_id) else {
            unassigned += 1;
            continue;
        };
        let region = match level {
            RegionLevel::Cbg => a.cbg_id.as_str(),
            RegionLevel::Cbsa => a.cbsa_id.as_str(),
        };
        cbg_of.insert(a.poi_id.as_str(), a.cbg_id.as_str());
        per.entry(region)
            .or_default()
            .entry(a.poi_id.as_str())
            .or_default()
            .push(score);
    }
    let mut out = RegionAggregation {
        unassigned_sentences: unassigned,
        ..Default::default()
    };
    for (region, pois) in per {
        let all: Vec<f64> = pois.values().flatten().copied().collect();
        let mean_sentiment = match agg {
            RegionAgg::Pooled => mean(&all),
            RegionAgg::PoiMean => {
                let means: Vec<f64> = pois.values().filter_map(|v| mean(v)).collect();
                mean(&means)
            }
        }
        .expect("non-empty");
        let mut cbgs: Vec<&str> = pois.keys().map(|p| cbg_of[p]).collect();
        cbgs.sort_unstable();
        cbgs.dedup();
        let row = RegionSentiment {
            region_id: region.to_string(),
            level,
            n_reviews: all.len(),
            n_pois: pois.len(),
            n_cbgs: cbgs.len(),
            mean_sentiment,
            min_score: all.iter().copied().fold(f64::INFINITY, f64::min),
            max_score: all.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        if row.n_reviews >= min_reviews {
            out.regions.push(row);
        } else {
            out.excluded.push(row);
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Ranking {
    /// Highest means first.
    pub top: Vec<RegionSentiment>,
    /// Lowest means first.
    pub bottom: Vec<RegionSentiment>,
    pub filtered_out: usize,
}

/// Top-k and bottom-k regions among those with at least `min_cbgs` CBGs.
/// Ties in the mean are broken by region id.
pub fn rank_regions(regions: &[RegionSentiment], k: usize, min_cbgs: usize) -> Ranking {
    let mut kept: Vec<&RegionSentiment> = regions.iter().filter(|r| r.n_cbgs >= min_cbgs).collect();
    let filtered_out = regions.len() - kept.len();
    kept.sort_by(|a, b| {
        b.mean_sentiment
            .total_cmp(&a.mean_sentiment)
            .then_with(|| a.region_id.cmp(&b.region_id))
    });
    let top = kept.iter().take(k).map(|r| (*r).clone()).collect();
    kept.sort_by(|a, b| {
        a.mean_sentiment
            .total_cmp(&b.mean_sentiment)
            .then_with(|| a.region_id.cmp(&b.region_id))
    });
    let bottom = kept.iter().take(k).map(|r| (*r).clone()).collect();
    Ranking {
        top,
        bottom,
        filtered_out,
    }
}

/// Rank-sum tests between every pair of POI categories, using POI-level
/// weighted sentiments as the samples. Pairs with an empty side are skipped.
pub fn pairwise_category_tests(
    pois: &[PoiSentiment],
    method: WilcoxonMethod,
) -> Vec<(PoiCategory, PoiCategory, WilcoxonResult)> {
    let mut by_cat: BTreeMap<PoiCategory, Vec<f64>> = BTreeMap::new();
    for p in pois {
        by_cat.entry(p.category).or_default().push(p.weighted_sentiment);
    }
    let cats: Vec<PoiCategory> = by_cat.keys().copied().collect();
    let mut out = Vec::new();
    for (i, &a) in cats.iter().enumerate() {
        for &b in &cats[i + 1..] {
            if let Ok(r) = wilcoxon_ranksum(&by_cat[&a], &by_cat[&b], method) {
                out.push((a, b, r));
            }
        }
    }
    out
}
