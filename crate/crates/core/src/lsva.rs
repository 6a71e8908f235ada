//! Lexical salience-valence tables: how often a word appears in labeled
//! parking sentences (salience, log10 of the count) and how positive those
//! sentences are on balance (valence).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::classify::AttitudeLabel;
use crate::corpus::PoiCategory;
use crate::error::{Error, Result};
use crate::exec::Exec;

pub const DEFAULT_MIN_COUNT: usize = 30;

const BUNDLED_STOPWORDS: &str = include_str!("../../../data/stopwords_en.txt");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LsvaEntry {
    pub term: String,
    pub n_total: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    pub salience: f64,
    pub valence: f64,
}

/// A labeled sentence with the attributes subsets are drawn on.
#[derive(Clone, Debug, PartialEq)]
pub struct LsvaSentence {
    pub text: String,
    pub label: AttitudeLabel,
    pub category: Option<PoiCategory>,
    pub is_urban: Option<bool>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Subset {
    #[default]
    All,
    Urban,
    Rural,
    Category(PoiCategory),
}

impl Subset {
    pub fn contains(self, s: &LsvaSentence) -> bool {
        match self {
            Subset::All => true,
            Subset::Urban => s.is_urban == Some(true),
            Subset::Rural => s.is_urban == Some(false),
            Subset::Category(c) => s.category == Some(c),
        }
    }
}

impl FromStr for Subset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Subset::All),
            "urban" => Ok(Subset::Urban),
            "rural" => Ok(Subset::Rural),
            _ => {
                let name = s
                    .strip_prefix("category:")
                    .ok_or_else(|| Error::InvalidInput(format!("unknown subset `{s}`")))?;
                PoiCategory::parse(name)
                    .map(Subset::Category)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown POI category `{name}`")))
            }
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subset::All => f.write_str("all"),
            Subset::Urban => f.write_str("urban"),
            Subset::Rural => f.write_str("rural"),
            Subset::Category(c) => write!(f, "category:{c}"),
        }
    }
}

/// Lowercased whitespace-separated words with everything but letters and
/// digits removed.
pub fn normalize_terms(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect::<String>())
        .filter(|w| !w.is_empty())
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    pub fn bundled() -> Stopwords {
        Stopwords::parse(BUNDLED_STOPWORDS)
    }

    pub fn none() -> Stopwords {
        Stopwords::default()
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(body: &str) -> Stopwords {
        Stopwords(
            body.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .flat_map(normalize_terms)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Stopwords> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Stopwords::parse(&body))
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `base` scaled by the subset's share of the corpus, at least 1.
pub fn scaled_min_count(base: usize, subset_len: usize, total_len: usize) -> usize {
    if total_len == 0 {
        return base.max(1);
    }
    ((base as f64 * subset_len as f64 / total_len as f64).round() as usize).max(1)
}

#[derive(Clone, Copy, Default)]
struct Counts {
    total: usize,
    positive: usize,
    negative: usize,
}

/// Terms in at least `min_count` sentences of the subset, by descending
/// salience then term.
pub fn compute_lsva(
    sentences: &[LsvaSentence],
    subset: Subset,
    min_count: usize,
    stopwords: &Stopwords,
    exec: Exec,
) -> Result<Vec<LsvaEntry>> {
    if min_count == 0 {
        return Err(Error::InvalidInput("min_count must be at least 1".into()));
    }
    let per_sentence = exec.map(sentences, |s| {
        if !subset.contains(s) {
            return None;
        }
        let terms: BTreeSet<String> = normalize_terms(&s.text)
            .into_iter()
            .filter(|t| !stopwords.contains(t))
            .collect();
        Some((s.label, terms))
    });
    let mut counts: BTreeMap<String, Counts> = BTreeMap::new();
    for (label, terms) in per_sentence.into_iter().flatten() {
        for t in terms {
            let c = counts.entry(t).or_default();
            c.total += 1;
            match label {
                AttitudeLabel::Positive => c.positive += 1,
                AttitudeLabel::Negative => c.negative += 1,
                _ => {}
            }
        }
    }
    let mut out: Vec<LsvaEntry> = counts
        .into_iter()
        .filter(|(_, c)| c.total >= min_count)
        .map(|(term, c)| LsvaEntry {
            term,
            n_total: c.total,
            n_positive: c.positive,
            n_negative: c.negative,
            salience: (c.total as f64).log10(),
            valence: (c.positive as f64 - c.negative as f64) / c.total as f64,
        })
        .collect();
    out.sort_by(|a, b| b.n_total.cmp(&a.n_total).then_with(|| a.term.cmp(&b.term)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str, label: AttitudeLabel) -> LsvaSentence {
        LsvaSentence {
            text: text.into(),
            label,
            category: None,
            is_urban: None,
        }
    }

    #[test]
    fn ten_positive_sentences() {
        let v: Vec<_> = (0..10).map(|_| s("easy easy parking", AttitudeLabel::Positive)).collect();
        let t = compute_lsva(&v, Subset::All, 1, &Stopwords::none(), Exec::Sequential).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].term, "easy");
        assert_eq!(t[0].n_total, 10);
        assert_eq!(t[0].salience, 1.0);
        assert_eq!(t[0].valence, 1.0);
    }

    #[test]
    fn balanced_and_neutral() {
        let v = vec![
            s("Tight spots!", AttitudeLabel::Positive),
            s("tight, TIGHT spots", AttitudeLabel::Negative),
            s("the spots", AttitudeLabel::Neutral),
            s("spots", AttitudeLabel::Unrelated),
        ];
        let t = compute_lsva(&v, Subset::All, 1, &Stopwords::bundled(), Exec::Sequential).unwrap();
        let spots = t.iter().find(|e| e.term == "spots").unwrap();
        assert_eq!((spots.n_total, spots.n_positive, spots.n_negative), (4, 1, 1));
        assert_eq!(spots.valence, 0.0);
        assert!(t.iter().all(|e| e.term != "the"));
    }

    #[test]
    fn bundled_list_size() {
        assert_eq!(Stopwords::bundled().len(), 127);
        assert_eq!(scaled_min_count(30, 50, 300), 5);
        assert_eq!(scaled_min_count(30, 1, 300), 1);
        assert_eq!("category:hotel".parse::<Subset>().unwrap(), Subset::Category(PoiCategory::Hotel));
    }
}
