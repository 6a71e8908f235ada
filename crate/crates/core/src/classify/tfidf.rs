use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textfilter::{is_word, tokenize};

/// Sparse row: `(column, value)` pairs sorted by column.
pub type SparseVec = Vec<(usize, f64)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfidfConfig {
    /// Minimum number of documents a term must appear in.
    pub min_df: usize,
    pub ngram_range: (usize, usize),
}

impl Default for TfidfConfig {
    fn default() -> Self {
        TfidfConfig {
            min_df: 2,
            ngram_range: (1, 2),
        }
    }
}

/// Lowercased word n-grams of `text`; punctuation tokens are dropped and
/// n-grams are joined with a single space.
pub fn analyze(text: &str, ngram_range: (usize, usize)) -> Vec<String> {
    let words: Vec<String> = tokenize(text)
        .into_iter()
        .map(|s| &text[s.start..s.end])
        .filter(|w| is_word(w))
        .map(str::to_lowercase)
        .collect();
    let (lo, hi) = ngram_range;
    let mut out = Vec::new();
    for n in lo.max(1)..=hi {
        if n > words.len() {
            break;
        }
        for win in words.windows(n) {
            out.push(win.join(" "));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    /// Term to column, columns assigned in lexicographic term order.
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub config: TfidfConfig,
    pub n_documents: usize,
}

impl TfidfModel {
    /// Smoothed idf: `ln((1 + N) / (1 + df)) + 1`.
    pub fn fit(texts: &[&str], config: &TfidfConfig) -> Result<TfidfModel> {
        if texts.is_empty() {
            return Err(Error::InvalidInput("TF-IDF needs at least one document".into()));
        }
        if config.ngram_range.0 == 0 || config.ngram_range.0 > config.ngram_range.1 {
            return Err(Error::InvalidInput(format!(
                "bad ngram range {:?}",
                config.ngram_range
            )));
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for t in texts {
            let terms: BTreeSet<String> = analyze(t, config.ngram_range).into_iter().collect();
            for term in terms {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let n = texts.len() as f64;
        let mut vocabulary = BTreeMap::new();
        let mut idf = Vec::new();
        for (term, d) in df {
            if d >= config.min_df.max(1) {
                vocabulary.insert(term, idf.len());
                idf.push(((1.0 + n) / (1.0 + d as f64)).ln() + 1.0);
            }
        }
        Ok(TfidfModel {
            vocabulary,
            idf,
            config: config.clone(),
            n_documents: texts.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    /// Raw term counts times idf, before normalization.
    pub fn transform_unnormalized(&self, text: &str) -> SparseVec {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for term in analyze(text, self.config.ngram_range) {
            if let Some(&j) = self.vocabulary.get(&term) {
                *counts.entry(j).or_insert(0.0) += 1.0;
            }
        }
        counts.into_iter().map(|(j, c)| (j, c * self.idf[j])).collect()
    }

    /// Unit-L2 TF-IDF row; all-zero rows are returned empty.
    pub fn transform(&self, text: &str) -> SparseVec {
        let mut v = self.transform_unnormalized(text);
        let norm = v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, x) in &mut v {
                *x /= norm;
            }
        }
        v
    }
}
