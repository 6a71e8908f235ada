use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AttitudeLabel;
use crate::error::{Error, Result};
use crate::textfilter::{is_word, tokenize};

/// Rule-based scorer: the signed sum of matched term valences decides the
/// label; a sentence with no matched term is `Unrelated`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub valence: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
struct Row {
    term: String,
    valence: f64,
}

impl Lexicon {
    pub fn new<I, S>(entries: I) -> Lexicon
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        Lexicon {
            valence: entries
                .into_iter()
                .map(|(t, v)| (t.into().to_lowercase(), v))
                .collect(),
        }
    }

    /// Reads a `term,valence` CSV.
    pub fn load(path: &Path) -> Result<Lexicon> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::parse(path, 0, format!("{other:?}")),
        })?;
        let mut valence = BTreeMap::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
            if !row.valence.is_finite() {
                return Err(Error::parse(path, i + 2, "valence must be finite"));
            }
            valence.insert(row.term.trim().to_lowercase(), row.valence);
        }
        Ok(Lexicon { valence })
    }

    /// Sum of valences over token occurrences, and the number of matches.
    pub fn score(&self, text: &str) -> (f64, usize) {
        let mut sum = 0.0;
        let mut hits = 0;
        for s in tokenize(text) {
            let w = &text[s.start..s.end];
            if !is_word(w) {
                continue;
            }
            if let Some(v) = self.valence.get(&w.to_lowercase()) {
                sum += v;
                hits += 1;
            }
        }
        (sum, hits)
    }

    pub fn classify(&self, text: &str) -> AttitudeLabel {
        match self.score(text) {
            (_, 0) => AttitudeLabel::Unrelated,
            (s, _) if s > 0.0 => AttitudeLabel::Positive,
            (s, _) if s < 0.0 => AttitudeLabel::Negative,
            _ => AttitudeLabel::Neutral,
        }
    }
}
