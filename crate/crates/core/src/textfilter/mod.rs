//! Sentence splitting, coarse POS tagging and extraction of parking
//! sentences (`parking` in any role, `park`/`parked` only as verbs).

mod segment;
mod tagger;
mod tokenize;

pub use segment::sentence_spans;
pub use tagger::{PosTag, PosTagger, RuleTagger};
pub use tokenize::{is_word, tokenize, Span};

use serde::Serialize;

use crate::corpus::Review;
use crate::exec::Exec;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Token {
    pub text: String,
    pub tag: PosTag,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sentence {
    pub review_id: String,
    pub index: usize,
    pub text: String,
    /// Byte range of `text` inside the review text.
    #[serde(skip)]
    pub span: (usize, usize),
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Stable id used to join classifier labels back to sentences.
    pub fn uid(&self) -> String {
        sentence_uid(&self.review_id, self.index)
    }
}

pub fn sentence_uid(review_id: &str, index: usize) -> String {
    format!("{review_id}#{index}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trigger {
    Parking,
    Park,
    Parked,
}

impl Trigger {
    pub fn as_str(self) -> &'static str {
        match self {
            Trigger::Parking => "parking",
            Trigger::Park => "park",
            Trigger::Parked => "parked",
        }
    }

    fn from_lower(w: &str) -> Option<Trigger> {
        match w {
            "parking" => Some(Trigger::Parking),
            "park" => Some(Trigger::Park),
            "parked" => Some(Trigger::Parked),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParkingMention {
    pub sentence: Sentence,
    pub trigger: Trigger,
    pub trigger_pos: PosTag,
}

/// Tags the tokens of one sentence.
pub fn pos_tag(tagger: &dyn PosTagger, tokens: &[&str]) -> Vec<PosTag> {
    tagger.tag(tokens)
}

fn build_sentence(tagger: &dyn PosTagger, review_id: &str, index: usize, text: &str, span: (usize, usize)) -> Sentence {
    let words: Vec<&str> = tokenize(text).into_iter().map(|s| &text[s.start..s.end]).collect();
    let tags = tagger.tag(&words);
    Sentence {
        review_id: review_id.to_string(),
        index,
        text: text.to_string(),
        span,
        tokens: words
            .into_iter()
            .zip(tags)
            .map(|(w, tag)| Token {
                text: w.to_string(),
                tag,
            })
            .collect(),
    }
}

pub fn split_sentences_with(tagger: &dyn PosTagger, review: &Review) -> Vec<Sentence> {
    sentence_spans(&review.text)
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| build_sentence(tagger, &review.review_id, i, &review.text[a..b], (a, b)))
        .collect()
}

pub fn split_sentences(review: &Review) -> Vec<Sentence> {
    split_sentences_with(&RuleTagger, review)
}

/// First qualifying trigger token of a tagged sentence.
pub fn parking_trigger(sentence: &Sentence) -> Option<(Trigger, PosTag)> {
    sentence.tokens.iter().find_map(|t| {
        let trigger = Trigger::from_lower(&t.text.to_lowercase())?;
        match trigger {
            Trigger::Parking => Some((trigger, t.tag)),
            _ if t.tag == PosTag::Verb => Some((trigger, t.tag)),
            _ => None,
        }
    })
}

/// Keep/drop decision for a single piece of sentence text.
pub fn is_parking_sentence(text: &str) -> Option<Trigger> {
    let s = build_sentence(&RuleTagger, "", 0, text, (0, text.len()));
    parking_trigger(&s).map(|(t, _)| t)
}

pub fn extract_from_review(tagger: &dyn PosTagger, review: &Review) -> Vec<ParkingMention> {
    split_sentences_with(tagger, review)
        .into_iter()
        .filter_map(|sentence| {
            let (trigger, trigger_pos) = parking_trigger(&sentence)?;
            Some(ParkingMention {
                sentence,
                trigger,
                trigger_pos,
            })
        })
        .collect()
}

/// Parking mentions over all reviews, in review then sentence order.
pub fn extract_parking_sentences(reviews: &[Review], exec: Exec) -> Vec<ParkingMention> {
    exec.map(reviews, |r| extract_from_review(&RuleTagger, r))
        .into_iter()
        .flatten()
        .collect()
}
