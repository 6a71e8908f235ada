//! Deterministic lexicon + suffix + bigram part-of-speech tagger.
//!
//! Only the noun/verb split on `park`/`parked` drives extraction, so the
//! tagger is tuned for that: closed-class word lists, suffix guesses for
//! open-class words, then a contextual pass over noun/verb-ambiguous words.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::tokenize::is_word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Verb,
    Noun,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Num,
    Punct,
    Other,
}

impl PosTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Verb => "VERB",
            PosTag::Noun => "NOUN",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Pron => "PRON",
            PosTag::Det => "DET",
            PosTag::Adp => "ADP",
            PosTag::Num => "NUM",
            PosTag::Punct => "PUNCT",
            PosTag::Other => "OTHER",
        }
    }

    pub fn parse(s: &str) -> Option<PosTag> {
        Some(match s {
            "VERB" => PosTag::Verb,
            "NOUN" => PosTag::Noun,
            "ADJ" => PosTag::Adj,
            "ADV" => PosTag::Adv,
            "PRON" => PosTag::Pron,
            "DET" => PosTag::Det,
            "ADP" => PosTag::Adp,
            "NUM" => PosTag::Num,
            "PUNCT" => PosTag::Punct,
            "OTHER" => PosTag::Other,
            _ => return None,
        })
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Anything that assigns one coarse tag per token. Implementations must be
/// deterministic; a statistical tagger can be dropped in behind this trait.
pub trait PosTagger: Send + Sync {
    fn tag(&self, tokens: &[&str]) -> Vec<PosTag>;
}

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "every", "each", "another", "no", "some",
    "any", "either", "neither",
];
const POSSESSIVES: &[&str] = &["my", "our", "your", "his", "her", "its", "their"];
const SUBJECT_PRONOUNS: &[&str] = &["i", "we", "you", "he", "she", "it", "they"];
const PRONOUNS: &[&str] = &[
    "me", "us", "him", "them", "mine", "ours", "yours", "hers", "theirs", "myself", "ourselves",
    "yourself", "yourselves", "himself", "herself", "itself", "themselves", "which", "who", "whom",
    "whose", "what", "someone", "everyone", "anyone", "nobody", "nothing", "something",
    "everything", "anything", "somebody", "everybody",
];
const ADPOSITIONS: &[&str] = &[
    "in", "on", "at", "by", "for", "with", "of", "from", "to", "into", "onto", "near", "behind",
    "across", "through", "after", "before", "under", "over", "about", "around", "between",
    "without", "within", "during", "along", "against", "toward", "towards", "past", "via",
    "beside", "besides", "beyond", "upon", "per", "among", "amid", "throughout", "underneath",
];
const CONJUNCTIONS: &[&str] = &[
    "and", "or", "but", "because", "so", "if", "although", "though", "while", "nor", "yet", "than",
    "unless", "since", "whereas", "once", "whether", "plus",
];
const ADVERBS: &[&str] = &[
    "not", "n't", "very", "really", "always", "never", "often", "here", "now", "then", "just",
    "also", "too", "away", "outside", "inside", "downtown", "again", "only", "even", "still",
    "almost", "when", "where", "why", "how", "well", "out", "up", "down", "anywhere",
    "everywhere", "somewhere", "nowhere", "nearby", "early", "late", "ever", "back", "right",
    "sometimes", "usually", "quite", "rather", "pretty", "soon", "already", "later", "instead",
    "ahead", "together", "twice", "definitely", "maybe", "perhaps", "overall", "honestly",
    "literally", "especially", "around", "far", "upstairs", "downstairs", "home", "there",
];
const AUXILIARIES: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "being", "am", "do", "does", "did", "don't",
    "doesn't", "didn't", "can", "can't", "cannot", "could", "couldn't", "will", "won't", "would",
    "wouldn't", "should", "shouldn't", "may", "might", "must", "have", "has", "had", "haven't",
    "hasn't", "hadn't", "isn't", "aren't", "wasn't", "weren't", "shall", "'s", "'re", "'ve",
    "'ll", "'d",
];
const VERBS: &[&str] = &[
    "get", "got", "gets", "go", "goes", "went", "gone", "come", "came", "comes", "take", "took",
    "taken", "takes", "make", "made", "makes", "find", "found", "finds", "see", "saw", "seen",
    "pay", "paid", "pays", "know", "knew", "say", "said", "says", "let", "put", "leave", "left",
    "ate", "eat", "eaten", "bring", "brought", "think", "thought", "felt", "feel", "try", "tried",
    "give", "gave", "given", "keep", "kept", "drive", "drove", "driven", "stay", "buy", "bought",
    "sat", "sit", "told", "tell", "met", "meet", "ran", "become", "became", "fill", "fills",
    "need", "needs", "want", "wants", "recommend", "recommended", "loved", "liked", "hated",
    "owns", "own", "cost", "costs", "charges", "expect", "enjoy", "enjoyed", "arrived", "arrive",
    "wait", "waited", "seemed", "seems", "seem", "allow", "allows", "offer", "offers",
];
/// Words that are nouns or verbs depending on context.
const NOUN_VERB: &[&str] = &[
    "park", "charge", "walk", "visit", "run", "view", "tow", "stop", "love", "like", "use",
    "spot", "block", "return", "line", "turn", "drop", "check", "call", "pull", "book", "rent",
    "help", "shop", "ride", "order", "work", "look", "play", "double", "valet",
];
const ADJECTIVES: &[&str] = &[
    "great", "good", "nice", "bad", "easy", "hard", "free", "full", "small", "big", "large",
    "tight", "clean", "safe", "dark", "friendly", "lovely", "worst", "best", "better", "worse",
    "difficult", "terrible", "horrible", "awful", "cheap", "close", "huge", "tiny", "little",
    "ample", "limited", "crowded", "packed", "busy", "empty", "new", "old", "open", "closed",
    "sure", "fine", "amazing", "national", "next", "convenient", "plentiful", "rude", "cramped",
    "narrow", "wide", "long", "short", "quick", "slow", "high", "low", "main", "ok", "okay",
    "more", "most", "less", "least", "much", "many", "few", "several", "other", "same",
    "different", "whole", "loud", "quiet", "fast", "private", "public", "secure", "covered",
    "handicap", "accessible", "nearest", "super", "awesome", "excellent", "poor", "decent",
    "fair", "lit", "spacious", "plenty", "only",
];
const NOUNS: &[&str] = &[
    "parking", "plenty", "spring", "building", "evening", "morning", "thing", "ceiling",
    "wedding", "ring", "nothing", "king", "meeting", "ceiling", "lot", "staff", "time", "place",
];
const NUMBER_WORDS: &[&str] = &[
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "twenty", "thirty", "forty", "fifty", "hundred", "thousand", "dozen",
];

fn contains(list: &[&str], w: &str) -> bool {
    list.contains(&w)
}

/// Context-free tag from word lists and suffix rules.
fn lexical_tag(lower: &str, raw: &str) -> PosTag {
    if !is_word(raw) {
        return PosTag::Punct;
    }
    if lower.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',') || contains(NUMBER_WORDS, lower) {
        return PosTag::Num;
    }
    // word lists are checked in priority order for homographs
    if contains(DETERMINERS, lower) {
        return PosTag::Det;
    }
    if contains(POSSESSIVES, lower) || contains(SUBJECT_PRONOUNS, lower) || contains(PRONOUNS, lower) {
        return PosTag::Pron;
    }
    if contains(AUXILIARIES, lower) || contains(VERBS, lower) {
        return PosTag::Verb;
    }
    if contains(NOUNS, lower) {
        return PosTag::Noun;
    }
    if contains(ADJECTIVES, lower) {
        return PosTag::Adj;
    }
    if contains(CONJUNCTIONS, lower) {
        return PosTag::Other;
    }
    if contains(ADPOSITIONS, lower) {
        return PosTag::Adp;
    }
    if contains(ADVERBS, lower) {
        return PosTag::Adv;
    }
    if contains(NOUN_VERB, lower) {
        return PosTag::Noun;
    }
    if lower.ends_with("n't") {
        return PosTag::Verb;
    }
    let len = lower.chars().count();
    if len > 4 && lower.ends_with("ly") {
        return PosTag::Adv;
    }
    if len > 4 && (lower.ends_with("ed") || lower.ends_with("ing")) {
        return PosTag::Verb;
    }
    const ADJ_SUFFIXES: &[&str] = &["ous", "ful", "able", "ible", "ive", "less", "ic", "ish"];
    if len > 4 && ADJ_SUFFIXES.iter().any(|s| lower.ends_with(s)) {
        return PosTag::Adj;
    }
    PosTag::Noun
}

fn is_capitalized(raw: &str) -> bool {
    raw.chars().next().is_some_and(char::is_uppercase)
}

/// Following-context test used for sentence-initial and post-conjunction
/// noun/verb words: a verb is followed by a preposition, adverb, object or
/// the end of the clause; a noun modifier is followed by another noun.
fn verb_context(next: Option<PosTag>) -> bool {
    matches!(
        next,
        None | Some(PosTag::Adp | PosTag::Adv | PosTag::Det | PosTag::Pron | PosTag::Punct | PosTag::Other)
    )
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RuleTagger;

impl PosTagger for RuleTagger {
    fn tag(&self, tokens: &[&str]) -> Vec<PosTag> {
        let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
        let lexical: Vec<PosTag> = lower
            .iter()
            .zip(tokens)
            .map(|(l, raw)| lexical_tag(l, raw))
            .collect();
        let mut tags = lexical.clone();
        for i in 0..tokens.len() {
            let w = lower[i].as_str();
            let prev = if i > 0 { Some(tags[i - 1]) } else { None };
            let prev_word = if i > 0 { Some(lower[i - 1].as_str()) } else { None };
            let next = lexical.get(i + 1).copied();
            let after_determiner = matches!(prev, Some(PosTag::Det | PosTag::Adj | PosTag::Num))
                || prev_word.is_some_and(|p| contains(POSSESSIVES, p));
            let mid_capital = i > 0 && is_capitalized(tokens[i]) && prev != Some(PosTag::Punct);

            if w == "there" {
                tags[i] = if matches!(
                    lower.get(i + 1).map(String::as_str),
                    Some("is" | "are" | "was" | "were" | "'s" | "isn't" | "aren't" | "wasn't" | "weren't")
                ) {
                    PosTag::Pron
                } else {
                    PosTag::Adv
                };
                continue;
            }

            if contains(NOUN_VERB, w) {
                tags[i] = if mid_capital || after_determiner {
                    PosTag::Noun
                } else {
                    match prev {
                        None | Some(PosTag::Punct) => {
                            if verb_context(next) {
                                PosTag::Verb
                            } else {
                                PosTag::Noun
                            }
                        }
                        Some(PosTag::Verb | PosTag::Adv) => PosTag::Verb,
                        Some(PosTag::Pron) => {
                            if prev_word.is_some_and(|p| contains(SUBJECT_PRONOUNS, p)) {
                                PosTag::Verb
                            } else {
                                PosTag::Noun
                            }
                        }
                        Some(PosTag::Adp) if prev_word == Some("to") => PosTag::Verb,
                        Some(PosTag::Other) if verb_context(next) => PosTag::Verb,
                        _ => PosTag::Noun,
                    }
                };
                continue;
            }

            if tags[i] == PosTag::Verb && after_determiner && !contains(AUXILIARIES, w) {
                // "the parked cars" vs "the building"
                let participle = w.ends_with("ed") || w.ends_with("ing");
                tags[i] = if participle && next == Some(PosTag::Noun) && !contains(NOUNS, w) {
                    PosTag::Adj
                } else {
                    PosTag::Noun
                };
                continue;
            }

            if tags[i] == PosTag::Noun && w.ends_with('s') && !mid_capital {
                // "it fills", "he parks"
                if prev_word.is_some_and(|p| contains(SUBJECT_PRONOUNS, p)) {
                    tags[i] = PosTag::Verb;
                }
                continue;
            }

            if mid_capital && matches!(tags[i], PosTag::Adj | PosTag::Verb | PosTag::Adv) {
                tags[i] = PosTag::Noun;
                continue;
            }

            if tags[i] == PosTag::Adp
                && matches!(next, None | Some(PosTag::Punct | PosTag::Other))
                && !matches!(prev, Some(PosTag::Det))
            {
                // particle use: "walked in.", "get in and out"
                tags[i] = PosTag::Adv;
            }
        }
        tags
    }
}
