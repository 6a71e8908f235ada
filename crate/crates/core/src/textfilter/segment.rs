/// Words whose trailing period never ends a sentence (compared lowercase,
/// without the final period).
const NON_TERMINAL: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "st", "mt", "jr", "sr", "vs", "e.g", "i.e", "u.s", "approx",
    "dept", "inc", "co", "ft", "cf",
];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, ')' | ']' | '"' | '\'' | '’' | '”')
}

/// The word immediately before byte offset `dot`, stripped of leading
/// opening punctuation.
fn word_before(text: &str, dot: usize) -> &str {
    let head = &text[..dot];
    let start = head
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map_or(0, |(i, c)| i + c.len_utf8());
    head[start..].trim_start_matches(|c: char| !c.is_alphanumeric())
}

/// Byte ranges of the sentences in `text`. A boundary is a run of `.`/`!`/`?`
/// (plus closing quotes or brackets) followed by whitespace and a character
/// that is not a lowercase letter. A lone period after a guarded
/// abbreviation or a single-letter initial is not a boundary.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut start = None::<usize>;
    let mut i = 0;
    let push = |spans: &mut Vec<(usize, usize)>, s: usize, e: usize| {
        let seg = &text[s..e];
        let lead = seg.len() - seg.trim_start().len();
        let trail = seg.len() - seg.trim_end().len();
        if lead + trail < seg.len() {
            spans.push((s + lead, e - trail));
        }
    };
    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() && !c.is_whitespace() {
            start = Some(pos);
        }
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < chars.len() && is_terminator(chars[i].1) {
            i += 1;
        }
        let single_period = i - run_start == 1 && c == '.';
        while i < chars.len() && is_closer(chars[i].1) {
            i += 1;
        }
        let end = chars.get(i).map_or(text.len(), |x| x.0);
        if i < chars.len() && !chars[i].1.is_whitespace() {
            continue;
        }
        let next = chars[i..].iter().map(|x| x.1).find(|c| !c.is_whitespace());
        if next.is_some_and(char::is_lowercase) {
            continue;
        }
        if single_period {
            let word = word_before(text, pos).to_lowercase();
            let initial = word.chars().count() == 1 && word.chars().all(char::is_alphabetic);
            if initial || NON_TERMINAL.contains(&word.as_str()) {
                continue;
            }
        }
        if let Some(s) = start.take() {
            push(&mut spans, s, end);
        }
    }
    if let Some(s) = start {
        push(&mut spans, s, text.len());
    }
    spans
}
