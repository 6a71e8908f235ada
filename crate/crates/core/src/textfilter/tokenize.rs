/// A token as a byte span into its sentence text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

fn joins_word(prev: char, c: char, next: Option<char>) -> bool {
    let Some(next) = next else { return false };
    match c {
        '\'' | '’' | '-' => next.is_alphanumeric(),
        '.' | ',' => prev.is_ascii_digit() && next.is_ascii_digit(),
        _ => false,
    }
}

/// Unicode-aware word/punctuation split. Words are alphanumeric runs that may
/// contain inner apostrophes or hyphens (`don't`, `drive-thru`) and digit
/// separators (`5.50`); every other non-space character is its own token.
pub fn tokenize(text: &str) -> Vec<Span> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_alphanumeric() {
            let mut j = i + 1;
            while j < chars.len() {
                let cj = chars[j].1;
                if cj.is_alphanumeric() {
                    j += 1;
                } else if joins_word(chars[j - 1].1, cj, chars.get(j + 1).map(|x| x.1)) {
                    j += 2;
                } else {
                    break;
                }
            }
            let end = chars.get(j).map_or(text.len(), |x| x.0);
            out.push(Span { start, end });
            i = j;
        } else {
            out.push(Span {
                start,
                end: start + c.len_utf8(),
            });
            i += 1;
        }
    }
    out
}

pub fn is_word(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_alphanumeric)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<&str> {
        tokenize(s).into_iter().map(|sp| &s[sp.start..sp.end]).collect()
    }

    #[test]
    fn splits_words_and_punctuation() {
        assert_eq!(
            words("They charge $15.50 for parking, don't they?"),
            vec!["They", "charge", "$", "15.50", "for", "parking", ",", "don't", "they", "?"]
        );
        assert_eq!(words("Wow!!!"), vec!["Wow", "!", "!", "!"]);
        assert_eq!(words("well-lit  U.S."), vec!["well-lit", "U", ".", "S", "."]);
        assert_eq!(words("café crème"), vec!["café", "crème"]);
        assert!(words("   ").is_empty());
    }
}
