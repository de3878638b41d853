use crate::model::{Requirement, Token};

/// Split on whitespace; within a chunk every maximal alphanumeric run is a
/// token and every other character stands alone.
pub fn tokenize(r: &Requirement) -> Vec<Token> {
    tokenize_text(&r.text)
}

pub fn tokenize_text(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, String)> = None;

    let flush = |current: &mut Option<(usize, String)>, tokens: &mut Vec<Token>, end: usize| {
        if let Some((start, word)) = current.take() {
            tokens.push(Token {
                index: tokens.len(),
                text: word,
                char_start: start,
                char_end: end,
            });
        }
    };

    for (pos, ch) in text.chars().enumerate() {
        if is_word_char(ch) {
            match current.as_mut() {
                Some((_, word)) => word.push(ch),
                None => current = Some((pos, ch.to_string())),
            }
            continue;
        }
        flush(&mut current, &mut tokens, pos);
        if !ch.is_whitespace() {
            tokens.push(Token {
                index: tokens.len(),
                text: ch.to_string(),
                char_start: pos,
                char_end: pos + 1,
            });
        }
    }
    flush(&mut current, &mut tokens, text.chars().count());
    tokens
}

fn is_word_char(ch: char) -> bool {
    ch.is_alphanumeric() || ch == '_'
}

/// Lowercased token texts, the form lexicons match against.
pub(crate) fn lowercase_words(tokens: &[Token]) -> Vec<String> {
    tokens.iter().map(|t| t.text.to_lowercase()).collect()
}

pub(crate) fn is_punctuation(text: &str) -> bool {
    text.chars().all(|c| !is_word_char(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::char_slice;
    use proptest::prelude::*;

    fn texts(s: &str) -> Vec<String> {
        tokenize_text(s).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn splits_words_and_punctuation() {
        assert_eq!(
            texts("If A is valid and B is false, then C is true."),
            vec!["If", "A", "is", "valid", "and", "B", "is", "false", ",", "then", "C", "is", "true", "."]
        );
    }

    #[test]
    fn operators_are_separate_tokens() {
        assert_eq!(texts("LO = T LT"), vec!["LO", "=", "T", "LT"]);
        assert_eq!(texts("heating/cooling"), vec!["heating", "/", "cooling"]);
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert!(tokenize_text("").is_empty());
    }

    proptest! {
        #[test]
        fn offsets_slice_back_to_token_text(s in "[a-zA-Z0-9 ,./=äß-]{0,40}") {
            let toks = tokenize_text(&s);
            let mut prev = 0;
            for (i, t) in toks.iter().enumerate() {
                prop_assert_eq!(t.index, i);
                prop_assert!(t.char_start >= prev && t.char_start < t.char_end);
                prop_assert_eq!(char_slice(&s, t.char_start, t.char_end), Some(t.text.as_str()));
                prev = t.char_end;
            }
            let joined: String = toks.iter().map(|t| t.text.as_str()).collect();
            let stripped: String = s.chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(joined, stripped);
        }
    }
}
