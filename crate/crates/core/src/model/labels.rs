use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{char_slice, Requirement};

/// A token with half-open character offsets into its sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
}

/// Composition layer: which cause/effect a token belongs to, or a connective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TopLabel {
    Cause1,
    Cause2,
    Cause3,
    Effect1,
    Effect2,
    Effect3,
    NotRelevant,
    And,
    Or,
}

/// Inner layer of a cause or effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LowerLabel {
    Variable,
    Condition,
    Negation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown label {0:?}")]
pub struct UnknownLabel(pub String);

impl TopLabel {
    pub const ALL: [TopLabel; 9] = [
        TopLabel::Cause1,
        TopLabel::Cause2,
        TopLabel::Cause3,
        TopLabel::Effect1,
        TopLabel::Effect2,
        TopLabel::Effect3,
        TopLabel::NotRelevant,
        TopLabel::And,
        TopLabel::Or,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopLabel::Cause1 => "Cause1",
            TopLabel::Cause2 => "Cause2",
            TopLabel::Cause3 => "Cause3",
            TopLabel::Effect1 => "Effect1",
            TopLabel::Effect2 => "Effect2",
            TopLabel::Effect3 => "Effect3",
            TopLabel::NotRelevant => "NotRelevant",
            TopLabel::And => "And",
            TopLabel::Or => "Or",
        }
    }

    pub fn cause(ordinal: u8) -> Option<TopLabel> {
        match ordinal {
            1 => Some(TopLabel::Cause1),
            2 => Some(TopLabel::Cause2),
            3 => Some(TopLabel::Cause3),
            _ => None,
        }
    }

    pub fn effect(ordinal: u8) -> Option<TopLabel> {
        match ordinal {
            1 => Some(TopLabel::Effect1),
            2 => Some(TopLabel::Effect2),
            3 => Some(TopLabel::Effect3),
            _ => None,
        }
    }

    /// `Some(ordinal)` for cause labels.
    pub fn cause_ordinal(self) -> Option<u8> {
        match self {
            TopLabel::Cause1 => Some(1),
            TopLabel::Cause2 => Some(2),
            TopLabel::Cause3 => Some(3),
            _ => None,
        }
    }

    /// `Some(ordinal)` for effect labels.
    pub fn effect_ordinal(self) -> Option<u8> {
        match self {
            TopLabel::Effect1 => Some(1),
            TopLabel::Effect2 => Some(2),
            TopLabel::Effect3 => Some(3),
            _ => None,
        }
    }

    pub fn is_event(self) -> bool {
        self.cause_ordinal().is_some() || self.effect_ordinal().is_some()
    }
}

impl LowerLabel {
    pub const ALL: [LowerLabel; 3] = [LowerLabel::Variable, LowerLabel::Condition, LowerLabel::Negation];

    pub fn name(self) -> &'static str {
        match self {
            LowerLabel::Variable => "Variable",
            LowerLabel::Condition => "Condition",
            LowerLabel::Negation => "Negation",
        }
    }
}

/// Accepts the canonical names plus the spaced/underscored spellings used in
/// annotation tools ("Cause 1", "Not_Relevant"), case-insensitively.
fn squash(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
        .flat_map(char::to_lowercase)
        .collect()
}

impl FromStr for TopLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = squash(s);
        TopLabel::ALL
            .into_iter()
            .find(|l| squash(l.name()) == key)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl FromStr for LowerLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = squash(s);
        LowerLabel::ALL
            .into_iter()
            .find(|l| squash(l.name()) == key)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl fmt::Display for TopLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for LowerLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("{layer} layer has {got} labels for {expected} tokens")]
    LengthMismatch {
        layer: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("token {index}: offsets {start}..{end} are out of order or out of bounds")]
    BadOffsets { index: usize, start: usize, end: usize },
    #[error("token {index}: text {text:?} does not match the sentence slice")]
    TextMismatch { index: usize, text: String },
    #[error("token {index}: index field is {found}")]
    BadIndex { index: usize, found: usize },
    #[error("layer rule: token {index} labeled {top} cannot carry lower label {lower}")]
    LayerRule {
        index: usize,
        top: TopLabel,
        lower: LowerLabel,
    },
}

/// A tokenized requirement with both annotation layers.
///
/// Every token has a top label; a lower label may be present only on
/// cause/effect tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLabeledSentence")]
pub struct LabeledSentence {
    requirement: Requirement,
    tokens: Vec<Token>,
    top: Vec<TopLabel>,
    lower: Vec<Option<LowerLabel>>,
}

#[derive(Deserialize)]
struct RawLabeledSentence {
    requirement: Requirement,
    tokens: Vec<Token>,
    top: Vec<TopLabel>,
    lower: Vec<Option<LowerLabel>>,
}

impl TryFrom<RawLabeledSentence> for LabeledSentence {
    type Error = LabelError;

    fn try_from(raw: RawLabeledSentence) -> Result<Self, Self::Error> {
        LabeledSentence::new(raw.requirement, raw.tokens, raw.top, raw.lower)
    }
}

impl LabeledSentence {
    pub fn new(
        requirement: Requirement,
        tokens: Vec<Token>,
        top: Vec<TopLabel>,
        lower: Vec<Option<LowerLabel>>,
    ) -> Result<Self, LabelError> {
        if top.len() != tokens.len() {
            return Err(LabelError::LengthMismatch {
                layer: "top",
                expected: tokens.len(),
                got: top.len(),
            });
        }
        if lower.len() != tokens.len() {
            return Err(LabelError::LengthMismatch {
                layer: "lower",
                expected: tokens.len(),
                got: lower.len(),
            });
        }
        check_tokens(&requirement.text, &tokens)?;
        for (i, (t, l)) in top.iter().zip(&lower).enumerate() {
            if let Some(l) = l {
                if !t.is_event() {
                    return Err(LabelError::LayerRule {
                        index: i,
                        top: *t,
                        lower: *l,
                    });
                }
            }
        }
        Ok(LabeledSentence {
            requirement,
            tokens,
            top,
            lower,
        })
    }

    pub fn requirement(&self) -> &Requirement {
        &self.requirement
    }

    pub fn id(&self) -> &str {
        &self.requirement.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn top(&self) -> &[TopLabel] {
        &self.top
    }

    pub fn lower(&self) -> &[Option<LowerLabel>] {
        &self.lower
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Labels carried by token `i` (one or two).
    pub fn label_count(&self, i: usize) -> usize {
        1 + usize::from(self.lower[i].is_some())
    }
}

/// Offsets increase strictly, do not overlap, stay in bounds, and each token
/// text equals its slice of `text`.
pub(crate) fn check_tokens(text: &str, tokens: &[Token]) -> Result<(), LabelError> {
    let n_chars = text.chars().count();
    let mut prev_end = 0;
    for (i, tok) in tokens.iter().enumerate() {
        if tok.index != i {
            return Err(LabelError::BadIndex {
                index: i,
                found: tok.index,
            });
        }
        if tok.char_start >= tok.char_end || tok.char_start < prev_end || tok.char_end > n_chars {
            return Err(LabelError::BadOffsets {
                index: i,
                start: tok.char_start,
                end: tok.char_end,
            });
        }
        if char_slice(text, tok.char_start, tok.char_end) != Some(tok.text.as_str()) {
            return Err(LabelError::TextMismatch {
                index: i,
                text: tok.text.clone(),
            });
        }
        prev_end = tok.char_end;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(index: usize, text: &str, start: usize) -> Token {
        Token {
            index,
            text: text.into(),
            char_start: start,
            char_end: start + text.chars().count(),
        }
    }

    #[test]
    fn label_names_parse_in_several_spellings() {
        assert_eq!("Cause 1".parse::<TopLabel>(), Ok(TopLabel::Cause1));
        assert_eq!("not_relevant".parse::<TopLabel>(), Ok(TopLabel::NotRelevant));
        assert_eq!("NEGATION".parse::<LowerLabel>(), Ok(LowerLabel::Negation));
        assert!("Cause4".parse::<TopLabel>().is_err());
        assert_eq!(TopLabel::ALL.len() + LowerLabel::ALL.len(), 12);
    }

    #[test]
    fn layer_rule_rejects_lower_on_connective() {
        let req = Requirement::new("R", "A and B").unwrap();
        let tokens = vec![tok(0, "A", 0), tok(1, "and", 2), tok(2, "B", 6)];
        let err = LabeledSentence::new(
            req,
            tokens,
            vec![TopLabel::Cause1, TopLabel::And, TopLabel::Cause2],
            vec![None, Some(LowerLabel::Variable), None],
        )
        .unwrap_err();
        assert!(matches!(err, LabelError::LayerRule { index: 1, .. }));
    }

    #[test]
    fn rejects_overlapping_tokens() {
        let req = Requirement::new("R", "A and B").unwrap();
        let tokens = vec![tok(0, "A", 0), tok(1, "and", 2), tok(2, "d B", 4)];
        let err = LabeledSentence::new(req, tokens, vec![TopLabel::Cause1; 3], vec![None; 3]).unwrap_err();
        assert!(matches!(err, LabelError::BadOffsets { index: 2, .. }));
    }
}
