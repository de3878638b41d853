//! Shared domain types.
//!
//! Every type here is plain immutable data: constructors validate, nothing
//! else mutates. All of them round-trip through the canonical JSON form
//! (see [`crate::report`]).

mod graph;
mod labels;
mod structure;
mod suite;

pub use graph::{CauseEffectGraph, Edge, EffectInput, GateKind, GraphNode, IntermediateNode};
pub use labels::{LabelError, LabeledSentence, LowerLabel, Token, TopLabel, UnknownLabel};
pub use structure::{
    validate_structure, ConditionalStructure, Connective, EventNode, EventRole, TokenSpan, ValidationReport, Violation,
    MAX_EVENTS,
};
pub use suite::{AcceptanceTestSpec, InterpretationMode, Parameter, Polarity, SuiteError, TestCase};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RequirementError {
    #[error("requirement {0:?}: text is empty")]
    EmptyText(String),
    #[error("requirement {0:?}: text contains more than one sentence")]
    MultipleSentences(String),
    #[error("requirement id is empty")]
    EmptyId,
}

/// One natural-language requirement sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRequirement")]
pub struct Requirement {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Deserialize)]
struct RawRequirement {
    id: String,
    text: String,
    #[serde(default)]
    source: Option<String>,
}

impl TryFrom<RawRequirement> for Requirement {
    type Error = RequirementError;

    fn try_from(raw: RawRequirement) -> Result<Self, Self::Error> {
        let mut req = Requirement::new(raw.id, raw.text)?;
        req.source = raw.source;
        Ok(req)
    }
}

impl Requirement {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self, RequirementError> {
        let id = id.into();
        let text = text.into();
        if id.trim().is_empty() {
            return Err(RequirementError::EmptyId);
        }
        if text.trim().is_empty() {
            return Err(RequirementError::EmptyText(id));
        }
        if has_sentence_break(&text) {
            return Err(RequirementError::MultipleSentences(id));
        }
        Ok(Requirement { id, text, source: None })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }
}

/// A terminator (`.`, `!`, `?`) followed by whitespace and an uppercase
/// letter or digit starts a second sentence.
fn has_sentence_break(text: &str) -> bool {
    let chars: Vec<char> = text.trim().chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if matches!(chars[i], '.' | '!' | '?') {
            let mut j = i + 1;
            let mut saw_space = false;
            while j < chars.len() && chars[j].is_whitespace() {
                saw_space = true;
                j += 1;
            }
            if saw_space && j < chars.len() && (chars[j].is_uppercase() || chars[j].is_ascii_digit()) {
                return true;
            }
        }
        i += 1;
    }
    false
}

/// Slice `text` by half-open *character* offsets.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let begin = indices.nth(start)?;
    if start == end {
        return Some(&text[begin..begin]);
    }
    let finish = indices.nth(end - start - 1)?;
    Some(&text[begin..finish])
}
