//! Scoring predictions against gold annotations, and comparing generated
//! suites with hand-written ones.

mod brat;
mod matching;
mod metrics;

pub use brat::parse_brat;
pub use matching::{combine_suites, match_suites, parse_manual_spec, Normalizer, OneToMany, SuiteMatchReport};
pub use metrics::{
    detection_metrics, pairwise_f1, pairwise_f1_multi, token_metrics, LabelMetrics, LabelScore, Layer, PairwiseScores,
    SpanMatch,
};

use thiserror::Error;

use crate::model::{LabelError, RequirementError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("line {line}: malformed annotation: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown label {label:?}")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: span mismatch: offsets give {expected:?}, annotation says {found:?}")]
    SpanMismatch {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: span crosses a sentence boundary")]
    CrossSentence { line: usize },
    #[error("line {line}: conflicting {layer} labels on token {token:?}")]
    Conflict {
        line: usize,
        layer: &'static str,
        token: String,
    },
    #[error("sentence {0}: {1}")]
    Sentence(String, RequirementError),
    #[error("sentence {0}: {1}")]
    Layer(String, LabelError),
    #[error("id mismatch: {0:?} is not present on both sides")]
    IdMismatch(String),
    #[error("tokenization mismatch in {0:?}")]
    TokenizationMismatch(String),
    #[error("annotators share no sentences")]
    DisjointSentences,
    #[error("need at least two annotators")]
    TooFewAnnotators,
}
