//! Two-layer token labeling and assembly into conditional structures.

mod assemble;
mod heuristic;
mod ingest;
pub mod tokenize;

pub use assemble::assemble;
pub use heuristic::{label_heuristic, HeuristicLabeler, DEFAULT_NEGATIONS};
pub use ingest::{ingest_labels, parse_label_stream, to_external, ExternalToken, ExternalTokenLabels};
pub use tokenize::{tokenize, tokenize_text};

use thiserror::Error;

use crate::model::{EventRole, LabelError, TopLabel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("no conditional found: {0}")]
    NoConditional(&'static str),
    #[error("too many {role}s: {count}")]
    TooMany { role: EventRole, count: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("label record for {found:?} does not belong to requirement {expected:?}")]
    IdMismatch { expected: String, found: String },
    #[error("span mismatch at {start}..{end}: expected {expected:?}, found {found:?}")]
    SpanMismatch {
        start: usize,
        end: usize,
        expected: String,
        found: String,
    },
    #[error("overlapping spans at character {0}")]
    OverlappingSpans(usize),
    #[error("layer rule: {top} token {text:?} cannot carry a lower label")]
    LayerRule { top: TopLabel, text: String },
    #[error("token {0:?} is not covered by any labeled span")]
    Uncovered(String),
    #[error("disjunctive effects")]
    DisjunctiveEffects,
    #[error("{role} ordinals are not contiguous from 1")]
    OrdinalGap { role: EventRole },
    #[error("no {0}")]
    Missing(EventRole),
    #[error("{role} {ordinal} has no condition")]
    MissingCondition { role: EventRole, ordinal: u8 },
    #[error("malformed label record {record}: {message}")]
    Malformed { record: usize, message: String },
    #[error(transparent)]
    Label(#[from] LabelError),
}
