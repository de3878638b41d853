//! Compile conditional natural-language requirements into minimal
//! acceptance-test suites.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`detector`]: decide whether a sentence contains a conditional.
//! 2. [`extractor`]: label its tokens on two layers and assemble causes,
//!    effects and connectives into a [`model::ConditionalStructure`].
//! 3. [`ceg`]: compile the structure into a cause-effect graph.
//! 4. [`derive`]: derive test cases by basic path sensitization.
//! 5. [`report`]: render specifications as Markdown, CSV or JSON.
//!
//! [`eval`] scores predictions against gold annotations and compares
//! generated suites with hand-written ones; [`pipeline`] wires the stages
//! together for whole documents.

pub mod ceg;
pub mod derive;
pub mod detector;
pub mod eval;
pub mod extractor;
pub mod lexicon;
pub mod model;
pub mod pipeline;
pub mod report;

pub use model::{
    AcceptanceTestSpec, CauseEffectGraph, ConditionalStructure, Connective, EventNode, EventRole, InterpretationMode,
    LabeledSentence, LowerLabel, Polarity, Requirement, TestCase, Token, TopLabel,
};
