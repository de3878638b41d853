//! Causal / non-causal classification of requirement sentences.
//!
//! The built-in detector is a cue-phrase baseline. It misses conditionals
//! that carry no cue word (relative-clause conditions such as "Temperatures
//! that do not exceed these limits shall ..."); an external classifier can
//! supply verdicts through the interchange format instead.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extractor::tokenize;
use crate::extractor::tokenize::lowercase_words;
use crate::lexicon::PhraseLexicon;
use crate::model::Requirement;

pub const DEFAULT_CUES: &str = include_str!("../data/cues.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Causality {
    Causal,
    NonCausal,
}

impl fmt::Display for Causality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Causality::Causal => "causal",
            Causality::NonCausal => "non-causal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictMethod {
    Heuristic,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalityVerdict {
    pub requirement_id: String,
    pub label: Causality,
    pub confidence: f64,
    pub method: VerdictMethod,
}

impl CausalityVerdict {
    pub fn is_causal(&self) -> bool {
        self.label == Causality::Causal
    }
}

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("requirement {0:?} has empty text")]
    EmptyText(String),
    #[error("malformed verdict record {record}: {message}")]
    Malformed { record: usize, message: String },
    #[error("confidence out of range for {id:?}: {value}")]
    ConfidenceOutOfRange { id: String, value: f64 },
    #[error("duplicate verdict for {0:?}")]
    DuplicateVerdict(String),
    #[error("missing verdict for requirement {0:?}")]
    MissingVerdict(String),
}

#[derive(Debug, Clone)]
pub struct CueDetector {
    cues: PhraseLexicon,
}

impl Default for CueDetector {
    fn default() -> Self {
        CueDetector {
            cues: PhraseLexicon::parse(DEFAULT_CUES),
        }
    }
}

impl CueDetector {
    pub fn new(cues: PhraseLexicon) -> Self {
        CueDetector { cues }
    }

    pub fn cues(&self) -> &PhraseLexicon {
        &self.cues
    }

    /// Causal iff any cue phrase occurs as whole words. Confidence is 1.0 or 0.0.
    pub fn classify(&self, r: &Requirement) -> Result<CausalityVerdict, DetectError> {
        if r.text.trim().is_empty() {
            return Err(DetectError::EmptyText(r.id.clone()));
        }
        let words = lowercase_words(&tokenize(r));
        let causal = !self.cues.find_all(&words).is_empty();
        Ok(CausalityVerdict {
            requirement_id: r.id.clone(),
            label: if causal {
                Causality::Causal
            } else {
                Causality::NonCausal
            },
            confidence: if causal { 1.0 } else { 0.0 },
            method: VerdictMethod::Heuristic,
        })
    }
}

/// [`CueDetector::classify`] with the shipped cue lexicon.
pub fn classify_heuristic(r: &Requirement) -> Result<CausalityVerdict, DetectError> {
    CueDetector::default().classify(r)
}

/// Interchange record produced by external classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub id: String,
    pub causal: bool,
    pub confidence: f64,
}

impl From<&CausalityVerdict> for VerdictRecord {
    fn from(v: &CausalityVerdict) -> Self {
        VerdictRecord {
            id: v.requirement_id.clone(),
            causal: v.is_causal(),
            confidence: v.confidence,
        }
    }
}

/// Parse a stream of JSON values: newline-delimited records, a JSON array of
/// records, or any mix of the two.
pub(crate) fn json_values(text: &str) -> Result<Vec<serde_json::Value>, (usize, String)> {
    let mut out = Vec::new();
    let stream = serde_json::Deserializer::from_str(text).into_iter::<serde_json::Value>();
    for value in stream {
        let value = value.map_err(|e| (out.len(), e.to_string()))?;
        match value {
            serde_json::Value::Array(items) => out.extend(items),
            other => out.push(other),
        }
    }
    Ok(out)
}

pub fn ingest_verdicts(text: &str) -> Result<Vec<CausalityVerdict>, DetectError> {
    let values = json_values(text).map_err(|(record, message)| DetectError::Malformed { record, message })?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(values.len());
    for (i, value) in values.into_iter().enumerate() {
        let rec: VerdictRecord = serde_json::from_value(value).map_err(|e| DetectError::Malformed {
            record: i,
            message: e.to_string(),
        })?;
        if !(0.0..=1.0).contains(&rec.confidence) {
            return Err(DetectError::ConfidenceOutOfRange {
                id: rec.id,
                value: rec.confidence,
            });
        }
        if !seen.insert(rec.id.clone()) {
            return Err(DetectError::DuplicateVerdict(rec.id));
        }
        out.push(CausalityVerdict {
            requirement_id: rec.id,
            label: if rec.causal {
                Causality::Causal
            } else {
                Causality::NonCausal
            },
            confidence: rec.confidence,
            method: VerdictMethod::External,
        });
    }
    Ok(out)
}

/// Requirements split by verdict, input order preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalPartition<'a> {
    pub causal: Vec<&'a Requirement>,
    pub excluded: Vec<&'a Requirement>,
    /// Verdict ids that match no requirement.
    pub unknown_ids: Vec<String>,
}

pub fn filter_causal<'a>(
    reqs: &'a [Requirement],
    verdicts: &[CausalityVerdict],
) -> Result<CausalPartition<'a>, DetectError> {
    let by_id: BTreeMap<&str, &CausalityVerdict> = verdicts.iter().map(|v| (v.requirement_id.as_str(), v)).collect();
    let mut causal = Vec::new();
    let mut excluded = Vec::new();
    for r in reqs {
        match by_id.get(r.id.as_str()) {
            Some(v) if v.is_causal() => causal.push(r),
            Some(_) => excluded.push(r),
            None => return Err(DetectError::MissingVerdict(r.id.clone())),
        }
    }
    let known: BTreeSet<&str> = reqs.iter().map(|r| r.id.as_str()).collect();
    let unknown_ids = verdicts
        .iter()
        .filter(|v| !known.contains(v.requirement_id.as_str()))
        .map(|v| v.requirement_id.clone())
        .collect();
    Ok(CausalPartition {
        causal,
        excluded,
        unknown_ids,
    })
}
