use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EventRole;

/// Whether antecedents are read as sufficient only, or as sufficient and
/// necessary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpretationMode {
    Implication,
    #[default]
    Equivalence,
}

impl fmt::Display for InterpretationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InterpretationMode::Implication => "implication",
            InterpretationMode::Equivalence => "equivalence",
        })
    }
}

impl FromStr for InterpretationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "implication" => Ok(InterpretationMode::Implication),
            "equivalence" => Ok(InterpretationMode::Equivalence),
            other => Err(format!("unknown interpretation mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub inputs: BTreeMap<String, bool>,
    pub expected: BTreeMap<String, bool>,
    pub polarity: Polarity,
}

/// One column of a test specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameter {
    pub id: String,
    pub variable: String,
    pub condition: String,
    pub role: EventRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceTestSpec {
    pub requirement_id: String,
    pub mode: InterpretationMode,
    pub parameters: Vec<Parameter>,
    pub test_cases: Vec<TestCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("specification has no parameters")]
    NoParameters,
    #[error("specification has no test cases")]
    NoTestCases,
    #[error("test case {0} repeats the input map of an earlier case")]
    DuplicateInputs(usize),
    #[error("test case {0} is positive but follows a negative case")]
    PolarityOrder(usize),
    #[error("test case {case}: {what} do not cover the {role} parameters exactly")]
    Coverage {
        case: usize,
        what: &'static str,
        role: EventRole,
    },
}

impl AcceptanceTestSpec {
    pub fn cause_parameters(&self) -> impl Iterator<Item = &Parameter> {
        self.parameters.iter().filter(|p| p.role == EventRole::Cause)
    }

    pub fn effect_parameters(&self) -> impl Iterator<Item = &Parameter> {
        self.parameters.iter().filter(|p| p.role == EventRole::Effect)
    }

    pub fn positive_cases(&self) -> impl Iterator<Item = &TestCase> {
        self.test_cases.iter().filter(|c| c.polarity == Polarity::Positive)
    }

    /// Checks the invariants of a generated specification. Hand-written
    /// suites loaded for comparison need not satisfy these.
    pub fn check(&self) -> Result<(), SuiteError> {
        if self.parameters.is_empty() {
            return Err(SuiteError::NoParameters);
        }
        if self.test_cases.is_empty() {
            return Err(SuiteError::NoTestCases);
        }
        let cause_ids: BTreeSet<&str> = self.cause_parameters().map(|p| p.id.as_str()).collect();
        let effect_ids: BTreeSet<&str> = self.effect_parameters().map(|p| p.id.as_str()).collect();
        let mut seen = BTreeSet::new();
        let mut negative_seen = false;
        for (i, case) in self.test_cases.iter().enumerate() {
            let ins: BTreeSet<&str> = case.inputs.keys().map(String::as_str).collect();
            if ins != cause_ids {
                return Err(SuiteError::Coverage {
                    case: i,
                    what: "inputs",
                    role: EventRole::Cause,
                });
            }
            let outs: BTreeSet<&str> = case.expected.keys().map(String::as_str).collect();
            if outs != effect_ids {
                return Err(SuiteError::Coverage {
                    case: i,
                    what: "expected values",
                    role: EventRole::Effect,
                });
            }
            if !seen.insert(&case.inputs) {
                return Err(SuiteError::DuplicateInputs(i));
            }
            match case.polarity {
                Polarity::Negative => negative_seen = true,
                Polarity::Positive if negative_seen => return Err(SuiteError::PolarityOrder(i)),
                Polarity::Positive => {}
            }
        }
        Ok(())
    }
}
