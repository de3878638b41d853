use std::fmt;

use serde::{Deserialize, Serialize};

/// Upper bound on causes and on effects per conditional.
pub const MAX_EVENTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventRole {
    Cause,
    Effect,
}

impl fmt::Display for EventRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventRole::Cause => "cause",
            EventRole::Effect => "effect",
        })
    }
}

/// Inclusive token range `[start, end]` a node was extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    /// Number of tokens strictly between the two spans; 0 if they touch or overlap.
    pub fn distance(&self, other: &TokenSpan) -> usize {
        if self.end < other.start {
            other.start - self.end - 1
        } else if other.end < self.start {
            self.start - other.end - 1
        } else {
            0
        }
    }
}

/// A cause or an effect: a variable and the condition asserted about it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventNode {
    pub role: EventRole,
    pub ordinal: u8,
    pub variable: String,
    pub condition: String,
    #[serde(default)]
    pub negated: bool,
    #[serde(default)]
    pub variable_inherited: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<TokenSpan>,
}

impl EventNode {
    pub fn cause(ordinal: u8, variable: &str, condition: &str) -> Self {
        Self::new(EventRole::Cause, ordinal, variable, condition)
    }

    pub fn effect(ordinal: u8, variable: &str, condition: &str) -> Self {
        Self::new(EventRole::Effect, ordinal, variable, condition)
    }

    fn new(role: EventRole, ordinal: u8, variable: &str, condition: &str) -> Self {
        EventNode {
            role,
            ordinal,
            variable: variable.to_string(),
            condition: condition.to_string(),
            negated: false,
            variable_inherited: false,
            span: None,
        }
    }

    pub fn negated(mut self) -> Self {
        self.negated = true;
        self
    }

    pub fn with_span(mut self, start: usize, end: usize) -> Self {
        self.span = Some(TokenSpan { start, end });
        self
    }

    pub fn has_variable(&self) -> bool {
        !self.variable.trim().is_empty()
    }

    /// Deterministic graph id: `c1`..`c3`, `e1`..`e3`.
    pub fn node_id(&self) -> String {
        match self.role {
            EventRole::Cause => format!("c{}", self.ordinal),
            EventRole::Effect => format!("e{}", self.ordinal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    And,
    Or,
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connective::And => "and",
            Connective::Or => "or",
        })
    }
}

/// Causes and effects of one conditional with the connectives between
/// adjacent members of each role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalStructure {
    pub causes: Vec<EventNode>,
    pub cause_links: Vec<Connective>,
    pub effects: Vec<EventNode>,
    pub effect_links: Vec<Connective>,
}

impl ConditionalStructure {
    /// Convenience constructor for hand-built structures; effects are AND-linked.
    pub fn new(causes: Vec<EventNode>, cause_links: Vec<Connective>, effects: Vec<EventNode>) -> Self {
        let effect_links = vec![Connective::And; effects.len().saturating_sub(1)];
        ConditionalStructure {
            causes,
            cause_links,
            effects,
            effect_links,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &EventNode> {
        self.causes.iter().chain(&self.effects)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoCause,
    NoEffect,
    TooMany {
        role: EventRole,
        count: usize,
    },
    DisjunctiveEffects,
    LinkCount {
        role: EventRole,
        expected: usize,
        found: usize,
    },
    WrongRole {
        expected: EventRole,
        ordinal: u8,
    },
    Ordinals {
        role: EventRole,
    },
    MissingCondition {
        role: EventRole,
        ordinal: u8,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoCause => write!(f, "no cause"),
            Violation::NoEffect => write!(f, "no effect"),
            Violation::TooMany { role, count } => {
                write!(f, "too many {role}s: {count} (at most {MAX_EVENTS})")
            }
            Violation::DisjunctiveEffects => write!(f, "disjunctive effects"),
            Violation::LinkCount { role, expected, found } => {
                write!(f, "{role} links: expected {expected}, found {found}")
            }
            Violation::WrongRole { expected, ordinal } => {
                write!(f, "node {ordinal} in the {expected} list has the wrong role")
            }
            Violation::Ordinals { role } => {
                write!(f, "{role} ordinals must be unique and contiguous from 1")
            }
            Violation::MissingCondition { role, ordinal } => {
                write!(f, "{role} {ordinal} has no condition")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_structure(s: &ConditionalStructure) -> ValidationReport {
    let mut violations = Vec::new();
    check_role(
        &s.causes,
        &s.cause_links,
        EventRole::Cause,
        Violation::NoCause,
        &mut violations,
    );
    check_role(
        &s.effects,
        &s.effect_links,
        EventRole::Effect,
        Violation::NoEffect,
        &mut violations,
    );
    if s.effect_links.contains(&Connective::Or) {
        violations.push(Violation::DisjunctiveEffects);
    }
    ValidationReport { violations }
}

fn check_role(nodes: &[EventNode], links: &[Connective], role: EventRole, empty: Violation, out: &mut Vec<Violation>) {
    if nodes.is_empty() {
        out.push(empty);
    }
    if nodes.len() > MAX_EVENTS {
        out.push(Violation::TooMany {
            role,
            count: nodes.len(),
        });
    }
    let expected = nodes.len().saturating_sub(1);
    if links.len() != expected {
        out.push(Violation::LinkCount {
            role,
            expected,
            found: links.len(),
        });
    }
    for n in nodes {
        if n.role != role {
            out.push(Violation::WrongRole {
                expected: role,
                ordinal: n.ordinal,
            });
        }
    }
    let mut ordinals: Vec<u8> = nodes.iter().map(|n| n.ordinal).collect();
    ordinals.sort_unstable();
    if ordinals.iter().enumerate().any(|(i, &o)| usize::from(o) != i + 1) {
        out.push(Violation::Ordinals { role });
    }
    for n in nodes {
        if n.condition.trim().is_empty() {
            out.push(Violation::MissingCondition {
                role,
                ordinal: n.ordinal,
            });
        }
    }
}
