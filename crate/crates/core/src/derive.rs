//! Test-case derivation by basic path sensitization.
//!
//! Starting at an effect, the required value is pushed back through the
//! graph with these decision rules:
//!
//! | gate | required | assignments to the inputs                   |
//! |------|----------|---------------------------------------------|
//! | AND  | true     | one: all inputs true                        |
//! | AND  | false    | one per input: that input false, others true |
//! | OR   | true     | one per input: that input true, others false |
//! | OR   | false    | one: all inputs false                       |
//!
//! A negated arc flips the value required of its source. Sub-results are
//! combined by Cartesian product and contradictory merges are dropped.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ceg::{evaluate, CegError};
use crate::model::{
    AcceptanceTestSpec, CauseEffectGraph, EventRole, GateKind, InterpretationMode, Parameter, Polarity, SuiteError,
    TestCase,
};

pub type PartialAssignment = BTreeMap<String, bool>;

/// Cause assignments that each force `target` to `value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitizationSet {
    pub target: String,
    pub value: bool,
    pub assignments: Vec<PartialAssignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unsatisfiable target: {node} cannot be forced to {value}")]
    Unsatisfiable { node: String, value: bool },
    #[error("empty test suite")]
    EmptySuite,
    #[error(transparent)]
    Graph(#[from] CegError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
}

pub fn force(g: &CauseEffectGraph, node: &str, value: bool) -> Result<SensitizationSet, DeriveError> {
    let assignments = require(g, node, value)?;
    if assignments.is_empty() {
        return Err(DeriveError::Unsatisfiable {
            node: node.to_string(),
            value,
        });
    }
    Ok(SensitizationSet {
        target: node.to_string(),
        value,
        assignments,
    })
}

fn require(g: &CauseEffectGraph, node: &str, value: bool) -> Result<Vec<PartialAssignment>, DeriveError> {
    if g.cause(node).is_some() {
        return Ok(vec![BTreeMap::from([(node.to_string(), value)])]);
    }
    if let Some(inter) = g.intermediate(node) {
        return gate(g, node, GateKind::And, &inter.children, value);
    }
    if let Some(input) = g.input_of(node) {
        return gate(g, node, input.gate, &input.operands, value ^ input.negated);
    }
    Err(DeriveError::UnknownNode(node.to_string()))
}

fn gate(
    g: &CauseEffectGraph,
    node: &str,
    kind: GateKind,
    inputs: &[String],
    value: bool,
) -> Result<Vec<PartialAssignment>, DeriveError> {
    // value each input must present at the gate, per alternative
    let mut patterns: Vec<Vec<bool>> = Vec::new();
    let n = inputs.len();
    match (kind, value) {
        (GateKind::Single, v) => patterns.push(vec![v]),
        (GateKind::And, true) => patterns.push(vec![true; n]),
        (GateKind::Or, false) => patterns.push(vec![false; n]),
        (GateKind::And, false) => patterns.extend((0..n).map(|i| (0..n).map(|j| j != i).collect())),
        (GateKind::Or, true) => patterns.extend((0..n).map(|i| (0..n).map(|j| j == i).collect())),
    }

    let mut out = Vec::new();
    for pattern in patterns {
        let mut combos: Vec<PartialAssignment> = vec![BTreeMap::new()];
        for (input, want) in inputs.iter().zip(pattern) {
            let negated = g.edge(input, node).is_some_and(|e| e.negated);
            let options = require(g, input, want ^ negated)?;
            combos = combos
                .iter()
                .flat_map(|base| options.iter().filter_map(move |opt| merge(base, opt)))
                .collect();
        }
        for c in combos {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

fn merge(a: &PartialAssignment, b: &PartialAssignment) -> Option<PartialAssignment> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.get(k) {
            Some(existing) if existing != v => return None,
            _ => {
                out.insert(k.clone(), *v);
            }
        }
    }
    Some(out)
}

/// Derive the acceptance-test specification for one graph.
///
/// Positive cases force each effect to the value it takes under a satisfied
/// antecedent; Equivalence mode adds the negative cases. Unconstrained
/// causes are completed with `false`.
pub fn derive(
    requirement_id: &str,
    g: &CauseEffectGraph,
    mode: InterpretationMode,
) -> Result<AcceptanceTestSpec, DeriveError> {
    let cause_ids: Vec<&str> = g.cause_ids().collect();
    let mut positives: Vec<BTreeMap<String, bool>> = Vec::new();
    let mut negatives: Vec<BTreeMap<String, bool>> = Vec::new();

    for effect in &g.effect_nodes {
        let asserted = !effect.event.negated;
        positives.extend(force(g, &effect.id, asserted)?.assignments);
        if mode == InterpretationMode::Equivalence {
            negatives.extend(force(g, &effect.id, !asserted)?.assignments);
        }
    }

    let complete = |partial: BTreeMap<String, bool>| -> BTreeMap<String, bool> {
        cause_ids
            .iter()
            .map(|id| (id.to_string(), partial.get(*id).copied().unwrap_or(false)))
            .collect()
    };
    let order = |inputs: &BTreeMap<String, bool>| -> Vec<bool> { cause_ids.iter().map(|id| inputs[*id]).collect() };

    let mut seen = BTreeSet::new();
    let mut test_cases = Vec::new();
    for (polarity, group) in [(Polarity::Positive, positives), (Polarity::Negative, negatives)] {
        let mut inputs: Vec<BTreeMap<String, bool>> = group
            .into_iter()
            .map(complete)
            .filter(|m| seen.insert(order(m)))
            .collect();
        inputs.sort_by_key(|m| order(m));
        for m in inputs {
            let expected = evaluate(g, &m)?;
            test_cases.push(TestCase {
                inputs: m,
                expected,
                polarity,
            });
        }
    }

    let parameters = g
        .cause_nodes
        .iter()
        .chain(&g.effect_nodes)
        .map(|n| Parameter {
            id: n.id.clone(),
            variable: n.event.variable.clone(),
            condition: n.event.condition.clone(),
            role: n.event.role,
        })
        .collect();
    let spec = AcceptanceTestSpec {
        requirement_id: requirement_id.to_string(),
        mode,
        parameters,
        test_cases,
    };
    spec.check()?;
    Ok(spec)
}

/// `(number of test cases, number of parameters)`.
pub fn suite_stats(spec: &AcceptanceTestSpec) -> Result<(usize, usize), DeriveError> {
    if spec.test_cases.is_empty() {
        return Err(DeriveError::EmptySuite);
    }
    Ok((spec.test_cases.len(), spec.parameters.len()))
}

/// Cause parameters of a spec.
pub fn input_count(spec: &AcceptanceTestSpec) -> usize {
    spec.parameters.iter().filter(|p| p.role == EventRole::Cause).count()
}
