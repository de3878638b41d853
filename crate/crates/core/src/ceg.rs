//! Cause-effect graph construction, node completion, evaluation and DOT output.
//!
//! Construction rules:
//! - one node per cause and per effect, ids `c1..`, `e1..`;
//! - And-linked causes feed the effect through an AND gate, Or-linked ones
//!   through an OR gate;
//! - with mixed links, And binds tighter: each maximal And-run of two or
//!   more causes becomes an intermediate AND node `i1..` feeding the OR gate;
//! - every effect receives the same input expression (effects are always
//!   conjunctive);
//! - a negated cause negates its outgoing arcs; a negated effect negates its
//!   single incoming arc, or the output of its gate. Negations on the same
//!   arc cancel.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{
    validate_structure, CauseEffectGraph, ConditionalStructure, Connective, Edge, EffectInput, EventNode, EventRole,
    GateKind, GraphNode, IntermediateNode, ValidationReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CegError {
    #[error("invalid structure: {0}")]
    InvalidStructure(ValidationReport),
    #[error("no node in the structure has a variable")]
    NoVariable,
    #[error("assignment is missing cause {0}")]
    MissingCause(String),
    #[error("assignment names unknown cause {0}")]
    UnknownCause(String),
}

pub fn build(s: &ConditionalStructure) -> Result<CauseEffectGraph, CegError> {
    let report = validate_structure(s);
    if !report.is_valid() {
        return Err(CegError::InvalidStructure(report));
    }

    let cause_nodes: Vec<GraphNode> = s.causes.iter().map(graph_node).collect();
    let effect_nodes: Vec<GraphNode> = s.effects.iter().map(graph_node).collect();

    // maximal And-runs
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for (k, link) in s.cause_links.iter().enumerate() {
        match link {
            Connective::And => groups.last_mut().expect("non-empty").push(k + 1),
            Connective::Or => groups.push(vec![k + 1]),
        }
    }

    let mut intermediate_nodes = Vec::new();
    let mut edges = Vec::new();
    // (operand id, negation carried by the operand itself)
    let mut operands: Vec<(String, bool)> = Vec::new();
    let gate = if groups.len() == 1 {
        let g = &groups[0];
        if g.len() == 1 {
            GateKind::Single
        } else {
            GateKind::And
        }
    } else {
        GateKind::Or
    };

    if gate == GateKind::Or {
        for g in &groups {
            if g.len() == 1 {
                let c = &s.causes[g[0]];
                operands.push((c.node_id(), c.negated));
                continue;
            }
            let id = format!("i{}", intermediate_nodes.len() + 1);
            let children: Vec<String> = g.iter().map(|&k| s.causes[k].node_id()).collect();
            for &k in g {
                edges.push(Edge {
                    from: s.causes[k].node_id(),
                    to: id.clone(),
                    negated: s.causes[k].negated,
                });
            }
            intermediate_nodes.push(IntermediateNode {
                id: id.clone(),
                children,
            });
            operands.push((id, false));
        }
    } else {
        operands.extend(s.causes.iter().map(|c| (c.node_id(), c.negated)));
    }

    let mut effect_inputs = Vec::new();
    for effect in &s.effects {
        let eid = effect.node_id();
        let fold = gate == GateKind::Single && effect.negated;
        for (op, neg) in &operands {
            edges.push(Edge {
                from: op.clone(),
                to: eid.clone(),
                negated: *neg ^ fold,
            });
        }
        effect_inputs.push(EffectInput {
            effect: eid,
            gate,
            operands: operands.iter().map(|(id, _)| id.clone()).collect(),
            negated: effect.negated && !fold,
        });
    }

    let g = CauseEffectGraph {
        cause_nodes,
        intermediate_nodes,
        effect_nodes,
        edges,
        effect_inputs,
    };
    debug_assert!(g.invariant_violations().is_empty(), "{:?}", g.invariant_violations());
    Ok(g)
}

fn graph_node(e: &EventNode) -> GraphNode {
    GraphNode {
        id: e.node_id(),
        event: e.clone(),
    }
}

/// Fill missing variables from the nearest referent.
///
/// An effect without a variable takes it from the nearest effect that has
/// one, else from Cause 1; a cause takes it from the nearest cause. Distance
/// is measured in tokens (ordinal distance when spans are unknown); ties go
/// to the preceding node. Only explicitly stated variables act as donors, so
/// the result is idempotent.
pub fn complete_nodes(s: &ConditionalStructure) -> Result<ConditionalStructure, CegError> {
    if !s.nodes().any(EventNode::has_variable) {
        return Err(CegError::NoVariable);
    }
    let mut out = s.clone();
    for (k, node) in s.effects.iter().enumerate() {
        if node.has_variable() {
            continue;
        }
        let donor = nearest(node, s.effects.iter().filter(|e| e.has_variable()))
            .or_else(|| s.causes.first().filter(|c| c.has_variable()))
            .or_else(|| nearest(node, s.causes.iter().filter(|c| c.has_variable())));
        if let Some(d) = donor {
            out.effects[k].variable = d.variable.clone();
            out.effects[k].variable_inherited = true;
        }
    }
    for (k, node) in s.causes.iter().enumerate() {
        if node.has_variable() {
            continue;
        }
        let donor = nearest(node, s.causes.iter().filter(|c| c.has_variable()))
            .or_else(|| nearest(node, s.effects.iter().filter(|e| e.has_variable())));
        if let Some(d) = donor {
            out.causes[k].variable = d.variable.clone();
            out.causes[k].variable_inherited = true;
        }
    }
    Ok(out)
}

fn nearest<'a>(target: &EventNode, candidates: impl Iterator<Item = &'a EventNode>) -> Option<&'a EventNode> {
    // (distance, 0 if preceding else 1) ordered lexicographically
    candidates
        .map(|c| {
            let (dist, preceding) = match (target.span, c.span) {
                (Some(t), Some(cs)) => (t.distance(&cs), cs.start < t.start),
                _ => {
                    let (a, b) = (i32::from(target.ordinal), i32::from(c.ordinal));
                    let same_role = target.role == c.role;
                    let d = if same_role {
                        (a - b).unsigned_abs() as usize
                    } else {
                        usize::MAX
                    };
                    (d, b < a || !same_role && c.role == EventRole::Cause)
                }
            };
            ((dist, !preceding), c)
        })
        .min_by_key(|(key, _)| *key)
        .map(|(_, c)| c)
}

/// Evaluate every effect under a total cause assignment.
pub fn evaluate(g: &CauseEffectGraph, assignment: &BTreeMap<String, bool>) -> Result<BTreeMap<String, bool>, CegError> {
    for id in assignment.keys() {
        if g.cause(id).is_none() {
            return Err(CegError::UnknownCause(id.clone()));
        }
    }
    for id in g.cause_ids() {
        if !assignment.contains_key(id) {
            return Err(CegError::MissingCause(id.to_string()));
        }
    }
    let mut values: BTreeMap<&str, bool> = assignment.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let arc = |values: &BTreeMap<&str, bool>, from: &str, to: &str| -> bool {
        let neg = g.edge(from, to).is_some_and(|e| e.negated);
        values[from] ^ neg
    };
    // intermediates are created over causes and listed in dependency order
    for node in &g.intermediate_nodes {
        let v = node.children.iter().all(|c| arc(&values, c, &node.id));
        values.insert(node.id.as_str(), v);
    }
    let mut out = BTreeMap::new();
    for input in &g.effect_inputs {
        let mut ins = input.operands.iter().map(|op| arc(&values, op, &input.effect));
        let v = match input.gate {
            GateKind::Single | GateKind::And => ins.all(|b| b),
            GateKind::Or => ins.any(|b| b),
        };
        out.insert(input.effect.clone(), v ^ input.negated);
    }
    Ok(out)
}

/// Deterministic Graphviz rendering. Negated arcs carry the label `¬`; gate
/// effects are annotated with `∧`/`∨` (prefixed `¬` when the output is inverted).
pub fn to_dot(g: &CauseEffectGraph) -> String {
    let mut out = String::from("digraph ceg {\n  rankdir=LR;\n");
    for n in &g.cause_nodes {
        let _ = writeln!(
            out,
            "  {} [shape=box, label=\"{}\"];",
            n.id,
            node_label(&n.id, &n.event, "")
        );
    }
    for n in &g.intermediate_nodes {
        let _ = writeln!(out, "  {} [shape=circle, label=\"∧\"];", n.id);
    }
    for n in &g.effect_nodes {
        let gate = g
            .input_of(&n.id)
            .map(|i| format!("{}{}", if i.negated { "¬" } else { "" }, i.gate.symbol()))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "  {} [shape=box, label=\"{}\"];",
            n.id,
            node_label(&n.id, &n.event, &gate)
        );
    }
    for e in &g.edges {
        if e.negated {
            let _ = writeln!(out, "  {} -> {} [label=\"¬\"];", e.from, e.to);
        } else {
            let _ = writeln!(out, "  {} -> {};", e.from, e.to);
        }
    }
    out.push_str("}\n");
    out
}

fn node_label(id: &str, e: &EventNode, gate: &str) -> String {
    let head = if gate.is_empty() {
        id.to_string()
    } else {
        format!("{id} ({gate})")
    };
    format!("{head}\\n{}\\n{}", escape(&e.variable), escape(&e.condition))
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
