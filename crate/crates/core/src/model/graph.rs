use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::EventNode;

/// A cause or effect node backed by its extracted event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub event: EventNode,
}

/// Conjunction over a run of causes; only ever of kind AND.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntermediateNode {
    pub id: String,
    pub children: Vec<String>,
}

/// `to` receives the value of `from`, inverted when `negated`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub negated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Single,
    And,
    Or,
}

impl GateKind {
    pub fn symbol(self) -> &'static str {
        match self {
            GateKind::Single => "",
            GateKind::And => "∧",
            GateKind::Or => "∨",
        }
    }
}

/// How one effect combines its incoming arcs. `negated` inverts the
/// aggregated value; for a single input the inversion lives on the edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectInput {
    pub effect: String,
    pub gate: GateKind,
    pub operands: Vec<String>,
    #[serde(default)]
    pub negated: bool,
}

/// Boolean combinatorial network from causes to effects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct CauseEffectGraph {
    pub cause_nodes: Vec<GraphNode>,
    pub intermediate_nodes: Vec<IntermediateNode>,
    pub effect_nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
    pub effect_inputs: Vec<EffectInput>,
}

#[derive(Deserialize)]
struct RawGraph {
    cause_nodes: Vec<GraphNode>,
    #[serde(default)]
    intermediate_nodes: Vec<IntermediateNode>,
    effect_nodes: Vec<GraphNode>,
    edges: Vec<Edge>,
    effect_inputs: Vec<EffectInput>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphInvariantError(pub Vec<String>);

impl fmt::Display for GraphInvariantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid cause-effect graph: {}", self.0.join("; "))
    }
}

impl std::error::Error for GraphInvariantError {}

impl TryFrom<RawGraph> for CauseEffectGraph {
    type Error = GraphInvariantError;

    fn try_from(raw: RawGraph) -> Result<Self, Self::Error> {
        let g = CauseEffectGraph {
            cause_nodes: raw.cause_nodes,
            intermediate_nodes: raw.intermediate_nodes,
            effect_nodes: raw.effect_nodes,
            edges: raw.edges,
            effect_inputs: raw.effect_inputs,
        };
        let problems = g.invariant_violations();
        if problems.is_empty() {
            Ok(g)
        } else {
            Err(GraphInvariantError(problems))
        }
    }
}

impl CauseEffectGraph {
    pub fn cause_ids(&self) -> impl Iterator<Item = &str> {
        self.cause_nodes.iter().map(|n| n.id.as_str())
    }

    pub fn effect_ids(&self) -> impl Iterator<Item = &str> {
        self.effect_nodes.iter().map(|n| n.id.as_str())
    }

    pub fn cause(&self, id: &str) -> Option<&GraphNode> {
        self.cause_nodes.iter().find(|n| n.id == id)
    }

    pub fn effect(&self, id: &str) -> Option<&GraphNode> {
        self.effect_nodes.iter().find(|n| n.id == id)
    }

    pub fn intermediate(&self, id: &str) -> Option<&IntermediateNode> {
        self.intermediate_nodes.iter().find(|n| n.id == id)
    }

    pub fn input_of(&self, effect: &str) -> Option<&EffectInput> {
        self.effect_inputs.iter().find(|i| i.effect == effect)
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    pub fn negated_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.negated).count()
    }

    pub fn node_count(&self) -> usize {
        self.cause_nodes.len() + self.intermediate_nodes.len() + self.effect_nodes.len()
    }

    /// Empty when every structural invariant holds.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let causes: BTreeSet<&str> = self.cause_ids().collect();
        let inters: BTreeSet<&str> = self.intermediate_nodes.iter().map(|n| n.id.as_str()).collect();
        let effects: BTreeSet<&str> = self.effect_ids().collect();

        if causes.is_empty() {
            out.push("graph has no cause node".to_string());
        }
        if effects.is_empty() {
            out.push("graph has no effect node".to_string());
        }
        let total = self.node_count();
        if causes.len() + inters.len() + effects.len() != total
            || causes.intersection(&effects).next().is_some()
            || causes.intersection(&inters).next().is_some()
            || inters.intersection(&effects).next().is_some()
        {
            out.push("node ids are not unique".to_string());
        }

        let source_ok = |id: &str| causes.contains(id) || inters.contains(id);
        let mut expected_edges: BTreeSet<(String, String)> = BTreeSet::new();

        for node in &self.intermediate_nodes {
            if node.children.len() < 2 {
                out.push(format!("intermediate {} has fewer than 2 children", node.id));
            }
            for c in &node.children {
                if !source_ok(c) {
                    out.push(format!("intermediate {} references unknown node {c}", node.id));
                }
                expected_edges.insert((c.clone(), node.id.clone()));
            }
        }

        let mut seen_effects = BTreeSet::new();
        for input in &self.effect_inputs {
            if !effects.contains(input.effect.as_str()) {
                out.push(format!("input for unknown effect {}", input.effect));
            }
            if !seen_effects.insert(input.effect.as_str()) {
                out.push(format!("effect {} has more than one input", input.effect));
            }
            let arity_ok = match input.gate {
                GateKind::Single => input.operands.len() == 1,
                GateKind::And | GateKind::Or => input.operands.len() >= 2,
            };
            if !arity_ok {
                out.push(format!(
                    "effect {} has a malformed {:?} input",
                    input.effect, input.gate
                ));
            }
            if input.gate == GateKind::Single && input.negated {
                out.push(format!(
                    "effect {}: single-input negation belongs on the edge",
                    input.effect
                ));
            }
            for op in &input.operands {
                if !source_ok(op) {
                    out.push(format!("effect {} references unknown node {op}", input.effect));
                }
                expected_edges.insert((op.clone(), input.effect.clone()));
            }
        }
        for e in &effects {
            if !seen_effects.contains(e) {
                out.push(format!("effect {e} has no input"));
            }
        }

        let actual: Vec<(String, String)> = self.edges.iter().map(|e| (e.from.clone(), e.to.clone())).collect();
        let actual_set: BTreeSet<_> = actual.iter().cloned().collect();
        if actual_set.len() != actual.len() {
            out.push("duplicate edges".to_string());
        }
        if actual_set != expected_edges {
            out.push("edges do not match the node inputs".to_string());
        }

        if has_cycle(&self.edges) {
            out.push("graph contains a cycle".to_string());
        }

        // reachability: walk forward from each cause
        let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            succ.entry(e.from.as_str()).or_default().push(e.to.as_str());
        }
        for c in &causes {
            let mut stack = vec![*c];
            let mut visited = BTreeSet::new();
            let mut reaches = false;
            while let Some(n) = stack.pop() {
                if !visited.insert(n) {
                    continue;
                }
                if effects.contains(n) {
                    reaches = true;
                    break;
                }
                if let Some(next) = succ.get(n) {
                    stack.extend(next.iter().copied());
                }
            }
            if !reaches {
                out.push(format!("cause {c} reaches no effect"));
            }
        }
        out
    }
}

fn has_cycle(edges: &[Edge]) -> bool {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut indegree: BTreeMap<&str, usize> = BTreeMap::new();
    for e in edges {
        succ.entry(e.from.as_str()).or_default().push(e.to.as_str());
        *indegree.entry(e.to.as_str()).or_default() += 1;
        indegree.entry(e.from.as_str()).or_default();
    }
    let mut ready: Vec<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut removed = 0;
    while let Some(n) = ready.pop() {
        removed += 1;
        for m in succ.get(n).into_iter().flatten() {
            let d = indegree.get_mut(m).expect("known node");
            *d -= 1;
            if *d == 0 {
                ready.push(m);
            }
        }
    }
    removed != indegree.len()
}
