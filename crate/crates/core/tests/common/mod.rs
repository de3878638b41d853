//! Helpers shared by the integration suites. Also compiled into the CLI
//! acceptance target via `#[path]`.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use proptest::prelude::*;
use reqtest_core::extractor::tokenize;
use reqtest_core::model::{
    AcceptanceTestSpec, CauseEffectGraph, ConditionalStructure, Connective, Edge, EffectInput, EventNode, EventRole,
    GateKind, GraphNode, LabeledSentence, LowerLabel, Polarity, Requirement, TopLabel,
};

pub fn fixtures() -> PathBuf {
    // valid from both crates/core and crates/cli
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn themas() -> PathBuf {
    fixtures().join("themas")
}

/// Independent model of a requirement's logic: an OR of AND-groups of
/// possibly negated causes, copied to every effect and possibly negated per
/// effect. Evaluated directly, without the graph.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub cause_negated: Vec<bool>,
    pub groups: Vec<Vec<usize>>,
    pub effect_negated: Vec<bool>,
}

impl Oracle {
    pub fn of(s: &ConditionalStructure) -> Oracle {
        let mut groups = vec![vec![0]];
        for (k, link) in s.cause_links.iter().enumerate() {
            if *link == Connective::And {
                groups.last_mut().unwrap().push(k + 1);
            } else {
                groups.push(vec![k + 1]);
            }
        }
        Oracle {
            cause_negated: s.causes.iter().map(|c| c.negated).collect(),
            groups,
            effect_negated: s.effects.iter().map(|e| e.negated).collect(),
        }
    }

    pub fn causes(&self) -> usize {
        self.cause_negated.len()
    }

    /// The antecedent: true iff every effect takes its asserted value.
    pub fn antecedent(&self, x: &[bool]) -> bool {
        self.groups
            .iter()
            .any(|g| g.iter().all(|&k| x[k] != self.cause_negated[k]))
    }

    pub fn effects(&self, x: &[bool]) -> Vec<bool> {
        let a = self.antecedent(x);
        self.effect_negated.iter().map(|&n| a != n).collect()
    }

    /// All 2^n input vectors, false before true, first cause most significant.
    pub fn truth_table(&self) -> Vec<(Vec<bool>, Vec<bool>)> {
        let n = self.causes();
        (0..1u32 << n)
            .map(|bits| {
                let x: Vec<bool> = (0..n).map(|k| bits >> (n - 1 - k) & 1 == 1).collect();
                let y = self.effects(&x);
                (x, y)
            })
            .collect()
    }
}

pub fn inputs_vec(spec: &AcceptanceTestSpec, case: usize) -> Vec<bool> {
    spec.cause_parameters()
        .map(|p| spec.test_cases[case].inputs[&p.id])
        .collect()
}

pub fn expected_vec(spec: &AcceptanceTestSpec, case: usize) -> Vec<bool> {
    spec.effect_parameters()
        .map(|p| spec.test_cases[case].expected[&p.id])
        .collect()
}

/// Every case agrees with the oracle and its polarity matches the
/// antecedent. Returns a description of the first disagreement.
pub fn check_against_oracle(spec: &AcceptanceTestSpec, oracle: &Oracle) -> Result<(), String> {
    let table: BTreeMap<Vec<bool>, Vec<bool>> = oracle.truth_table().into_iter().collect();
    for i in 0..spec.test_cases.len() {
        let x = inputs_vec(spec, i);
        let y = expected_vec(spec, i);
        if table.get(&x) != Some(&y) {
            return Err(format!(
                "case {i}: inputs {x:?} give {y:?}, oracle says {:?}",
                table.get(&x)
            ));
        }
        let positive = spec.test_cases[i].polarity == Polarity::Positive;
        if positive != oracle.antecedent(&x) {
            return Err(format!(
                "case {i}: polarity {:?} but antecedent is {}",
                spec.test_cases[i].polarity, !positive
            ));
        }
    }
    Ok(())
}

/// A graph with `n` causes feeding one gate into a single effect. Built by
/// hand, so `n` is not bounded by the label set.
pub fn single_gate_graph(n: usize, gate: GateKind) -> CauseEffectGraph {
    let cause_nodes: Vec<GraphNode> = (1..=n)
        .map(|k| GraphNode {
            id: format!("c{k}"),
            event: EventNode::cause(k.min(3) as u8, &format!("v{k}"), "holds"),
        })
        .collect();
    let g = CauseEffectGraph {
        edges: cause_nodes
            .iter()
            .map(|c| Edge {
                from: c.id.clone(),
                to: "e1".into(),
                negated: false,
            })
            .collect(),
        effect_inputs: vec![EffectInput {
            effect: "e1".into(),
            gate,
            operands: cause_nodes.iter().map(|c| c.id.clone()).collect(),
            negated: false,
        }],
        cause_nodes,
        intermediate_nodes: vec![],
        effect_nodes: vec![GraphNode {
            id: "e1".into(),
            event: EventNode::effect(1, "out", "is set"),
        }],
    };
    assert!(g.invariant_violations().is_empty(), "{:?}", g.invariant_violations());
    g
}

pub fn single_gate_oracle(n: usize, gate: GateKind) -> Oracle {
    Oracle {
        cause_negated: vec![false; n],
        groups: match gate {
            GateKind::Or => (0..n).map(|k| vec![k]).collect(),
            _ => vec![(0..n).collect()],
        },
        effect_negated: vec![false],
    }
}

/// Random valid structures: 1-3 causes with random links and negations,
/// 1-3 conjunctive effects with random negations.
pub fn arb_structure() -> impl Strategy<Value = ConditionalStructure> {
    (1usize..=3, 1usize..=3)
        .prop_flat_map(|(nc, ne)| {
            (
                prop::collection::vec(any::<bool>(), nc),
                prop::collection::vec(any::<bool>(), nc - 1),
                prop::collection::vec(any::<bool>(), ne),
            )
        })
        .prop_map(|(cneg, links, eneg)| {
            let causes = cneg
                .iter()
                .enumerate()
                .map(|(k, &neg)| {
                    let c = EventNode::cause(k as u8 + 1, &format!("input {}", k + 1), &format!("is state {}", k + 1));
                    if neg {
                        c.negated()
                    } else {
                        c
                    }
                })
                .collect();
            let effects = eneg
                .iter()
                .enumerate()
                .map(|(k, &neg)| {
                    let e = EventNode::effect(k as u8 + 1, "the system", &format!("shall do action {}", k + 1));
                    if neg {
                        e.negated()
                    } else {
                        e
                    }
                })
                .collect();
            let links = links
                .into_iter()
                .map(|b| if b { Connective::And } else { Connective::Or })
                .collect();
            ConditionalStructure::new(causes, links, effects)
        })
}

pub fn role_count(spec: &AcceptanceTestSpec, role: EventRole) -> usize {
    spec.parameters.iter().filter(|p| p.role == role).count()
}

/// "If sensor N is on, then lamp N is off." -> 12 tokens:
/// 4 NotRelevant (If , then .), 4 Cause1, 4 Effect1; 4 Variable, 4 Condition.
pub fn gold_sentence(n: usize) -> LabeledSentence {
    let r = Requirement::new(format!("s{n}"), format!("If sensor {n} is on, then lamp {n} is off.")).unwrap();
    let tokens = tokenize(&r);
    assert_eq!(tokens.len(), 12);
    let top = {
        use TopLabel::{Cause1 as C1, Effect1 as E1, NotRelevant as NR};
        vec![NR, C1, C1, C1, C1, NR, NR, E1, E1, E1, E1, NR]
    };
    use LowerLabel::{Condition as Co, Variable as Va};
    let lower = vec![
        None,
        Some(Va),
        Some(Va),
        Some(Co),
        Some(Co),
        None,
        None,
        Some(Va),
        Some(Va),
        Some(Co),
        Some(Co),
        None,
    ];
    LabeledSentence::new(r, tokens, top, lower).unwrap()
}

pub fn with_labels(s: &LabeledSentence, edits: &[(usize, TopLabel, Option<LowerLabel>)]) -> LabeledSentence {
    let mut top = s.top().to_vec();
    let mut lower = s.lower().to_vec();
    for &(i, t, l) in edits {
        top[i] = t;
        lower[i] = l;
    }
    LabeledSentence::new(s.requirement().clone(), s.tokens().to_vec(), top, lower).unwrap()
}

/// Gold corpus of 20 sentences and a prediction with two error patterns:
/// sentences 1-5 drop "on" from Cause1 (labeled NotRelevant), sentences 6-8
/// pull "then" into Effect1.
pub fn corpus() -> (Vec<LabeledSentence>, Vec<LabeledSentence>) {
    let gold: Vec<LabeledSentence> = (1..=20).map(gold_sentence).collect();
    let pred = gold
        .iter()
        .enumerate()
        .map(|(k, s)| match k {
            0..=4 => with_labels(s, &[(4, TopLabel::NotRelevant, None)]),
            5..=7 => with_labels(s, &[(6, TopLabel::Effect1, None)]),
            _ => s.clone(),
        })
        .collect();
    (gold, pred)
}
