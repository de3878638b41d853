use super::tokenize::is_punctuation;
use super::ExtractError;
use crate::model::{
    char_slice, validate_structure, ConditionalStructure, Connective, EventNode, EventRole, LabeledSentence,
    LowerLabel, TokenSpan, TopLabel, Violation,
};

/// Merge labeled tokens into causes, effects and their connectives.
///
/// Nodes are keyed on label ordinals, so a cause may be split by an effect
/// (`If A, then B in case C`). A link missing between two adjacent members
/// takes the closest subsequent explicit link of the same role, else And.
pub fn assemble(ls: &LabeledSentence) -> Result<ConditionalStructure, ExtractError> {
    let causes = collect_role(ls, EventRole::Cause)?;
    let effects = collect_role(ls, EventRole::Effect)?;
    if causes.is_empty() {
        return Err(ExtractError::Missing(EventRole::Cause));
    }
    if effects.is_empty() {
        return Err(ExtractError::Missing(EventRole::Effect));
    }
    let cause_links = links(ls, &causes, EventRole::Cause);
    let effect_links = links(ls, &effects, EventRole::Effect);
    if effect_links.contains(&Connective::Or) {
        return Err(ExtractError::DisjunctiveEffects);
    }
    let s = ConditionalStructure {
        causes,
        cause_links,
        effects,
        effect_links,
    };
    if let Some(v) = validate_structure(&s).violations.first() {
        return Err(match v {
            Violation::TooMany { role, count } => ExtractError::TooMany {
                role: *role,
                count: *count,
            },
            Violation::MissingCondition { role, ordinal } => ExtractError::MissingCondition {
                role: *role,
                ordinal: *ordinal,
            },
            Violation::DisjunctiveEffects => ExtractError::DisjunctiveEffects,
            Violation::NoCause => ExtractError::Missing(EventRole::Cause),
            Violation::NoEffect => ExtractError::Missing(EventRole::Effect),
            Violation::Ordinals { role } | Violation::WrongRole { expected: role, .. } => {
                ExtractError::OrdinalGap { role: *role }
            }
            Violation::LinkCount { role, .. } => ExtractError::OrdinalGap { role: *role },
        });
    }
    Ok(s)
}

fn ordinal_of(label: TopLabel, role: EventRole) -> Option<u8> {
    match role {
        EventRole::Cause => label.cause_ordinal(),
        EventRole::Effect => label.effect_ordinal(),
    }
}

fn collect_role(ls: &LabeledSentence, role: EventRole) -> Result<Vec<EventNode>, ExtractError> {
    let mut nodes = Vec::new();
    for ordinal in 1..=3u8 {
        let idx: Vec<usize> = ls
            .top()
            .iter()
            .enumerate()
            .filter(|(_, l)| ordinal_of(**l, role) == Some(ordinal))
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            continue;
        }
        if usize::from(ordinal) != nodes.len() + 1 {
            return Err(ExtractError::OrdinalGap { role });
        }
        let variable = lower_text(ls, &idx, LowerLabel::Variable);
        let condition = lower_text(ls, &idx, LowerLabel::Condition);
        if condition.is_empty() {
            return Err(ExtractError::MissingCondition { role, ordinal });
        }
        nodes.push(EventNode {
            role,
            ordinal,
            variable,
            condition,
            negated: idx.iter().any(|&i| ls.lower()[i] == Some(LowerLabel::Negation)),
            variable_inherited: false,
            span: Some(TokenSpan {
                start: idx[0],
                end: idx[idx.len() - 1],
            }),
        });
    }
    Ok(nodes)
}

/// Text of the runs of `label` within `idx`, joined by single spaces. Two
/// labeled tokens stay in one run when only unlabeled punctuation separates
/// them.
fn lower_text(ls: &LabeledSentence, idx: &[usize], label: LowerLabel) -> String {
    let tokens = ls.tokens();
    let text = &ls.requirement().text;
    let members: Vec<usize> = idx.iter().copied().filter(|&i| ls.lower()[i] == Some(label)).collect();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for i in members {
        match runs.last_mut() {
            Some((_, last)) if (*last + 1..i).all(|j| ls.lower()[j].is_none() && is_punctuation(&tokens[j].text)) => {
                *last = i;
            }
            _ => runs.push((i, i)),
        }
    }
    runs.iter()
        .filter_map(|&(a, b)| char_slice(text, tokens[a].char_start, tokens[b].char_end))
        .collect::<Vec<_>>()
        .join(" ")
}

fn links(ls: &LabeledSentence, nodes: &[EventNode], role: EventRole) -> Vec<Connective> {
    let top = ls.top();
    // connective tokens whose nearest event neighbours on both sides have `role`
    let owned: Vec<(usize, Connective)> = top
        .iter()
        .enumerate()
        .filter_map(|(i, l)| {
            let c = match l {
                TopLabel::And => Connective::And,
                TopLabel::Or => Connective::Or,
                _ => return None,
            };
            let before = top[..i].iter().rev().find(|l| l.is_event());
            let after = top[i + 1..].iter().find(|l| l.is_event());
            let is_role = |l: Option<&TopLabel>| l.is_some_and(|l| ordinal_of(*l, role).is_some());
            (is_role(before) && is_role(after)).then_some((i, c))
        })
        .collect();

    let explicit: Vec<Option<Connective>> = nodes
        .windows(2)
        .map(|pair| {
            let (a, b) = (pair[0].span.expect("assembled"), pair[1].span.expect("assembled"));
            let (lo, hi) = if a.end < b.start {
                (a.end, b.start)
            } else {
                (b.end, a.start)
            };
            owned.iter().rfind(|(i, _)| *i > lo && *i < hi).map(|(_, c)| *c)
        })
        .collect();

    (0..explicit.len())
        .map(|k| {
            explicit[k..]
                .iter()
                .flatten()
                .next()
                .copied()
                .unwrap_or(Connective::And)
        })
        .collect()
}
