//! Rule-based two-layer labeling for cue-marked conditionals.
//!
//! Patterns handled:
//! - leading antecedent: `<cue> CAUSE [,] [then] EFFECT [<cue> CAUSE]`
//! - trailing antecedent: `EFFECT <cue> CAUSE`
//! - cue-less relative clause: `NOUN that CLAUSE <modal> EFFECT`
//!
//! Regions are split at `and`/`or` (and bare commas, which become implicit
//! links) when the text before the connective carries a predicate.

use std::ops::Range;

use super::tokenize::{is_punctuation, lowercase_words, tokenize};
use super::ExtractError;
use crate::detector::DEFAULT_CUES;
use crate::lexicon::PhraseLexicon;
use crate::model::{EventRole, LabeledSentence, LowerLabel, Requirement, Token, TopLabel, MAX_EVENTS};

pub const DEFAULT_NEGATIONS: &str = include_str!("../../data/negations.txt");

const AUXILIARIES: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do", "does", "did", "shall",
    "should", "will", "would", "can", "cannot", "could", "may", "might", "must",
];
const MODALS: &[&str] = &[
    "shall", "should", "will", "would", "can", "cannot", "could", "may", "might", "must",
];
const OPERATORS: &[&str] = &["=", "<", ">", "≠", "≤", "≥"];
const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "each", "every", "all", "any", "some", "its", "their", "his",
    "her", "our", "my", "your",
];
const RELATIVE_PRONOUNS: &[&str] = &["that", "which", "who"];
const FILLERS: &[&str] = &["then", "either", "both"];
const TERMINATORS: &[&str] = &[".", "!", "?", ";"];

#[derive(Debug, Clone)]
pub struct HeuristicLabeler {
    cues: PhraseLexicon,
    negations: PhraseLexicon,
}

impl Default for HeuristicLabeler {
    fn default() -> Self {
        HeuristicLabeler::new(
            PhraseLexicon::parse(DEFAULT_CUES),
            PhraseLexicon::parse(DEFAULT_NEGATIONS),
        )
    }
}

/// [`HeuristicLabeler::label`] with the shipped lexicons.
pub fn label_heuristic(r: &Requirement) -> Result<LabeledSentence, ExtractError> {
    HeuristicLabeler::default().label(r)
}

struct Segment {
    role: EventRole,
    /// Token indices in sentence order.
    tokens: Vec<usize>,
    /// Leading tokens that form the variable.
    variable_len: usize,
}

impl HeuristicLabeler {
    /// `cues` is the detection lexicon; "then" is treated as a boundary
    /// marker rather than as an antecedent opener.
    pub fn new(cues: PhraseLexicon, negations: PhraseLexicon) -> Self {
        HeuristicLabeler {
            cues: cues.without(&["then"]),
            negations,
        }
    }

    pub fn label(&self, r: &Requirement) -> Result<LabeledSentence, ExtractError> {
        let tokens = tokenize(r);
        let words = lowercase_words(&tokens);
        let mut end = words.len();
        while end > 0 && TERMINATORS.contains(&words[end - 1].as_str()) {
            end -= 1;
        }

        let mut top = vec![TopLabel::NotRelevant; tokens.len()];
        let mut lower: Vec<Option<LowerLabel>> = vec![None; tokens.len()];

        let segments = match self.regions(&words, end)? {
            Some(regions) => self.segment(&words, &tokens, regions, &mut top),
            None => self.relative_clause(&words, end)?,
        };

        let mut counts = [0u8; 2];
        for seg in &segments {
            let slot = usize::from(seg.role == EventRole::Effect);
            counts[slot] += 1;
            let label = match seg.role {
                EventRole::Cause => TopLabel::cause(counts[slot]),
                EventRole::Effect => TopLabel::effect(counts[slot]),
            }
            .ok_or(ExtractError::TooMany {
                role: seg.role,
                count: segments.iter().filter(|s| s.role == seg.role).count(),
            })?;
            for (k, &i) in seg.tokens.iter().enumerate() {
                top[i] = label;
                lower[i] = Some(if k < seg.variable_len {
                    LowerLabel::Variable
                } else {
                    LowerLabel::Condition
                });
            }
            let seg_words: Vec<String> = seg.tokens.iter().map(|&i| words[i].clone()).collect();
            for (s, l) in self.negations.find_all(&seg_words) {
                for &i in &seg.tokens[s..s + l] {
                    lower[i] = Some(LowerLabel::Negation);
                }
            }
        }
        if counts[0] == 0 {
            return Err(ExtractError::NoConditional("no cause region"));
        }
        if counts[1] == 0 {
            return Err(ExtractError::NoConditional("no effect region"));
        }
        debug_assert!(usize::from(counts[0].max(counts[1])) <= MAX_EVENTS);
        Ok(LabeledSentence::new(r.clone(), tokens, top, lower)?)
    }

    /// Cause/effect regions in sentence order, or `None` if no cue occurs.
    #[allow(clippy::type_complexity)]
    fn regions(&self, words: &[String], end: usize) -> Result<Option<Vec<(EventRole, Range<usize>)>>, ExtractError> {
        let cues = self.cues.find_all(&words[..end]);
        let Some(&(first, first_len)) = cues.first() else {
            return Ok(None);
        };
        let mut regions = Vec::new();
        let leading = words[..first].iter().all(|w| is_punctuation(w));
        if leading {
            let cause_start = first + first_len;
            let then = (cause_start..end).find(|&i| words[i] == "then");
            let (cause_end, effect_start) = match then {
                Some(t) => (t, t + 1),
                None => match (cause_start..end).find(|&i| words[i] == ",") {
                    Some(c) => (c, c + 1),
                    None => return Err(ExtractError::NoConditional("no antecedent boundary")),
                },
            };
            regions.push((EventRole::Cause, cause_start..trim_comma(words, cause_start, cause_end)));
            // a later cue inside the consequent opens a trailing antecedent
            match cues.iter().find(|(s, _)| *s >= effect_start) {
                Some(&(s, l)) => {
                    regions.push((EventRole::Effect, effect_start..trim_comma(words, effect_start, s)));
                    regions.push((EventRole::Cause, s + l..end));
                }
                None => regions.push((EventRole::Effect, effect_start..end)),
            }
        } else {
            regions.push((EventRole::Effect, 0..trim_comma(words, 0, first)));
            regions.push((EventRole::Cause, first + first_len..end));
        }
        Ok(Some(regions))
    }

    /// Split regions at connectives; connective tokens get And/Or labels.
    fn segment(
        &self,
        words: &[String],
        tokens: &[Token],
        regions: Vec<(EventRole, Range<usize>)>,
        top: &mut [TopLabel],
    ) -> Vec<Segment> {
        let mut out = Vec::new();
        for (role, range) in regions {
            let mut start = range.start;
            let mut i = range.start;
            while i < range.end {
                let (connective, width) = match words[i].as_str() {
                    "and" => (Some(TopLabel::And), 1),
                    "or" => (Some(TopLabel::Or), 1),
                    "," => match words.get(i + 1).map(String::as_str) {
                        Some("and") if i + 1 < range.end => (Some(TopLabel::And), 2),
                        Some("or") if i + 1 < range.end => (Some(TopLabel::Or), 2),
                        _ => (None, 1),
                    },
                    _ => {
                        i += 1;
                        continue;
                    }
                };
                let left = self.content(words, start..i);
                if !has_predicate(&words[left.clone()]) {
                    i += width;
                    continue;
                }
                if let Some(label) = connective {
                    top[i + width - 1] = label;
                }
                push_segment(&mut out, role, left, words, tokens);
                i += width;
                start = i;
            }
            let rest = self.content(words, start..range.end);
            push_segment(&mut out, role, rest, words, tokens);
        }
        out
    }

    /// Strip leading cue words, fillers and punctuation, and trailing punctuation.
    fn content(&self, words: &[String], mut range: Range<usize>) -> Range<usize> {
        while !range.is_empty() {
            if let Some(len) = self.cues.match_at(words, range.start) {
                if range.start + len <= range.end {
                    range.start += len;
                    continue;
                }
            }
            let w = words[range.start].as_str();
            if FILLERS.contains(&w) || is_punctuation(w) {
                range.start += 1;
                continue;
            }
            break;
        }
        while !range.is_empty() && is_punctuation(&words[range.end - 1]) {
            range.end -= 1;
        }
        range
    }

    /// `NOUN-PHRASE that|which|who CLAUSE MODAL ...` without any cue word.
    /// The noun phrase is the cause's variable; the consequent has no
    /// subject of its own.
    fn relative_clause(&self, words: &[String], end: usize) -> Result<Vec<Segment>, ExtractError> {
        let rel = (1..end)
            .find(|&i| RELATIVE_PRONOUNS.contains(&words[i].as_str()))
            .filter(|&k| !words[..k].iter().any(|w| is_verb_marker(w) || is_punctuation(w)))
            .ok_or(ExtractError::NoConditional("no conditional pattern"))?;
        let modal = (rel + 2..end)
            .find(|&i| MODALS.contains(&words[i].as_str()))
            .ok_or(ExtractError::NoConditional("no consequent after relative clause"))?;
        let effect = self.content(words, modal..end);
        if effect.is_empty() {
            return Err(ExtractError::NoConditional("no effect region"));
        }
        Ok(vec![
            Segment {
                role: EventRole::Cause,
                tokens: (0..rel).chain(rel + 1..modal).collect(),
                variable_len: rel,
            },
            Segment {
                role: EventRole::Effect,
                tokens: effect.collect(),
                variable_len: 0,
            },
        ])
    }
}

fn push_segment(out: &mut Vec<Segment>, role: EventRole, range: Range<usize>, words: &[String], tokens: &[Token]) {
    if range.is_empty() {
        return;
    }
    let starts_upper = tokens[range.start].text.chars().next().is_some_and(char::is_uppercase);
    let variable_len = variable_length(&words[range.clone()], starts_upper);
    out.push(Segment {
        role,
        tokens: range.collect(),
        variable_len,
    });
}

fn trim_comma(words: &[String], start: usize, mut end: usize) -> usize {
    while end > start && words[end - 1] == "," {
        end -= 1;
    }
    end
}

fn is_verb_marker(w: &str) -> bool {
    AUXILIARIES.contains(&w) || OPERATORS.contains(&w)
}

fn has_verb_suffix(w: &str) -> bool {
    w.len() > 3
        && ((w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is")) || w.ends_with("ed"))
}

/// Whether a stretch of words reads as a clause or verb phrase rather than
/// a bare noun phrase (so an `and`/`or` after it joins events, not nouns).
fn has_predicate(ws: &[String]) -> bool {
    if ws.is_empty() {
        return false;
    }
    if ws.iter().any(|w| is_verb_marker(w)) {
        return true;
    }
    if DETERMINERS.contains(&ws[0].as_str()) {
        return ws.iter().skip(2).any(|w| has_verb_suffix(w));
    }
    ws.len() >= 2
}

/// Number of leading words that form the variable: everything before the
/// first auxiliary, modal or comparison operator. Without one, a
/// determiner-led (or capitalized) subject runs up to the first word that
/// looks like a finite verb; a segment starting with a verb has no variable.
fn variable_length(ws: &[String], starts_upper: bool) -> usize {
    if let Some(i) = ws.iter().position(|w| is_verb_marker(w)) {
        return i;
    }
    let from = if DETERMINERS.contains(&ws[0].as_str()) {
        2
    } else if starts_upper {
        1
    } else {
        return 0;
    };
    ws.iter()
        .enumerate()
        .skip(from)
        .find(|(_, w)| has_verb_suffix(w))
        .map_or(0, |(i, _)| i)
}
