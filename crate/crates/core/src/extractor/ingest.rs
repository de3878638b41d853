use serde::{Deserialize, Serialize};

use super::tokenize::{is_punctuation, tokenize};
use super::ExtractError;
use crate::detector::json_values;
use crate::model::{char_slice, LabeledSentence, LowerLabel, Requirement, TopLabel};

/// One labeled span from an external labeler. Offsets are characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalToken {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub top: String,
    #[serde(default)]
    pub lower: Option<String>,
}

/// Token labels for one requirement, as produced by an external model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalTokenLabels {
    pub id: String,
    pub tokens: Vec<ExternalToken>,
}

/// Parse newline-delimited (or array) label records.
pub fn parse_label_stream(text: &str) -> Result<Vec<ExternalTokenLabels>, ExtractError> {
    let values = json_values(text).map_err(|(record, message)| ExtractError::Malformed { record, message })?;
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value(v).map_err(|e| ExtractError::Malformed {
                record: i,
                message: e.to_string(),
            })
        })
        .collect()
}

struct Parsed {
    start: usize,
    end: usize,
    top: TopLabel,
    lower: Option<LowerLabel>,
}

/// Map external spans onto [`tokenize`] tokens.
///
/// Spans may be subword pieces: every span overlapping a token votes for its
/// labels, the majority wins per layer, and ties go to the first piece.
pub fn ingest_labels(req: &Requirement, x: &ExternalTokenLabels) -> Result<LabeledSentence, ExtractError> {
    if x.id != req.id {
        return Err(ExtractError::IdMismatch {
            expected: req.id.clone(),
            found: x.id.clone(),
        });
    }
    let mut spans = Vec::with_capacity(x.tokens.len());
    for t in &x.tokens {
        let top: TopLabel = t.top.parse().map_err(|_| ExtractError::UnknownLabel(t.top.clone()))?;
        let lower: Option<LowerLabel> = match &t.lower {
            Some(l) => Some(l.parse().map_err(|_| ExtractError::UnknownLabel(l.clone()))?),
            None => None,
        };
        if lower.is_some() && !top.is_event() {
            return Err(ExtractError::LayerRule {
                top,
                text: t.text.clone(),
            });
        }
        let actual = char_slice(&req.text, t.start, t.end);
        if t.start >= t.end || actual != Some(t.text.as_str()) {
            return Err(ExtractError::SpanMismatch {
                start: t.start,
                end: t.end,
                expected: t.text.clone(),
                found: actual.unwrap_or("").to_string(),
            });
        }
        spans.push(Parsed {
            start: t.start,
            end: t.end,
            top,
            lower,
        });
    }
    spans.sort_by_key(|s| (s.start, s.end));
    for w in spans.windows(2) {
        if w[1].start < w[0].end {
            return Err(ExtractError::OverlappingSpans(w[1].start));
        }
    }

    let tokens = tokenize(req);
    let mut top = Vec::with_capacity(tokens.len());
    let mut lower = Vec::with_capacity(tokens.len());
    for tok in &tokens {
        let pieces: Vec<&Parsed> = spans
            .iter()
            .filter(|s| s.start < tok.char_end && s.end > tok.char_start)
            .collect();
        if pieces.is_empty() {
            if is_punctuation(&tok.text) {
                top.push(TopLabel::NotRelevant);
                lower.push(None);
                continue;
            }
            return Err(ExtractError::Uncovered(tok.text.clone()));
        }
        top.push(majority(pieces.iter().map(|p| p.top)));
        lower.push(majority(pieces.iter().map(|p| p.lower)));
    }
    Ok(LabeledSentence::new(req.clone(), tokens, top, lower)?)
}

/// Most frequent value; ties resolved toward the earliest.
fn majority<T: PartialEq + Copy>(votes: impl Iterator<Item = T>) -> T {
    let votes: Vec<T> = votes.collect();
    let mut best = votes[0];
    let mut best_count = 0;
    for v in &votes {
        let count = votes.iter().filter(|w| *w == v).count();
        if count > best_count {
            best = *v;
            best_count = count;
        }
    }
    best
}

/// Export a labeled sentence in the interchange form.
pub fn to_external(ls: &LabeledSentence) -> ExternalTokenLabels {
    ExternalTokenLabels {
        id: ls.id().to_string(),
        tokens: ls
            .tokens()
            .iter()
            .zip(ls.top().iter().zip(ls.lower()))
            .map(|(t, (top, lower))| ExternalToken {
                text: t.text.clone(),
                start: t.char_start,
                end: t.char_end,
                top: top.name().to_string(),
                lower: lower.map(|l| l.name().to_string()),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(text: &str, start: usize, top: &str, lower: Option<&str>) -> ExternalToken {
        ExternalToken {
            text: text.into(),
            start,
            end: start + text.chars().count(),
            top: top.into(),
            lower: lower.map(str::to_string),
        }
    }

    fn req() -> Requirement {
        Requirement::new("R", "If heating fails, then alarm.").unwrap()
    }

    #[test]
    fn subword_pieces_are_merged_by_majority() {
        let x = ExternalTokenLabels {
            id: "R".into(),
            tokens: vec![
                span("If", 0, "NotRelevant", None),
                span("heat", 3, "Cause1", Some("Variable")),
                span("ing", 7, "Cause1", Some("Variable")),
                span("fail", 11, "Cause1", Some("Condition")),
                span("s", 15, "NotRelevant", None),
                span(",", 16, "NotRelevant", None),
                span("then", 18, "NotRelevant", None),
                span("alarm", 23, "Effect1", Some("Condition")),
                span(".", 28, "NotRelevant", None),
            ],
        };
        let ls = ingest_labels(&req(), &x).unwrap();
        let texts: Vec<_> = ls.tokens().iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["If", "heating", "fails", ",", "then", "alarm", "."]);
        assert_eq!(ls.top()[1], TopLabel::Cause1);
        assert_eq!(ls.lower()[1], Some(LowerLabel::Variable));
        // tie between "fail" and "s": the first piece wins
        assert_eq!(ls.top()[2], TopLabel::Cause1);
        assert_eq!(ls.lower()[2], Some(LowerLabel::Condition));
    }

    #[test]
    fn unknown_label_is_rejected() {
        let x = ExternalTokenLabels {
            id: "R".into(),
            tokens: vec![span("If", 0, "Cause4", None)],
        };
        let err = ingest_labels(&req(), &x).unwrap_err();
        assert_eq!(err, ExtractError::UnknownLabel("Cause4".into()));
        assert!(err.to_string().contains("unknown label"));
    }

    #[test]
    fn connective_with_lower_label_breaks_layer_rule() {
        let x = ExternalTokenLabels {
            id: "R".into(),
            tokens: vec![span("If", 0, "And", Some("Variable"))],
        };
        let err = ingest_labels(&req(), &x).unwrap_err();
        assert!(err.to_string().contains("layer rule"));
    }

    #[test]
    fn overlapping_and_mismatched_spans() {
        let x = ExternalTokenLabels {
            id: "R".into(),
            tokens: vec![span("If", 0, "NotRelevant", None), span("f", 1, "NotRelevant", None)],
        };
        assert_eq!(
            ingest_labels(&req(), &x).unwrap_err(),
            ExtractError::OverlappingSpans(1)
        );

        let x = ExternalTokenLabels {
            id: "R".into(),
            tokens: vec![span("Of", 0, "NotRelevant", None)],
        };
        assert!(matches!(
            ingest_labels(&req(), &x).unwrap_err(),
            ExtractError::SpanMismatch { .. }
        ));
    }

    #[test]
    fn uncovered_word_is_an_error() {
        let x = ExternalTokenLabels {
            id: "R".into(),
            tokens: vec![span("If", 0, "NotRelevant", None)],
        };
        assert_eq!(
            ingest_labels(&req(), &x).unwrap_err(),
            ExtractError::Uncovered("heating".into())
        );
    }

    #[test]
    fn stream_parsing() {
        let line = r#"{"id":"R","tokens":[{"text":"If","start":0,"end":2,"top":"NotRelevant","lower":null}]}"#;
        let parsed = parse_label_stream(&format!("{line}\n{line}\n")).unwrap();
        assert_eq!(parsed.len(), 2);
        assert!(parse_label_stream("{\"id\":1}").is_err());
    }
}
