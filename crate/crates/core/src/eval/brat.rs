use crate::extractor::tokenize_text;
use crate::model::{char_slice, LabeledSentence, LowerLabel, Requirement, TopLabel};

use super::EvalError;

enum Label {
    Top(TopLabel),
    Lower(LowerLabel),
}

/// Parse a brat standoff pair. The text holds one sentence per line; each
/// non-empty line becomes a sentence with id `<doc_id>:<line number>`.
///
/// Only entity (`T`) lines are read. Offsets are characters into the whole
/// text; discontinuous fragments (`0 3;9 14`) are joined with a space in the
/// annotation text, as brat writes them. Unannotated tokens are NotRelevant.
pub fn parse_brat(txt: &str, ann: &str, doc_id: &str) -> Result<Vec<LabeledSentence>, EvalError> {
    struct Line {
        start: usize,
        text: String,
        top: Vec<Option<TopLabel>>,
        lower: Vec<Option<LowerLabel>>,
    }
    let mut lines = Vec::new();
    let mut offset = 0;
    for raw in txt.split('\n') {
        let text = raw.strip_suffix('\r').unwrap_or(raw).to_string();
        let n = tokenize_text(&text).len();
        lines.push(Line {
            start: offset,
            text,
            top: vec![None; n],
            lower: vec![None; n],
        });
        offset += raw.chars().count() + 1;
    }
    let tokens: Vec<_> = lines.iter().map(|l| tokenize_text(&l.text)).collect();

    for (no, entry) in ann.lines().enumerate() {
        let no = no + 1;
        if !entry.starts_with('T') {
            continue;
        }
        let malformed = |m: &str| EvalError::Malformed {
            line: no,
            message: m.to_string(),
        };
        let mut cols = entry.splitn(3, '\t');
        let _id = cols.next();
        let spec = cols.next().ok_or_else(|| malformed("missing label and offsets"))?;
        let text = cols.next().ok_or_else(|| malformed("missing entity text"))?;
        let (name, ranges) = spec.split_once(' ').ok_or_else(|| malformed("missing offsets"))?;
        let label = if let Ok(t) = name.parse::<TopLabel>() {
            Label::Top(t)
        } else if let Ok(l) = name.parse::<LowerLabel>() {
            Label::Lower(l)
        } else {
            return Err(EvalError::UnknownLabel {
                line: no,
                label: name.to_string(),
            });
        };

        let mut frags = Vec::new();
        for r in ranges.split(';') {
            let mut it = r.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(s)), Some(Ok(e)), None) if s <= e => frags.push((s, e)),
                _ => return Err(malformed("bad offsets")),
            }
        }
        let pieces: Option<Vec<&str>> = frags.iter().map(|&(s, e)| char_slice(txt, s, e)).collect();
        let expected = pieces.map(|p| p.join(" ")).unwrap_or_default();
        if expected != text {
            return Err(EvalError::SpanMismatch {
                line: no,
                expected,
                found: text.to_string(),
            });
        }

        let line_of = |pos: usize| lines.iter().rposition(|l| l.start <= pos).unwrap_or(0);
        let li = line_of(frags[0].0);
        for &(s, e) in &frags {
            let len = lines[li].text.chars().count();
            if line_of(s) != li || e > lines[li].start + len {
                return Err(EvalError::CrossSentence { line: no });
            }
        }
        let base = lines[li].start;
        for (ti, tok) in tokens[li].iter().enumerate() {
            let covered = frags
                .iter()
                .any(|&(s, e)| tok.char_start < e - base && s - base < tok.char_end);
            if !covered {
                continue;
            }
            let line = &mut lines[li];
            let conflict = |layer| EvalError::Conflict {
                line: no,
                layer,
                token: tok.text.clone(),
            };
            match label {
                Label::Top(t) => match line.top[ti] {
                    Some(prev) if prev != t => return Err(conflict("top")),
                    _ => line.top[ti] = Some(t),
                },
                Label::Lower(l) => match line.lower[ti] {
                    Some(prev) if prev != l => return Err(conflict("lower")),
                    _ => line.lower[ti] = Some(l),
                },
            }
        }
    }

    let mut out = Vec::new();
    for (i, (line, toks)) in lines.into_iter().zip(tokens).enumerate() {
        if line.text.trim().is_empty() {
            continue;
        }
        let id = format!("{doc_id}:{}", i + 1);
        let req = Requirement::new(id.clone(), line.text).map_err(|e| EvalError::Sentence(id.clone(), e))?;
        let top = line
            .top
            .into_iter()
            .map(|t| t.unwrap_or(TopLabel::NotRelevant))
            .collect();
        let ls = LabeledSentence::new(req, toks, top, line.lower).map_err(|e| EvalError::Layer(id, e))?;
        out.push(ls);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = "If A is valid and B is false, then C is true.";

    #[test]
    fn entity_covers_tokens() {
        let out = parse_brat(FIG2, "T1\tCause1 3 13\tA is valid\n", "d").unwrap();
        assert_eq!(out.len(), 1);
        let ls = &out[0];
        assert_eq!(ls.id(), "d:1");
        let labeled: Vec<usize> = (0..ls.len()).filter(|&i| ls.top()[i] == TopLabel::Cause1).collect();
        assert_eq!(labeled, [1, 2, 3]);
        assert_eq!(ls.top()[0], TopLabel::NotRelevant);
    }

    #[test]
    fn both_layers_from_overlapping_entities() {
        let ann = "T1\tCause1 3 13\tA is valid\nT2\tVariable 3 4\tA\nT3\tCondition 5 13\tis valid\n";
        let ls = &parse_brat(FIG2, ann, "d").unwrap()[0];
        assert_eq!(ls.lower()[1], Some(LowerLabel::Variable));
        assert_eq!(ls.lower()[2], Some(LowerLabel::Condition));
        assert_eq!(ls.lower()[0], None);
    }

    #[test]
    fn span_mismatch() {
        let err = parse_brat(FIG2, "T1\tCause1 3 13\tA is vali\n", "d").unwrap_err();
        assert!(err.to_string().contains("span mismatch"), "{err}");
    }

    #[test]
    fn unknown_label() {
        let err = parse_brat(FIG2, "T1\tCause9 3 13\tA is valid\n", "d").unwrap_err();
        assert!(matches!(err, EvalError::UnknownLabel { .. }));
    }

    #[test]
    fn cross_sentence_span() {
        let txt = "If A is on, B is off.\nIf C is on, D is off.";
        let err = parse_brat(txt, "T1\tEffect1 12 20;25 26\tB is off C\n", "d").unwrap_err();
        assert_eq!(err, EvalError::CrossSentence { line: 1 });
    }

    #[test]
    fn discontinuous_fragments_and_second_line() {
        let txt = "The unit shall stop.\nIf A is valid and B is false, then C is true.";
        // "A ... valid" with a gap at "is"; line 2 starts at char 21
        let ann = "T1\tCause1 24 25;29 34\tA valid\n#1\tAnnotatorNotes T1\tnote\n";
        let out = parse_brat(txt, ann, "doc").unwrap();
        assert_eq!(out.len(), 2);
        let ls = &out[1];
        assert_eq!(ls.id(), "doc:2");
        assert_eq!(ls.top()[1], TopLabel::Cause1);
        assert_eq!(ls.top()[2], TopLabel::NotRelevant);
        assert_eq!(ls.top()[3], TopLabel::Cause1);
    }

    #[test]
    fn layer_rule_violation() {
        let err = parse_brat(FIG2, "T1\tVariable 0 2\tIf\n", "d").unwrap_err();
        assert!(matches!(err, EvalError::Layer(..)));
    }

    #[test]
    fn conflicting_top_labels() {
        let ann = "T1\tCause1 3 4\tA\nT2\tCause2 3 4\tA\n";
        assert!(matches!(parse_brat(FIG2, ann, "d"), Err(EvalError::Conflict { .. })));
    }
}
