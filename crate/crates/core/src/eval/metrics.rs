use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::detector::{Causality, CausalityVerdict};
use crate::model::{LabeledSentence, TopLabel};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Top,
    Lower,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl LabelScore {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        LabelScore {
            tp,
            fp,
            fn_,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
        }
    }
}

/// Per-label scores with macro (unweighted mean over labels occurring in
/// gold or prediction) and micro (pooled counts) aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub per_label: BTreeMap<String, LabelScore>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
}

impl LabelMetrics {
    /// `pairs` yields (gold, predicted) label per item; `None` means the item
    /// carries no label on that side.
    fn from_pairs<I: IntoIterator<Item = (Option<String>, Option<String>)>>(pairs: I) -> Self {
        let mut counts: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
        for (gold, pred) in pairs {
            match (gold, pred) {
                (Some(g), Some(p)) if g == p => counts.entry(g).or_default().0 += 1,
                (g, p) => {
                    if let Some(p) = p {
                        counts.entry(p).or_default().1 += 1;
                    }
                    if let Some(g) = g {
                        counts.entry(g).or_default().2 += 1;
                    }
                }
            }
        }
        let per_label: BTreeMap<String, LabelScore> = counts
            .iter()
            .map(|(l, &(tp, fp, fn_))| (l.clone(), LabelScore::from_counts(tp, fp, fn_)))
            .collect();
        let n = per_label.len();
        let mean = |f: fn(&LabelScore) -> f64| {
            if n == 0 {
                0.0
            } else {
                per_label.values().map(f).sum::<f64>() / n as f64
            }
        };
        let (tp, fp, fn_) = counts
            .values()
            .fold((0, 0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2));
        let micro = LabelScore::from_counts(tp, fp, fn_);
        LabelMetrics {
            macro_precision: mean(|s| s.precision),
            macro_recall: mean(|s| s.recall),
            macro_f1: mean(|s| s.f1),
            micro_precision: micro.precision,
            micro_recall: micro.recall,
            micro_f1: micro.f1,
            per_label,
        }
    }
}

fn align<'a>(
    pred: &'a [LabeledSentence],
    gold: &'a [LabeledSentence],
) -> Result<Vec<(&'a LabeledSentence, &'a LabeledSentence)>, EvalError> {
    let by_id: BTreeMap<&str, &LabeledSentence> = pred.iter().map(|s| (s.id(), s)).collect();
    let gold_ids: BTreeSet<&str> = gold.iter().map(|s| s.id()).collect();
    if let Some(extra) = by_id.keys().find(|id| !gold_ids.contains(*id)) {
        return Err(EvalError::IdMismatch(extra.to_string()));
    }
    gold.iter()
        .map(|g| {
            let p = by_id
                .get(g.id())
                .ok_or_else(|| EvalError::IdMismatch(g.id().to_string()))?;
            let same = p.len() == g.len()
                && p.tokens()
                    .iter()
                    .zip(g.tokens())
                    .all(|(a, b)| a.char_start == b.char_start && a.char_end == b.char_end);
            if !same {
                return Err(EvalError::TokenizationMismatch(g.id().to_string()));
            }
            Ok((*p, g))
        })
        .collect()
}

/// Token-level scores. On the top layer every token carries exactly one
/// label, so micro precision, recall and F1 all equal accuracy. On the
/// lower layer unlabeled tokens are not a class.
pub fn token_metrics(
    pred: &[LabeledSentence],
    gold: &[LabeledSentence],
    layer: Layer,
) -> Result<LabelMetrics, EvalError> {
    let aligned = align(pred, gold)?;
    let mut pairs = Vec::new();
    for (p, g) in aligned {
        for i in 0..g.len() {
            if matches!(layer, Layer::Top | Layer::Both) {
                pairs.push((Some(g.top()[i].to_string()), Some(p.top()[i].to_string())));
            }
            if matches!(layer, Layer::Lower | Layer::Both) {
                pairs.push((g.lower()[i].map(|l| l.to_string()), p.lower()[i].map(|l| l.to_string())));
            }
        }
    }
    Ok(LabelMetrics::from_pairs(pairs))
}

/// Causal / non-causal classification scores, aligned by requirement id.
pub fn detection_metrics(pred: &[CausalityVerdict], gold: &[CausalityVerdict]) -> Result<LabelMetrics, EvalError> {
    let by_id: BTreeMap<&str, Causality> = pred.iter().map(|v| (v.requirement_id.as_str(), v.label)).collect();
    let gold_ids: BTreeSet<&str> = gold.iter().map(|v| v.requirement_id.as_str()).collect();
    if let Some(extra) = by_id.keys().find(|id| !gold_ids.contains(*id)) {
        return Err(EvalError::IdMismatch(extra.to_string()));
    }
    let pairs = gold
        .iter()
        .map(|g| {
            let p = by_id
                .get(g.requirement_id.as_str())
                .ok_or_else(|| EvalError::IdMismatch(g.requirement_id.clone()))?;
            Ok((Some(g.label.to_string()), Some(p.to_string())))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(LabelMetrics::from_pairs(pairs))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanMatch {
    /// Spans agree only with identical boundaries.
    #[default]
    Exact,
    /// Any token overlap with a same-label span counts.
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseScores {
    pub per_label: BTreeMap<String, f64>,
    /// Sentences annotated by both sides.
    pub sentences: usize,
}

type Span = (usize, usize);

/// Maximal runs of tokens per label, both layers; NotRelevant is not a span.
fn spans(s: &LabeledSentence) -> BTreeMap<String, Vec<Span>> {
    let mut out: BTreeMap<String, Vec<Span>> = BTreeMap::new();
    let mut push = |label: String, i: usize| {
        let runs = out.entry(label).or_default();
        match runs.last_mut() {
            Some(last) if last.1 + 1 == i => last.1 = i,
            _ => runs.push((i, i)),
        }
    };
    for i in 0..s.len() {
        if s.top()[i] != TopLabel::NotRelevant {
            push(s.top()[i].to_string(), i);
        }
        if let Some(l) = s.lower()[i] {
            push(l.to_string(), i);
        }
    }
    out
}

fn matched(from: &[Span], against: &[Span], mode: SpanMatch) -> usize {
    from.iter()
        .filter(|a| {
            against.iter().any(|b| match mode {
                SpanMatch::Exact => *a == b,
                SpanMatch::Overlap => a.0 <= b.1 && b.0 <= a.1,
            })
        })
        .count()
}

/// Span-level agreement of two annotators on their common sentences, with B
/// as the reference for A. Symmetric: swapping A and B exchanges precision
/// and recall, and F1 is computed from them commutatively.
pub fn pairwise_f1(a: &[LabeledSentence], b: &[LabeledSentence], mode: SpanMatch) -> Result<PairwiseScores, EvalError> {
    let b_by_id: BTreeMap<&str, &LabeledSentence> = b.iter().map(|s| (s.id(), s)).collect();
    // counts per label: (A spans, A spans matched, B spans, B spans matched)
    let mut counts: BTreeMap<String, [usize; 4]> = BTreeMap::new();
    let mut common = 0;
    for sa in a {
        let Some(sb) = b_by_id.get(sa.id()) else { continue };
        common += 1;
        let (xa, xb) = (spans(sa), spans(sb));
        let labels: BTreeSet<&String> = xa.keys().chain(xb.keys()).collect();
        for label in labels {
            let empty = Vec::new();
            let ra = xa.get(label).unwrap_or(&empty);
            let rb = xb.get(label).unwrap_or(&empty);
            let c = counts.entry(label.clone()).or_default();
            c[0] += ra.len();
            c[1] += matched(ra, rb, mode);
            c[2] += rb.len();
            c[3] += matched(rb, ra, mode);
        }
    }
    if common == 0 {
        return Err(EvalError::DisjointSentences);
    }
    let per_label = counts
        .into_iter()
        .map(|(label, [na, ma, nb, mb])| {
            let p = if na == 0 { 0.0 } else { ma as f64 / na as f64 };
            let r = if nb == 0 { 0.0 } else { mb as f64 / nb as f64 };
            let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * (p * r) / (p + r) };
            (label, f1)
        })
        .collect();
    Ok(PairwiseScores {
        per_label,
        sentences: common,
    })
}

/// Mean of [`pairwise_f1`] over all annotator pairs, per label. A label's
/// mean runs over the pairs in which it occurs.
pub fn pairwise_f1_multi(annotators: &[Vec<LabeledSentence>], mode: SpanMatch) -> Result<PairwiseScores, EvalError> {
    if annotators.len() < 2 {
        return Err(EvalError::TooFewAnnotators);
    }
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    let mut sentences = 0;
    for i in 0..annotators.len() {
        for j in i + 1..annotators.len() {
            let s = pairwise_f1(&annotators[i], &annotators[j], mode)?;
            sentences = sentences.max(s.sentences);
            for (label, f1) in s.per_label {
                let e = sums.entry(label).or_default();
                e.0 += f1;
                e.1 += 1;
            }
        }
    }
    Ok(PairwiseScores {
        per_label: sums.into_iter().map(|(l, (s, n))| (l, s / n as f64)).collect(),
        sentences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::label_heuristic;
    use crate::model::{LowerLabel, Requirement};

    fn fig2() -> LabeledSentence {
        label_heuristic(&Requirement::new("s", "If A is valid and B is false, then C is true.").unwrap()).unwrap()
    }

    fn relabel(s: &LabeledSentence, top: Vec<TopLabel>, lower: Vec<Option<LowerLabel>>) -> LabeledSentence {
        LabeledSentence::new(s.requirement().clone(), s.tokens().to_vec(), top, lower).unwrap()
    }

    #[test]
    fn identity_scores_one() {
        let s = vec![fig2()];
        for layer in [Layer::Top, Layer::Lower, Layer::Both] {
            let m = token_metrics(&s, &s, layer).unwrap();
            assert_eq!(m.macro_f1, 1.0);
            assert_eq!(m.micro_f1, 1.0);
            assert!(m.per_label.values().all(|v| v.f1 == 1.0));
        }
    }

    #[test]
    fn all_not_relevant_has_zero_cause_recall() {
        let gold = fig2();
        let pred = relabel(&gold, vec![TopLabel::NotRelevant; gold.len()], vec![None; gold.len()]);
        let m = token_metrics(&[pred], &[gold], Layer::Top).unwrap();
        assert_eq!(m.per_label["Cause1"].recall, 0.0);
        assert_eq!(m.per_label["Cause1"].precision, 0.0);
    }

    #[test]
    fn id_and_tokenization_mismatch() {
        let a = fig2();
        let other = label_heuristic(&Requirement::new("t", "If A is valid, then C is true.").unwrap()).unwrap();
        assert!(matches!(
            token_metrics(&[other], std::slice::from_ref(&a), Layer::Top),
            Err(EvalError::IdMismatch(_))
        ));
        let b = label_heuristic(&Requirement::new("s", "If A is valid, then C is true.").unwrap()).unwrap();
        assert!(matches!(
            token_metrics(&[b], &[a], Layer::Top),
            Err(EvalError::TokenizationMismatch(_))
        ));
    }

    #[test]
    fn pairwise_identity_and_swap() {
        let a = fig2();
        let s = pairwise_f1(std::slice::from_ref(&a), std::slice::from_ref(&a), SpanMatch::Exact).unwrap();
        assert!(s.per_label.values().all(|&f| f == 1.0));

        // relabel Cause1 tokens as Cause2 on one side
        let top: Vec<TopLabel> = a
            .top()
            .iter()
            .map(|&t| if t == TopLabel::Cause1 { TopLabel::Cause2 } else { t })
            .collect();
        let b = relabel(&a, top, a.lower().to_vec());
        let ab = pairwise_f1(std::slice::from_ref(&a), std::slice::from_ref(&b), SpanMatch::Exact).unwrap();
        assert!(ab.per_label["Cause1"] < 1.0);
        assert!(ab.per_label["Cause2"] < 1.0);
        assert_eq!(ab, pairwise_f1(&[b], &[a], SpanMatch::Exact).unwrap());
    }

    #[test]
    fn disjoint_sentences() {
        let a = fig2();
        let b = label_heuristic(&Requirement::new("t", "If A is valid, then C is true.").unwrap()).unwrap();
        assert_eq!(
            pairwise_f1(&[a], &[b], SpanMatch::Exact),
            Err(EvalError::DisjointSentences)
        );
    }

    #[test]
    fn overlap_mode_credits_partial_spans() {
        let a = fig2();
        // shrink effect 1 by one token on one side
        let last = (0..a.len()).rev().find(|&i| a.top()[i] == TopLabel::Effect1).unwrap();
        let mut top = a.top().to_vec();
        let mut lower = a.lower().to_vec();
        top[last] = TopLabel::NotRelevant;
        lower[last] = None;
        let b = relabel(&a, top, lower);
        let exact = pairwise_f1(std::slice::from_ref(&a), std::slice::from_ref(&b), SpanMatch::Exact).unwrap();
        let overlap = pairwise_f1(&[a], &[b], SpanMatch::Overlap).unwrap();
        assert_eq!(exact.per_label["Effect1"], 0.0);
        assert_eq!(overlap.per_label["Effect1"], 1.0);
    }

    #[test]
    fn multi_needs_two() {
        assert_eq!(
            pairwise_f1_multi(&[vec![fig2()]], SpanMatch::Exact),
            Err(EvalError::TooFewAnnotators)
        );
        let s = pairwise_f1_multi(&[vec![fig2()], vec![fig2()], vec![fig2()]], SpanMatch::Exact).unwrap();
        assert!(s.per_label.values().all(|&f| f == 1.0));
    }
}
