mod common;

use common::fixtures;
use reqtest_core::eval::{parse_brat, token_metrics, Layer};
use reqtest_core::extractor::{assemble, label_heuristic};
use reqtest_core::model::{LowerLabel, TopLabel};

fn load() -> Vec<reqtest_core::model::LabeledSentence> {
    let dir = fixtures().join("brat");
    let txt = std::fs::read_to_string(dir.join("fig2.txt")).unwrap();
    let ann = std::fs::read_to_string(dir.join("fig2.ann")).unwrap();
    parse_brat(&txt, &ann, "fig2").unwrap()
}

#[test]
fn both_layers_reconstructed() {
    let sentences = load();
    assert_eq!(sentences.len(), 2);
    let s = &sentences[0];
    assert_eq!(s.id(), "fig2:1");
    let t: Vec<TopLabel> = s.top().to_vec();
    use TopLabel::*;
    assert_eq!(
        t,
        [
            NotRelevant,
            Cause1,
            Cause1,
            Cause1,
            And,
            Cause2,
            Cause2,
            Cause2,
            NotRelevant,
            NotRelevant,
            Effect1,
            Effect1,
            Effect1,
            NotRelevant
        ]
    );
    assert_eq!(s.lower()[1], Some(LowerLabel::Variable));
    assert_eq!(s.lower()[3], Some(LowerLabel::Condition));
    assert!(sentences[1].top().iter().all(|&l| l == NotRelevant));
}

#[test]
fn gold_assembles_and_matches_heuristic() {
    let gold = load();
    let st = assemble(&gold[0]).unwrap();
    assert_eq!(st.causes.len(), 2);
    assert_eq!(st.causes[1].variable, "B");
    let pred = vec![label_heuristic(gold[0].requirement()).unwrap()];
    for layer in [Layer::Top, Layer::Lower] {
        let m = token_metrics(&pred, &gold[..1], layer).unwrap();
        assert_eq!(m.macro_f1, 1.0, "{layer:?}");
    }
}
