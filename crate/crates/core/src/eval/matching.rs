use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{AcceptanceTestSpec, EventRole, Parameter, TestCase};

/// Text normalization standing in for "semantically identical": lowercase,
/// collapsed whitespace, and a synonym map applied to whole strings and
/// whole words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Normalizer {
    /// alias words -> canonical words, longest alias first
    aliases: Vec<(Vec<String>, Vec<String>)>,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

impl Normalizer {
    /// From a synonym map `{"term": ["alias", ...]}`.
    pub fn new(synonyms: &BTreeMap<String, Vec<String>>) -> Self {
        let mut aliases: Vec<(Vec<String>, Vec<String>)> = synonyms
            .iter()
            .flat_map(|(term, list)| list.iter().map(move |a| (words(a), words(term))))
            .filter(|(a, _)| !a.is_empty())
            .collect();
        aliases.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Normalizer { aliases }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        Ok(Normalizer::new(&serde_json::from_str(text)?))
    }

    pub fn normalize(&self, s: &str) -> String {
        let ws = words(s);
        if let Some((_, term)) = self.aliases.iter().find(|(a, _)| *a == ws) {
            return term.join(" ");
        }
        let mut out: Vec<String> = Vec::with_capacity(ws.len());
        let mut i = 0;
        while i < ws.len() {
            match self.aliases.iter().find(|(a, _)| ws[i..].starts_with(a)) {
                Some((a, term)) => {
                    out.extend(term.iter().cloned());
                    i += a.len();
                }
                None => {
                    out.push(ws[i].clone());
                    i += 1;
                }
            }
        }
        out.join(" ")
    }
}

/// Parse a hand-written suite in the canonical JSON form. The generated-suite
/// invariants are not enforced.
pub fn parse_manual_spec(text: &str) -> Result<AcceptanceTestSpec, serde_json::Error> {
    serde_json::from_str(text)
}

/// Concatenate several suites into one, for comparison with a hand-written
/// suite whose cases span requirements. Parameter ids are prefixed with
/// their requirement id.
pub fn combine_suites(requirement_id: &str, specs: &[AcceptanceTestSpec]) -> AcceptanceTestSpec {
    let key = |spec: &AcceptanceTestSpec, id: &str| format!("{}/{id}", spec.requirement_id);
    let mut out = AcceptanceTestSpec {
        requirement_id: requirement_id.to_string(),
        mode: specs.first().map(|s| s.mode).unwrap_or_default(),
        parameters: Vec::new(),
        test_cases: Vec::new(),
    };
    for spec in specs {
        out.parameters.extend(spec.parameters.iter().map(|p| Parameter {
            id: key(spec, &p.id),
            ..p.clone()
        }));
        out.test_cases.extend(spec.test_cases.iter().map(|c| TestCase {
            inputs: c.inputs.iter().map(|(k, v)| (key(spec, k), *v)).collect(),
            expected: c.expected.iter().map(|(k, v)| (key(spec, k), *v)).collect(),
            polarity: c.polarity,
        }));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneToMany {
    pub manual: usize,
    pub auto: Vec<usize>,
}

/// Partition of the test cases of two suites; indices refer to
/// `test_cases` of the respective suite.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteMatchReport {
    pub requirement_id: String,
    /// (auto, manual) pairs
    pub identical: Vec<(usize, usize)>,
    pub one_to_many: Vec<OneToMany>,
    pub auto_only: Vec<usize>,
    pub manual_only: Vec<usize>,
}

impl SuiteMatchReport {
    /// Share of automatic cases that have a manual counterpart.
    pub fn auto_matched_ratio(&self, auto_cases: usize) -> f64 {
        if auto_cases == 0 {
            return 0.0;
        }
        let matched = self.identical.len() + self.one_to_many.iter().map(|g| g.auto.len()).sum::<usize>();
        matched as f64 / auto_cases as f64
    }

    pub fn to_markdown(&self) -> String {
        let list = |v: &[usize]| {
            if v.is_empty() {
                "none".to_string()
            } else {
                v.iter().map(|i| format!("TC {}", i + 1)).collect::<Vec<_>>().join(", ")
            }
        };
        let mut out = String::new();
        let _ = writeln!(out, "## Suite comparison for {}\n", self.requirement_id);
        let _ = writeln!(out, "| category | automatic | manual |");
        let _ = writeln!(out, "| --- | --- | --- |");
        for (a, m) in &self.identical {
            let _ = writeln!(out, "| identical | TC {} | TC {} |", a + 1, m + 1);
        }
        for g in &self.one_to_many {
            let _ = writeln!(out, "| one-to-many | {} | TC {} |", list(&g.auto), g.manual + 1);
        }
        if !self.auto_only.is_empty() {
            let _ = writeln!(out, "| automatic only | {} | |", list(&self.auto_only));
        }
        if !self.manual_only.is_empty() {
            let _ = writeln!(out, "| manual only | | {} |", list(&self.manual_only));
        }
        out
    }
}

type Key = (EventRole, String, String);

fn case_map(spec: &AcceptanceTestSpec, case: &TestCase, n: &Normalizer) -> BTreeMap<Key, bool> {
    spec.parameters
        .iter()
        .filter_map(|p| {
            let v = case.inputs.get(&p.id).or_else(|| case.expected.get(&p.id))?;
            Some(((p.role, n.normalize(&p.variable), n.normalize(&p.condition)), *v))
        })
        .collect()
}

/// Bucket every test case of both suites.
///
/// Cases are identical when their normalized parameters and values agree.
/// A remaining manual case forms a one-to-many group with two or more
/// remaining automatic cases whose parameters it contains with the same
/// values, provided their parameters together cover it exactly.
pub fn match_suites(auto: &AcceptanceTestSpec, manual: &AcceptanceTestSpec, n: &Normalizer) -> SuiteMatchReport {
    let am: Vec<_> = auto.test_cases.iter().map(|c| case_map(auto, c, n)).collect();
    let mm: Vec<_> = manual.test_cases.iter().map(|c| case_map(manual, c, n)).collect();
    let mut auto_used = vec![false; am.len()];
    let mut manual_used = vec![false; mm.len()];
    let mut report = SuiteMatchReport {
        requirement_id: auto.requirement_id.clone(),
        ..Default::default()
    };

    for (mi, m) in mm.iter().enumerate() {
        if let Some(ai) = (0..am.len()).find(|&ai| !auto_used[ai] && am[ai] == *m) {
            auto_used[ai] = true;
            manual_used[mi] = true;
            report.identical.push((ai, mi));
        }
    }

    for (mi, m) in mm.iter().enumerate() {
        if manual_used[mi] {
            continue;
        }
        let parts: Vec<usize> = (0..am.len())
            .filter(|&ai| !auto_used[ai] && am[ai].len() < m.len() && am[ai].iter().all(|(k, v)| m.get(k) == Some(v)))
            .collect();
        let covered: BTreeSet<&Key> = parts.iter().flat_map(|&ai| am[ai].keys()).collect();
        if parts.len() >= 2 && covered.len() == m.len() {
            for &ai in &parts {
                auto_used[ai] = true;
            }
            manual_used[mi] = true;
            report.one_to_many.push(OneToMany {
                manual: mi,
                auto: parts,
            });
        }
    }

    report.auto_only = (0..am.len()).filter(|&i| !auto_used[i]).collect();
    report.manual_only = (0..mm.len()).filter(|&i| !manual_used[i]).collect();
    report
}
