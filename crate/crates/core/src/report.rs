//! Rendering of acceptance-test specifications and whole-document bundles.
//!
//! Tables have one column per parameter (causes by ordinal, then effects),
//! headed by the parameter's variable, and one row per test case. A cell
//! holds the condition when the parameter is true and `not: <condition>`
//! when it is false.
//!
//! The canonical JSON form of a specification is the serde serialization of
//! [`AcceptanceTestSpec`]:
//!
//! ```json
//! {
//!   "requirement_id": "REQ B",
//!   "mode": "equivalence",
//!   "parameters": [{"id": "c1", "variable": "...", "condition": "...", "role": "cause"}],
//!   "test_cases": [{"inputs": {"c1": true}, "expected": {"e1": true}, "polarity": "positive"}]
//! }
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::ceg::to_dot;
use crate::detector::{Causality, VerdictMethod};
use crate::model::{AcceptanceTestSpec, InterpretationMode, SuiteError};
use crate::pipeline::{Outcome, PipelineRun, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecFormat {
    Markdown,
    Csv,
    Json,
}

/// Per-requirement file format of a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleFormat {
    Spec(SpecFormat),
    Dot,
}

impl BundleFormat {
    pub fn extension(self) -> &'static str {
        match self {
            BundleFormat::Spec(SpecFormat::Markdown) => "md",
            BundleFormat::Spec(SpecFormat::Csv) => "csv",
            BundleFormat::Spec(SpecFormat::Json) => "json",
            BundleFormat::Dot => "dot",
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown format {0:?}")]
    UnknownFormat(String),
    #[error("id collision: {0:?}")]
    IdCollision(String),
    #[error("invalid specification JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid specification: {0}")]
    Suite(#[from] SuiteError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl FromStr for SpecFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(SpecFormat::Markdown),
            "csv" => Ok(SpecFormat::Csv),
            "json" => Ok(SpecFormat::Json),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

impl FromStr for BundleFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("dot") {
            return Ok(BundleFormat::Dot);
        }
        s.parse().map(BundleFormat::Spec)
    }
}

fn cell(condition: &str, value: bool) -> String {
    if value {
        condition.to_string()
    } else {
        format!("not: {condition}")
    }
}

fn header(spec: &AcceptanceTestSpec) -> Vec<String> {
    spec.parameters
        .iter()
        .map(|p| {
            if p.variable.is_empty() {
                p.id.clone()
            } else {
                p.variable.clone()
            }
        })
        .collect()
}

fn rows(spec: &AcceptanceTestSpec) -> Vec<Vec<String>> {
    spec.test_cases
        .iter()
        .map(|case| {
            spec.parameters
                .iter()
                .map(|p| {
                    let v = case
                        .inputs
                        .get(&p.id)
                        .or_else(|| case.expected.get(&p.id))
                        .copied()
                        .unwrap_or(false);
                    cell(&p.condition, v)
                })
                .collect()
        })
        .collect()
}

pub fn render(spec: &AcceptanceTestSpec, format: SpecFormat) -> Result<String, ReportError> {
    match format {
        SpecFormat::Json => Ok(to_canonical_json(spec)),
        SpecFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header(spec))?;
            for row in rows(spec) {
                w.write_record(row)?;
            }
            let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv of utf-8 strings"))
        }
        SpecFormat::Markdown => {
            let esc = |s: &str| s.replace('|', "\\|");
            let mut out = String::new();
            let _ = writeln!(out, "## {} ({})\n", spec.requirement_id, spec.mode);
            let head: Vec<String> = header(spec).iter().map(|h| esc(h)).collect();
            let _ = writeln!(out, "| {} |", head.join(" | "));
            let _ = writeln!(out, "|{}", " --- |".repeat(head.len()));
            for row in rows(spec) {
                let row: Vec<String> = row.iter().map(|c| esc(c)).collect();
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
            Ok(out)
        }
    }
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("core types serialize");
    s.push('\n');
    s
}

/// Parse the canonical JSON form and check the suite invariants.
pub fn parse_spec_json(text: &str) -> Result<AcceptanceTestSpec, ReportError> {
    let spec: AcceptanceTestSpec = serde_json::from_str(text)?;
    spec.check()?;
    Ok(spec)
}

#[derive(Debug, Serialize)]
struct Index<'a> {
    mode: InterpretationMode,
    format: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<&'a str>,
    requirements: Vec<IndexEntry<'a>>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    unknown_verdicts: &'a [String],
}

#[derive(Debug, Serialize)]
struct IndexVerdict {
    label: Causality,
    confidence: f64,
    method: VerdictMethod,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Generated,
    NonCausal,
    Failed,
}

#[derive(Debug, Serialize)]
struct IndexEntry<'a> {
    id: &'a str,
    verdict: Option<IndexVerdict>,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_cases: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parameters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<Stage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'a str>,
}

/// File name for a requirement id: anything outside `[A-Za-z0-9._-]`
/// becomes `_`.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Write one file per generated specification plus `index.json`.
///
/// Returns the paths written, index last. Output is byte-identical for
/// identical runs unless `stamp` is given.
pub fn render_bundle(
    run: &PipelineRun,
    out_dir: &Path,
    format: BundleFormat,
    stamp: Option<&str>,
) -> Result<Vec<PathBuf>, ReportError> {
    let mut ids = BTreeSet::new();
    let mut stems = BTreeSet::new();
    for r in &run.results {
        let id = &r.requirement.id;
        if !ids.insert(id.as_str()) || !stems.insert(file_stem(id).to_ascii_lowercase()) {
            return Err(ReportError::IdCollision(id.clone()));
        }
    }
    if stems.contains("index") && format == BundleFormat::Spec(SpecFormat::Json) {
        return Err(ReportError::IdCollision("index".into()));
    }

    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReportError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let mut written = Vec::new();
    let mut entries = Vec::new();
    for r in &run.results {
        let verdict = r.verdict.as_ref().map(|v| IndexVerdict {
            label: v.label,
            confidence: v.confidence,
            method: v.method,
        });
        let mut entry = IndexEntry {
            id: &r.requirement.id,
            verdict,
            status: Status::Failed,
            file: None,
            test_cases: None,
            parameters: None,
            stage: None,
            reason: None,
        };
        match &r.outcome {
            Outcome::NonCausal => {
                entry.status = Status::NonCausal;
                entry.reason = Some("classified non-causal");
            }
            Outcome::Failed { stage, reason } => {
                entry.stage = Some(*stage);
                entry.reason = Some(reason);
            }
            Outcome::Generated(g) => {
                let name = format!("{}.{}", file_stem(&r.requirement.id), format.extension());
                let body = match format {
                    BundleFormat::Spec(f) => render(&g.spec, f)?,
                    BundleFormat::Dot => to_dot(&g.graph),
                };
                let path = out_dir.join(&name);
                std::fs::write(&path, body).map_err(io_err(&path))?;
                written.push(path);
                entry.status = Status::Generated;
                entry.file = Some(name);
                entry.test_cases = Some(g.spec.test_cases.len());
                entry.parameters = Some(g.spec.parameters.len());
            }
        }
        entries.push(entry);
    }

    let index = Index {
        mode: run.mode,
        format: format.extension(),
        generated_at: stamp,
        requirements: entries,
        unknown_verdicts: &run.unknown_verdicts,
    };
    let path = out_dir.join("index.json");
    std::fs::write(&path, to_canonical_json(&index)).map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}
