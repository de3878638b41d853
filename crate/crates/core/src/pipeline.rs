//! End-to-end processing of a requirements document.
//!
//! Each requirement is detected, labeled, assembled, completed, compiled and
//! derived independently. Failures are recorded per requirement; only
//! unreadable input and failing adapters abort the run.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::ceg::{build, complete_nodes};
use crate::derive::derive;
use crate::detector::{ingest_verdicts, json_values, CausalityVerdict, CueDetector, DEFAULT_CUES};
use crate::extractor::{
    assemble, ingest_labels, parse_label_stream, ExternalTokenLabels, HeuristicLabeler, DEFAULT_NEGATIONS,
};
use crate::lexicon::PhraseLexicon;
use crate::model::{
    AcceptanceTestSpec, CauseEffectGraph, ConditionalStructure, InterpretationMode, LabeledSentence, Requirement,
};

/// Where a stage gets its predictions from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Source {
    #[default]
    Heuristic,
    /// Interchange JSON already on disk.
    File(PathBuf),
    /// Shell command run with the requirements file as its last argument;
    /// prints interchange JSON on stdout.
    Command(String),
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "heuristic" {
            Ok(Source::Heuristic)
        } else if let Some(p) = s.strip_prefix("file:") {
            Ok(Source::File(PathBuf::from(p)))
        } else if let Some(c) = s.strip_prefix("cmd:") {
            if c.trim().is_empty() {
                return Err("empty adapter command".into());
            }
            Ok(Source::Command(c.to_string()))
        } else {
            Err(format!(
                "unknown source {s:?} (expected heuristic, file:PATH or cmd:COMMAND)"
            ))
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub mode: InterpretationMode,
    pub detector: Source,
    pub extractor: Source,
    pub cues: Option<PathBuf>,
    pub negations: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("adapter {command:?} failed: {message}")]
    Adapter { command: String, message: String },
}

impl PipelineError {
    fn input(path: &Path, message: impl fmt::Display) -> Self {
        PipelineError::Input {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Detection,
    Extraction,
    Assembly,
    Completion,
    Graph,
    Derivation,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Detection => "detection",
            Stage::Extraction => "extraction",
            Stage::Assembly => "assembly",
            Stage::Completion => "completion",
            Stage::Graph => "graph",
            Stage::Derivation => "derivation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub labels: LabeledSentence,
    pub structure: ConditionalStructure,
    pub graph: CauseEffectGraph,
    pub spec: AcceptanceTestSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Generated(Box<Generated>),
    NonCausal,
    Failed { stage: Stage, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequirementResult {
    pub requirement: Requirement,
    pub verdict: Option<CausalityVerdict>,
    pub outcome: Outcome,
}

impl RequirementResult {
    pub fn spec(&self) -> Option<&AcceptanceTestSpec> {
        match &self.outcome {
            Outcome::Generated(g) => Some(&g.spec),
            _ => None,
        }
    }

    pub fn graph(&self) -> Option<&CauseEffectGraph> {
        match &self.outcome {
            Outcome::Generated(g) => Some(&g.graph),
            _ => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self.outcome, Outcome::Failed { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub mode: InterpretationMode,
    pub results: Vec<RequirementResult>,
    /// Verdict ids from an external detector that match no requirement.
    pub unknown_verdicts: Vec<String>,
}

impl PipelineRun {
    pub fn result(&self, id: &str) -> Option<&RequirementResult> {
        self.results.iter().find(|r| r.requirement.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RequirementResult> {
        self.results.iter().filter(|r| r.is_failure())
    }
}

/// Read JSON-lines requirement records, or plain text with one sentence per
/// line (ids `R1`, `R2`, ... over non-empty lines).
pub fn read_requirements(path: &Path) -> Result<Vec<Requirement>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::input(path, e))?;
    parse_requirements(&text).map_err(|m| PipelineError::input(path, m))
}

pub fn parse_requirements(text: &str) -> Result<Vec<Requirement>, String> {
    let first = text.trim_start().chars().next();
    if matches!(first, Some('{') | Some('[')) {
        let values = json_values(text).map_err(|(i, m)| format!("record {i}: {m}"))?;
        return values
            .into_iter()
            .enumerate()
            .map(|(i, v)| serde_json::from_value(v).map_err(|e| format!("record {i}: {e}")))
            .collect();
    }
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, line)| Requirement::new(format!("R{}", i + 1), line).map_err(|e| e.to_string()))
        .collect()
}

fn load_lexicon(path: &Option<PathBuf>, default: &str) -> Result<PhraseLexicon, PipelineError> {
    match path {
        Some(p) => PhraseLexicon::load(p).map_err(|e| PipelineError::input(p, e)),
        None => Ok(PhraseLexicon::parse(default)),
    }
}

fn run_adapter(command: &str, input: &Path) -> Result<String, PipelineError> {
    let fail = |message: String| PipelineError::Adapter {
        command: command.to_string(),
        message,
    };
    let out = Command::new("sh")
        .arg("-c")
        .arg(format!("{command} \"$1\""))
        .arg("sh")
        .arg(input)
        .output()
        .map_err(|e| fail(e.to_string()))?;
    if !out.status.success() {
        let stderr = String::from_utf8_lossy(&out.stderr);
        return Err(fail(format!("{}: {}", out.status, stderr.trim())));
    }
    String::from_utf8(out.stdout).map_err(|e| fail(e.to_string()))
}

/// The requirements as a JSON-lines file an adapter can read.
struct AdapterInput {
    _tmp: Option<tempfile::NamedTempFile>,
    path: PathBuf,
}

fn adapter_input(reqs: &[Requirement], original: Option<&Path>) -> Result<AdapterInput, PipelineError> {
    if let Some(p) = original {
        let is_json = std::fs::read_to_string(p)
            .map(|t| matches!(t.trim_start().chars().next(), Some('{') | Some('[')))
            .unwrap_or(false);
        if is_json {
            return Ok(AdapterInput {
                _tmp: None,
                path: p.to_path_buf(),
            });
        }
    }
    let tmp_err = |e: std::io::Error| PipelineError::Input {
        path: std::env::temp_dir(),
        message: e.to_string(),
    };
    let mut tmp = tempfile::Builder::new().suffix(".jsonl").tempfile().map_err(tmp_err)?;
    for r in reqs {
        let line = serde_json::to_string(r).expect("requirement serializes");
        writeln!(tmp, "{line}").map_err(tmp_err)?;
    }
    tmp.flush().map_err(tmp_err)?;
    let path = tmp.path().to_path_buf();
    Ok(AdapterInput { _tmp: Some(tmp), path })
}

fn external_text(
    source: &Source,
    input: &dyn Fn() -> Result<PathBuf, PipelineError>,
) -> Result<Option<String>, PipelineError> {
    match source {
        Source::Heuristic => Ok(None),
        Source::File(p) => std::fs::read_to_string(p)
            .map(Some)
            .map_err(|e| PipelineError::input(p, e)),
        Source::Command(c) => run_adapter(c, &input()?).map(Some),
    }
}

/// Unparseable predictions: an adapter failure when produced by a command,
/// unreadable input when read from a file.
fn bad_output(source: &Source, e: impl fmt::Display) -> PipelineError {
    match source {
        Source::Command(c) => PipelineError::Adapter {
            command: c.clone(),
            message: e.to_string(),
        },
        Source::File(p) => PipelineError::input(p, e),
        Source::Heuristic => unreachable!("heuristic sources produce no text"),
    }
}

/// Run the pipeline over a requirements file.
pub fn run_file(config: &PipelineConfig, path: &Path) -> Result<PipelineRun, PipelineError> {
    let reqs = read_requirements(path)?;
    run_with_input(config, reqs, Some(path))
}

/// Run the pipeline over in-memory requirements.
pub fn run(config: &PipelineConfig, reqs: Vec<Requirement>) -> Result<PipelineRun, PipelineError> {
    run_with_input(config, reqs, None)
}

fn run_with_input(
    config: &PipelineConfig,
    reqs: Vec<Requirement>,
    original: Option<&Path>,
) -> Result<PipelineRun, PipelineError> {
    let adapter_file = std::cell::OnceCell::new();
    let input = || -> Result<PathBuf, PipelineError> {
        if let Some(a) = adapter_file.get() {
            let a: &AdapterInput = a;
            return Ok(a.path.clone());
        }
        let a = adapter_input(&reqs, original)?;
        let p = a.path.clone();
        let _ = adapter_file.set(a);
        Ok(p)
    };

    let mut unknown_verdicts = Vec::new();
    let verdicts: BTreeMap<String, CausalityVerdict> = match external_text(&config.detector, &input)? {
        None => {
            let detector = CueDetector::new(load_lexicon(&config.cues, DEFAULT_CUES)?);
            reqs.iter()
                .filter_map(|r| detector.classify(r).ok().map(|v| (r.id.clone(), v)))
                .collect()
        }
        Some(text) => {
            let list = ingest_verdicts(&text).map_err(|e| bad_output(&config.detector, e))?;
            for v in &list {
                if !reqs.iter().any(|r| r.id == v.requirement_id) {
                    unknown_verdicts.push(v.requirement_id.clone());
                }
            }
            list.into_iter().map(|v| (v.requirement_id.clone(), v)).collect()
        }
    };

    let heuristic = HeuristicLabeler::new(
        load_lexicon(&config.cues, DEFAULT_CUES)?.without(&["then"]),
        load_lexicon(&config.negations, DEFAULT_NEGATIONS)?,
    );
    let needs_labels = reqs
        .iter()
        .any(|r| verdicts.get(&r.id).is_some_and(CausalityVerdict::is_causal));
    let external: Option<BTreeMap<String, ExternalTokenLabels>> = if needs_labels {
        match external_text(&config.extractor, &input)? {
            None => None,
            Some(text) => {
                let records = parse_label_stream(&text).map_err(|e| bad_output(&config.extractor, e))?;
                Some(records.into_iter().map(|x| (x.id.clone(), x)).collect())
            }
        }
    } else {
        None
    };

    let results = reqs
        .into_iter()
        .map(|r| {
            let verdict = verdicts.get(&r.id).cloned();
            let outcome = match &verdict {
                None => Outcome::Failed {
                    stage: Stage::Detection,
                    reason: if r.text.trim().is_empty() {
                        "empty text".to_string()
                    } else {
                        "no verdict for this requirement".to_string()
                    },
                },
                Some(v) if !v.is_causal() => Outcome::NonCausal,
                Some(_) => process(&r, config.mode, &heuristic, external.as_ref()),
            };
            RequirementResult {
                requirement: r,
                verdict,
                outcome,
            }
        })
        .collect();

    Ok(PipelineRun {
        mode: config.mode,
        results,
        unknown_verdicts,
    })
}

fn process(
    r: &Requirement,
    mode: InterpretationMode,
    heuristic: &HeuristicLabeler,
    external: Option<&BTreeMap<String, ExternalTokenLabels>>,
) -> Outcome {
    let fail = |stage: Stage, reason: String| Outcome::Failed { stage, reason };
    let labels = match external {
        None => heuristic.label(r),
        Some(map) => match map.get(&r.id) {
            Some(x) => ingest_labels(r, x),
            None => return fail(Stage::Extraction, "no label record for this requirement".into()),
        },
    };
    let labels = match labels {
        Ok(l) => l,
        Err(e) => return fail(Stage::Extraction, e.to_string()),
    };
    let structure = match assemble(&labels) {
        Ok(s) => s,
        Err(e) => return fail(Stage::Assembly, e.to_string()),
    };
    let structure = match complete_nodes(&structure) {
        Ok(s) => s,
        Err(e) => return fail(Stage::Completion, e.to_string()),
    };
    let graph = match build(&structure) {
        Ok(g) => g,
        Err(e) => return fail(Stage::Graph, e.to_string()),
    };
    match derive(&r.id, &graph, mode) {
        Ok(spec) => Outcome::Generated(Box::new(Generated {
            labels,
            structure,
            graph,
            spec,
        })),
        Err(e) => fail(Stage::Derivation, e.to_string()),
    }
}
