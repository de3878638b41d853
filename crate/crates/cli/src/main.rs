//! `reqtest`: derive acceptance tests from conditional requirements.
//!
//! Exit codes: 0 success, 1 per-requirement failures under `--strict`,
//! 2 unreadable input or bad usage, 3 adapter failure.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};

use reqtest_core::ceg::to_dot;
use reqtest_core::derive::derive;
use reqtest_core::detector::{ingest_verdicts, VerdictRecord};
use reqtest_core::eval::{
    detection_metrics, match_suites, pairwise_f1, pairwise_f1_multi, parse_brat, parse_manual_spec, token_metrics,
    Layer, Normalizer, SpanMatch,
};
use reqtest_core::extractor::{ingest_labels, parse_label_stream, to_external};
use reqtest_core::model::{CauseEffectGraph, InterpretationMode, LabeledSentence, Requirement};
use reqtest_core::pipeline::{read_requirements, run_file, PipelineConfig, PipelineError, PipelineRun, Source};
use reqtest_core::report::{render, render_bundle, to_canonical_json, BundleFormat, SpecFormat};

const ADAPTER_ENV: &str = "CIRA_ADAPTER_CMD";

#[derive(Parser)]
#[command(
    name = "reqtest",
    version,
    about = "Derive acceptance tests from conditional requirements"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run detection, extraction, graph construction and derivation.
    Pipeline(PipelineArgs),
    /// Classify requirements as causal or not; prints verdict records.
    Detect(StageArgs),
    /// Label causal requirements; prints token-label records.
    Extract(StageArgs),
    /// Build cause-effect graphs; prints DOT (or JSON records).
    Ceg(CegArgs),
    /// Derive test specifications from graph records written by `ceg --json`.
    Testgen(TestgenArgs),
    /// Score predictions against gold annotations.
    Eval(EvalArgs),
    /// Compare a generated suite with a hand-written one.
    Compare(CompareArgs),
}

#[derive(Args, Clone)]
struct StageArgs {
    /// Requirements as JSON lines, or plain text with one sentence per line.
    input: PathBuf,
    /// heuristic, file:PATH or cmd:COMMAND
    #[arg(long)]
    detector: Option<String>,
    /// heuristic, file:PATH or cmd:COMMAND
    #[arg(long)]
    extractor: Option<String>,
    #[arg(long, value_enum, default_value_t = Mode::Equivalence)]
    mode: Mode,
    /// Cue-phrase lexicon, one phrase per line.
    #[arg(long)]
    cues: Option<PathBuf>,
    /// Negation lexicon, one phrase per line.
    #[arg(long)]
    negations: Option<PathBuf>,
    /// Exit 1 if any requirement fails.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    stage: StageArgs,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    format: Format,
    /// Write one file per requirement plus index.json here; otherwise print.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record the generation time in index.json.
    #[arg(long)]
    stamp: bool,
}

#[derive(Args)]
struct CegArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Print `{"id", "graph"}` JSON lines instead of DOT.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TestgenArgs {
    /// Graph records from `ceg --json`.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Equivalence)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    format: Format,
}

#[derive(Args)]
struct EvalArgs {
    #[command(subcommand)]
    what: EvalCmd,
}

#[derive(Subcommand)]
enum EvalCmd {
    /// Token-level P/R/F1 of predicted labels against gold labels.
    Tokens {
        /// Gold labels: token-label records, or a brat `.txt` next to its `.ann`.
        #[arg(long)]
        gold: PathBuf,
        /// Predicted token-label records.
        #[arg(long)]
        pred: PathBuf,
        /// Requirements the label records refer to (not needed for brat gold).
        #[arg(long)]
        requirements: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = LayerArg::Top)]
        layer: LayerArg,
    },
    /// Causal/non-causal P/R/F1 of predicted verdicts against gold verdicts.
    Detection {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Pairwise span F1 between two or more annotators.
    Agreement {
        /// One token-label file per annotator.
        #[arg(required = true, num_args = 2..)]
        annotators: Vec<PathBuf>,
        #[arg(long)]
        requirements: PathBuf,
        /// Credit overlapping spans instead of requiring exact boundaries.
        #[arg(long)]
        overlap: bool,
    },
}

#[derive(Args)]
struct CompareArgs {
    /// Generated specification (canonical JSON).
    #[arg(long)]
    auto: PathBuf,
    /// Hand-written specification (canonical JSON).
    #[arg(long)]
    manual: PathBuf,
    /// Synonym map `{"term": ["alias", ...]}`.
    #[arg(long)]
    synonyms: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Md)]
    format: ReportFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Implication,
    Equivalence,
}

impl From<Mode> for InterpretationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Implication => InterpretationMode::Implication,
            Mode::Equivalence => InterpretationMode::Equivalence,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Csv,
    Json,
    Dot,
}

impl From<Format> for BundleFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Md => BundleFormat::Spec(SpecFormat::Markdown),
            Format::Csv => BundleFormat::Spec(SpecFormat::Csv),
            Format::Json => BundleFormat::Spec(SpecFormat::Json),
            Format::Dot => BundleFormat::Dot,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Md,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayerArg {
    Top,
    Lower,
    Both,
}

/// Errors carrying their exit code.
enum Failure {
    Input(anyhow::Error),
    Adapter(anyhow::Error),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Adapter { .. } => Failure::Adapter(e.into()),
            PipelineError::Input { .. } => Failure::Input(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn source(flag: &Option<String>, task: &str) -> anyhow::Result<Source> {
    match flag {
        Some(s) => s.parse().map_err(anyhow::Error::msg),
        None => match std::env::var(ADAPTER_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => Ok(Source::Command(format!("{cmd} --task {task}"))),
            _ => Ok(Source::Heuristic),
        },
    }
}

fn config(a: &StageArgs) -> anyhow::Result<PipelineConfig> {
    Ok(PipelineConfig {
        mode: a.mode.into(),
        detector: source(&a.detector, "detect")?,
        extractor: source(&a.extractor, "extract")?,
        cues: a.cues.clone(),
        negations: a.negations.clone(),
    })
}

fn run_stage(a: &StageArgs) -> Result<PipelineRun, Failure> {
    let cfg = config(a)?;
    Ok(run_file(&cfg, &a.input)?)
}

/// Report per-requirement failures on stderr; exit 1 under --strict.
fn finish(run: &PipelineRun, strict: bool) -> ExitCode {
    let mut failed = false;
    for r in run.failures() {
        if let reqtest_core::pipeline::Outcome::Failed { stage, reason } = &r.outcome {
            eprintln!("warning: {}: {stage}: {reason}", r.requirement.id);
            failed = true;
        }
    }
    for id in &run.unknown_verdicts {
        eprintln!("warning: verdict for unknown requirement {id:?}");
    }
    if failed && strict {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn print(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn cmd_pipeline(a: &PipelineArgs) -> Result<ExitCode, Failure> {
    let run = run_stage(&a.stage)?;
    let format: BundleFormat = a.format.into();
    match &a.out {
        Some(dir) => {
            let stamp = a
                .stamp
                .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
            render_bundle(&run, dir, format, stamp.as_deref()).map_err(anyhow::Error::from)?;
        }
        None => {
            let mut text = String::new();
            for r in &run.results {
                let Some(spec) = r.spec() else { continue };
                let body = match format {
                    BundleFormat::Spec(f) => render(spec, f).map_err(anyhow::Error::from)?,
                    BundleFormat::Dot => to_dot(r.graph().expect("generated")),
                };
                if !text.is_empty() {
                    text.push('\n');
                }
                text.push_str(&body);
            }
            print(&text)?;
        }
    }
    Ok(finish(&run, a.stage.strict))
}

fn cmd_detect(a: &StageArgs) -> Result<ExitCode, Failure> {
    let run = run_stage(&StageArgs {
        extractor: Some("heuristic".into()),
        ..a.clone()
    })?;
    let mut text = String::new();
    for r in &run.results {
        if let Some(v) = &r.verdict {
            text.push_str(&serde_json::to_string(&VerdictRecord::from(v)).map_err(anyhow::Error::from)?);
            text.push('\n');
        }
    }
    print(&text)?;
    Ok(finish(&run, a.strict))
}

fn cmd_extract(a: &StageArgs) -> Result<ExitCode, Failure> {
    let run = run_stage(a)?;
    let mut text = String::new();
    for r in &run.results {
        if let reqtest_core::pipeline::Outcome::Generated(g) = &r.outcome {
            text.push_str(&serde_json::to_string(&to_external(&g.labels)).map_err(anyhow::Error::from)?);
            text.push('\n');
        }
    }
    print(&text)?;
    Ok(finish(&run, a.strict))
}

fn cmd_ceg(a: &CegArgs) -> Result<ExitCode, Failure> {
    let run = run_stage(&a.stage)?;
    let mut text = String::new();
    for r in &run.results {
        let Some(g) = r.graph() else { continue };
        if a.json {
            let rec = serde_json::json!({"id": r.requirement.id, "graph": g});
            text.push_str(&rec.to_string());
            text.push('\n');
        } else {
            text.push_str(&format!("// {}\n", r.requirement.id));
            text.push_str(&to_dot(g));
        }
    }
    print(&text)?;
    Ok(finish(&run, a.stage.strict))
}

fn cmd_testgen(a: &TestgenArgs) -> Result<ExitCode, Failure> {
    let text = read(&a.input)?;
    let mut out = String::new();
    for (i, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let mut rec: serde_json::Value =
            serde_json::from_str(line).with_context(|| format!("graph record {}", i + 1))?;
        let id = rec["id"]
            .as_str()
            .with_context(|| format!("graph record {} has no id", i + 1))?
            .to_string();
        let graph: CauseEffectGraph =
            serde_json::from_value(rec["graph"].take()).with_context(|| format!("graph record {id}"))?;
        let spec = derive(&id, &graph, a.mode.into()).with_context(|| format!("deriving {id}"))?;
        let body = match BundleFormat::from(a.format) {
            BundleFormat::Spec(f) => render(&spec, f).map_err(anyhow::Error::from)?,
            BundleFormat::Dot => to_dot(&graph),
        };
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&body);
    }
    print(&out)?;
    Ok(ExitCode::SUCCESS)
}

fn load_labels(path: &Path, reqs: &[Requirement]) -> anyhow::Result<Vec<LabeledSentence>> {
    let by_id: BTreeMap<&str, &Requirement> = reqs.iter().map(|r| (r.id.as_str(), r)).collect();
    let records = parse_label_stream(&read(path)?).with_context(|| path.display().to_string())?;
    records
        .iter()
        .map(|x| {
            let r = by_id
                .get(x.id.as_str())
                .with_context(|| format!("{}: unknown requirement {:?}", path.display(), x.id))?;
            ingest_labels(r, x).with_context(|| format!("{}: {}", path.display(), x.id))
        })
        .collect()
}

fn cmd_eval(a: &EvalArgs) -> Result<ExitCode, Failure> {
    let json = match &a.what {
        EvalCmd::Tokens {
            gold,
            pred,
            requirements,
            layer,
        } => {
            let (gold, reqs) = if gold.extension().is_some_and(|e| e == "txt") {
                let ann = gold.with_extension("ann");
                let doc = gold
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let sentences = parse_brat(&read(gold)?, &read(&ann)?, &doc).map_err(anyhow::Error::from)?;
                let reqs = sentences.iter().map(|s| s.requirement().clone()).collect();
                (sentences, reqs)
            } else {
                let path = requirements
                    .as_ref()
                    .context("--requirements is needed unless the gold labels are brat")?;
                let reqs = read_requirements(path)?;
                (load_labels(gold, &reqs)?, reqs)
            };
            let pred = load_labels(pred, &reqs)?;
            let layer = match layer {
                LayerArg::Top => Layer::Top,
                LayerArg::Lower => Layer::Lower,
                LayerArg::Both => Layer::Both,
            };
            to_canonical_json(&token_metrics(&pred, &gold, layer).map_err(anyhow::Error::from)?)
        }
        EvalCmd::Detection { gold, pred } => {
            let gold = ingest_verdicts(&read(gold)?).map_err(anyhow::Error::from)?;
            let pred = ingest_verdicts(&read(pred)?).map_err(anyhow::Error::from)?;
            to_canonical_json(&detection_metrics(&pred, &gold).map_err(anyhow::Error::from)?)
        }
        EvalCmd::Agreement {
            annotators,
            requirements,
            overlap,
        } => {
            let reqs = read_requirements(requirements)?;
            let sets = annotators
                .iter()
                .map(|p| load_labels(p, &reqs))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let mode = if *overlap { SpanMatch::Overlap } else { SpanMatch::Exact };
            let scores = if sets.len() == 2 {
                pairwise_f1(&sets[0], &sets[1], mode)
            } else {
                pairwise_f1_multi(&sets, mode)
            };
            to_canonical_json(&scores.map_err(anyhow::Error::from)?)
        }
    };
    print(&json)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(a: &CompareArgs) -> Result<ExitCode, Failure> {
    let auto = parse_manual_spec(&read(&a.auto)?).with_context(|| a.auto.display().to_string())?;
    let manual = parse_manual_spec(&read(&a.manual)?).with_context(|| a.manual.display().to_string())?;
    let normalizer = match &a.synonyms {
        Some(p) => Normalizer::from_json(&read(p)?).with_context(|| p.display().to_string())?,
        None => Normalizer::default(),
    };
    let report = match_suites(&auto, &manual, &normalizer);
    match a.format {
        ReportFormat::Md => print(&report.to_markdown())?,
        ReportFormat::Json => print(&to_canonical_json(&report))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Pipeline(a) => cmd_pipeline(a),
        Cmd::Detect(a) => cmd_detect(a),
        Cmd::Extract(a) => cmd_extract(a),
        Cmd::Ceg(a) => cmd_ceg(a),
        Cmd::Testgen(a) => cmd_testgen(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Adapter(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
