//! Command implementations behind the `tmeval` binary: dataset generation
//! with manifests, evaluation runs, the judge task, reports and
//! correlation against external score tables.

pub mod config;
pub mod scores;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::RunConfig;
pub use scores::{correlate, model_scores, CorrelationRow, ScoreTable};

use crate::generator::{
    builtin_grammar, sample_dataset_with, BucketCensus, BucketMetric, Cfg, Dataset, DatasetKind, GenError, GenParams, Language, Sample,
};
use crate::llm::{build_model, ModelConfig, TransportError};
use crate::metrics::{aggregate, judge_f1_records, summarize, BucketReport, F1Report, MetricError, Summary};
use crate::pipeline::{evaluate, judge_pairs, read_records, run_judge, JudgeRecord, PipelineConfig, SequenceRecord};
use crate::vocabulary::VocabParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("insufficient overlap: {0}")]
    InsufficientOverlap(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    /// Process exit code for this error. Every failure that stops a
    /// command is reported as 1.
    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// What a command produced.
#[derive(Debug, Default, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub transport_failures: usize,
    pub notes: Vec<String>,
}

impl Outcome {
    /// 0 on success, 2 when some samples failed in transport.
    pub fn exit_code(&self) -> i32 {
        if self.transport_failures > 0 {
            2
        } else {
            0
        }
    }
}

// ---------------------------------------------------------------------------
// Files

fn create(path: &Path) -> Result<Box<dyn Write>, HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let f = BufWriter::new(File::create(path).map_err(|e| HarnessError::io(path, e))?);
    Ok(if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzEncoder::new(f, Compression::default()))
    } else {
        Box::new(f)
    })
}

fn open(path: &Path) -> Result<Box<dyn BufRead>, HarnessError> {
    let f = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(if path.extension().is_some_and(|e| e == "gz") {
        Box::new(BufReader::new(GzDecoder::new(f)))
    } else {
        Box::new(BufReader::new(f))
    })
}

/// Writes one JSON document per line; `.gz` paths are gzip-compressed.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    for it in items {
        let line = serde_json::to_string(it).map_err(|e| HarnessError::Format { path: path.into(), message: e.to_string() })?;
        writeln!(w, "{line}").map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| HarnessError::Format { path: path.into(), message: format!("line {}: {e}", i + 1) })?,
        );
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Format { path: path.into(), message: e.to_string() })?;
    writeln!(w, "{text}").map_err(|e| HarnessError::io(path, e))?;
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Format { path: path.into(), message: e.to_string() })
}

fn sha256_file(path: &Path) -> Result<String, HarnessError> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// File-name-safe form of a model name.
pub fn file_stem(model: &str) -> String {
    model.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
}

// ---------------------------------------------------------------------------
// Generation

/// Everything needed to regenerate a dataset byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub kind: DatasetKind,
    /// Source text of a user grammar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grammar: Option<String>,
    pub generation: GenParams,
    pub vocabulary: VocabParams,
    pub batches: usize,
    pub seeds: Vec<(u64, u64)>,
    /// Bucket sampling scheme; always `without_replacement`.
    pub sampling: String,
    pub census: Vec<BucketCensus>,
    pub warnings: Vec<String>,
    pub dataset_file: String,
    pub dataset_sha256: String,
    pub samples: usize,
}

pub fn dataset_file_name(gzip: bool) -> &'static str {
    if gzip {
        "dataset.jsonl.gz"
    } else {
        "dataset.jsonl"
    }
}

fn grammar_for(kind: DatasetKind, grammar: Option<&str>, gp: &GenParams) -> Result<Cfg, HarnessError> {
    match grammar {
        Some(text) => Ok(Cfg::from_json(text)?),
        None => {
            let gk = kind
                .grammar_kind(gp.ksat_width)
                .ok_or_else(|| HarnessError::Config("custom datasets need `grammar_file`".into()))?;
            Ok(builtin_grammar(gk)?)
        }
    }
}

/// Generates, writes the dataset and its manifest into `out_dir`.
fn generate_into(
    out_dir: &Path,
    kind: DatasetKind,
    grammar: Option<String>,
    gp: &GenParams,
    vp: &VocabParams,
    batches: usize,
    gzip: bool,
) -> Result<(Dataset, Manifest, Outcome), HarnessError> {
    let cfg = grammar_for(kind, grammar.as_deref(), gp)?;
    let ds = sample_dataset_with(&cfg, kind, gp, vp, batches)?;
    let file = dataset_file_name(gzip);
    let data_path = out_dir.join(file);
    write_jsonl(&data_path, &ds.samples)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        kind,
        grammar,
        generation: gp.clone(),
        vocabulary: vp.clone(),
        batches,
        seeds: ds.seeds.clone(),
        sampling: "without_replacement".into(),
        census: ds.census.clone(),
        warnings: ds.warnings.clone(),
        dataset_file: file.to_string(),
        dataset_sha256: sha256_file(&data_path)?,
        samples: ds.samples.len(),
    };
    let manifest_path = out_dir.join("manifest.json");
    write_json(&manifest_path, &manifest)?;
    let outcome = Outcome { files: vec![data_path, manifest_path], transport_failures: 0, notes: ds.warnings.clone() };
    Ok((ds, manifest, outcome))
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<Outcome, HarnessError> {
    if cfg.dataset.is_some() {
        return Err(HarnessError::Config("`generate` takes generation keys, not `dataset`".into()));
    }
    let kind = cfg.dataset_kind()?;
    let grammar = match &cfg.grammar_file {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?),
        None => None,
    };
    let (gp, batches) = cfg.gen_params()?;
    let (_, _, outcome) = generate_into(&cfg.output_dir, kind, grammar, &gp, &cfg.vocab_params(kind), batches, cfg.gzip)?;
    Ok(outcome)
}

/// Regenerates the dataset described by a manifest into `out_dir`.
pub fn cmd_regenerate(manifest_path: &Path, out_dir: &Path) -> Result<Outcome, HarnessError> {
    let m: Manifest = read_json(manifest_path)?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(HarnessError::Format { path: manifest_path.into(), message: format!("unsupported schema_version {}", m.schema_version) });
    }
    let gzip = m.dataset_file.ends_with(".gz");
    let (_, fresh, mut outcome) = generate_into(out_dir, m.kind, m.grammar.clone(), &m.generation, &m.vocabulary, m.batches, gzip)?;
    if fresh.dataset_sha256 != m.dataset_sha256 {
        outcome.notes.push(format!("dataset hash differs from the manifest ({} vs {})", fresh.dataset_sha256, m.dataset_sha256));
    }
    Ok(outcome)
}

/// Samples from the configured dataset file, or freshly generated into the
/// output directory.
pub fn load_samples(cfg: &RunConfig) -> Result<(Vec<Sample>, Option<BucketMetric>, Outcome), HarnessError> {
    cfg.check_source()?;
    match &cfg.dataset {
        Some(p) => {
            let samples: Vec<Sample> = read_jsonl(p)?;
            let metric = p
                .parent()
                .map(|d| d.join("manifest.json"))
                .filter(|m| m.exists())
                .and_then(|m| read_json::<Manifest>(&m).ok())
                .map(|m| m.generation.metric);
            Ok((samples, metric, Outcome::default()))
        }
        None => {
            let outcome = cmd_generate(cfg)?;
            let (gp, _) = cfg.gen_params()?;
            let samples = read_jsonl(&cfg.output_dir.join(dataset_file_name(cfg.gzip)))?;
            Ok((samples, Some(gp.metric), outcome))
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation and reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub schema_version: u32,
    pub model: String,
    pub metric: BucketMetric,
    /// Standard deviations are across batches with the population
    /// convention (divide by the number of batches).
    pub std_convention: String,
    /// How operators are counted for the bucket metric.
    pub operator_convention: String,
    pub summary: Summary,
    pub buckets: Vec<BucketReport>,
}

fn default_metric(records: &[SequenceRecord]) -> BucketMetric {
    if records.first().is_some_and(|r| r.language == Language::Regex) {
        BucketMetric::CfgDepth
    } else {
        BucketMetric::OperatorCount
    }
}

pub const OPERATOR_CONVENTION: &str = "quantifiers count as operators; an n-ary ∧/∨ counts n-1; regex counts stars";

pub fn build_report(model: &str, records: &[SequenceRecord], metric: &BucketMetric) -> Result<ModelReport, HarnessError> {
    Ok(ModelReport {
        schema_version: SCHEMA_VERSION,
        model: model.to_string(),
        metric: metric.clone(),
        std_convention: "population".into(),
        operator_convention: OPERATOR_CONVENTION.into(),
        summary: summarize(records),
        buckets: aggregate(records, metric)?,
    })
}

pub const REPORT_CSV_HEADER: &str = "model,metric,value,count,compliant,accurate,unknown,leaks,maintained,compliance,accuracy,accuracy_over_compliant,batches,accuracy_mean,accuracy_std_population,compliance_mean,compliance_std_population";

pub fn report_csv(r: &ModelReport) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for b in &r.buckets {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_field(&r.model),
            csv_field(&r.metric.to_string()),
            b.value,
            b.count,
            b.compliant,
            b.accurate,
            b.unknown,
            b.leaks,
            b.maintained,
            b.compliance,
            b.accuracy,
            b.accuracy_over_compliant,
            b.batches,
            b.accuracy_mean,
            b.accuracy_std,
            b.compliance_mean,
            b.compliance_std
        ));
    }
    out
}

/// Plot-ready long format: one row per (bucket, measure).
pub fn long_csv(r: &ModelReport) -> String {
    let mut out = String::from("model,metric,value,measure,score\n");
    for b in &r.buckets {
        for (name, v) in [("compliance", b.compliance), ("accuracy", b.accuracy), ("accuracy_over_compliant", b.accuracy_over_compliant)] {
            out.push_str(&format!("{},{},{},{name},{v}\n", csv_field(&r.model), csv_field(&r.metric.to_string()), b.value));
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| HarnessError::io(path, e))?;
    w.flush().map_err(|e| HarnessError::io(path, e))
}

fn write_report(out_dir: &Path, report: &ModelReport) -> Result<Vec<PathBuf>, HarnessError> {
    let stem = file_stem(&report.model);
    let json = out_dir.join(format!("report-{stem}.json"));
    let csv = out_dir.join(format!("report-{stem}.csv"));
    let long = out_dir.join(format!("long-{stem}.csv"));
    write_json(&json, report)?;
    write_text(&csv, &report_csv(report))?;
    write_text(&long, &long_csv(report))?;
    Ok(vec![json, csv, long])
}

pub fn results_path(out_dir: &Path, model: &str) -> PathBuf {
    out_dir.join(format!("results-{}.jsonl", file_stem(model)))
}

pub fn checkpoint_path(out_dir: &Path, model: &str) -> PathBuf {
    out_dir.join(format!("checkpoint-{}.jsonl", file_stem(model)))
}

/// Settings of an evaluation run, written to `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub dataset_samples: usize,
    pub pipeline: PipelineConfig,
    pub models: Vec<ModelConfig>,
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<Outcome, HarnessError> {
    let pcfg = cfg.pipeline_config()?;
    let (samples, gen_metric, mut outcome) = load_samples(cfg)?;
    if samples.is_empty() {
        return Err(HarnessError::Config("the dataset has no samples".into()));
    }
    let out = &cfg.output_dir;
    let run = RunManifest {
        schema_version: SCHEMA_VERSION,
        dataset_samples: samples.len(),
        pipeline: pcfg.clone(),
        models: cfg.model_names().iter().map(|m| cfg.model_config(m)).collect(),
    };
    let run_path = out.join("run.json");
    write_json(&run_path, &run)?;
    outcome.files.push(run_path);
    for name in cfg.model_names() {
        let model = build_model(&cfg.model_config(&name))?;
        let ckpt = checkpoint_path(out, &name);
        let records = evaluate(&samples, model.as_ref(), &pcfg, Some(&ckpt)).map_err(|e| HarnessError::io(&ckpt, e))?;
        let failures = records.iter().filter(|r| r.transport_failed()).count();
        if failures > 0 {
            log::warn!("{name}: {failures} sample(s) failed in transport");
        }
        outcome.transport_failures += failures;
        let results = results_path(out, &name);
        write_jsonl(&results, &records)?;
        outcome.files.push(results);
        outcome.files.push(ckpt);
        let metric = cfg.report_metric()?.or_else(|| gen_metric.clone()).unwrap_or_else(|| default_metric(&records));
        let report = build_report(&name, &records, &metric)?;
        outcome.notes.push(format!(
            "{name}: {} samples, compliance {:.3}, accuracy {:.3}, unknown {}",
            report.summary.count, report.summary.compliance, report.summary.accuracy, report.summary.unknown
        ));
        outcome.files.extend(write_report(out, &report)?);
    }
    Ok(outcome)
}

/// Re-aggregates stored results into report files.
pub fn cmd_report(cfg: &RunConfig) -> Result<Outcome, HarnessError> {
    let mut outcome = Outcome::default();
    let out = &cfg.output_dir;
    let metric_cfg = cfg.report_metric()?;
    let manifest_metric = read_json::<Manifest>(&out.join("manifest.json")).ok().map(|m| m.generation.metric);
    for name in cfg.model_names() {
        let path = results_path(out, &name);
        let records: Vec<SequenceRecord> = read_jsonl(&path)?;
        let metric = metric_cfg.clone().or_else(|| manifest_metric.clone()).unwrap_or_else(|| default_metric(&records));
        let report = build_report(&name, &records, &metric)?;
        outcome.files.extend(write_report(out, &report)?);
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeReport {
    pub schema_version: u32,
    pub model: String,
    pub pairs: usize,
    pub f1: F1Report,
    pub f1_exact: String,
}

pub fn cmd_judge(cfg: &RunConfig) -> Result<Outcome, HarnessError> {
    let pcfg = cfg.pipeline_config()?;
    let source = cfg
        .judge_source
        .clone()
        .ok_or_else(|| HarnessError::Config("`judge_source` must name an evaluation results file".into()))?;
    let records = read_records(&source).map_err(|e| HarnessError::io(&source, e))?;
    let pairs = judge_pairs(&records);
    if pairs.is_empty() {
        return Err(HarnessError::Config(format!("{} holds no verified pairs", source.display())));
    }
    let mut outcome = Outcome::default();
    for name in cfg.model_names() {
        let model = build_model(&cfg.model_config(&name))?;
        let judged: Vec<JudgeRecord> = run_judge(&pairs, model.as_ref(), &pcfg);
        outcome.transport_failures += judged.iter().filter(|j| j.error.is_some()).count();
        let f1 = judge_f1_records(&judged)?;
        let stem = file_stem(&name);
        let rec_path = cfg.output_dir.join(format!("judge-{stem}.jsonl"));
        let rep_path = cfg.output_dir.join(format!("judge-{stem}.json"));
        write_jsonl(&rec_path, &judged)?;
        let report = JudgeReport { schema_version: SCHEMA_VERSION, model: name.clone(), pairs: judged.len(), f1_exact: f1.f1_exact().to_string(), f1 };
        outcome.notes.push(format!("{name}: judge F1 {:.3} over {} pairs", report.f1.f1, report.pairs));
        write_json(&rep_path, &report)?;
        outcome.files.extend([rec_path, rep_path]);
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub schema_version: u32,
    pub complexity_cutoff: Option<f64>,
    pub strict_power: bool,
    pub our_scores: BTreeMap<String, f64>,
    pub rows: Vec<CorrelationRow>,
}

/// Reads every `report-*.json` in the output directory.
pub fn read_reports(dir: &Path) -> Result<Vec<ModelReport>, HarnessError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("report-") && n.ends_with(".json"))
        })
        .collect();
    paths.sort();
    paths.iter().map(|p| read_json(p)).collect()
}

pub fn cmd_correlate(cfg: &RunConfig) -> Result<Outcome, HarnessError> {
    let table_path = cfg.score_table.clone().ok_or_else(|| HarnessError::Config("`score_table` is not set".into()))?;
    let table = ScoreTable::from_path(&table_path)?;
    let reports = read_reports(&cfg.output_dir)?;
    let ours = model_scores(&reports, cfg.complexity_cutoff);
    let rows = correlate(&ours, &table, cfg.strict_power)?;
    let report = CorrelationReport {
        schema_version: SCHEMA_VERSION,
        complexity_cutoff: cfg.complexity_cutoff,
        strict_power: cfg.strict_power,
        our_scores: ours,
        rows,
    };
    let json = cfg.output_dir.join("correlation.json");
    let csv = cfg.output_dir.join("correlation.csv");
    write_json(&json, &report)?;
    write_text(&csv, &scores::correlation_csv(&report.rows))?;
    let mut outcome = Outcome { files: vec![json, csv], ..Default::default() };
    for r in &report.rows {
        outcome.notes.push(match r.rho {
            Some(rho) => format!("{}: ρ = {rho:.3} (p = {:.3}) over {} models, power {:.3}", r.benchmark, r.p_value.unwrap_or(f64::NAN), r.models, r.power),
            None => format!("{}: {} models, power {:.3}", r.benchmark, r.models, r.power),
        });
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_stems_are_safe() {
        assert_eq!(file_stem("gpt-4o/mini:latest"), "gpt-4o_mini_latest");
    }

    #[test]
    fn jsonl_round_trip_with_gzip() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["a.jsonl", "a.jsonl.gz"] {
            let p = dir.path().join(name);
            write_jsonl(&p, &[1u32, 2, 3]).unwrap();
            assert_eq!(read_jsonl::<u32>(&p).unwrap(), vec![1, 2, 3]);
        }
    }
}
