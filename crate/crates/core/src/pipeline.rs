//! The informalize/autoformalize loop over a dataset, and the judge task.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generator::{DatasetKind, Language, Sample};
use crate::llm::{parse_judge_answer, JudgeAnswer, LanguageModel, Payload, PromptTemplate, Task};
use crate::logic_verifier::{logic_equivalent, FolBudget, Verdict};
use crate::parsing::{leakage_check, parse_logic, parse_logic_exact, parse_regex, parse_regex_exact, FormalLanguage, LeakOutcome, LogicMode, NonCompliant};
use crate::regex_verifier::{regex_equivalent, DfaStats};
use crate::syntax::ComplexityProfile;
use crate::vocabulary::Vocabulary;

pub const RECORD_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Number of informalize/autoformalize rounds.
    pub n: usize,
    pub shots: u8,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    pub fol_budget: FolBudget,
    pub token_budget: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { n: 1, shots: 0, workers: 0, fol_budget: FolBudget::default(), token_budget: crate::llm::templates::DEFAULT_TOKEN_BUDGET }
    }
}

/// Why a step produced no verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cause", rename_all = "snake_case")]
pub enum NonCompliance {
    Transport { task: Task, message: String },
    Prompt { task: Task, message: String },
    Leak { span: (usize, usize), reason: String },
    Parse { error: NonCompliant },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    /// φ_i.
    pub formal: String,
    /// ψ_i, the model's description.
    pub description: Option<String>,
    pub leak: Option<LeakOutcome>,
    /// Raw autoformalize output.
    pub raw_output: Option<String>,
    /// φ_{i+1} as printed after parsing.
    pub parsed: Option<String>,
    pub noncompliance: Option<NonCompliance>,
    pub verdict: Option<Verdict>,
    pub informalize_ms: u64,
    pub autoformalize_ms: u64,
    pub verify_ms: u64,
}

impl StepRecord {
    pub fn is_compliant(&self) -> bool {
        self.noncompliance.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakReason {
    NotEquivalent,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SequenceStatus {
    Maintained { n: usize },
    BrokenAt { step: usize, reason: BreakReason },
    NoncompliantAt { step: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub schema_version: u32,
    pub id: String,
    pub batch: usize,
    pub kind: DatasetKind,
    pub language: Language,
    pub expression: String,
    pub profile: ComplexityProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dfa: Option<DfaStats>,
    pub model: String,
    pub steps: Vec<StepRecord>,
    pub status: SequenceStatus,
}

impl SequenceRecord {
    /// First step parsed (syntactic compliance of the first round).
    pub fn compliant(&self) -> bool {
        self.steps.first().is_some_and(|s| s.is_compliant())
    }

    /// The first round produced an equivalent expression.
    pub fn accurate(&self) -> bool {
        self.steps.first().and_then(|s| s.verdict.as_ref()).is_some_and(|v| v.is_equivalent())
    }

    pub fn unknown(&self) -> bool {
        matches!(self.status, SequenceStatus::BrokenAt { reason: BreakReason::Unknown, .. })
    }

    pub fn transport_failed(&self) -> bool {
        self.steps.iter().any(|s| matches!(s.noncompliance, Some(NonCompliance::Transport { .. })))
    }
}

fn formal_language(lang: Language) -> FormalLanguage {
    match lang {
        Language::Propositional => FormalLanguage::Logic(LogicMode::Pl),
        Language::FirstOrder => FormalLanguage::Logic(LogicMode::Fol),
        Language::Regex => FormalLanguage::Regex,
    }
}

enum Parsed {
    Logic(crate::syntax::Formula),
    Regex(crate::syntax::RegexAst),
}

impl Parsed {
    fn text(&self) -> String {
        match self {
            Parsed::Logic(f) => f.to_unicode(),
            Parsed::Regex(r) => r.to_string(),
        }
    }
}

fn parse_exact(text: &str, lang: Language, vocab: &Vocabulary) -> Result<Parsed, NonCompliant> {
    match formal_language(lang) {
        FormalLanguage::Logic(mode) => parse_logic_exact(text, mode, Some(vocab)).map(Parsed::Logic),
        FormalLanguage::Regex => parse_regex_exact(text, &vocab.alphabet).map(Parsed::Regex),
    }
}

fn parse_output(text: &str, lang: Language, vocab: &Vocabulary) -> Result<Parsed, NonCompliant> {
    match formal_language(lang) {
        FormalLanguage::Logic(mode) => parse_logic(text, mode, Some(vocab)).map(Parsed::Logic),
        FormalLanguage::Regex => parse_regex(text, &vocab.alphabet).map(Parsed::Regex),
    }
}

fn verify(a: &Parsed, b: &Parsed, vocab: &Vocabulary, budget: &FolBudget) -> Verdict {
    match (a, b) {
        (Parsed::Logic(x), Parsed::Logic(y)) => logic_equivalent(x, y, budget),
        (Parsed::Regex(x), Parsed::Regex(y)) => regex_equivalent(x, y, &vocab.alphabet),
        _ => unreachable!("both sides are parsed in the same language"),
    }
}

fn ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Context passed to every step of one sample.
pub struct StepInput<'a> {
    pub formal: &'a str,
    pub language: Language,
    pub vocabulary: &'a Vocabulary,
    pub english: bool,
}

/// One informalize, leak-check, autoformalize, parse, verify round.
pub fn run_step(index: usize, input: &StepInput<'_>, model: &dyn LanguageModel, cfg: &PipelineConfig) -> StepRecord {
    let mut rec = StepRecord {
        index,
        formal: input.formal.to_string(),
        description: None,
        leak: None,
        raw_output: None,
        parsed: None,
        noncompliance: None,
        verdict: None,
        informalize_ms: 0,
        autoformalize_ms: 0,
        verify_ms: 0,
    };
    let template = |task| PromptTemplate {
        task,
        language: input.language,
        shots: cfg.shots,
        english: input.english,
        token_budget: cfg.token_budget,
    };
    let vocab = input.vocabulary;

    let prompt = match template(Task::Informalize).render(&Payload::Formula(input.formal.to_string()), vocab) {
        Ok(p) => p,
        Err(e) => {
            rec.noncompliance = Some(NonCompliance::Prompt { task: Task::Informalize, message: e.to_string() });
            return rec;
        }
    };
    let t = Instant::now();
    let description = model.complete(&prompt);
    rec.informalize_ms = ms(t);
    let description = match description {
        Ok(d) => d,
        Err(e) => {
            rec.noncompliance = Some(NonCompliance::Transport { task: Task::Informalize, message: e.to_string() });
            return rec;
        }
    };
    let leak = leakage_check(&description, formal_language(input.language), vocab);
    rec.description = Some(description.clone());
    rec.leak = Some(leak.clone());
    if let LeakOutcome::Violation { span, reason } = leak {
        rec.noncompliance = Some(NonCompliance::Leak { span, reason });
        return rec;
    }

    // The autoformalize call sees only the description and the vocabulary.
    let prompt = match template(Task::Autoformalize).render(&Payload::Nl(description), vocab) {
        Ok(p) => p,
        Err(e) => {
            rec.noncompliance = Some(NonCompliance::Prompt { task: Task::Autoformalize, message: e.to_string() });
            return rec;
        }
    };
    let t = Instant::now();
    let output = model.complete(&prompt);
    rec.autoformalize_ms = ms(t);
    let output = match output {
        Ok(o) => o,
        Err(e) => {
            rec.noncompliance = Some(NonCompliance::Transport { task: Task::Autoformalize, message: e.to_string() });
            return rec;
        }
    };
    rec.raw_output = Some(output.clone());
    let next = match parse_output(&output, input.language, vocab) {
        Ok(p) => p,
        Err(error) => {
            rec.noncompliance = Some(NonCompliance::Parse { error });
            return rec;
        }
    };
    rec.parsed = Some(next.text());

    let t = Instant::now();
    let verdict = match parse_exact(input.formal, input.language, vocab) {
        Ok(orig) => verify(&orig, &next, vocab, &cfg.fol_budget),
        Err(e) => {
            log::error!("input expression `{}` does not parse: {e}", input.formal);
            Verdict::Unknown { reason: crate::logic_verifier::UnknownReason::Budget }
        }
    };
    rec.verify_ms = ms(t);
    rec.verdict = Some(verdict);
    rec
}

/// Chains up to `n` rounds, stopping at the first round that fails.
pub fn run_sequence(sample: &Sample, model: &dyn LanguageModel, cfg: &PipelineConfig) -> SequenceRecord {
    let n = cfg.n.max(1);
    let english = sample.kind == DatasetKind::FolEnglish;
    let mut steps = Vec::new();
    let mut formal = sample.expression.clone();
    let mut status = SequenceStatus::Maintained { n };
    for i in 0..n {
        let input = StepInput { formal: &formal, language: sample.language, vocabulary: &sample.vocabulary, english };
        let step = run_step(i, &input, model, cfg);
        let outcome = match (&step.noncompliance, &step.verdict) {
            (Some(_), _) | (None, None) => Some(SequenceStatus::NoncompliantAt { step: i }),
            (None, Some(v)) if v.is_equivalent() => None,
            (None, Some(v)) if v.is_unknown() => Some(SequenceStatus::BrokenAt { step: i, reason: BreakReason::Unknown }),
            (None, Some(_)) => Some(SequenceStatus::BrokenAt { step: i, reason: BreakReason::NotEquivalent }),
        };
        let next = step.parsed.clone();
        steps.push(step);
        if let Some(s) = outcome {
            status = s;
            break;
        }
        formal = next.expect("an equivalent step has a parsed expression");
    }
    SequenceRecord {
        schema_version: RECORD_SCHEMA_VERSION,
        id: sample.id.clone(),
        batch: sample.batch,
        kind: sample.kind,
        language: sample.language,
        expression: sample.expression.clone(),
        profile: sample.profile.clone(),
        dfa: sample.dfa,
        model: model.name().to_string(),
        steps,
        status,
    }
}

fn pool(workers: usize) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        b = b.num_threads(workers);
    }
    b.build().expect("thread pool")
}

/// Reads the records of a checkpoint file, skipping a torn final line.
pub fn read_records(path: &Path) -> std::io::Result<Vec<SequenceRecord>> {
    let f = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => out.push(r),
            Err(e) => log::warn!("{}: skipping unreadable checkpoint line: {e}", path.display()),
        }
    }
    Ok(out)
}

/// Evaluates every sample, resuming from `checkpoint` when given: records
/// already present there are reused and new ones are appended as they
/// finish. The result is sorted by sample id.
pub fn evaluate(
    samples: &[Sample],
    model: &dyn LanguageModel,
    cfg: &PipelineConfig,
    checkpoint: Option<&Path>,
) -> std::io::Result<Vec<SequenceRecord>> {
    let mut done: BTreeMap<String, SequenceRecord> = BTreeMap::new();
    let writer = match checkpoint {
        Some(p) => {
            let wanted: HashSet<&str> = samples.iter().map(|s| s.id.as_str()).collect();
            for r in read_records(p)? {
                if wanted.contains(r.id.as_str()) && r.model == model.name() {
                    done.insert(r.id.clone(), r);
                }
            }
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Some(Mutex::new(OpenOptions::new().create(true).append(true).open(p)?))
        }
        None => None,
    };
    let todo: Vec<&Sample> = samples.iter().filter(|s| !done.contains_key(&s.id)).collect();
    if !done.is_empty() {
        log::info!("resuming: {} of {} samples already evaluated", done.len(), samples.len());
    }
    let fresh: Vec<std::io::Result<SequenceRecord>> = pool(cfg.workers).install(|| {
        todo.par_iter()
            .map(|s| {
                let rec = run_sequence(s, model, cfg);
                if let Some(w) = &writer {
                    let mut line = serde_json::to_string(&rec).map_err(std::io::Error::other)?;
                    line.push('\n');
                    w.lock().unwrap_or_else(|e| e.into_inner()).write_all(line.as_bytes())?;
                }
                Ok(rec)
            })
            .collect()
    });
    for r in fresh {
        let r = r?;
        done.insert(r.id.clone(), r);
    }
    Ok(done.into_values().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgePair {
    pub id: String,
    pub language: Language,
    pub first: String,
    pub second: String,
    /// Verifier ground truth.
    pub truth: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeRecord {
    pub schema_version: u32,
    pub id: String,
    pub answer: JudgeAnswer,
    pub truth_equivalent: bool,
    pub raw: Option<String>,
    pub error: Option<String>,
}

impl JudgeRecord {
    /// Unparseable answers and transport failures count as wrong.
    pub fn correct(&self) -> bool {
        match self.answer {
            JudgeAnswer::Yes => self.truth_equivalent,
            JudgeAnswer::No => !self.truth_equivalent,
            JudgeAnswer::Unparseable => false,
        }
    }
}

pub fn run_judge(pairs: &[JudgePair], model: &dyn LanguageModel, cfg: &PipelineConfig) -> Vec<JudgeRecord> {
    let empty = Vocabulary::with_alphabet(0);
    let mut out: Vec<JudgeRecord> = pool(cfg.workers).install(|| {
        pairs
            .par_iter()
            .map(|p| {
                let t = PromptTemplate { token_budget: cfg.token_budget, ..PromptTemplate::new(Task::Judge, p.language, 0) };
                let truth_equivalent = p.truth.is_equivalent();
                let (answer, raw, error) = match t.render(&Payload::Pair(p.first.clone(), p.second.clone()), &empty) {
                    Err(e) => (JudgeAnswer::Unparseable, None, Some(e.to_string())),
                    Ok(prompt) => match model.complete(&prompt) {
                        Ok(text) => (parse_judge_answer(&text), Some(text), None),
                        Err(e) => (JudgeAnswer::Unparseable, None, Some(e.to_string())),
                    },
                };
                JudgeRecord { schema_version: RECORD_SCHEMA_VERSION, id: p.id.clone(), answer, truth_equivalent, raw, error }
            })
            .collect()
    });
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// Builds judge pairs from evaluated records: the original expression
/// against the first round's parsed output, with the verifier's verdict as
/// ground truth. Records without a verdict are skipped.
pub fn judge_pairs(records: &[SequenceRecord]) -> Vec<JudgePair> {
    records
        .iter()
        .filter_map(|r| {
            let s = r.steps.first()?;
            let verdict = s.verdict.clone()?;
            if verdict.is_unknown() {
                return None;
            }
            Some(JudgePair { id: r.id.clone(), language: r.language, first: s.formal.clone(), second: s.parsed.clone()?, truth: verdict })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::mock_model;
    use crate::vocabulary::{make_vocabulary, VocabParams};

    fn pl_input<'a>(formal: &'a str, vocab: &'a Vocabulary) -> StepInput<'a> {
        StepInput { formal, language: Language::Propositional, vocabulary: vocab, english: false }
    }

    #[test]
    fn oracle_step_is_equivalent() {
        let v = make_vocabulary(&VocabParams::default()).unwrap();
        let m = mock_model("perfect-oracle").unwrap();
        let r = run_step(0, &pl_input("(p1 ∧ p2 ∧ p1)", &v), m.as_ref(), &PipelineConfig::default());
        assert!(r.verdict.unwrap().is_equivalent());
    }

    #[test]
    fn noncompliant_step_has_no_verdict() {
        let v = make_vocabulary(&VocabParams::default()).unwrap();
        let m = mock_model("noncompliant").unwrap();
        let r = run_step(0, &pl_input("(p1 ∧ p2)", &v), m.as_ref(), &PipelineConfig::default());
        assert!(r.verdict.is_none());
        assert!(matches!(r.noncompliance, Some(NonCompliance::Parse { .. })));
    }

    #[test]
    fn echo_leaks() {
        let v = make_vocabulary(&VocabParams::default()).unwrap();
        let m = mock_model("echo").unwrap();
        let r = run_step(0, &pl_input("(p1 ∧ p2)", &v), m.as_ref(), &PipelineConfig::default());
        assert!(matches!(r.noncompliance, Some(NonCompliance::Leak { .. })));
    }

    #[test]
    fn dropper_breaks_with_witness() {
        let v = make_vocabulary(&VocabParams::default()).unwrap();
        let m = mock_model("negation-dropper").unwrap();
        let r = run_step(0, &pl_input("(¬p3 ∧ ¬p7)", &v), m.as_ref(), &PipelineConfig::default());
        match r.verdict.unwrap() {
            Verdict::NotEquivalent { .. } => {}
            other => panic!("{other:?}"),
        }
    }
}
