//! Dataset generation from context-free grammars.
//!
//! A random derivation tree is grown level by level: at each depth a
//! fixed number of nodes is sampled from the previous level and each is
//! expanded that many times. Completed sentential forms are collected at
//! every level, bucketed by a complexity metric, sampled evenly per bucket
//! and finally grounded with a vocabulary.

pub mod grammar;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grammar::{builtin_grammar, Cfg, GrammarKind, Rule};

use crate::regex_verifier::{dfa_stats, minimal_dfa, DfaStats};
use crate::syntax::{formula_complexity, regex_complexity, ComplexityProfile};
use crate::vocabulary::{ground_expression, make_vocabulary, Grounded, VocabError, VocabMode, VocabParams, Vocabulary};

/// Version tag written into every serialized sample.
pub const SAMPLE_SCHEMA_VERSION: u32 = 1;

/// Sentential forms longer than this are abandoned during expansion.
pub const MAX_FORM_LEN: usize = 4_096;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("unknown grammar `{0}`")]
    UnknownGrammar(String),
    #[error("undeclared symbol `{symbol}` in {context}")]
    UndeclaredSymbol { symbol: String, context: String },
    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("unknown bucket metric `{0}`")]
    UnknownMetric(String),
    #[error(transparent)]
    Vocabulary(#[from] VocabError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    Propositional,
    FirstOrder,
    Regex,
}

/// A completed derivation: the terminal string and the level at which it
/// became complete.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CfgExpression {
    pub tokens: Vec<String>,
    pub depth: usize,
}

impl CfgExpression {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    fn count(&self, op: &str) -> usize {
        self.tokens.iter().filter(|t| *t == op).count()
    }

    /// Operator occurrences; for regexes the operators are stars.
    pub fn operator_count(&self) -> usize {
        ["∧", "∨", "¬", "∀", "∃", "*"].iter().map(|op| self.count(op)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BucketMetric {
    OperatorCount,
    /// Occurrences of a single operator glyph.
    Operator(String),
    CfgDepth,
    DfaNodes,
    DfaEdges,
    DfaDensity,
}

impl BucketMetric {
    pub fn needs_dfa(&self) -> bool {
        matches!(self, BucketMetric::DfaNodes | BucketMetric::DfaEdges | BucketMetric::DfaDensity)
    }

    /// Metric value of a generated sample.
    pub fn value(&self, s: &Sample) -> Option<f64> {
        self.value_of(&s.profile, s.dfa.as_ref())
    }

    /// Metric value from a complexity profile and optional DFA statistics.
    pub fn value_of(&self, p: &ComplexityProfile, dfa: Option<&DfaStats>) -> Option<f64> {
        let dfa = dfa.copied();
        match self {
            BucketMetric::OperatorCount => Some(p.operator_count as f64),
            BucketMetric::Operator(op) => Some(p.per_operator.get(op).copied().unwrap_or(0) as f64),
            BucketMetric::CfgDepth => Some(p.cfg_depth as f64),
            BucketMetric::DfaNodes => dfa.map(|d| d.nodes as f64),
            BucketMetric::DfaEdges => dfa.map(|d| d.edges as f64),
            BucketMetric::DfaDensity => dfa.map(|d| d.density),
        }
    }

    fn value_of_expression(&self, e: &CfgExpression) -> f64 {
        match self {
            BucketMetric::OperatorCount => e.operator_count() as f64,
            BucketMetric::Operator(op) => e.count(op) as f64,
            BucketMetric::CfgDepth => e.depth as f64,
            _ => unreachable!("DFA metrics are computed after grounding"),
        }
    }
}

/// Bucket identity for a metric value: values are compared in tenths so
/// that rounded densities and integer counts share one key space.
pub fn bucket_key(value: f64) -> i64 {
    (value * 10.0).round() as i64
}

pub fn bucket_value(key: i64) -> f64 {
    key as f64 / 10.0
}

impl fmt::Display for BucketMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BucketMetric::OperatorCount => f.write_str("operator_count"),
            BucketMetric::Operator(op) => write!(f, "operator:{op}"),
            BucketMetric::CfgDepth => f.write_str("cfg_depth"),
            BucketMetric::DfaNodes => f.write_str("dfa_nodes"),
            BucketMetric::DfaEdges => f.write_str("dfa_edges"),
            BucketMetric::DfaDensity => f.write_str("dfa_density"),
        }
    }
}

impl FromStr for BucketMetric {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let op = |name: &str| match name {
            "and" | "∧" => Some("∧"),
            "or" | "∨" => Some("∨"),
            "not" | "¬" => Some("¬"),
            "forall" | "∀" => Some("∀"),
            "exists" | "∃" => Some("∃"),
            "star" | "*" => Some("*"),
            _ => None,
        };
        match s {
            "operator_count" => Ok(BucketMetric::OperatorCount),
            "cfg_depth" => Ok(BucketMetric::CfgDepth),
            "dfa_nodes" => Ok(BucketMetric::DfaNodes),
            "dfa_edges" => Ok(BucketMetric::DfaEdges),
            "dfa_density" => Ok(BucketMetric::DfaDensity),
            other => other
                .strip_prefix("operator:")
                .and_then(op)
                .map(|o| BucketMetric::Operator(o.to_string()))
                .ok_or_else(|| GenError::UnknownMetric(s.to_string())),
        }
    }
}

impl Serialize for BucketMetric {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BucketMetric {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub depth: usize,
    pub n: usize,
    pub sample_count: usize,
    pub metric: BucketMetric,
    pub seed: u64,
    /// Clause width for k-SAT datasets.
    #[serde(default = "default_ksat_width")]
    pub ksat_width: usize,
}

fn default_ksat_width() -> usize {
    3
}

impl GenParams {
    /// Small preset for quick runs: depth 10, branching 20, 20 per bucket.
    pub fn desk() -> Self {
        Self { depth: 10, n: 20, sample_count: 20, metric: BucketMetric::OperatorCount, seed: 0, ksat_width: 3 }
    }

    /// Full-size preset: depth 40, branching 200, 50 per bucket.
    pub fn full() -> Self {
        Self { depth: 40, n: 200, sample_count: 50, ..Self::desk() }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.depth == 0 || self.n == 0 || self.sample_count == 0 {
            return Err(GenError::InvalidParams("depth, n and sample_count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Named presets with their default batch counts.
pub fn preset(name: &str) -> Option<(GenParams, usize)> {
    match name {
        "desk" => Some((GenParams::desk(), 1)),
        "tiny" | "ci" => Some((GenParams { depth: 6, n: 8, sample_count: 5, ..GenParams::desk() }, 2)),
        "full" => Some((GenParams::full(), 10)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Ksat,
    Pl,
    FolSynthetic,
    FolEnglish,
    Regex,
    /// Generated from a user-supplied grammar.
    Custom,
}

impl DatasetKind {
    pub const BUILTIN: [DatasetKind; 5] =
        [DatasetKind::Ksat, DatasetKind::Pl, DatasetKind::FolSynthetic, DatasetKind::FolEnglish, DatasetKind::Regex];

    pub fn name(&self) -> &'static str {
        match self {
            DatasetKind::Ksat => "ksat",
            DatasetKind::Pl => "pl",
            DatasetKind::FolSynthetic => "fol_synthetic",
            DatasetKind::FolEnglish => "fol_english",
            DatasetKind::Regex => "regex",
            DatasetKind::Custom => "custom",
        }
    }

    pub fn grammar_kind(&self, ksat_width: usize) -> Option<GrammarKind> {
        match self {
            DatasetKind::Ksat => Some(GrammarKind::Ksat(ksat_width)),
            DatasetKind::Pl => Some(GrammarKind::Pl),
            DatasetKind::FolSynthetic | DatasetKind::FolEnglish => Some(GrammarKind::Fol),
            DatasetKind::Regex => Some(GrammarKind::Regex),
            DatasetKind::Custom => None,
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ksat" | "ksat3" => Ok(DatasetKind::Ksat),
            "pl" => Ok(DatasetKind::Pl),
            "fol" | "fol_synthetic" | "fol_s" => Ok(DatasetKind::FolSynthetic),
            "fol_english" | "fol_e" => Ok(DatasetKind::FolEnglish),
            "regex" => Ok(DatasetKind::Regex),
            "custom" => Ok(DatasetKind::Custom),
            _ => Err(GenError::UnknownGrammar(s.to_string())),
        }
    }
}

/// One dataset item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub schema_version: u32,
    pub id: String,
    pub kind: DatasetKind,
    pub language: Language,
    pub expression: String,
    pub profile: ComplexityProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dfa: Option<DfaStats>,
    pub vocabulary: Vocabulary,
    pub batch: usize,
}

/// Population and sampled size of one bucket in one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketCensus {
    pub batch: usize,
    pub value: f64,
    pub population: usize,
    pub sampled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub census: Vec<BucketCensus>,
    /// Per batch: (batch seed, vocabulary seed).
    pub seeds: Vec<(u64, u64)>,
    pub warnings: Vec<String>,
}

/// Seed of stream `stream` derived from `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream.wrapping_add(1));
    rng.next_u64()
}

// ---------------------------------------------------------------------------
// Expansion

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Item {
    T(u32),
    N(u32),
}

struct Compiled<'a> {
    symbols: Vec<&'a str>,
    /// Per nonterminal: the non-empty right sides.
    productions: Vec<Vec<Vec<Item>>>,
    /// Per nonterminal: probability that a freshly introduced occurrence
    /// takes an ε-production.
    vanish: Vec<f64>,
    start: u32,
}

impl<'a> Compiled<'a> {
    fn new(g: &'a Cfg) -> Self {
        let mut symbols: Vec<&str> = g.nonterminals.iter().map(String::as_str).collect();
        let nt_count = symbols.len();
        symbols.extend(g.terminals.iter().map(String::as_str));
        let lookup = |s: &str| -> Item {
            let i = symbols.iter().position(|x| *x == s).expect("validated grammar") as u32;
            if (i as usize) < nt_count {
                Item::N(i)
            } else {
                Item::T(i)
            }
        };
        let mut productions = vec![Vec::new(); nt_count];
        let mut eps = vec![0usize; nt_count];
        let mut total = vec![0usize; nt_count];
        for r in &g.rules {
            let Item::N(lhs) = lookup(&r.lhs) else { unreachable!() };
            total[lhs as usize] += 1;
            if r.is_epsilon() {
                eps[lhs as usize] += 1;
            } else {
                productions[lhs as usize].push(r.rhs.iter().map(|s| lookup(s)).collect());
            }
        }
        let vanish = (0..nt_count)
            .map(|i| if total[i] == 0 { 0.0 } else { eps[i] as f64 / total[i] as f64 })
            .collect();
        let Item::N(start) = lookup(&g.start) else { unreachable!() };
        Self { symbols, productions, vanish, start }
    }

    /// Rewrites every nonterminal of `node` with a uniformly chosen non-empty
    /// production. Newly introduced nonterminals take an ε-production
    /// immediately with their ε share of the rules.
    fn expand(&self, node: &[Item], rng: &mut impl Rng) -> Option<Vec<Item>> {
        let mut out = Vec::with_capacity(node.len() * 2);
        for &item in node {
            match item {
                Item::T(_) => out.push(item),
                Item::N(nt) => {
                    let prods = &self.productions[nt as usize];
                    if prods.is_empty() {
                        continue;
                    }
                    let rhs = &prods[rng.random_range(0..prods.len())];
                    for &s in rhs {
                        match s {
                            Item::N(m) => {
                                let v = self.vanish[m as usize];
                                if !(v > 0.0 && rng.random_bool(v)) {
                                    out.push(s);
                                }
                            }
                            Item::T(_) => out.push(s),
                        }
                    }
                }
            }
            if out.len() > MAX_FORM_LEN {
                return None;
            }
        }
        Some(out)
    }

    fn tokens(&self, node: &[Item]) -> Vec<String> {
        node.iter()
            .map(|i| match i {
                Item::T(t) | Item::N(t) => self.symbols[*t as usize].to_string(),
            })
            .collect()
    }
}

/// Grows the random derivation tree and returns every completed leaf, with
/// duplicates, in generation order. Deterministic for a given seed.
pub fn expand_tree(g: &Cfg, depth: usize, n: usize, seed: u64) -> Vec<CfgExpression> {
    let c = Compiled::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level: Vec<Vec<Item>> = vec![vec![Item::N(c.start)]];
    let mut leaves = Vec::new();
    for d in 1..=depth {
        if level.is_empty() {
            break;
        }
        let picked: Vec<usize> = if level.len() <= n {
            (0..level.len()).collect()
        } else {
            let mut ix = index::sample(&mut rng, level.len(), n).into_vec();
            ix.sort_unstable();
            ix
        };
        let mut next = Vec::new();
        for i in picked {
            for _ in 0..n {
                let Some(child) = c.expand(&level[i], &mut rng) else { continue };
                if child.iter().all(|it| matches!(it, Item::T(_))) {
                    if !child.is_empty() {
                        leaves.push(CfgExpression { tokens: c.tokens(&child), depth: d });
                    }
                } else {
                    next.push(child);
                }
            }
        }
        level = next;
    }
    leaves
}

// ---------------------------------------------------------------------------
// Sampling

fn batch_vocabulary(kind: DatasetKind, language: Language, vparams: &VocabParams, seed: u64) -> Result<Vocabulary, GenError> {
    let mut p = vparams.clone();
    p.seed = seed;
    if kind == DatasetKind::FolEnglish {
        p.mode = VocabMode::English;
    }
    let mut v = make_vocabulary(&p)?;
    match language {
        Language::Propositional => {
            v.predicates.clear();
            v.objects.clear();
            v.alphabet.clear();
        }
        Language::FirstOrder => {
            v.propositions.clear();
            v.alphabet.clear();
        }
        Language::Regex => {
            v.propositions.clear();
            v.predicates.clear();
            v.objects.clear();
        }
    }
    Ok(v)
}

struct Built {
    expression: String,
    profile: ComplexityProfile,
    dfa: Option<DfaStats>,
}

fn build(expr: &CfgExpression, language: Language, vocab: &Vocabulary, vp: &VocabParams, rng: &mut impl Rng) -> Result<Built, GenError> {
    Ok(match ground_expression(expr, language, vocab, vp, rng)? {
        Grounded::Logic(f) => Built {
            expression: f.to_unicode(),
            profile: formula_complexity(&f, Some(expr.depth)),
            dfa: None,
        },
        Grounded::Regex(r) => Built {
            expression: r.to_string(),
            profile: regex_complexity(&r, Some(expr.depth)),
            dfa: Some(dfa_stats(&minimal_dfa(&r, &vocab.alphabet))),
        },
    })
}

fn sample_batch(
    grammar: &Cfg,
    kind: DatasetKind,
    gp: &GenParams,
    vp: &VocabParams,
    batch: usize,
    seed: u64,
    vocab_seed: u64,
) -> Result<(Vec<Sample>, Vec<BucketCensus>), GenError> {
    let language = grammar.language;
    let vocab = batch_vocabulary(kind, language, vp, vocab_seed)?;
    let leaves = expand_tree(grammar, gp.depth, gp.n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));

    // bucket -> candidate items, each either a raw leaf or an already built sample
    let mut buckets: BTreeMap<i64, Vec<(usize, Option<Built>)>> = BTreeMap::new();
    if gp.metric.needs_dfa() {
        let mut cache: HashMap<String, DfaStats> = HashMap::new();
        for (i, leaf) in leaves.iter().enumerate() {
            let b = build(leaf, language, &vocab, vp, &mut rng)?;
            if let Some(d) = b.dfa {
                cache.entry(b.expression.clone()).or_insert(d);
            }
            let value = match &gp.metric {
                BucketMetric::DfaNodes => b.dfa.map(|d| d.nodes as f64),
                BucketMetric::DfaEdges => b.dfa.map(|d| d.edges as f64),
                _ => b.dfa.map(|d| d.density),
            };
            let Some(value) = value else {
                return Err(GenError::InvalidParams(format!("metric {} needs a regex grammar", gp.metric)));
            };
            buckets.entry(bucket_key(value)).or_default().push((i, Some(b)));
        }
    } else {
        for (i, leaf) in leaves.iter().enumerate() {
            buckets.entry(bucket_key(gp.metric.value_of_expression(leaf))).or_default().push((i, None));
        }
    }

    let mut samples = Vec::new();
    let mut census = Vec::new();
    for (key, mut items) in buckets {
        let take = gp.sample_count.min(items.len());
        let mut picked = index::sample(&mut rng, items.len(), take).into_vec();
        picked.sort_unstable();
        census.push(BucketCensus { batch, value: bucket_value(key), population: items.len(), sampled: take });
        for p in picked {
            let (leaf_ix, built) = std::mem::replace(&mut items[p], (usize::MAX, None));
            let built = match built {
                Some(b) => b,
                None => build(&leaves[leaf_ix], language, &vocab, vp, &mut rng)?,
            };
            samples.push(Sample {
                schema_version: SAMPLE_SCHEMA_VERSION,
                id: format!("{}-{:02}-{:05}", kind.name(), batch, samples.len()),
                kind,
                language,
                expression: built.expression,
                profile: built.profile,
                dfa: built.dfa,
                vocabulary: vocab.clone(),
                batch,
            });
        }
    }
    Ok((samples, census))
}

/// Generates `batches` independent batches from a built-in dataset kind.
pub fn sample_dataset(kind: DatasetKind, gp: &GenParams, vp: &VocabParams, batches: usize) -> Result<Dataset, GenError> {
    let gk = kind
        .grammar_kind(gp.ksat_width)
        .ok_or_else(|| GenError::InvalidParams("custom datasets need a grammar".into()))?;
    sample_dataset_with(&builtin_grammar(gk)?, kind, gp, vp, batches)
}

/// Generates `batches` independent batches from `grammar`. Batches run in
/// parallel; each has its own seed derived from `gp.seed`.
pub fn sample_dataset_with(
    grammar: &Cfg,
    kind: DatasetKind,
    gp: &GenParams,
    vp: &VocabParams,
    batches: usize,
) -> Result<Dataset, GenError> {
    gp.validate()?;
    vp.validate()?;
    grammar.validate()?;
    if batches == 0 {
        return Err(GenError::InvalidParams("batches must be at least 1".into()));
    }
    if gp.metric.needs_dfa() && grammar.language != Language::Regex {
        return Err(GenError::InvalidParams(format!("metric {} needs a regex grammar", gp.metric)));
    }
    let seeds: Vec<(u64, u64)> =
        (0..batches as u64).map(|b| (derive_seed(gp.seed, b), derive_seed(vp.seed, b))).collect();
    let results: Vec<_> = seeds
        .par_iter()
        .enumerate()
        .map(|(b, &(s, vs))| sample_batch(grammar, kind, gp, vp, b, s, vs))
        .collect();
    let mut samples = Vec::new();
    let mut census = Vec::new();
    for r in results {
        let (s, c) = r?;
        samples.extend(s);
        census.extend(c);
    }
    let warnings = unreachable_buckets(&census, &gp.metric, batches);
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Dataset { samples, census, seeds, warnings })
}

/// Integer-valued buckets between the smallest and largest reached value
/// that some batch never reached.
fn unreachable_buckets(census: &[BucketCensus], metric: &BucketMetric, batches: usize) -> Vec<String> {
    if matches!(metric, BucketMetric::DfaDensity) || census.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for b in 0..batches {
        let reached: Vec<i64> = census.iter().filter(|c| c.batch == b).map(|c| c.value as i64).collect();
        let (Some(&lo), Some(&hi)) = (reached.iter().min(), reached.iter().max()) else {
            out.push(format!("batch {b}: no expression completed"));
            continue;
        };
        let missing: Vec<String> = (lo..=hi).filter(|v| !reached.contains(v)).map(|v| v.to_string()).collect();
        if !missing.is_empty() {
            out.push(format!("batch {b}: {metric} buckets not reached: {}", missing.join(", ")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsing::{parse_logic_exact, LogicMode};

    fn astar_b() -> Cfg {
        Cfg::from_json(
            r#"{"language": "regex", "start": "S", "nonterminals": ["S", "A", "B"], "terminals": ["a", "b"],
                "rules": [{"lhs": "S", "rhs": "A B"}, {"lhs": "A", "rhs": "a A"}, {"lhs": "A", "rhs": "ε"},
                          {"lhs": "B", "rhs": "b"}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn astar_b_depths() {
        let leaves = expand_tree(&astar_b(), 2, 50, 1);
        let find = |s: &str| leaves.iter().find(|l| l.text() == s).map(|l| l.depth);
        assert_eq!(find("a b"), Some(2));
        assert_eq!(find("b"), Some(2));
        assert!(leaves.iter().all(|l| l.depth == 2));
    }

    #[test]
    fn depth_one_pl_is_atomic() {
        let g = builtin_grammar(GrammarKind::Pl).unwrap();
        let leaves = expand_tree(&g, 1, 50, 3);
        assert!(!leaves.is_empty());
        for l in &leaves {
            assert!(l.text() == "v" || l.text() == "¬ v", "{}", l.text());
        }
    }

    #[test]
    fn expansion_is_deterministic() {
        let g = builtin_grammar(GrammarKind::Fol).unwrap();
        assert_eq!(expand_tree(&g, 6, 10, 9), expand_tree(&g, 6, 10, 9));
    }

    #[test]
    fn metric_names_round_trip() {
        for m in ["operator_count", "operator:∧", "cfg_depth", "dfa_nodes", "dfa_edges", "dfa_density"] {
            assert_eq!(m.parse::<BucketMetric>().unwrap().to_string(), m);
        }
        assert_eq!("operator:not".parse::<BucketMetric>().unwrap(), BucketMetric::Operator("¬".into()));
        assert!("size".parse::<BucketMetric>().is_err());
    }

    #[test]
    fn desk_pl_is_balanced_and_parses() {
        let gp = GenParams::desk();
        let vp = VocabParams::default();
        let ds = sample_dataset(DatasetKind::Pl, &gp, &vp, 1).unwrap();
        assert!(!ds.samples.is_empty());
        for c in &ds.census {
            assert_eq!(c.sampled, c.population.min(20));
            let n = ds.samples.iter().filter(|s| s.profile.operator_count as f64 == c.value).count();
            assert_eq!(n, c.sampled);
        }
        for s in &ds.samples {
            let f = parse_logic_exact(&s.expression, LogicMode::Pl, Some(&s.vocabulary)).unwrap();
            assert_eq!(f.to_unicode(), s.expression);
        }
    }

    #[test]
    fn regex_density_buckets() {
        let gp = GenParams { metric: BucketMetric::DfaDensity, depth: 6, n: 10, ..GenParams::desk() };
        let ds = sample_dataset(DatasetKind::Regex, &gp, &VocabParams::default(), 1).unwrap();
        assert!(ds.samples.iter().all(|s| s.dfa.is_some()));
        assert!(ds.census.len() > 1);
    }

    #[test]
    fn dfa_metric_on_logic_is_rejected() {
        let gp = GenParams { metric: BucketMetric::DfaNodes, ..GenParams::desk() };
        assert!(sample_dataset(DatasetKind::Pl, &gp, &VocabParams::default(), 1).is_err());
    }

    #[test]
    fn sample_ids_are_unique() {
        let gp = GenParams { depth: 5, n: 8, ..GenParams::desk() };
        let ds = sample_dataset(DatasetKind::FolEnglish, &gp, &VocabParams::default(), 2).unwrap();
        let mut ids: Vec<_> = ds.samples.iter().map(|s| s.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), ds.samples.len());
        assert!(ds.samples.iter().all(|s| s.vocabulary.propositions.is_empty()));
    }
}
