//! Vocabulary generation and grounding of CFG expressions into concrete
//! formulas and regexes.

mod words;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{CfgExpression, Language};
use crate::parsing::{self, LogicMode};
use crate::syntax::{Formula, RegexAst};

pub use words::{NAMES, VERBS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VocabError {
    #[error("invalid vocabulary parameters: {0}")]
    InvalidParams(String),
    #[error("word list exhausted: requested {requested} {what}, only {available} available")]
    WordListExhausted { what: &'static str, requested: usize, available: usize },
    #[error("grounded expression `{text}` failed to parse: {message}")]
    Grounding { text: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum VocabMode {
    #[default]
    Synthetic,
    English,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabParams {
    pub num_propositions: usize,
    pub num_predicates: usize,
    pub num_objects: usize,
    pub min_arity: usize,
    pub max_arity: usize,
    pub free_variable_prob: f64,
    pub alphabet_size: usize,
    pub mode: VocabMode,
    pub seed: u64,
}

impl Default for VocabParams {
    fn default() -> Self {
        Self {
            num_propositions: 12,
            num_predicates: 8,
            num_objects: 12,
            min_arity: 1,
            max_arity: 2,
            free_variable_prob: 0.25,
            alphabet_size: 2,
            mode: VocabMode::Synthetic,
            seed: 0,
        }
    }
}

impl VocabParams {
    pub fn validate(&self) -> Result<(), VocabError> {
        let bad = |m: &str| Err(VocabError::InvalidParams(m.to_string()));
        if self.num_propositions == 0 || self.num_predicates == 0 || self.num_objects == 0 {
            return bad("counts must be at least 1");
        }
        if self.min_arity == 0 || self.min_arity > self.max_arity {
            return bad("arity bounds must satisfy 1 <= min <= max");
        }
        if !(0.0..=1.0).contains(&self.free_variable_prob) {
            return bad("free_variable_prob must lie in [0, 1]");
        }
        if self.alphabet_size == 0 || self.alphabet_size > 10 {
            return bad("alphabet_size must lie in 1..=10");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposition {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
}

/// Names available to a dataset. Variables are not listed; they are named
/// `x1, x2, ...` by [`variable_name`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub propositions: Vec<Proposition>,
    pub predicates: Vec<Predicate>,
    pub objects: Vec<String>,
    pub alphabet: Vec<char>,
}

pub fn variable_name(i: usize) -> String {
    format!("x{i}")
}

impl Vocabulary {
    pub fn has_proposition(&self, name: &str) -> bool {
        self.propositions.iter().any(|p| p.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&Predicate> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.objects.iter().any(|o| o == name)
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.has_proposition(name) || self.predicate(name).is_some() || self.has_object(name)
    }

    /// A vocabulary whose names are exactly those used by `f`.
    pub fn from_formula(f: &Formula) -> Self {
        Self {
            propositions: f
                .propositions()
                .into_iter()
                .map(|name| Proposition { name, gloss: None })
                .collect(),
            predicates: f
                .predicates()
                .into_iter()
                .map(|(name, arity)| Predicate { name, arity, gloss: None })
                .collect(),
            objects: f.objects(),
            alphabet: Vec::new(),
        }
    }

    pub fn with_alphabet(size: usize) -> Self {
        Self {
            propositions: Vec::new(),
            predicates: Vec::new(),
            objects: Vec::new(),
            alphabet: alphabet(size),
        }
    }
}

pub fn alphabet(size: usize) -> Vec<char> {
    (0..size as u32).filter_map(|d| char::from_digit(d, 10)).collect()
}

pub fn make_vocabulary(p: &VocabParams) -> Result<Vocabulary, VocabError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let propositions = (1..=p.num_propositions)
        .map(|i| Proposition { name: format!("p{i}"), gloss: None })
        .collect();
    let (pred_names, objects): (Vec<String>, Vec<String>) = match p.mode {
        VocabMode::Synthetic => (
            (1..=p.num_predicates).map(|i| format!("pred{i}")).collect(),
            (1..=p.num_objects).map(|i| format!("p{i}")).collect(),
        ),
        VocabMode::English => (
            pick_words(VERBS, p.num_predicates, "predicate names", &mut rng)?,
            pick_words(NAMES, p.num_objects, "object names", &mut rng)?,
        ),
    };
    let predicates = pred_names
        .into_iter()
        .map(|name| {
            let arity = rng.random_range(p.min_arity..=p.max_arity);
            let gloss = match p.mode {
                VocabMode::English => Some(english_gloss(&name, arity)),
                VocabMode::Synthetic => None,
            };
            Predicate { name, arity, gloss }
        })
        .collect();
    Ok(Vocabulary { propositions, predicates, objects, alphabet: alphabet(p.alphabet_size) })
}

fn pick_words(
    list: &[&str],
    count: usize,
    what: &'static str,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<String>, VocabError> {
    if count > list.len() {
        return Err(VocabError::WordListExhausted { what, requested: count, available: list.len() });
    }
    let mut words: Vec<&str> = list.to_vec();
    words.shuffle(rng);
    Ok(words[..count].iter().map(|w| w.to_string()).collect())
}

fn english_gloss(verb: &str, arity: usize) -> String {
    let v = verb.to_lowercase();
    match arity {
        1 => format!("?p0 does {v}"),
        2 => format!("?p0 does {v} ?p1"),
        _ => format!("{v} holds for the given arguments"),
    }
}

/// Result of grounding a CFG expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Grounded {
    Logic(Formula),
    Regex(RegexAst),
}

impl Grounded {
    pub fn text(&self) -> String {
        match self {
            Grounded::Logic(f) => f.to_unicode(),
            Grounded::Regex(r) => r.to_string(),
        }
    }
}

/// Replaces the placeholder terminals `v`, `p`, `f` and `Σ` of a CFG
/// expression with vocabulary entries.
///
/// Quantifier variables are named `x1, x2, ...` left to right. Every argument
/// slot of a grounded predicate receives a uniformly chosen object, which is
/// replaced with probability `free_variable_prob` by a variable bound in the
/// quantifier prefix. Without quantifiers the constant is kept.
pub fn ground_expression(
    expr: &CfgExpression,
    language: Language,
    vocab: &Vocabulary,
    params: &VocabParams,
    rng: &mut impl Rng,
) -> Result<Grounded, VocabError> {
    match language {
        Language::Propositional => {
            let mut text = String::new();
            for tok in &expr.tokens {
                if tok == "v" {
                    let i = rng.random_range(0..vocab.propositions.len());
                    text.push_str(&vocab.propositions[i].name);
                } else {
                    text.push_str(tok);
                }
                text.push(' ');
            }
            parse_logic_grounded(&text, LogicMode::Pl, vocab)
        }
        Language::FirstOrder => {
            let quantified = expr.tokens.iter().filter(|t| t.as_str() == "f").count();
            let vars: Vec<String> = (1..=quantified).map(variable_name).collect();
            let mut next_var = 0;
            let mut text = String::new();
            for tok in &expr.tokens {
                match tok.as_str() {
                    "f" => {
                        text.push_str(&vars[next_var]);
                        next_var += 1;
                    }
                    "p" => {
                        let pred = &vocab.predicates[rng.random_range(0..vocab.predicates.len())];
                        text.push_str(&pred.name);
                        text.push('(');
                        for a in 0..pred.arity {
                            if a > 0 {
                                text.push_str(", ");
                            }
                            let obj = &vocab.objects[rng.random_range(0..vocab.objects.len())];
                            let to_var = rng.random_bool(params.free_variable_prob);
                            if to_var && !vars.is_empty() {
                                text.push_str(&vars[rng.random_range(0..vars.len())]);
                            } else {
                                text.push_str(obj);
                            }
                        }
                        text.push(')');
                    }
                    other => text.push_str(other),
                }
                text.push(' ');
            }
            parse_logic_grounded(&text, LogicMode::Fol, vocab)
        }
        Language::Regex => {
            let mut text = String::new();
            for tok in &expr.tokens {
                if tok == "Σ" {
                    text.push(vocab.alphabet[rng.random_range(0..vocab.alphabet.len())]);
                } else {
                    text.push_str(tok);
                }
            }
            parsing::parse_regex(&text, &vocab.alphabet)
                .map(Grounded::Regex)
                .map_err(|e| VocabError::Grounding { text, message: e.to_string() })
        }
    }
}

fn parse_logic_grounded(text: &str, mode: LogicMode, vocab: &Vocabulary) -> Result<Grounded, VocabError> {
    parsing::parse_logic_exact(text, mode, Some(vocab))
        .map(Grounded::Logic)
        .map_err(|e| VocabError::Grounding { text: text.trim().to_string(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Term;

    fn expr(tokens: &str, depth: usize) -> CfgExpression {
        CfgExpression { tokens: tokens.split_whitespace().map(String::from).collect(), depth }
    }

    #[test]
    fn synthetic_names() {
        let v = make_vocabulary(&VocabParams::default()).unwrap();
        let names: Vec<_> = v.propositions.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names.len(), 12);
        assert_eq!(names[0], "p1");
        assert_eq!(names[11], "p12");
        assert!(v.predicates.iter().all(|p| p.name.starts_with("pred") && (1..=2).contains(&p.arity)));
        assert_eq!(v.alphabet, vec!['0', '1']);
    }

    #[test]
    fn english_names_come_from_word_lists() {
        let p = VocabParams { mode: VocabMode::English, seed: 7, ..Default::default() };
        let v = make_vocabulary(&p).unwrap();
        assert!(v.predicates.iter().all(|pr| VERBS.contains(&pr.name.as_str())));
        assert!(v.objects.iter().all(|o| NAMES.contains(&o.as_str())));
        assert!(VERBS.contains(&"Boom") && VERBS.contains(&"Exercise"));
        assert!(NAMES.contains(&"Richard") && NAMES.contains(&"Yolonda"));
    }

    #[test]
    fn word_lists_are_large_and_disjoint() {
        assert!(VERBS.len() >= 200 && NAMES.len() >= 200);
        assert!(VERBS.iter().all(|v| !NAMES.contains(v)));
        let mut all: Vec<_> = VERBS.iter().chain(NAMES.iter()).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), VERBS.len() + NAMES.len());
    }

    #[test]
    fn same_seed_same_vocabulary() {
        let p = VocabParams { mode: VocabMode::English, seed: 42, ..Default::default() };
        assert_eq!(make_vocabulary(&p).unwrap(), make_vocabulary(&p).unwrap());
    }

    #[test]
    fn exhausted_word_list_is_an_error() {
        let p = VocabParams { mode: VocabMode::English, num_objects: 10_000, ..Default::default() };
        assert!(matches!(make_vocabulary(&p), Err(VocabError::WordListExhausted { .. })));
    }

    #[test]
    fn invalid_params_rejected() {
        let p = VocabParams { min_arity: 3, max_arity: 2, ..Default::default() };
        assert!(p.validate().is_err());
        let p = VocabParams { free_variable_prob: 1.5, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn pl_clause_grounds_to_vocabulary_atoms() {
        let params = VocabParams::default();
        let v = make_vocabulary(&params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = ground_expression(&expr("( v ∨ ¬ v ∨ ¬ v )", 2), Language::Propositional, &v, &params, &mut rng).unwrap();
        let Grounded::Logic(f) = g else { panic!() };
        let Formula::Or(cs) = &f else { panic!("{f}") };
        assert_eq!(cs.len(), 3);
        assert!(f.propositions().iter().all(|p| v.has_proposition(p)));
    }

    #[test]
    fn zero_probability_keeps_constants() {
        let params = VocabParams { free_variable_prob: 0.0, ..Default::default() };
        let v = make_vocabulary(&params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = ground_expression(&expr("( ∀ f . ( p ∧ ¬ p ) )", 3), Language::FirstOrder, &v, &params, &mut rng).unwrap();
            let Grounded::Logic(f) = g else { panic!() };
            let mut vars = 0;
            f.visit(&mut |n| {
                if let Formula::Pred(_, args) = n {
                    vars += args.iter().filter(|a| matches!(a, Term::Var(_))).count();
                }
            });
            assert_eq!(vars, 0);
        }
    }

    #[test]
    fn probability_one_binds_the_quantified_variable() {
        let params = VocabParams { free_variable_prob: 1.0, min_arity: 1, max_arity: 1, ..Default::default() };
        let v = make_vocabulary(&params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = ground_expression(&expr("( ∀ f . p )", 2), Language::FirstOrder, &v, &params, &mut rng).unwrap();
        let Grounded::Logic(Formula::Forall(x, body)) = g else { panic!() };
        assert_eq!(x, "x1");
        let Formula::Pred(name, args) = *body else { panic!() };
        assert!(name.starts_with("pred"));
        assert_eq!(args, vec![Term::Var("x1".into())]);
    }

    #[test]
    fn no_quantifier_means_no_variables() {
        let params = VocabParams { free_variable_prob: 1.0, ..Default::default() };
        let v = make_vocabulary(&params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = ground_expression(&expr("( p ∨ p )", 2), Language::FirstOrder, &v, &params, &mut rng).unwrap();
        let Grounded::Logic(f) = g else { panic!() };
        assert!(f.is_closed());
        assert!(f.bound_variables().is_empty());
        assert!(!f.objects().is_empty());
    }

    #[test]
    fn regex_grounding_uses_alphabet() {
        let params = VocabParams { alphabet_size: 3, ..Default::default() };
        let v = make_vocabulary(&params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = ground_expression(&expr("( Σ * ) * Σ", 3), Language::Regex, &v, &params, &mut rng).unwrap();
        let Grounded::Regex(r) = g else { panic!() };
        assert!(r.to_string().chars().filter(|c| c.is_ascii_digit()).all(|c| v.alphabet.contains(&c)));
    }
}
