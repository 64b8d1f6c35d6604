//! Deterministic stand-ins for language models.
//!
//! The mocks recognise the task from the tags the prompt templates emit and
//! read the payload after the last tag. The oracle mocks describe
//! expressions in a small word grammar that never uses operator glyphs and
//! decode it back exactly.

use std::sync::Arc;
use std::time::Duration;

use super::templates::{payload_after, FORMULA_TAG, JUDGE_TAG_1, JUDGE_TAG_2, NL_TAG};
use super::{LanguageModel, TransportError};
use crate::logic_verifier::{logic_equivalent, FolBudget};
use crate::parsing::{parse_logic_exact, parse_regex_exact, LogicMode};
use crate::regex_verifier::regex_equivalent;
use crate::syntax::{Formula, RegexAst, Term};

pub const MOCK_NAMES: [&str; 5] = ["echo", "perfect-oracle", "negation-dropper", "noncompliant", "judge-always-yes"];

const DIGITS: [char; 10] = ['0', '1', '2', '3', '4', '5', '6', '7', '8', '9'];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockKind {
    Echo,
    PerfectOracle,
    NegationDropper,
    NonCompliant,
    JudgeAlwaysYes,
}

impl MockKind {
    pub fn name(self) -> &'static str {
        match self {
            MockKind::Echo => "echo",
            MockKind::PerfectOracle => "perfect-oracle",
            MockKind::NegationDropper => "negation-dropper",
            MockKind::NonCompliant => "noncompliant",
            MockKind::JudgeAlwaysYes => "judge-always-yes",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let name = name.strip_prefix("mock:").unwrap_or(name);
        [
            MockKind::Echo,
            MockKind::PerfectOracle,
            MockKind::NegationDropper,
            MockKind::NonCompliant,
            MockKind::JudgeAlwaysYes,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }
}

pub fn mock_model(name: &str) -> Option<Arc<dyn LanguageModel>> {
    MockKind::from_name(name).map(|kind| Arc::new(MockModel { kind }) as Arc<dyn LanguageModel>)
}

#[derive(Debug, Clone, Copy)]
pub struct MockModel {
    pub kind: MockKind,
}

const REFUSAL: &str = "I am sorry, but I cannot help with this request.";

enum Request<'a> {
    Informalize { regex: bool, payload: &'a str },
    Autoformalize { regex: bool, payload: &'a str },
    Judge { regex: bool, first: &'a str, second: &'a str },
    Other(&'a str),
}

fn classify(prompt: &str) -> Request<'_> {
    let regex = prompt.contains("regular expression");
    if let Some(rest) = payload_after(prompt, JUDGE_TAG_1) {
        let (first, second) = match rest.find(JUDGE_TAG_2) {
            Some(i) => (rest[..i].trim(), rest[i + JUDGE_TAG_2.len()..].trim()),
            None => (rest, ""),
        };
        return Request::Judge { regex, first, second };
    }
    if let Some(payload) = payload_after(prompt, NL_TAG) {
        return Request::Autoformalize { regex, payload };
    }
    if let Some(payload) = payload_after(prompt, FORMULA_TAG) {
        return Request::Informalize { regex, payload };
    }
    Request::Other(prompt)
}

impl LanguageModel for MockModel {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let req = classify(prompt);
        Ok(match self.kind {
            MockKind::NonCompliant => REFUSAL.to_string(),
            MockKind::JudgeAlwaysYes => "They look the same to me.\n[Answer] yes".to_string(),
            MockKind::Echo => match req {
                Request::Informalize { payload, .. } | Request::Autoformalize { payload, .. } => payload.to_string(),
                Request::Judge { first, second, .. } => format!("{first}\n{second}"),
                Request::Other(p) => p.to_string(),
            },
            MockKind::PerfectOracle | MockKind::NegationDropper => {
                let drop = self.kind == MockKind::NegationDropper;
                match req {
                    Request::Informalize { regex: true, payload } => match parse_regex_exact(payload, &DIGITS) {
                        Ok(r) => describe_regex(&r),
                        Err(_) => REFUSAL.to_string(),
                    },
                    Request::Informalize { regex: false, payload } => match parse_logic_exact(payload, LogicMode::Fol, None) {
                        Ok(f) => describe_formula(&if drop { drop_negation(&f) } else { f }),
                        Err(_) => REFUSAL.to_string(),
                    },
                    Request::Autoformalize { regex: true, payload } => {
                        decode_regex(payload).map(|r| r.to_string()).unwrap_or_else(|| REFUSAL.to_string())
                    }
                    Request::Autoformalize { regex: false, payload } => {
                        decode_formula(payload).map(|f| f.to_unicode()).unwrap_or_else(|| REFUSAL.to_string())
                    }
                    Request::Judge { regex, first, second } => judge(regex, first, second),
                    Request::Other(_) => REFUSAL.to_string(),
                }
            }
        })
    }
}

fn judge(regex: bool, first: &str, second: &str) -> String {
    let same = if regex {
        match (parse_regex_exact(first, &DIGITS), parse_regex_exact(second, &DIGITS)) {
            (Ok(a), Ok(b)) => regex_equivalent(&a, &b, &DIGITS).is_equivalent(),
            _ => false,
        }
    } else {
        match (parse_logic_exact(first, LogicMode::Fol, None), parse_logic_exact(second, LogicMode::Fol, None)) {
            (Ok(a), Ok(b)) => logic_equivalent(&a, &b, &dropper_budget()).is_equivalent(),
            _ => false,
        }
    };
    format!("Checked both expressions.\n[Answer] {}", if same { "yes" } else { "no" })
}

/// Step-bounded only, so mock answers do not depend on machine speed.
fn dropper_budget() -> FolBudget {
    FolBudget { timeout: Duration::from_secs(3600), ..FolBudget::default() }
}

/// Pre-order list of the negation nodes, as paths of child indices.
fn negation_paths(f: &Formula, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    match f {
        Formula::Not(g) => {
            out.push(path.clone());
            path.push(0);
            negation_paths(g, path, out);
            path.pop();
        }
        Formula::And(gs) | Formula::Or(gs) => {
            for (i, g) in gs.iter().enumerate() {
                path.push(i);
                negation_paths(g, path, out);
                path.pop();
            }
        }
        Formula::Forall(_, g) | Formula::Exists(_, g) => {
            path.push(0);
            negation_paths(g, path, out);
            path.pop();
        }
        Formula::Prop(_) | Formula::Pred(..) => {}
    }
}

fn remove_at(f: &Formula, path: &[usize]) -> Formula {
    let Some((&head, rest)) = path.split_first() else {
        return match f {
            Formula::Not(g) => (**g).clone(),
            other => other.clone(),
        };
    };
    match f {
        Formula::Not(g) => Formula::not(remove_at(g, rest)),
        Formula::And(gs) | Formula::Or(gs) => {
            let mut gs = gs.clone();
            gs[head] = remove_at(&gs[head], rest);
            if matches!(f, Formula::And(_)) {
                Formula::And(gs)
            } else {
                Formula::Or(gs)
            }
        }
        Formula::Forall(x, g) => Formula::forall(x.clone(), remove_at(g, rest)),
        Formula::Exists(x, g) => Formula::exists(x.clone(), remove_at(g, rest)),
        other => other.clone(),
    }
}

fn strip_negations(f: &Formula) -> Formula {
    match f {
        Formula::Not(g) => strip_negations(g),
        Formula::And(gs) => Formula::And(gs.iter().map(strip_negations).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(strip_negations).collect()),
        Formula::Forall(x, g) => Formula::forall(x.clone(), strip_negations(g)),
        Formula::Exists(x, g) => Formula::exists(x.clone(), strip_negations(g)),
        other => other.clone(),
    }
}

/// Deletes the first negation whose removal changes the meaning. When no
/// single deletion does, all negations are deleted; failing that, the first
/// one. Negation-free formulas come back unchanged.
pub fn drop_negation(f: &Formula) -> Formula {
    let mut paths = Vec::new();
    negation_paths(f, &mut Vec::new(), &mut paths);
    if paths.is_empty() {
        return f.clone();
    }
    let budget = dropper_budget();
    for p in &paths {
        let g = remove_at(f, p);
        if logic_equivalent(f, &g, &budget).is_not_equivalent() {
            return g;
        }
    }
    let all = strip_negations(f);
    if logic_equivalent(f, &all, &budget).is_not_equivalent() {
        return all;
    }
    remove_at(f, &paths[0])
}

// ---------------------------------------------------------------------------
// Word encoding

const RESERVED: [&str; 14] =
    ["the", "negation", "of", "conjunction", "disjunction", "and", "or", "end", "for", "every", "it", "holds", "there", "exists"];

/// Describes a formula in words, e.g. `¬p1` becomes "the negation of p1".
pub fn describe_formula(f: &Formula) -> String {
    let mut out = Vec::new();
    encode_formula(f, &mut out);
    out.join(" ")
}

fn encode_formula(f: &Formula, out: &mut Vec<String>) {
    match f {
        Formula::Prop(p) => out.push(p.clone()),
        Formula::Pred(name, args) => {
            out.push(name.clone());
            out.push("of".into());
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push("and".into());
                }
                out.push(a.name().to_string());
            }
            out.push("end".into());
        }
        Formula::Not(g) => {
            out.extend(["the", "negation", "of"].map(String::from));
            encode_formula(g, out);
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let (word, sep) = if matches!(f, Formula::And(_)) { ("conjunction", "and") } else { ("disjunction", "or") };
            out.extend(["the", word, "of"].map(String::from));
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    out.push(sep.into());
                }
                encode_formula(g, out);
            }
            out.push("end".into());
        }
        Formula::Forall(x, g) => {
            out.extend(["for", "every", x.as_str(), "it", "holds", "that"].map(String::from));
            encode_formula(g, out);
        }
        Formula::Exists(x, g) => {
            out.extend(["there", "exists", x.as_str(), "such", "that"].map(String::from));
            encode_formula(g, out);
        }
    }
}

struct Words<'a> {
    words: Vec<&'a str>,
    pos: usize,
    bound: Vec<String>,
}

impl<'a> Words<'a> {
    fn next(&mut self) -> Option<&'a str> {
        let w = self.words.get(self.pos).copied();
        self.pos += 1;
        w
    }

    fn peek(&self) -> Option<&'a str> {
        self.words.get(self.pos).copied()
    }

    fn expect(&mut self, seq: &[&str]) -> Option<()> {
        seq.iter().all(|w| self.next() == Some(w)).then_some(())
    }

    fn formula(&mut self) -> Option<Formula> {
        match self.next()? {
            "the" => match self.next()? {
                "negation" => {
                    self.expect(&["of"])?;
                    Some(Formula::not(self.formula()?))
                }
                w @ ("conjunction" | "disjunction") => {
                    self.expect(&["of"])?;
                    let sep = if w == "conjunction" { "and" } else { "or" };
                    let mut gs = vec![self.formula()?];
                    loop {
                        match self.next()? {
                            "end" => break,
                            s if s == sep => gs.push(self.formula()?),
                            _ => return None,
                        }
                    }
                    (gs.len() >= 2).then(|| if sep == "and" { Formula::And(gs) } else { Formula::Or(gs) })
                }
                _ => None,
            },
            "for" => {
                self.expect(&["every"])?;
                let x = self.next()?.to_string();
                self.expect(&["it", "holds", "that"])?;
                self.bound.push(x.clone());
                let body = self.formula();
                self.bound.pop();
                Some(Formula::forall(x, body?))
            }
            "there" => {
                self.expect(&["exists"])?;
                let x = self.next()?.to_string();
                self.expect(&["such", "that"])?;
                self.bound.push(x.clone());
                let body = self.formula();
                self.bound.pop();
                Some(Formula::exists(x, body?))
            }
            name if !RESERVED.contains(&name) => {
                if self.peek() != Some("of") {
                    return Some(Formula::prop(name));
                }
                self.next();
                let mut args = Vec::new();
                loop {
                    let a = self.next()?;
                    args.push(if self.bound.iter().any(|b| b == a) {
                        Term::Var(a.to_string())
                    } else {
                        Term::Object(a.to_string())
                    });
                    match self.next()? {
                        "end" => break,
                        "and" => {}
                        _ => return None,
                    }
                }
                Some(Formula::pred(name, args))
            }
            _ => None,
        }
    }
}

pub fn decode_formula(text: &str) -> Option<Formula> {
    let mut w = Words { words: text.split_whitespace().collect(), pos: 0, bound: Vec::new() };
    let f = w.formula()?;
    (w.pos == w.words.len()).then_some(f)
}

/// Describes a regex in words, e.g. `0*` becomes "zero or more repetitions
/// of the symbol 0".
pub fn describe_regex(r: &RegexAst) -> String {
    match r {
        RegexAst::Symbol(c) => format!("the symbol {c}"),
        RegexAst::Epsilon => "the empty string".into(),
        RegexAst::Concat(rs) => {
            let parts: Vec<String> = rs.iter().map(describe_regex).collect();
            format!("a sequence of {} end", parts.join(" then "))
        }
        RegexAst::Group(g) => format!("a group holding {} end", describe_regex(g)),
        RegexAst::Star(g) => format!("zero or more repetitions of {}", describe_regex(g)),
    }
}

fn regex_words(w: &mut Words<'_>) -> Option<RegexAst> {
    match (w.next()?, w.next()?) {
        ("the", "symbol") => {
            let s = w.next()?;
            let mut cs = s.chars();
            let c = cs.next()?;
            cs.next().is_none().then_some(RegexAst::Symbol(c))
        }
        ("the", "empty") => w.expect(&["string"]).map(|_| RegexAst::Epsilon),
        ("a", "sequence") => {
            w.expect(&["of"])?;
            let mut rs = vec![regex_words(w)?];
            loop {
                match w.next()? {
                    "end" => break,
                    "then" => rs.push(regex_words(w)?),
                    _ => return None,
                }
            }
            Some(RegexAst::Concat(rs))
        }
        ("a", "group") => {
            w.expect(&["holding"])?;
            let g = regex_words(w)?;
            w.expect(&["end"])?;
            Some(RegexAst::Group(Box::new(g)))
        }
        ("zero", "or") => {
            w.expect(&["more", "repetitions", "of"])?;
            Some(RegexAst::Star(Box::new(regex_words(w)?)))
        }
        _ => None,
    }
}

pub fn decode_regex(text: &str) -> Option<RegexAst> {
    let mut w = Words { words: text.split_whitespace().collect(), pos: 0, bound: Vec::new() };
    let r = regex_words(&mut w)?;
    (w.pos == w.words.len()).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::Language;
    use crate::llm::templates::{Payload, PromptTemplate, Task};
    use crate::parsing::{leakage_check, FormalLanguage};
    use crate::vocabulary::Vocabulary;

    fn fol(s: &str) -> Formula {
        parse_logic_exact(s, LogicMode::Fol, None).unwrap()
    }

    fn round_trip(model: &str, formula: &str, lang: Language) -> String {
        let m = mock_model(model).unwrap();
        let vocab = Vocabulary::with_alphabet(2);
        let p = PromptTemplate::new(Task::Informalize, lang, 0).render(&Payload::Formula(formula.into()), &vocab).unwrap();
        let nl = m.complete(&p).unwrap();
        let p = PromptTemplate::new(Task::Autoformalize, lang, 0).render(&Payload::Nl(nl), &vocab).unwrap();
        m.complete(&p).unwrap()
    }

    #[test]
    fn oracle_describes_negation_in_words() {
        assert_eq!(describe_formula(&fol("¬p1")), "the negation of p1");
        assert_eq!(decode_formula("the negation of p1"), Some(fol("¬p1")));
        assert_eq!(round_trip("perfect-oracle", "¬p1", Language::Propositional), "¬p1");
    }

    #[test]
    fn oracle_round_trips_fol_and_regex() {
        for s in ["∀x1. ∃x2. (pred3(p5, x1) ∨ ¬pred1(x2))", "(p1 ∧ (p2 ∨ p3) ∧ ¬¬p4)", "∃x1.¬pred2(p4)"] {
            let f = fol(s);
            let nl = describe_formula(&f);
            assert!(leakage_check(&nl, FormalLanguage::Logic(LogicMode::Fol), &Vocabulary::from_formula(&f)).is_ok(), "{nl}");
            assert_eq!(decode_formula(&nl), Some(f));
        }
        for s in ["(1*)0*", "(01*)", "0", "((10)*)*1"] {
            if let Ok(r) = parse_regex_exact(s, &['0', '1']) {
                let nl = describe_regex(&r);
                assert!(leakage_check(&nl, FormalLanguage::Regex, &Vocabulary::with_alphabet(2)).is_ok(), "{nl}");
                assert_eq!(decode_regex(&nl), Some(r));
            }
        }
        assert_eq!(round_trip("perfect-oracle", "(1*)0*", Language::Regex), "(1*)0*");
    }

    #[test]
    fn dropper_changes_meaning_only_with_negation() {
        assert_eq!(round_trip("negation-dropper", "¬p1", Language::Propositional), "p1");
        assert_eq!(round_trip("negation-dropper", "(p1 ∧ p2)", Language::Propositional), "(p1 ∧ p2)");
        let f = fol("(¬p1 ∨ p1 ∨ ¬p2 ∨ p2)");
        let g = drop_negation(&f);
        assert!(logic_equivalent(&f, &g, &FolBudget::default()).is_not_equivalent());
    }

    #[test]
    fn echo_and_noncompliant() {
        let vocab = Vocabulary::with_alphabet(0);
        let p = PromptTemplate::new(Task::Informalize, Language::Propositional, 2)
            .render(&Payload::Formula("(p1 ∧ p2)".into()), &vocab)
            .unwrap();
        assert_eq!(mock_model("echo").unwrap().complete(&p).unwrap(), "(p1 ∧ p2)");
        let out = mock_model("noncompliant").unwrap().complete(&p).unwrap();
        assert!(parse_logic_exact(&out, LogicMode::Pl, None).is_err());
    }

    #[test]
    fn judges() {
        let t = PromptTemplate::new(Task::Judge, Language::FirstOrder, 0);
        let p = t.render(&Payload::Pair("¬∀x. Man(x)".into(), "∃y. ¬Man(y)".into()), &Vocabulary::with_alphabet(0)).unwrap();
        assert!(mock_model("perfect-oracle").unwrap().complete(&p).unwrap().ends_with("[Answer] yes"));
        let p = t.render(&Payload::Pair("∃x1.¬pred2(p4)".into(), "∃x1.¬pred2(x1)".into()), &Vocabulary::with_alphabet(0)).unwrap();
        assert!(mock_model("perfect-oracle").unwrap().complete(&p).unwrap().ends_with("[Answer] no"));
        assert!(mock_model("judge-always-yes").unwrap().complete(&p).unwrap().ends_with("[Answer] yes"));
    }

    #[test]
    fn stateless() {
        let m = mock_model("negation-dropper").unwrap();
        let p = PromptTemplate::new(Task::Informalize, Language::Propositional, 0)
            .render(&Payload::Formula("(¬p3 ∧ ¬p7)".into()), &Vocabulary::with_alphabet(0))
            .unwrap();
        assert_eq!(m.complete(&p).unwrap(), m.complete(&p).unwrap());
    }
}
