//! Prompt templates and judge-answer parsing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::Language;
use crate::parsing::{parse_logic_exact, LogicMode};
use crate::syntax::Formula;
use crate::vocabulary::Vocabulary;

/// Default budget on the estimated prompt length in tokens.
pub const DEFAULT_TOKEN_BUDGET: usize = 4096;

pub const FORMULA_TAG: &str = "[FORMULA]";
pub const NL_TAG: &str = "[NL DESCRIPTION]";
pub const JUDGE_TAG_1: &str = "[Formula 1]";
pub const JUDGE_TAG_2: &str = "[Formula 2]";
pub const ANSWER_TAG: &str = "[Answer]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Informalize,
    Autoformalize,
    Judge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Formula(String),
    Nl(String),
    Pair(String, String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("payload does not match the {0:?} task")]
    PayloadMismatch(Task),
    #[error("`{0}` is missing from the vocabulary")]
    MissingVocabulary(String),
    #[error("prompt needs about {estimated} tokens, budget is {budget}")]
    TooLong { estimated: usize, budget: usize },
    #[error("shot count must be 0 or 2, got {0}")]
    BadShots(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub task: Task,
    pub language: Language,
    /// 0 or 2.
    pub shots: u8,
    /// Whether the vocabulary carries English glosses to list.
    pub english: bool,
    pub token_budget: usize,
}

const LOGIC_EXAMPLES: [(&str, &str); 2] = [
    (
        "(¬p2 ∨ p1 ∨ ¬p2)",
        "Disjunctive predicate logic expression consisting of three components: the negation of a proposition labeled p2, the proposition p1, and again the negation of p2.",
    ),
    ("(¬¬p2 ∧ ¬(p3 ∨ p1))", "The expression asserts that p2 is not false while both p3 and p1 are not true."),
];

const REGEX_EXAMPLES: [(&str, &str); 2] = [
    (
        "(1*)0*",
        "The regex matches strings that starts with any number (including none) of the digit '1', followed by any number (including none) of the digit '0'.",
    ),
    ("(01*)", "The regex matches strings that begin with a '0' followed directly by any number (including none) of '1's."),
];

fn language_name(l: Language) -> &'static str {
    match l {
        Language::Propositional => "propositional logic",
        Language::FirstOrder => "first-order logic",
        Language::Regex => "regular expression",
    }
}

/// Rough token estimate: four characters per token.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

impl PromptTemplate {
    pub fn new(task: Task, language: Language, shots: u8) -> Self {
        Self { task, language, shots, english: false, token_budget: DEFAULT_TOKEN_BUDGET }
    }

    pub fn render(&self, payload: &Payload, vocab: &Vocabulary) -> Result<String, PromptError> {
        if self.shots != 0 && self.shots != 2 {
            return Err(PromptError::BadShots(self.shots));
        }
        let text = match (self.task, payload) {
            (Task::Informalize, Payload::Formula(f)) => self.informalize(f, vocab)?,
            (Task::Autoformalize, Payload::Nl(nl)) => self.autoformalize(nl, vocab),
            (Task::Judge, Payload::Pair(a, b)) => self.judge(a, b),
            _ => return Err(PromptError::PayloadMismatch(self.task)),
        };
        let estimated = estimate_tokens(&text);
        if estimated > self.token_budget {
            return Err(PromptError::TooLong { estimated, budget: self.token_budget });
        }
        Ok(text)
    }

    fn informalize(&self, formula: &str, vocab: &Vocabulary) -> Result<String, PromptError> {
        let mut out = String::from("[TASK]\n");
        if self.language == Language::Regex {
            out.push_str(
                "Your task is to convert the regular expression appear after [REGEX], to a natural description that represents the regular expression. Only natural language terms are allowed to be used and do not copy the regular expression in your description. Your description should allow one to reconstruct the regular expression without having access to it, so make sure to use the correctly account for scoping. You may use terms verbatim as specified in the vocabulary below.\n\n",
            );
            out.push_str("[VOCABULARY]\nyou may use symbols from the vocabulary\nyou can use *\n");
            out.push_str(&format!("The symbols are: {}\n\n", join_chars(&vocab.alphabet)));
            if self.shots == 2 {
                for (i, (re, nl)) in REGEX_EXAMPLES.iter().enumerate() {
                    out.push_str(&format!("[EXAMPLE {}]\n{re}\n{nl}\n\n", i + 1));
                }
            }
            out.push_str(&format!("{FORMULA_TAG}\n{formula}"));
            return Ok(out);
        }
        out.push_str(&format!(
            "Your task is to convert a {} formula, appearing after [FORMULA], to a natural description that represents the formula. Only natural language terms are allowed to be used and do not copy the formula in your description. Your description should allow one to reconstruct the formula without having access to it, so make sure to use the correct names in your description. Explicitly describe the predicates. You may use terms verbatim as specified in the vocabulary below.\n\n",
            language_name(self.language)
        ));
        if self.shots == 2 {
            for (i, (f, nl)) in LOGIC_EXAMPLES.iter().enumerate() {
                out.push_str(&format!("[EXAMPLE {}]\n{f}\n{nl}\n\n", i + 1));
            }
        }
        out.push_str("[VOCABULARY]\n∨ represents disjunction\n∧ represents conjunction\n¬ represents negation\n( and ) represent parentheses\npropositions can be used verbatim\n");
        let mode = if self.language == Language::FirstOrder { LogicMode::Fol } else { LogicMode::Pl };
        let parsed = parse_logic_exact(formula, mode, None).ok();
        if self.language == Language::FirstOrder {
            out.push_str("predicates can be used verbatim\n");
            out.push_str("∀ <x1> <x2> ... <xn>. represents universal quantification with x1... representing free variables\n");
            out.push_str("∃ <x1> <x2> ... <xn>. represents existential quantification with x1... representing free variables\n");
            if let Some(f) = &parsed {
                out.push_str(&self.fol_names(f, vocab)?);
            }
        } else if let Some(f) = &parsed {
            let mut items = Vec::new();
            for p in first_appearance_props(f) {
                let entry = vocab.propositions.iter().find(|x| x.name == p);
                match entry {
                    None if !vocab.propositions.is_empty() => return Err(PromptError::MissingVocabulary(p)),
                    Some(x) if self.english && x.gloss.is_some() => {
                        items.push(format!("{p} ({})", x.gloss.as_deref().unwrap_or_default()))
                    }
                    _ => items.push(p),
                }
            }
            out.push_str(&format!("The propositions are: {}\n", items.join(", ")));
        }
        out.push_str(&format!("\n{FORMULA_TAG}\n{formula}"));
        Ok(out)
    }

    fn fol_names(&self, f: &Formula, vocab: &Vocabulary) -> Result<String, PromptError> {
        let mut objects = Vec::new();
        let mut preds: Vec<(String, usize)> = Vec::new();
        let mut vars = Vec::new();
        f.visit(&mut |n| match n {
            Formula::Pred(name, args) => {
                if !preds.iter().any(|(p, _)| p == name) {
                    preds.push((name.clone(), args.len()));
                }
                for a in args {
                    if let crate::syntax::Term::Object(o) = a {
                        if !objects.contains(o) {
                            objects.push(o.clone());
                        }
                    }
                }
            }
            Formula::Forall(x, _) | Formula::Exists(x, _)
                if !vars.contains(x) => {
                    vars.push(x.clone());
                }
            _ => {}
        });
        let have_vocab = !vocab.predicates.is_empty() || !vocab.objects.is_empty();
        let mut pred_items = Vec::new();
        for (name, arity) in &preds {
            let entry = vocab.predicate(name);
            if have_vocab && entry.is_none() {
                return Err(PromptError::MissingVocabulary(name.clone()));
            }
            let params: Vec<String> = (0..*arity).map(|i| format!("?p{i}")).collect();
            let mut item = format!("{name}({})", params.join(","));
            if let Some(g) = entry.and_then(|e| e.gloss.as_deref()).filter(|_| self.english) {
                item.push_str(&format!(" ({g})"));
            }
            pred_items.push(item);
        }
        if let Some(o) = objects.iter().find(|o| have_vocab && !vocab.has_object(o)) {
            return Err(PromptError::MissingVocabulary(o.clone()));
        }
        Ok(format!(
            "The objects are: {}\nThe parameterized predicates are: {}\nThe free variables are: {}\n",
            objects.join(", "),
            pred_items.join(", "),
            vars.join(", ")
        ))
    }

    fn autoformalize(&self, nl: &str, vocab: &Vocabulary) -> String {
        let mut out = String::from("[VOCABULARY]\n");
        let what = if self.language == Language::Regex { "regular expression" } else { "formula" };
        match self.language {
            Language::Regex => {
                out.push_str("Use * to represent zero or more duplications of the same expression\nUse ( and ) to represent parentheses\n");
                out.push_str(&format!("The symbols are: {}\n", join_chars(&vocab.alphabet)));
            }
            _ => {
                out.push_str("Use ∨ to represent disjunction\nUse ∧ to represent conjunction\nUse ¬ to represent negation\nUse ( and ) to represent parentheses\n");
            }
        }
        if self.language == Language::FirstOrder {
            out.push_str("Use ∀ <free_variable_list> to represent universal quantification\n");
            out.push_str("Use ∃ <free_variable_list> to represent existential quantification\n");
            out.push_str("The <free_variable_list> consists of a sequence of space separate free variables with the last variable immediately followed by a period. Examples: (1) all x1 x2. (2) exists x4.\n");
            out.push_str("Use <predicate>(<parameter_list>) to represent predicates (Names and parameters are provided in the description)\n");
            if self.english {
                let preds: Vec<String> = vocab
                    .predicates
                    .iter()
                    .map(|p| {
                        let params: Vec<String> = (0..p.arity).map(|i| format!("?p{i}")).collect();
                        format!("{}({})", p.name, params.join(","))
                    })
                    .collect();
                out.push_str(&format!("The objects are: {}\n", vocab.objects.join(", ")));
                out.push_str(&format!("The parameterized predicates are: {}\n", preds.join(", ")));
            }
        }
        out.push_str(&format!(
            "\n[TASK]\nYour task is to interpret the natural language (NL) description of a {} and represent it as formal syntax using the vocabulary specified in the [VOCABULARY] block above. Only output the {what} and no other text. The NL description appears immediately following the [NL DESCRIPTION] tag.\n\n",
            match self.language {
                Language::Regex => "regular expression".to_string(),
                l => format!("{} formula", language_name(l)),
            }
        ));
        if self.shots == 2 {
            let examples = if self.language == Language::Regex { REGEX_EXAMPLES } else { LOGIC_EXAMPLES };
            for (i, (f, d)) in examples.iter().enumerate() {
                out.push_str(&format!("[EXAMPLE {}]\n{d}\n{f}\n\n", i + 1));
            }
        }
        out.push_str(&format!("{NL_TAG}\n{nl}"));
        out
    }

    fn judge(&self, a: &str, b: &str) -> String {
        let kind = match self.language {
            Language::Propositional => "Propositional Logic formulae",
            Language::FirstOrder => "First-Order Logic formulae",
            Language::Regex => "regular expressions",
        };
        format!(
            "Your task is to say whether two {kind} are equivalent. The first formula will appear right after [FORMULA 1] and the second after [FORMULA 2].\nGive an explanation followed by a yes or no answer. The answer must show up at the end with the format \"{ANSWER_TAG}\" followed by either a yes or no.\n\n{JUDGE_TAG_1}\n{a}\n\n{JUDGE_TAG_2}\n{b}"
        )
    }
}

fn join_chars(cs: &[char]) -> String {
    cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
}

fn first_appearance_props(f: &Formula) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    f.visit(&mut |n| {
        if let Formula::Prop(p) = n {
            if !out.contains(p) {
                out.push(p.clone());
            }
        }
    });
    out
}

/// Text after the last occurrence of `tag`, trimmed.
pub fn payload_after<'a>(prompt: &'a str, tag: &str) -> Option<&'a str> {
    prompt.rfind(tag).map(|i| prompt[i + tag.len()..].trim())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeAnswer {
    Yes,
    No,
    Unparseable,
}

/// Reads the word after the last `[Answer]` marker (case-insensitive).
pub fn parse_judge_answer(text: &str) -> JudgeAnswer {
    let lower = text.to_lowercase();
    let Some(i) = lower.rfind(&ANSWER_TAG.to_lowercase()) else { return JudgeAnswer::Unparseable };
    let rest = &lower[i + ANSWER_TAG.len()..];
    let word: String = rest
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .chars()
        .take_while(|c| c.is_alphanumeric())
        .collect();
    match word.as_str() {
        "yes" => JudgeAnswer::Yes,
        "no" => JudgeAnswer::No,
        _ => JudgeAnswer::Unparseable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocabulary::{make_vocabulary, VocabParams};

    #[test]
    fn pl_informalize_lists_propositions_in_order() {
        let v = make_vocabulary(&VocabParams::default()).unwrap();
        let t = PromptTemplate::new(Task::Informalize, Language::Propositional, 0);
        let p = t.render(&Payload::Formula("(p5 ∨ ¬p12 ∨ ¬p4)".into()), &v).unwrap();
        assert!(p.contains("The propositions are: p5, p12, p4"), "{p}");
        assert!(p.ends_with("[FORMULA]\n(p5 ∨ ¬p12 ∨ ¬p4)"));
        assert_eq!(p.matches("(p5 ∨ ¬p12 ∨ ¬p4)").count(), 1);
    }

    #[test]
    fn fol_informalize_lists_names() {
        let t = PromptTemplate::new(Task::Informalize, Language::FirstOrder, 2);
        let p = t.render(&Payload::Formula("∀x1. pred3(p5, x1)".into()), &Vocabulary::with_alphabet(0)).unwrap();
        assert!(p.contains("The objects are: p5\n"));
        assert!(p.contains("The parameterized predicates are: pred3(?p0,?p1)"));
        assert!(p.contains("The free variables are: x1"));
        assert!(p.contains("[EXAMPLE 2]\n(¬¬p2 ∧ ¬(p3 ∨ p1))"));
    }

    #[test]
    fn missing_vocabulary_entry() {
        let v = make_vocabulary(&VocabParams { num_propositions: 3, ..Default::default() }).unwrap();
        let t = PromptTemplate::new(Task::Informalize, Language::Propositional, 0);
        let e = t.render(&Payload::Formula("(p1 ∧ p9)".into()), &v).unwrap_err();
        assert_eq!(e, PromptError::MissingVocabulary("p9".into()));
    }

    #[test]
    fn judge_prompt_has_answer_format() {
        let t = PromptTemplate::new(Task::Judge, Language::FirstOrder, 0);
        let p = t.render(&Payload::Pair("∃x1.¬pred5(p7)".into(), "∃x1.¬pred5(x1)".into()), &Vocabulary::with_alphabet(0)).unwrap();
        assert!(p.contains("format \"[Answer]\" followed by either a yes or no"));
        assert!(p.contains("First-Order Logic formulae are equivalent"));
    }

    #[test]
    fn regex_autoformalize_two_shot() {
        let t = PromptTemplate::new(Task::Autoformalize, Language::Regex, 2);
        let p = t.render(&Payload::Nl("strings of ones".into()), &Vocabulary::with_alphabet(2)).unwrap();
        assert!(p.contains("(1*)0*") && p.contains("(01*)"));
        assert!(p.ends_with("[NL DESCRIPTION]\nstrings of ones"));
    }

    #[test]
    fn payload_must_match_task() {
        let t = PromptTemplate::new(Task::Judge, Language::Regex, 0);
        assert!(matches!(t.render(&Payload::Nl("x".into()), &Vocabulary::with_alphabet(2)), Err(PromptError::PayloadMismatch(_))));
        let t = PromptTemplate { shots: 1, ..PromptTemplate::new(Task::Judge, Language::Regex, 0) };
        assert!(matches!(t.render(&Payload::Pair("0".into(), "1".into()), &Vocabulary::with_alphabet(2)), Err(PromptError::BadShots(1))));
    }

    #[test]
    fn token_budget_guard() {
        let t = PromptTemplate { token_budget: 50, ..PromptTemplate::new(Task::Autoformalize, Language::Propositional, 0) };
        assert!(matches!(t.render(&Payload::Nl("x".into()), &Vocabulary::with_alphabet(0)), Err(PromptError::TooLong { .. })));
    }

    #[test]
    fn judge_answers() {
        assert_eq!(parse_judge_answer("…reasoning… [Answer] yes"), JudgeAnswer::Yes);
        assert_eq!(parse_judge_answer("…[Answer] No."), JudgeAnswer::No);
        assert_eq!(parse_judge_answer("I think they match"), JudgeAnswer::Unparseable);
        assert_eq!(parse_judge_answer("[Answer] no ... wait [ANSWER]: **Yes**"), JudgeAnswer::Yes);
        assert_eq!(parse_judge_answer("[Answer] maybe"), JudgeAnswer::Unparseable);
    }
}
