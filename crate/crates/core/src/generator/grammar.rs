//! Context-free grammars: the built-in grammars and user grammars loaded
//! from JSON.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{GenError, Language};

/// Terminal standing for a proposition in logic grammars.
pub const PROPOSITION_SLOT: &str = "v";
/// Terminal standing for a grounded predicate in first-order grammars.
pub const PREDICATE_SLOT: &str = "p";
/// Terminal standing for a quantified variable.
pub const VARIABLE_SLOT: &str = "f";
/// Terminal standing for an alphabet symbol in regex grammars.
pub const SYMBOL_SLOT: &str = "Σ";
/// Spelling of the empty right-hand side in textual rules.
pub const EPSILON: &str = "ε";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub lhs: String,
    /// Empty for an ε-production.
    pub rhs: Vec<String>,
}

impl Rule {
    pub fn is_epsilon(&self) -> bool {
        self.rhs.is_empty()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rhs.is_empty() {
            write!(f, "{} → {EPSILON}", self.lhs)
        } else {
            write!(f, "{} → {}", self.lhs, self.rhs.join(" "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cfg {
    pub language: Language,
    pub start: String,
    pub nonterminals: Vec<String>,
    pub terminals: Vec<String>,
    pub rules: Vec<Rule>,
}

/// Names of the built-in grammars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GrammarKind {
    /// k-SAT with clause width k.
    Ksat(usize),
    Pl,
    Fol,
    Regex,
}

impl fmt::Display for GrammarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrammarKind::Ksat(k) => write!(f, "ksat{k}"),
            GrammarKind::Pl => f.write_str("pl"),
            GrammarKind::Fol => f.write_str("fol"),
            GrammarKind::Regex => f.write_str("regex"),
        }
    }
}

impl FromStr for GrammarKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "pl" | "propositional" => Ok(GrammarKind::Pl),
            "fol" | "first_order" => Ok(GrammarKind::Fol),
            "regex" => Ok(GrammarKind::Regex),
            "ksat" => Ok(GrammarKind::Ksat(3)),
            other => other
                .strip_prefix("ksat")
                .and_then(|k| k.trim_start_matches(['(', '-', '_']).trim_end_matches(')').parse().ok())
                .filter(|&k: &usize| k >= 1)
                .map(GrammarKind::Ksat)
                .ok_or_else(|| GenError::UnknownGrammar(s.to_string())),
        }
    }
}

fn rules(spec: &[(&str, &str)]) -> Vec<Rule> {
    spec.iter()
        .map(|(lhs, rhs)| Rule {
            lhs: lhs.to_string(),
            rhs: rhs.split_whitespace().filter(|t| *t != EPSILON).map(String::from).collect(),
        })
        .collect()
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// The fixed grammars used to synthesize the built-in datasets.
pub fn builtin_grammar(kind: GrammarKind) -> Result<Cfg, GenError> {
    let g = match kind {
        GrammarKind::Ksat(0) => return Err(GenError::UnknownGrammar("ksat0".into())),
        GrammarKind::Ksat(k) => {
            let clause = format!("( {} )", vec!["P"; k].join(" ∨ "));
            Cfg {
                language: Language::Propositional,
                start: "S".into(),
                nonterminals: strings(&["S", "P"]),
                terminals: strings(&["∧", "∨", "¬", "(", ")", PROPOSITION_SLOT]),
                rules: rules(&[("S", "S ∧ S"), ("S", &clause), ("P", "¬ v"), ("P", "v")]),
            }
        }
        GrammarKind::Pl => Cfg {
            language: Language::Propositional,
            start: "S".into(),
            nonterminals: strings(&["S"]),
            terminals: strings(&["∧", "∨", "¬", "(", ")", PROPOSITION_SLOT]),
            rules: rules(&[
                ("S", "( S ∧ S )"),
                ("S", "( S ∨ S )"),
                ("S", "( ¬ S )"),
                ("S", "¬ v"),
                ("S", "v"),
            ]),
        },
        GrammarKind::Fol => Cfg {
            language: Language::FirstOrder,
            start: "S".into(),
            nonterminals: strings(&["S", "Q", "F"]),
            terminals: strings(&["∧", "∨", "¬", "∀", "∃", ".", "(", ")", PREDICATE_SLOT, VARIABLE_SLOT]),
            rules: rules(&[
                ("S", "Q"),
                ("Q", "F"),
                ("Q", "( ∀ f . Q )"),
                ("Q", "( ∃ f . Q )"),
                ("F", "( F ∧ F )"),
                ("F", "( F ∨ F )"),
                ("F", "( ¬ F )"),
                ("F", "¬ p"),
                ("F", "p"),
            ]),
        },
        GrammarKind::Regex => Cfg {
            language: Language::Regex,
            start: "S".into(),
            nonterminals: strings(&["S", "K"]),
            terminals: strings(&["(", ")", "*", SYMBOL_SLOT]),
            rules: rules(&[("S", "( S ) K"), ("S", "S Σ K"), ("S", "Σ K"), ("K", "*"), ("K", EPSILON)]),
        },
    };
    g.validate()?;
    Ok(g)
}

/// On-disk form of a user grammar. A rule's right-hand side is either a
/// list of symbols or one whitespace-separated string; `ε` or an empty
/// list denotes the empty production.
#[derive(Debug, Deserialize)]
struct CfgFile {
    language: Language,
    start: String,
    nonterminals: Vec<String>,
    terminals: Vec<String>,
    rules: Vec<RuleFile>,
}

#[derive(Debug, Deserialize)]
struct RuleFile {
    lhs: String,
    rhs: Rhs,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Rhs {
    Text(String),
    Symbols(Vec<String>),
}

impl Cfg {
    pub fn from_json(text: &str) -> Result<Self, GenError> {
        let file: CfgFile = serde_json::from_str(text).map_err(|e| GenError::InvalidGrammar(e.to_string()))?;
        let rules = file
            .rules
            .into_iter()
            .map(|r| {
                let rhs = match r.rhs {
                    Rhs::Text(s) => s.split_whitespace().map(String::from).collect(),
                    Rhs::Symbols(v) => v,
                };
                Rule { lhs: r.lhs, rhs: rhs.into_iter().filter(|s| s != EPSILON).collect() }
            })
            .collect();
        let g = Cfg {
            language: file.language,
            start: file.start,
            nonterminals: file.nonterminals,
            terminals: file.terminals,
            rules,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn is_nonterminal(&self, s: &str) -> bool {
        self.nonterminals.iter().any(|n| n == s)
    }

    pub fn is_terminal(&self, s: &str) -> bool {
        self.terminals.iter().any(|t| t == s)
    }

    /// Checks that symbols are declared, left sides are nonterminals, and the
    /// start symbol derives at least one terminal string.
    pub fn validate(&self) -> Result<(), GenError> {
        let mut seen = HashSet::new();
        for s in self.nonterminals.iter().chain(&self.terminals) {
            if !seen.insert(s.as_str()) {
                return Err(GenError::InvalidGrammar(format!("symbol `{s}` declared twice")));
            }
        }
        if !self.is_nonterminal(&self.start) {
            return Err(GenError::UndeclaredSymbol { symbol: self.start.clone(), context: "start symbol".into() });
        }
        for r in &self.rules {
            if !self.is_nonterminal(&r.lhs) {
                if self.is_terminal(&r.lhs) {
                    return Err(GenError::InvalidGrammar(format!("rule `{r}` rewrites terminal `{}`", r.lhs)));
                }
                return Err(GenError::UndeclaredSymbol { symbol: r.lhs.clone(), context: format!("rule `{r}`") });
            }
            if let Some(s) = r.rhs.iter().find(|s| !self.is_nonterminal(s) && !self.is_terminal(s)) {
                return Err(GenError::UndeclaredSymbol { symbol: s.clone(), context: format!("rule `{r}`") });
            }
        }
        let mut productive: BTreeSet<&str> = BTreeSet::new();
        loop {
            let before = productive.len();
            for r in &self.rules {
                if r.rhs.iter().all(|s| self.is_terminal(s) || productive.contains(s.as_str())) {
                    productive.insert(&r.lhs);
                }
            }
            if productive.len() == before {
                break;
            }
        }
        if !productive.contains(self.start.as_str()) {
            return Err(GenError::InvalidGrammar(format!(
                "start symbol `{}` derives no terminal string",
                self.start
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Cfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
