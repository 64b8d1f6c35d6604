//! Abstract syntax for propositional logic, prenex first-order logic and the
//! small regular-expression dialect, together with canonical printers and
//! descriptional-complexity measures.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Argument of a predicate application.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Object(String),
    Var(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Object(n) | Term::Var(n) => n,
        }
    }
}

/// A propositional or first-order formula.
///
/// `And`/`Or` are n-ary with at least two children. Quantifiers bind a single
/// variable; `∀x1 x2. φ` is represented as two nested `Forall` nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Prop(String),
    Pred(String, Vec<Term>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Prop(name.into())
    }

    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Pred(name.into(), args)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::Forall(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    /// Number of atom occurrences (propositions and predicate applications).
    pub fn atom_count(&self) -> usize {
        match self {
            Formula::Prop(_) | Formula::Pred(..) => 1,
            Formula::Not(c) | Formula::Forall(_, c) | Formula::Exists(_, c) => c.atom_count(),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().map(Formula::atom_count).sum(),
        }
    }

    pub fn contains_negation(&self) -> bool {
        match self {
            Formula::Not(_) => true,
            Formula::Prop(_) | Formula::Pred(..) => false,
            Formula::Forall(_, c) | Formula::Exists(_, c) => c.contains_negation(),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().any(Formula::contains_negation),
        }
    }

    pub fn is_first_order(&self) -> bool {
        match self {
            Formula::Prop(_) => false,
            Formula::Pred(..) | Formula::Forall(..) | Formula::Exists(..) => true,
            Formula::Not(c) => c.is_first_order(),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().any(Formula::is_first_order),
        }
    }

    /// True when no quantifier occurs below a connective.
    pub fn is_prenex(&self) -> bool {
        fn quantifier_free(f: &Formula) -> bool {
            match f {
                Formula::Prop(_) | Formula::Pred(..) => true,
                Formula::Forall(..) | Formula::Exists(..) => false,
                Formula::Not(c) => quantifier_free(c),
                Formula::And(cs) | Formula::Or(cs) => cs.iter().all(quantifier_free),
            }
        }
        match self {
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.is_prenex(),
            other => quantifier_free(other),
        }
    }

    /// True when every variable occurrence is bound by an enclosing quantifier.
    pub fn is_closed(&self) -> bool {
        fn walk<'a>(f: &'a Formula, bound: &mut Vec<&'a str>) -> bool {
            match f {
                Formula::Prop(_) => true,
                Formula::Pred(_, args) => args.iter().all(|a| match a {
                    Term::Var(v) => bound.contains(&v.as_str()),
                    Term::Object(_) => true,
                }),
                Formula::Not(c) => walk(c, bound),
                Formula::And(cs) | Formula::Or(cs) => cs.iter().all(|c| walk(c, bound)),
                Formula::Forall(v, b) | Formula::Exists(v, b) => {
                    bound.push(v);
                    let ok = walk(b, bound);
                    bound.pop();
                    ok
                }
            }
        }
        walk(self, &mut Vec::new())
    }

    /// Checks the structural invariants: arity of connectives.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Formula::Prop(_) | Formula::Pred(..) => true,
            Formula::Not(c) | Formula::Forall(_, c) | Formula::Exists(_, c) => c.is_well_formed(),
            Formula::And(cs) | Formula::Or(cs) => {
                cs.len() >= 2 && cs.iter().all(Formula::is_well_formed)
            }
        }
    }

    /// Proposition names in order of first occurrence.
    pub fn propositions(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Prop(p) = f {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    /// Predicate names with their arity, in order of first occurrence.
    pub fn predicates(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Pred(p, args) = f {
                if !out.iter().any(|(n, _)| n == p) {
                    out.push((p.clone(), args.len()));
                }
            }
        });
        out
    }

    /// Object constants in order of first occurrence.
    pub fn objects(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Pred(_, args) = f {
                for a in args {
                    if let Term::Object(o) = a {
                        if !out.contains(o) {
                            out.push(o.clone());
                        }
                    }
                }
            }
        });
        out
    }

    /// Variables bound by quantifiers, in order of first occurrence.
    pub fn bound_variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Forall(v, _) | Formula::Exists(v, _) = f {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Prop(_) | Formula::Pred(..) => {}
            Formula::Not(c) | Formula::Forall(_, c) | Formula::Exists(_, c) => c.visit(f),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.visit(f)),
        }
    }

    pub fn to_unicode(&self) -> String {
        print_formula(self, SymbolStyle::Unicode)
    }

    pub fn to_ascii(&self) -> String {
        print_formula(self, SymbolStyle::Ascii)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_unicode())
    }
}

/// Token set used when rendering formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SymbolStyle {
    #[default]
    Unicode,
    Ascii,
}

struct Glyphs {
    and: &'static str,
    or: &'static str,
    not: &'static str,
    forall: &'static str,
    exists: &'static str,
}

const UNICODE: Glyphs = Glyphs { and: " ∧ ", or: " ∨ ", not: "¬", forall: "∀", exists: "∃" };
const ASCII: Glyphs = Glyphs { and: " & ", or: " | ", not: "~", forall: "all ", exists: "exists " };

/// Renders a formula fully parenthesized. Binary connectives always carry
/// their own parentheses; a quantifier nested under a connective is wrapped
/// in parentheses so its scope is explicit.
pub fn print_formula(f: &Formula, style: SymbolStyle) -> String {
    let glyphs = match style {
        SymbolStyle::Unicode => &UNICODE,
        SymbolStyle::Ascii => &ASCII,
    };
    let mut out = String::new();
    write_formula(f, glyphs, false, &mut out);
    out
}

fn write_formula(f: &Formula, g: &Glyphs, nested: bool, out: &mut String) {
    match f {
        Formula::Prop(p) => out.push_str(p),
        Formula::Pred(p, args) => {
            out.push_str(p);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(a.name());
            }
            out.push(')');
        }
        Formula::Not(c) => {
            out.push_str(g.not);
            write_formula(c, g, true, out);
        }
        Formula::And(cs) | Formula::Or(cs) => {
            let sep = if matches!(f, Formula::And(_)) { g.and } else { g.or };
            out.push('(');
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_formula(c, g, true, out);
            }
            out.push(')');
        }
        Formula::Forall(v, b) | Formula::Exists(v, b) => {
            if nested {
                out.push('(');
            }
            out.push_str(if matches!(f, Formula::Forall(..)) { g.forall } else { g.exists });
            out.push_str(v);
            out.push_str(". ");
            write_formula(b, g, false, out);
            if nested {
                out.push(')');
            }
        }
    }
}

/// Regular expression over a digit alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegexAst {
    Symbol(char),
    Concat(Vec<RegexAst>),
    Group(Box<RegexAst>),
    Star(Box<RegexAst>),
    Epsilon,
}

impl RegexAst {
    pub fn symbol_count(&self) -> usize {
        match self {
            RegexAst::Symbol(_) => 1,
            RegexAst::Epsilon => 0,
            RegexAst::Group(c) | RegexAst::Star(c) => c.symbol_count(),
            RegexAst::Concat(cs) => cs.iter().map(RegexAst::symbol_count).sum(),
        }
    }

    pub fn star_count(&self) -> usize {
        match self {
            RegexAst::Symbol(_) | RegexAst::Epsilon => 0,
            RegexAst::Group(c) => c.star_count(),
            RegexAst::Star(c) => 1 + c.star_count(),
            RegexAst::Concat(cs) => cs.iter().map(RegexAst::star_count).sum(),
        }
    }

    /// Stars only over symbols or groups.
    pub fn is_well_formed(&self) -> bool {
        match self {
            RegexAst::Symbol(_) | RegexAst::Epsilon => true,
            RegexAst::Group(c) => c.is_well_formed(),
            RegexAst::Star(c) => {
                matches!(**c, RegexAst::Symbol(_) | RegexAst::Group(_)) && c.is_well_formed()
            }
            RegexAst::Concat(cs) => cs.iter().all(RegexAst::is_well_formed),
        }
    }
}

impl fmt::Display for RegexAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegexAst::Symbol(c) => write!(f, "{c}"),
            RegexAst::Epsilon => Ok(()),
            RegexAst::Group(c) => write!(f, "({c})"),
            RegexAst::Star(c) => write!(f, "{c}*"),
            RegexAst::Concat(cs) => cs.iter().try_for_each(|c| write!(f, "{c}")),
        }
    }
}

/// Operators tracked by [`ComplexityProfile::per_operator`].
pub const LOGIC_OPERATORS: [&str; 5] = ["∧", "∨", "¬", "∀", "∃"];

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub operator_count: usize,
    pub per_operator: BTreeMap<String, usize>,
    pub cfg_depth: usize,
}

/// Counts operators of a formula. An n-ary `And`/`Or` contributes n-1,
/// matching the number of textual operator occurrences; quantifiers count.
pub fn formula_complexity(f: &Formula, cfg_depth: Option<usize>) -> ComplexityProfile {
    let mut per: BTreeMap<String, usize> = LOGIC_OPERATORS.iter().map(|o| (o.to_string(), 0)).collect();
    f.visit(&mut |node| {
        let (op, n) = match node {
            Formula::And(cs) => ("∧", cs.len() - 1),
            Formula::Or(cs) => ("∨", cs.len() - 1),
            Formula::Not(_) => ("¬", 1),
            Formula::Forall(..) => ("∀", 1),
            Formula::Exists(..) => ("∃", 1),
            _ => return,
        };
        *per.get_mut(op).expect("operator key") += n;
    });
    ComplexityProfile {
        operator_count: per.values().sum(),
        per_operator: per,
        cfg_depth: cfg_depth.unwrap_or(0),
    }
}

/// For regexes the operator count is the number of stars.
pub fn regex_complexity(r: &RegexAst, cfg_depth: Option<usize>) -> ComplexityProfile {
    let stars = r.star_count();
    ComplexityProfile {
        operator_count: stars,
        per_operator: BTreeMap::from([("*".to_string(), stars)]),
        cfg_depth: cfg_depth.unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: &str) -> Formula {
        Formula::prop(n)
    }

    #[test]
    fn prints_conjunction_with_negation() {
        let f = Formula::And(vec![Formula::not(p("p1")), p("p2")]);
        assert_eq!(f.to_unicode(), "(¬p1 ∧ p2)");
        assert_eq!(f.to_ascii(), "(~p1 & p2)");
    }

    #[test]
    fn prints_quantified_predicate() {
        let f = Formula::forall(
            "x1",
            Formula::pred("pred3", vec![Term::Object("p5".into()), Term::Var("x1".into())]),
        );
        assert_eq!(f.to_unicode(), "∀x1. pred3(p5, x1)");
        assert_eq!(f.to_ascii(), "all x1. pred3(p5, x1)");
    }

    #[test]
    fn prints_flat_disjunction() {
        let f = Formula::Or(vec![p("p5"), Formula::not(p("p12")), Formula::not(p("p4"))]);
        assert_eq!(f.to_unicode(), "(p5 ∨ ¬p12 ∨ ¬p4)");
    }

    #[test]
    fn nested_quantifier_is_parenthesized() {
        let f = Formula::not(Formula::forall(
            "x",
            Formula::pred("Man", vec![Term::Var("x".into())]),
        ));
        assert_eq!(f.to_unicode(), "¬(∀x. Man(x))");
    }

    #[test]
    fn atom_has_no_operators() {
        assert_eq!(formula_complexity(&p("p1"), None).operator_count, 0);
    }

    #[test]
    fn flat_disjunction_counts_textual_operators() {
        let f = Formula::Or(vec![p("p5"), Formula::not(p("p12")), Formula::not(p("p4"))]);
        let prof = formula_complexity(&f, None);
        assert_eq!(prof.operator_count, 4);
        assert_eq!(prof.per_operator["∨"], 2);
        assert_eq!(prof.per_operator["¬"], 2);
        // brute-force cross-check on the printed text
        let text = f.to_unicode();
        let scanned = text.chars().filter(|c| "∧∨¬∀∃".contains(*c)).count();
        assert_eq!(scanned, prof.operator_count);
    }

    #[test]
    fn quantifiers_count_as_operators() {
        let f = Formula::exists("x1", Formula::not(Formula::pred("pred2", vec![Term::Var("x1".into())])));
        let prof = formula_complexity(&f, Some(3));
        assert_eq!(prof.operator_count, 2);
        assert_eq!(prof.cfg_depth, 3);
    }

    #[test]
    fn closedness_and_prenex() {
        let open = Formula::pred("P", vec![Term::Var("x".into())]);
        assert!(!open.is_closed());
        let closed = Formula::forall("x", open.clone());
        assert!(closed.is_closed());
        assert!(closed.is_prenex());
        let not_prenex = Formula::not(closed);
        assert!(!not_prenex.is_prenex());
    }

    #[test]
    fn regex_display() {
        let r = RegexAst::Concat(vec![
            RegexAst::Star(Box::new(RegexAst::Group(Box::new(RegexAst::Star(Box::new(
                RegexAst::Symbol('1'),
            )))))),
            RegexAst::Symbol('0'),
        ]);
        assert_eq!(r.to_string(), "(1*)*0");
        assert!(r.is_well_formed());
        assert_eq!(regex_complexity(&r, None).operator_count, 2);
    }
}
