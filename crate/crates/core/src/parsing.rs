//! Parsing of model output back into formulas and regexes, and the guard
//! that rejects informalizations which copy formal syntax.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{Formula, RegexAst, Term};
use crate::vocabulary::Vocabulary;

/// Maximum nesting depth accepted by the parsers.
pub const MAX_DEPTH: usize = 10_000;

/// Texts with more tokens than this are only parsed as a whole; the span
/// search is quadratic.
const SPAN_SEARCH_TOKEN_LIMIT: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicMode {
    Pl,
    Fol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonCompliantReason {
    LexError,
    GrammarError,
    UnknownSymbol,
    ArityMismatch,
    UnboundVariable,
    EmptyOutput,
}

impl fmt::Display for NonCompliantReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NonCompliantReason::LexError => "lex error",
            NonCompliantReason::GrammarError => "grammar error",
            NonCompliantReason::UnknownSymbol => "unknown symbol",
            NonCompliantReason::ArityMismatch => "arity mismatch",
            NonCompliantReason::UnboundVariable => "unbound variable",
            NonCompliantReason::EmptyOutput => "empty output",
        };
        f.write_str(s)
    }
}

/// Why a piece of text is not syntactically compliant. `span` holds byte
/// offsets into the parsed text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonCompliant {
    pub reason: NonCompliantReason,
    pub message: String,
    pub span: Option<(usize, usize)>,
}

impl NonCompliant {
    fn new(reason: NonCompliantReason, message: impl Into<String>, span: Option<(usize, usize)>) -> Self {
        Self { reason, message: message.into(), span }
    }
}

impl fmt::Display for NonCompliant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason, self.message)?;
        if let Some((a, b)) = self.span {
            write!(f, " at {a}..{b}")?;
        }
        Ok(())
    }
}

impl std::error::Error for NonCompliant {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ParseOutcome {
    Formula { formula: Formula },
    Regex { regex: RegexAst },
    NonCompliant(NonCompliant),
}

// ---------------------------------------------------------------------------
// Logic lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Dot,
    Not { glyph: bool },
    And,
    Or,
    Forall { glyph: bool },
    Exists { glyph: bool },
    /// Connectives outside the supported grammars (implication, equality).
    Foreign(String),
    Ident(String),
    Unknown(char),
}

impl Tok {
    fn is_glyph(&self) -> bool {
        matches!(
            self,
            Tok::Not { glyph: true }
                | Tok::And
                | Tok::Or
                | Tok::Forall { glyph: true }
                | Tok::Exists { glyph: true }
                | Tok::Foreign(_)
        )
    }

    fn can_start(&self) -> bool {
        matches!(
            self,
            Tok::LParen | Tok::Not { .. } | Tok::Forall { .. } | Tok::Exists { .. } | Tok::Ident(_)
        )
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex_logic(src: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        let mut end = i + c.len_utf8();
        let mut two = |expect: char, it: &mut std::iter::Peekable<std::str::CharIndices>| {
            if let Some(&(j, d)) = it.peek() {
                if d == expect {
                    it.next();
                    end = j + d.len_utf8();
                    return true;
                }
            }
            false
        };
        let tok = match c {
            c if c.is_whitespace() => continue,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '¬' | '~' | '!' => Tok::Not { glyph: c != '!' },
            '∧' => Tok::And,
            '&' => {
                two('&', &mut it);
                Tok::And
            }
            '∨' => Tok::Or,
            '|' => {
                two('|', &mut it);
                Tok::Or
            }
            '∀' => Tok::Forall { glyph: true },
            '∃' => Tok::Exists { glyph: true },
            '→' | '⇒' | '↔' | '⇔' | '≠' | '⊕' => Tok::Foreign(c.to_string()),
            '-' => {
                if two('>', &mut it) {
                    Tok::Foreign("->".into())
                } else {
                    Tok::Not { glyph: false }
                }
            }
            '=' => {
                if two('>', &mut it) {
                    Tok::Foreign("=>".into())
                } else {
                    Tok::Foreign("=".into())
                }
            }
            '<' => {
                let mut s = String::from("<");
                if two('-', &mut it) {
                    s.push('-');
                } else if two('=', &mut it) {
                    s.push('=');
                }
                if s.len() > 1 && two('>', &mut it) {
                    s.push('>');
                    Tok::Foreign(s)
                } else {
                    Tok::Unknown('<')
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some(&(j, d)) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        end = j + 1;
                        it.next();
                    } else {
                        break;
                    }
                }
                match s.as_str() {
                    "all" | "forall" => Tok::Forall { glyph: false },
                    "exists" => Tok::Exists { glyph: false },
                    _ => Tok::Ident(s),
                }
            }
            other => Tok::Unknown(other),
        };
        out.push(Spanned { tok, start: i, end });
    }
    out
}

/// Variable-shaped identifier: a single lowercase letter optionally followed
/// by digits (`x`, `y`, `x1`, `x12`).
pub fn is_variable_shaped(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_digit())
}

// ---------------------------------------------------------------------------
// Logic parser

struct LogicParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    mode: LogicMode,
    vocab: Option<&'a Vocabulary>,
    bound: Vec<String>,
    depth: usize,
    src_len: usize,
}

type PResult<T> = Result<T, NonCompliant>;

impl<'a> LogicParser<'a> {
    fn new(toks: &'a [Spanned], mode: LogicMode, vocab: Option<&'a Vocabulary>, src_len: usize) -> Self {
        Self { toks, pos: 0, mode, vocab, bound: Vec::new(), depth: 0, src_len }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn span_here(&self) -> Option<(usize, usize)> {
        match self.toks.get(self.pos) {
            Some(s) => Some((s.start, s.end)),
            None => Some((self.src_len, self.src_len)),
        }
    }

    fn span_prev(&self) -> Option<(usize, usize)> {
        self.pos.checked_sub(1).and_then(|p| self.toks.get(p)).map(|s| (s.start, s.end))
    }

    fn err_here(&self, reason: NonCompliantReason, msg: impl Into<String>) -> NonCompliant {
        NonCompliant::new(reason, msg, self.span_here())
    }

    fn unexpected(&self) -> NonCompliant {
        match self.peek() {
            None => self.err_here(NonCompliantReason::GrammarError, "unexpected end of input"),
            Some(Tok::Foreign(s)) => {
                self.err_here(NonCompliantReason::UnknownSymbol, format!("unsupported connective `{s}`"))
            }
            Some(Tok::Unknown(c)) => self.err_here(NonCompliantReason::LexError, format!("unexpected character `{c}`")),
            Some(t) => self.err_here(NonCompliantReason::GrammarError, format!("unexpected token {t:?}")),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err_here(NonCompliantReason::GrammarError, "nesting depth limit exceeded"));
        }
        Ok(())
    }

    fn formula(&mut self) -> PResult<Formula> {
        self.enter()?;
        let r = stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.disjunction());
        self.depth -= 1;
        r
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let first = self.conjunction()?;
        let mut items = vec![first];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            items.push(self.conjunction()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Formula::Or(items) })
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let first = self.unary()?;
        let mut items = vec![first];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Formula::And(items) })
    }

    fn unary(&mut self) -> PResult<Formula> {
        self.enter()?;
        let r = stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.unary_inner());
        self.depth -= 1;
        r
    }

    fn unary_inner(&mut self) -> PResult<Formula> {
        match self.peek() {
            Some(Tok::Not { .. }) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Forall { .. }) | Some(Tok::Exists { .. }) => self.quantified(),
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(match self.peek() {
                        None => self.err_here(NonCompliantReason::GrammarError, "unbalanced parentheses"),
                        _ => self.unexpected(),
                    });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => Err(self.unexpected()),
        }
    }

    fn quantified(&mut self) -> PResult<Formula> {
        let universal = matches!(self.peek(), Some(Tok::Forall { .. }));
        if self.mode == LogicMode::Pl {
            return Err(self.err_here(
                NonCompliantReason::GrammarError,
                "quantifiers are not part of propositional logic",
            ));
        }
        self.pos += 1;
        let mut binders = Vec::new();
        while let Some(Tok::Ident(name)) = self.peek() {
            if self.peek_at(1) == Some(&Tok::LParen) {
                break;
            }
            self.pos += 1;
            self.check_binder(name)?;
            binders.push(name.clone());
        }
        if binders.is_empty() {
            return Err(self.err_here(NonCompliantReason::GrammarError, "quantifier without a variable"));
        }
        if self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
        }
        let n = binders.len();
        self.bound.extend(binders.iter().cloned());
        let body = self.formula();
        self.bound.truncate(self.bound.len() - n);
        let mut f = body?;
        for v in binders.into_iter().rev() {
            f = if universal { Formula::forall(v, f) } else { Formula::exists(v, f) };
        }
        Ok(f)
    }

    fn check_binder(&self, name: &str) -> PResult<()> {
        let span = self.span_prev();
        if let Some(v) = self.vocab {
            if v.contains_name(name) {
                return Err(NonCompliant::new(
                    NonCompliantReason::UnboundVariable,
                    format!("quantifier binds vocabulary name `{name}` instead of a variable"),
                    span,
                ));
            }
        }
        if !is_variable_shaped(name) {
            return Err(NonCompliant::new(
                NonCompliantReason::UnboundVariable,
                format!("`{name}` is not a variable name"),
                span,
            ));
        }
        Ok(())
    }

    fn atom(&mut self) -> PResult<Formula> {
        let Some(Tok::Ident(name)) = self.peek() else { return Err(self.unexpected()) };
        let name_span = self.span_here();
        self.pos += 1;
        if self.peek() == Some(&Tok::LParen) {
            if self.mode == LogicMode::Pl {
                return Err(NonCompliant::new(
                    NonCompliantReason::GrammarError,
                    format!("predicate application `{name}(...)` in propositional logic"),
                    name_span,
                ));
            }
            self.pos += 1;
            let mut args = Vec::new();
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        break;
                    }
                    None => return Err(self.err_here(NonCompliantReason::GrammarError, "unbalanced parentheses")),
                    _ => return Err(self.unexpected()),
                }
            }
            if let Some(v) = self.vocab {
                match v.predicate(name) {
                    None => {
                        return Err(NonCompliant::new(
                            NonCompliantReason::UnknownSymbol,
                            format!("unknown predicate `{name}`"),
                            name_span,
                        ))
                    }
                    Some(p) if p.arity != args.len() => {
                        return Err(NonCompliant::new(
                            NonCompliantReason::ArityMismatch,
                            format!("`{name}` expects {} argument(s), got {}", p.arity, args.len()),
                            name_span,
                        ))
                    }
                    Some(_) => {}
                }
            }
            return Ok(Formula::Pred(name.clone(), args));
        }
        match (self.mode, self.vocab) {
            (LogicMode::Pl, Some(v)) if !v.has_proposition(name) => Err(NonCompliant::new(
                NonCompliantReason::UnknownSymbol,
                format!("unknown proposition `{name}`"),
                name_span,
            )),
            (LogicMode::Fol, Some(v)) if v.predicate(name).is_some() => Err(NonCompliant::new(
                NonCompliantReason::ArityMismatch,
                format!("predicate `{name}` used without arguments"),
                name_span,
            )),
            (LogicMode::Fol, Some(v)) if !v.has_proposition(name) => Err(NonCompliant::new(
                NonCompliantReason::UnknownSymbol,
                format!("unknown symbol `{name}`"),
                name_span,
            )),
            _ => Ok(Formula::Prop(name.clone())),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let Some(Tok::Ident(name)) = self.peek() else { return Err(self.unexpected()) };
        let span = self.span_here();
        self.pos += 1;
        if self.bound.iter().any(|b| b == name) {
            return Ok(Term::Var(name.clone()));
        }
        match self.vocab {
            Some(v) if v.has_object(name) => Ok(Term::Object(name.clone())),
            Some(_) if is_variable_shaped(name) => Err(NonCompliant::new(
                NonCompliantReason::UnboundVariable,
                format!("variable `{name}` is not bound by a quantifier"),
                span,
            )),
            Some(_) => Err(NonCompliant::new(
                NonCompliantReason::UnknownSymbol,
                format!("unknown object `{name}`"),
                span,
            )),
            None => Ok(Term::Object(name.clone())),
        }
    }
}

fn trimmed_empty(text: &str) -> Option<NonCompliant> {
    text.trim().is_empty().then(|| NonCompliant::new(NonCompliantReason::EmptyOutput, "no output", None))
}

/// Parses `text` as a single formula; every token must be consumed.
pub fn parse_logic_exact(text: &str, mode: LogicMode, vocab: Option<&Vocabulary>) -> Result<Formula, NonCompliant> {
    if let Some(e) = trimmed_empty(text) {
        return Err(e);
    }
    let toks = lex_logic(text);
    parse_tokens_exact(&toks, mode, vocab, text.len())
}

fn parse_tokens_exact(
    toks: &[Spanned],
    mode: LogicMode,
    vocab: Option<&Vocabulary>,
    src_len: usize,
) -> Result<Formula, NonCompliant> {
    if let Some(bad) = toks.iter().find(|t| matches!(t.tok, Tok::Foreign(_) | Tok::Unknown(_))) {
        return Err(match &bad.tok {
            Tok::Foreign(s) => NonCompliant::new(
                NonCompliantReason::UnknownSymbol,
                format!("unsupported connective `{s}`"),
                Some((bad.start, bad.end)),
            ),
            Tok::Unknown(c) => NonCompliant::new(
                NonCompliantReason::LexError,
                format!("unexpected character `{c}`"),
                Some((bad.start, bad.end)),
            ),
            _ => unreachable!(),
        });
    }
    let mut p = LogicParser::new(toks, mode, vocab, src_len);
    let f = p.formula()?;
    if p.pos < toks.len() {
        return Err(p.unexpected());
    }
    Ok(f)
}

/// Parses model output as a formula.
///
/// The whole text is tried first. Failing that, the longest token span that
/// parses as a formula is extracted, provided no operator glyph occurs
/// outside it. Otherwise the error from the whole-text parse is returned.
pub fn parse_logic(text: &str, mode: LogicMode, vocab: Option<&Vocabulary>) -> Result<Formula, NonCompliant> {
    if let Some(e) = trimmed_empty(text) {
        return Err(e);
    }
    let toks = lex_logic(text);
    let whole = parse_tokens_exact(&toks, mode, vocab, text.len());
    if whole.is_ok() || toks.len() > SPAN_SEARCH_TOKEN_LIMIT {
        return whole;
    }
    let spans = logic_spans(&toks, mode, vocab, text.len());
    let best = spans
        .into_iter()
        .filter(|(i, j, _)| {
            let rest = || toks[..*i].iter().chain(&toks[*j..]);
            !rest().any(|t| t.tok.is_glyph()) && balanced(rest().map(|t| match t.tok {
                Tok::LParen => '(',
                Tok::RParen => ')',
                _ => ' ',
            }))
        })
        .max_by(|a, b| {
            let la = toks[a.1 - 1].end - toks[a.0].start;
            let lb = toks[b.1 - 1].end - toks[b.0].start;
            la.cmp(&lb).then(b.0.cmp(&a.0))
        });
    match best {
        Some((_, _, f)) => Ok(f),
        None => whole,
    }
}

/// Every maximal formula that parses starting at each token; returns token
/// ranges `[i, j)`.
fn logic_spans(
    toks: &[Spanned],
    mode: LogicMode,
    vocab: Option<&Vocabulary>,
    src_len: usize,
) -> Vec<(usize, usize, Formula)> {
    let mut out = Vec::new();
    for i in 0..toks.len() {
        if !toks[i].tok.can_start() {
            continue;
        }
        let mut p = LogicParser::new(&toks[i..], mode, vocab, src_len);
        if let Ok(f) = p.formula() {
            out.push((i, i + p.pos, f));
        }
    }
    out
}

/// Whether the parentheses among `chars` pair up.
fn balanced(chars: impl Iterator<Item = char>) -> bool {
    let mut depth = 0i64;
    for c in chars {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

// ---------------------------------------------------------------------------
// Regex parser

const FOREIGN_REGEX: &str = ".+?|[]{}^$\\";

struct RegexParser<'a> {
    chars: &'a [(usize, char)],
    pos: usize,
    alphabet: &'a [char],
    depth: usize,
    src_len: usize,
}

impl<'a> RegexParser<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn span_here(&self) -> Option<(usize, usize)> {
        match self.chars.get(self.pos) {
            Some(&(i, c)) => Some((i, i + c.len_utf8())),
            None => Some((self.src_len, self.src_len)),
        }
    }

    fn unexpected(&self) -> NonCompliant {
        match self.peek() {
            None => NonCompliant::new(NonCompliantReason::GrammarError, "unexpected end of input", self.span_here()),
            Some(c) if c.is_ascii_alphanumeric() || FOREIGN_REGEX.contains(c) => NonCompliant::new(
                NonCompliantReason::UnknownSymbol,
                format!("unknown symbol `{c}`"),
                self.span_here(),
            ),
            Some('*') => NonCompliant::new(
                NonCompliantReason::GrammarError,
                "star must follow a symbol or a group",
                self.span_here(),
            ),
            Some(')') => NonCompliant::new(NonCompliantReason::GrammarError, "unbalanced parentheses", self.span_here()),
            Some(c) => NonCompliant::new(NonCompliantReason::LexError, format!("unexpected character `{c}`"), self.span_here()),
        }
    }

    fn sequence(&mut self) -> PResult<Vec<RegexAst>> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '(' || self.alphabet.contains(&c) {
                items.push(self.item()?);
            } else {
                break;
            }
        }
        Ok(items)
    }

    fn item(&mut self) -> PResult<RegexAst> {
        let atom = match self.peek() {
            Some('(') => {
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return Err(NonCompliant::new(
                        NonCompliantReason::GrammarError,
                        "nesting depth limit exceeded",
                        self.span_here(),
                    ));
                }
                let open = self.span_here();
                self.pos += 1;
                let inner = stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.sequence())?;
                if self.peek() != Some(')') {
                    return Err(match self.peek() {
                        None => NonCompliant::new(NonCompliantReason::GrammarError, "unbalanced parentheses", open),
                        _ => self.unexpected(),
                    });
                }
                if inner.is_empty() {
                    return Err(NonCompliant::new(NonCompliantReason::GrammarError, "empty group", open));
                }
                self.pos += 1;
                self.depth -= 1;
                RegexAst::Group(Box::new(concat(inner)))
            }
            Some(c) => {
                self.pos += 1;
                RegexAst::Symbol(c)
            }
            None => return Err(self.unexpected()),
        };
        if self.peek() == Some('*') {
            self.pos += 1;
            if self.peek() == Some('*') {
                return Err(NonCompliant::new(NonCompliantReason::GrammarError, "repeated star", self.span_here()));
            }
            return Ok(RegexAst::Star(Box::new(atom)));
        }
        Ok(atom)
    }
}

fn concat(mut items: Vec<RegexAst>) -> RegexAst {
    if items.len() == 1 {
        items.pop().unwrap()
    } else {
        RegexAst::Concat(items)
    }
}

fn regex_chars(text: &str) -> Vec<(usize, char)> {
    text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect()
}

fn parse_regex_chars(chars: &[(usize, char)], alphabet: &[char], src_len: usize) -> (usize, PResult<RegexAst>) {
    let mut p = RegexParser { chars, pos: 0, alphabet, depth: 0, src_len };
    let r = p.sequence().and_then(|items| {
        if items.is_empty() {
            Err(p.unexpected())
        } else {
            Ok(concat(items))
        }
    });
    (p.pos, r)
}

/// Parses `text` as a regex over `alphabet`; every character must be consumed.
pub fn parse_regex_exact(text: &str, alphabet: &[char]) -> Result<RegexAst, NonCompliant> {
    if let Some(e) = trimmed_empty(text) {
        return Err(e);
    }
    let chars = regex_chars(text);
    let (pos, r) = parse_regex_chars(&chars, alphabet, text.len());
    let ast = r?;
    if pos < chars.len() {
        let mut p = RegexParser { chars: &chars, pos, alphabet, depth: 0, src_len: text.len() };
        p.pos = pos;
        return Err(p.unexpected());
    }
    Ok(ast)
}

fn is_regex_glyph(c: char) -> bool {
    c == '*' || "+?|[]{}".contains(c)
}

/// Parses model output as a regex, falling back to the longest parsable span
/// when no regex operator occurs outside it.
pub fn parse_regex(text: &str, alphabet: &[char]) -> Result<RegexAst, NonCompliant> {
    let whole = parse_regex_exact(text, alphabet);
    if whole.is_ok() {
        return whole;
    }
    let chars = regex_chars(text);
    if chars.len() > SPAN_SEARCH_TOKEN_LIMIT {
        return whole;
    }
    let best = regex_spans(&chars, alphabet, text.len())
        .into_iter()
        .filter(|(i, j, _)| {
            let rest = || chars[..*i].iter().chain(&chars[*j..]).map(|&(_, c)| c);
            !rest().any(is_regex_glyph) && balanced(rest())
        })
        .max_by(|a, b| (a.1 - a.0).cmp(&(b.1 - b.0)).then(b.0.cmp(&a.0)));
    match best {
        Some((_, _, r)) => Ok(r),
        None => whole,
    }
}

fn regex_spans(chars: &[(usize, char)], alphabet: &[char], src_len: usize) -> Vec<(usize, usize, RegexAst)> {
    let mut out = Vec::new();
    for i in 0..chars.len() {
        let c = chars[i].1;
        if c != '(' && !alphabet.contains(&c) {
            continue;
        }
        // a symbol glued to a word character is part of that word
        if i > 0 && chars[i - 1].0 + chars[i - 1].1.len_utf8() == chars[i].0 && chars[i - 1].1.is_alphanumeric() && !alphabet.contains(&chars[i - 1].1) {
            continue;
        }
        let (pos, r) = parse_regex_chars(&chars[i..], alphabet, src_len);
        if let Ok(ast) = r {
            let j = i + pos;
            let glued = chars.get(j).is_some_and(|&(off, d)| {
                d.is_alphanumeric() && chars[j - 1].0 + chars[j - 1].1.len_utf8() == off
            });
            if !glued {
                out.push((i, j, ast));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Leakage guard

/// The target language of a leakage check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormalLanguage {
    Logic(LogicMode),
    Regex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LeakOutcome {
    Ok,
    Violation { span: (usize, usize), reason: String },
}

impl LeakOutcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, LeakOutcome::Ok)
    }
}

const LOGIC_GLYPHS: &str = "∧∨¬∀∃&|~→↔⇒⇔";

/// Flags natural-language text that copies formal syntax: any operator glyph
/// of the formal token set, or any contiguous span that parses as a formula
/// with at least two atoms or a quantifier (regexes: at least two symbols).
/// Vocabulary names on their own are allowed.
pub fn leakage_check(nl: &str, language: FormalLanguage, vocab: &Vocabulary) -> LeakOutcome {
    match language {
        FormalLanguage::Logic(mode) => {
            if let Some((i, c)) = nl.char_indices().find(|(_, c)| LOGIC_GLYPHS.contains(*c)) {
                return LeakOutcome::Violation {
                    span: (i, i + c.len_utf8()),
                    reason: format!("operator glyph `{c}`"),
                };
            }
            let toks = lex_logic(nl);
            if toks.len() > SPAN_SEARCH_TOKEN_LIMIT * 4 {
                return LeakOutcome::Ok;
            }
            for (i, j, f) in logic_spans(&toks, mode, Some(vocab), nl.len()) {
                let quantified = matches!(f, Formula::Forall(..) | Formula::Exists(..));
                if f.atom_count() >= 2 || quantified {
                    return LeakOutcome::Violation {
                        span: (toks[i].start, toks[j - 1].end),
                        reason: format!("copied formula `{f}`"),
                    };
                }
            }
            LeakOutcome::Ok
        }
        FormalLanguage::Regex => {
            if let Some((i, c)) = nl.char_indices().find(|(_, c)| is_regex_glyph(*c)) {
                return LeakOutcome::Violation {
                    span: (i, i + c.len_utf8()),
                    reason: format!("operator glyph `{c}`"),
                };
            }
            let chars = regex_chars(nl);
            for (i, j, r) in regex_spans(&chars, &vocab.alphabet, nl.len()) {
                if r.symbol_count() >= 2 {
                    let end = chars[j - 1].0 + chars[j - 1].1.len_utf8();
                    return LeakOutcome::Violation { span: (chars[i].0, end), reason: format!("copied regex `{r}`") };
                }
            }
            LeakOutcome::Ok
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocabulary::{make_vocabulary, Predicate, Proposition, VocabParams};

    fn pl_vocab() -> Vocabulary {
        make_vocabulary(&VocabParams::default()).unwrap()
    }

    fn fol_vocab() -> Vocabulary {
        Vocabulary {
            propositions: vec![],
            predicates: (1..=8).map(|i| Predicate { name: format!("pred{i}"), arity: 1, gloss: None }).collect(),
            objects: (1..=12).map(|i| format!("p{i}")).collect(),
            alphabet: vec![],
        }
    }

    fn nc(r: Result<impl fmt::Debug, NonCompliant>) -> NonCompliantReason {
        r.expect_err("expected non-compliance").reason
    }

    #[test]
    fn parses_negated_conjunction() {
        let f = parse_logic("(¬p11 ∧ ¬p8)", LogicMode::Pl, Some(&pl_vocab())).unwrap();
        assert_eq!(
            f,
            Formula::And(vec![Formula::not(Formula::prop("p11")), Formula::not(Formula::prop("p8"))])
        );
    }

    #[test]
    fn ascii_spellings() {
        let v = pl_vocab();
        let a = parse_logic("(~p1 & p2) | !p3", LogicMode::Pl, Some(&v)).unwrap();
        let b = parse_logic("(¬p1 ∧ p2) ∨ ¬p3", LogicMode::Pl, Some(&v)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conjunction_binds_tighter_than_disjunction() {
        let f = parse_logic("p1 ∧ p2 ∨ p3", LogicMode::Pl, None).unwrap();
        assert_eq!(
            f,
            Formula::Or(vec![Formula::And(vec![Formula::prop("p1"), Formula::prop("p2")]), Formula::prop("p3")])
        );
    }

    #[test]
    fn object_binder_is_rejected() {
        let r = parse_logic("∃p7.¬pred5(p7)", LogicMode::Fol, Some(&fol_vocab()));
        assert_eq!(nc(r), NonCompliantReason::UnboundVariable);
    }

    #[test]
    fn empty_output() {
        assert_eq!(nc(parse_logic("", LogicMode::Pl, None)), NonCompliantReason::EmptyOutput);
        assert_eq!(nc(parse_logic("  \n ", LogicMode::Fol, None)), NonCompliantReason::EmptyOutput);
        assert_eq!(nc(parse_regex("", &['0', '1'])), NonCompliantReason::EmptyOutput);
    }

    #[test]
    fn implication_is_unknown_symbol() {
        let v = pl_vocab();
        for t in ["p1 → p2", "p1 -> p2", "p1 <-> p2", "(p1 ⇒ p2)"] {
            let r = parse_logic(t, LogicMode::Pl, Some(&v));
            assert_eq!(nc(r), NonCompliantReason::UnknownSymbol, "{t}");
        }
    }

    #[test]
    fn unknown_proposition_and_arity() {
        let v = pl_vocab();
        assert_eq!(nc(parse_logic("(p1 ∧ q)", LogicMode::Pl, Some(&v))), NonCompliantReason::UnknownSymbol);
        let fv = fol_vocab();
        assert_eq!(nc(parse_logic("pred1(p1, p2)", LogicMode::Fol, Some(&fv))), NonCompliantReason::ArityMismatch);
        assert_eq!(nc(parse_logic("pred9(p1)", LogicMode::Fol, Some(&fv))), NonCompliantReason::UnknownSymbol);
        assert_eq!(nc(parse_logic("pred1(x3)", LogicMode::Fol, Some(&fv))), NonCompliantReason::UnboundVariable);
    }

    #[test]
    fn quantifier_forms() {
        let fv = Vocabulary {
            predicates: vec![Predicate { name: "pred3".into(), arity: 2, gloss: None }],
            ..fol_vocab()
        };
        let want = Formula::forall(
            "x1",
            Formula::pred("pred3", vec![Term::Object("p5".into()), Term::Var("x1".into())]),
        );
        for t in ["∀x1. pred3(p5, x1)", "∀x1 pred3(p5, x1)", "all x1. pred3(p5, x1)", "(∀x1. pred3(p5,x1))"] {
            assert_eq!(parse_logic(t, LogicMode::Fol, Some(&fv)).unwrap(), want, "{t}");
        }
        let multi = parse_logic("all x1 x2. pred3(x1, x2)", LogicMode::Fol, Some(&fv)).unwrap();
        assert!(matches!(multi, Formula::Forall(ref a, ref b) if a == "x1" && matches!(**b, Formula::Forall(..))));
    }

    #[test]
    fn quantifier_in_pl_is_grammar_error() {
        assert_eq!(nc(parse_logic("∀x. p1", LogicMode::Pl, None)), NonCompliantReason::GrammarError);
    }

    #[test]
    fn extracts_formula_from_prose() {
        let v = pl_vocab();
        let f = parse_logic("Here is the formula:\n```\n(p5 ∨ ¬p12)\n```", LogicMode::Pl, Some(&v)).unwrap();
        assert_eq!(f.to_unicode(), "(p5 ∨ ¬p12)");
        let f = parse_logic("The answer is (p1 ∧ p2).", LogicMode::Pl, Some(&v)).unwrap();
        assert_eq!(f.to_unicode(), "(p1 ∧ p2)");
    }

    #[test]
    fn prose_without_formula_is_noncompliant() {
        let v = pl_vocab();
        let r = parse_logic("I cannot produce a formula for this description.", LogicMode::Pl, Some(&v));
        assert_eq!(nc(r), NonCompliantReason::UnknownSymbol);
    }

    #[test]
    fn partial_formula_next_to_glyphs_is_not_extracted() {
        let v = pl_vocab();
        let r = parse_logic("(p1 ∧ p2 → p3", LogicMode::Pl, Some(&v));
        assert!(r.is_err());
    }

    #[test]
    fn unbalanced_parentheses() {
        assert_eq!(nc(parse_logic("((p1 ∧ p2)", LogicMode::Pl, None)), NonCompliantReason::GrammarError);
    }

    #[test]
    fn depth_cap() {
        let deep = format!("{}p1{}", "(".repeat(MAX_DEPTH + 1), ")".repeat(MAX_DEPTH + 1));
        assert_eq!(nc(parse_logic_exact(&deep, LogicMode::Pl, None)), NonCompliantReason::GrammarError);
        let ok = format!("{}p1{}", "(".repeat(2_000), ")".repeat(2_000));
        assert_eq!(parse_logic_exact(&ok, LogicMode::Pl, None).unwrap(), Formula::prop("p1"));
        let negs = format!("{}p1", "¬".repeat(MAX_DEPTH + 5));
        assert_eq!(nc(parse_logic_exact(&negs, LogicMode::Pl, None)), NonCompliantReason::GrammarError);
    }

    #[test]
    fn regex_examples() {
        let ab = ['0', '1'];
        let s = |c| RegexAst::Symbol(c);
        assert_eq!(
            parse_regex("1*0", &ab).unwrap(),
            RegexAst::Concat(vec![RegexAst::Star(Box::new(s('1'))), s('0')])
        );
        assert_eq!(
            parse_regex("(1*)*0", &ab).unwrap(),
            RegexAst::Concat(vec![
                RegexAst::Star(Box::new(RegexAst::Group(Box::new(RegexAst::Star(Box::new(s('1'))))))),
                s('0')
            ])
        );
        let r = parse_regex("(.*)", &ab);
        let e = r.unwrap_err();
        assert_eq!(e.reason, NonCompliantReason::UnknownSymbol);
        assert!(e.message.contains('.'));
    }

    #[test]
    fn regex_foreign_operators() {
        let ab = ['0', '1'];
        assert_eq!(nc(parse_regex("1+0", &ab)), NonCompliantReason::UnknownSymbol);
        assert_eq!(nc(parse_regex("1**", &ab)), NonCompliantReason::GrammarError);
        assert_eq!(nc(parse_regex("()", &ab)), NonCompliantReason::GrammarError);
        assert_eq!(nc(parse_regex("(10", &ab)), NonCompliantReason::GrammarError);
        assert_eq!(nc(parse_regex("2*", &ab)), NonCompliantReason::UnknownSymbol);
        assert_eq!(nc(parse_regex("*1", &ab)), NonCompliantReason::GrammarError);
    }

    #[test]
    fn regex_extraction_and_whitespace() {
        let ab = ['0', '1'];
        assert_eq!(parse_regex("The regex is (1*)0.", &ab).unwrap().to_string(), "(1*)0");
        assert_eq!(parse_regex(" 1* 0 ", &ab).unwrap().to_string(), "1*0");
    }

    #[test]
    fn leakage_examples() {
        let v = pl_vocab();
        let lang = FormalLanguage::Logic(LogicMode::Pl);
        assert!(leakage_check("The proposition p5 or the negation of p12", lang, &v).is_ok());
        assert!(!leakage_check("The formula (p5 ∨ ¬p12) holds", lang, &v).is_ok());
        assert!(!leakage_check("p1 ∧ p1 simplifies to p1", lang, &v).is_ok());
    }

    #[test]
    fn leakage_substring_rule_without_glyphs() {
        // NLTK-style negation and a parenthesized chain parse as a formula
        let v = pl_vocab();
        let lang = FormalLanguage::Logic(LogicMode::Pl);
        let out = leakage_check("It holds that (-p5) or maybe -p12 -p3", lang, &v);
        assert!(out.is_ok(), "single atoms are allowed: {out:?}");
        let fv = fol_vocab();
        let out = leakage_check("note all x1. pred1(x1) is true", FormalLanguage::Logic(LogicMode::Fol), &fv);
        assert!(!out.is_ok());
    }

    #[test]
    fn regex_leakage() {
        let v = Vocabulary { alphabet: vec!['0', '1'], ..pl_vocab() };
        assert!(!leakage_check("it is 1*0", FormalLanguage::Regex, &v).is_ok());
        assert!(!leakage_check("the string 10 exactly", FormalLanguage::Regex, &v).is_ok());
        assert!(leakage_check("the digit '1' then the digit '0'", FormalLanguage::Regex, &v).is_ok());
    }

    #[test]
    fn proposition_vocab_is_consulted() {
        let v = Vocabulary {
            propositions: vec![Proposition { name: "rain".into(), gloss: None }],
            predicates: vec![],
            objects: vec![],
            alphabet: vec![],
        };
        assert!(parse_logic("¬rain", LogicMode::Pl, Some(&v)).is_ok());
        assert!(parse_logic("¬snow", LogicMode::Pl, Some(&v)).is_err());
    }
}
