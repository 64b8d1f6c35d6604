//! Clausal normal form and a saturating binary-resolution prover.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::syntax::{Formula, Term};

/// Clause sets larger than this are not produced by CNF distribution.
pub const MAX_CLAUSES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FoTerm {
    Var(u32),
    /// Function application; constants have no arguments.
    App(u32, Vec<FoTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub pred: u32,
    pub args: Vec<FoTerm>,
}

pub type Clause = Vec<Literal>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClausifyError {
    #[error("clause form exceeds {MAX_CLAUSES} clauses")]
    TooLarge,
}

/// Clauses with the symbol names needed to print them.
#[derive(Debug, Clone, Default)]
pub struct ClauseSet {
    pub clauses: Vec<Clause>,
    pub predicates: Vec<String>,
    pub functions: Vec<String>,
    pub variables: Vec<String>,
}

impl ClauseSet {
    fn pred_id(&mut self, name: &str) -> u32 {
        intern(&mut self.predicates, name)
    }

    fn fn_id(&mut self, name: &str) -> u32 {
        intern(&mut self.functions, name)
    }

    fn fresh_var(&mut self, name: &str) -> u32 {
        self.variables.push(name.to_string());
        (self.variables.len() - 1) as u32
    }

    fn fresh_skolem(&mut self) -> u32 {
        // '#' cannot occur in parsed names, so Skolem symbols never clash
        let n = self.functions.iter().filter(|f| f.starts_with('#')).count() + 1;
        self.functions.push(format!("#sk{n}"));
        (self.functions.len() - 1) as u32
    }

    pub fn term_to_string(&self, t: &FoTerm) -> String {
        match t {
            FoTerm::Var(v) => self.variables.get(*v as usize).cloned().unwrap_or_else(|| format!("_{v}")),
            FoTerm::App(f, args) => {
                let name = self.functions[*f as usize].trim_start_matches('#');
                if args.is_empty() {
                    return name.to_string();
                }
                let a: Vec<String> = args.iter().map(|x| self.term_to_string(x)).collect();
                format!("{name}({})", a.join(", "))
            }
        }
    }

    pub fn literal_to_string(&self, l: &Literal) -> String {
        let sign = if l.positive { "" } else { "¬" };
        let key = &self.predicates[l.pred as usize];
        let name = key.rsplit_once('/').map_or(key.as_str(), |(n, _)| n);
        if l.args.is_empty() {
            format!("{sign}{name}")
        } else {
            let a: Vec<String> = l.args.iter().map(|x| self.term_to_string(x)).collect();
            format!("{sign}{name}({})", a.join(", "))
        }
    }
}

impl fmt::Display for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let ls: Vec<String> = c.iter().map(|l| self.literal_to_string(l)).collect();
                format!("{{{}}}", ls.join(", "))
            })
            .collect();
        write!(f, "{{{}}}", cs.join(", "))
    }
}

fn intern(table: &mut Vec<String>, name: &str) -> u32 {
    match table.iter().position(|x| x == name) {
        Some(i) => i as u32,
        None => {
            table.push(name.to_string());
            (table.len() - 1) as u32
        }
    }
}

/// Negation normal form node with quantifiers still in place.
enum Nnf<'a> {
    Lit(bool, &'a Formula),
    And(Vec<Nnf<'a>>),
    Or(Vec<Nnf<'a>>),
    Forall(&'a str, Box<Nnf<'a>>),
    Exists(&'a str, Box<Nnf<'a>>),
}

fn nnf(f: &Formula, positive: bool) -> Nnf<'_> {
    stacker::maybe_grow(64 * 1024, 1024 * 1024, || match f {
        Formula::Prop(_) | Formula::Pred(..) => Nnf::Lit(positive, f),
        Formula::Not(g) => nnf(g, !positive),
        Formula::And(gs) | Formula::Or(gs) => {
            let kids = gs.iter().map(|g| nnf(g, positive)).collect();
            if matches!(f, Formula::And(_)) == positive {
                Nnf::And(kids)
            } else {
                Nnf::Or(kids)
            }
        }
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            let b = Box::new(nnf(body, positive));
            if matches!(f, Formula::Forall(..)) == positive {
                Nnf::Forall(x, b)
            } else {
                Nnf::Exists(x, b)
            }
        }
    })
}

/// Quantifier-free matrix after Skolemization.
enum Matrix {
    Lit(Literal),
    And(Vec<Matrix>),
    Or(Vec<Matrix>),
}

fn skolemize<'a>(
    n: &Nnf<'a>,
    cs: &mut ClauseSet,
    env: &mut Vec<(&'a str, FoTerm)>,
    universals: &mut Vec<u32>,
) -> Matrix {
    match n {
        Nnf::Lit(positive, f) => {
            let (name, args): (&str, &[Term]) = match f {
                Formula::Prop(p) => (p, &[]),
                Formula::Pred(p, a) => (p, a),
                _ => unreachable!(),
            };
            let args = args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => env
                        .iter()
                        .rev()
                        .find(|(x, _)| x == v)
                        .map(|(_, t)| t.clone())
                        .unwrap_or_else(|| FoTerm::App(cs.fn_id(v), Vec::new())),
                    Term::Object(o) => FoTerm::App(cs.fn_id(o), Vec::new()),
                })
                .collect();
            let pred = cs.pred_id(&format!("{name}/{}", f_arity(f)));
            Matrix::Lit(Literal { positive: *positive, pred, args })
        }
        Nnf::And(kids) => Matrix::And(kids.iter().map(|k| skolemize(k, cs, env, universals)).collect()),
        Nnf::Or(kids) => Matrix::Or(kids.iter().map(|k| skolemize(k, cs, env, universals)).collect()),
        Nnf::Forall(x, body) => {
            let v = cs.fresh_var(x);
            env.push((x, FoTerm::Var(v)));
            universals.push(v);
            let m = skolemize(body, cs, env, universals);
            universals.pop();
            env.pop();
            m
        }
        Nnf::Exists(x, body) => {
            let sk = cs.fresh_skolem();
            let t = FoTerm::App(sk, universals.iter().map(|&u| FoTerm::Var(u)).collect());
            env.push((x, t));
            let m = skolemize(body, cs, env, universals);
            env.pop();
            m
        }
    }
}

fn f_arity(f: &Formula) -> usize {
    match f {
        Formula::Pred(_, a) => a.len(),
        _ => 0,
    }
}

fn cnf(m: Matrix) -> Result<Vec<Clause>, ClausifyError> {
    match m {
        Matrix::Lit(l) => Ok(vec![vec![l]]),
        Matrix::And(kids) => {
            let mut out = Vec::new();
            for k in kids {
                out.extend(cnf(k)?);
                if out.len() > MAX_CLAUSES {
                    return Err(ClausifyError::TooLarge);
                }
            }
            Ok(out)
        }
        Matrix::Or(kids) => {
            let mut acc: Vec<Clause> = vec![Vec::new()];
            for k in kids {
                let part = cnf(k)?;
                if acc.len().saturating_mul(part.len()) > MAX_CLAUSES {
                    return Err(ClausifyError::TooLarge);
                }
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for p in &part {
                        let mut c = a.clone();
                        c.extend(p.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
    }
}

fn normalize(mut c: Clause) -> Option<Clause> {
    c.sort();
    c.dedup();
    let tautology = c
        .windows(2)
        .any(|w| w[0].pred == w[1].pred && w[0].args == w[1].args && w[0].positive != w[1].positive);
    (!tautology).then_some(c)
}

/// Equisatisfiable clause form of a sentence: negation normal form,
/// Skolemization with functions of the enclosing universal variables, then
/// distribution into CNF. Tautologies are dropped.
pub fn clausify(f: &Formula) -> Result<ClauseSet, ClausifyError> {
    let mut cs = ClauseSet::default();
    let n = nnf(f, true);
    let m = skolemize(&n, &mut cs, &mut Vec::new(), &mut Vec::new());
    let mut seen = BTreeSet::new();
    for c in cnf(m)? {
        if let Some(c) = normalize(c) {
            if seen.insert(c.clone()) {
                cs.clauses.push(c);
            }
        }
    }
    Ok(cs)
}

// ---------------------------------------------------------------------------
// Unification and subsumption

type Subst = HashMap<u32, FoTerm>;

fn walk<'t>(t: &'t FoTerm, s: &'t Subst) -> &'t FoTerm {
    let mut t = t;
    while let FoTerm::Var(v) = t {
        match s.get(v) {
            Some(u) => t = u,
            None => break,
        }
    }
    t
}

fn occurs(v: u32, t: &FoTerm, s: &Subst) -> bool {
    match walk(t, s) {
        FoTerm::Var(w) => *w == v,
        FoTerm::App(_, args) => args.iter().any(|a| occurs(v, a, s)),
    }
}

fn unify(a: &FoTerm, b: &FoTerm, s: &mut Subst) -> bool {
    let a = walk(a, s).clone();
    let b = walk(b, s).clone();
    match (&a, &b) {
        (FoTerm::Var(x), FoTerm::Var(y)) if x == y => true,
        (FoTerm::Var(x), t) | (t, FoTerm::Var(x)) => {
            if occurs(*x, t, s) {
                return false;
            }
            s.insert(*x, t.clone());
            true
        }
        (FoTerm::App(f, xs), FoTerm::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, s))
        }
    }
}

fn unify_args(xs: &[FoTerm], ys: &[FoTerm], s: &mut Subst) -> bool {
    xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, s))
}

fn apply(t: &FoTerm, s: &Subst) -> FoTerm {
    match walk(t, s) {
        FoTerm::Var(v) => FoTerm::Var(*v),
        FoTerm::App(f, args) => FoTerm::App(*f, args.iter().map(|a| apply(a, s)).collect()),
    }
}

fn apply_lit(l: &Literal, s: &Subst) -> Literal {
    Literal { positive: l.positive, pred: l.pred, args: l.args.iter().map(|a| apply(a, s)).collect() }
}

/// One-way matching: extends `s` so that `pattern` instantiated by `s`
/// equals `target`. Variables of `target` are treated as constants.
fn match_term(pattern: &FoTerm, target: &FoTerm, s: &mut Subst) -> bool {
    match pattern {
        FoTerm::Var(v) => match s.get(v) {
            Some(bound) => bound == target,
            None => {
                s.insert(*v, target.clone());
                true
            }
        },
        FoTerm::App(f, xs) => match target {
            FoTerm::App(g, ys) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| match_term(x, y, s))
            }
            _ => false,
        },
    }
}

fn subsumes_from(c: &[Literal], d: &[Literal], s: &Subst) -> bool {
    let Some((first, rest)) = c.split_first() else { return true };
    for l in d {
        if l.positive != first.positive || l.pred != first.pred || l.args.len() != first.args.len() {
            continue;
        }
        let mut s2 = s.clone();
        if first.args.iter().zip(&l.args).all(|(p, t)| match_term(p, t, &mut s2)) && subsumes_from(rest, d, &s2) {
            return true;
        }
    }
    false
}

/// Whether some instance of `c` is a subset of `d`.
pub fn subsumes(c: &[Literal], d: &[Literal]) -> bool {
    c.len() <= d.len() && subsumes_from(c, d, &Subst::new())
}

// ---------------------------------------------------------------------------
// Given-clause loop

fn term_weight(t: &FoTerm) -> usize {
    match t {
        FoTerm::Var(_) => 1,
        FoTerm::App(_, args) => 1 + args.iter().map(term_weight).sum::<usize>(),
    }
}

fn weight(c: &[Literal]) -> usize {
    c.iter().map(|l| 1 + l.args.iter().map(term_weight).sum::<usize>()).sum()
}

fn max_var(c: &[Literal]) -> Option<u32> {
    fn go(t: &FoTerm, m: &mut Option<u32>) {
        match t {
            FoTerm::Var(v) => *m = Some(m.map_or(*v, |x| x.max(*v))),
            FoTerm::App(_, args) => args.iter().for_each(|a| go(a, m)),
        }
    }
    let mut m = None;
    for l in c {
        l.args.iter().for_each(|a| go(a, &mut m));
    }
    m
}

/// Renames variables to `base, base+1, ...` in order of first occurrence.
fn rename(c: &[Literal], base: u32) -> Clause {
    fn go(t: &FoTerm, map: &mut HashMap<u32, u32>, base: u32) -> FoTerm {
        match t {
            FoTerm::Var(v) => {
                let n = map.len() as u32;
                FoTerm::Var(*map.entry(*v).or_insert(base + n))
            }
            FoTerm::App(f, args) => FoTerm::App(*f, args.iter().map(|a| go(a, map, base)).collect()),
        }
    }
    let mut map = HashMap::new();
    c.iter()
        .map(|l| Literal { positive: l.positive, pred: l.pred, args: l.args.iter().map(|a| go(a, &mut map, base)).collect() })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofResult {
    /// Empty clause derived after this many inference steps.
    Refuted { steps: usize },
    /// No new clauses: the set is satisfiable.
    Saturated { steps: usize },
    StepLimit,
    Timeout,
}

#[derive(Debug, Clone, Copy)]
pub struct ProverLimits {
    pub max_steps: usize,
    pub deadline: Option<Instant>,
}

/// Clauses longer than this are discarded by the prover (incompleteness is
/// absorbed as an Unknown verdict upstream).
const MAX_CLAUSE_LEN: usize = 24;
const MAX_TERM_DEPTH: usize = 8;

fn term_depth(t: &FoTerm) -> usize {
    match t {
        FoTerm::Var(_) => 0,
        FoTerm::App(_, args) => 1 + args.iter().map(term_depth).max().unwrap_or(0),
    }
}

/// Saturates `clauses` by binary resolution and factoring with forward and
/// backward subsumption, selecting the lightest unprocessed clause first
/// (ties broken by creation order).
pub fn refute(clauses: &[Clause], limits: ProverLimits) -> ProofResult {
    let mut steps = 0usize;
    // (weight, id) ordered queue of unprocessed clauses
    let mut unprocessed: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut store: Vec<Clause> = Vec::new();
    let mut processed: Vec<usize> = Vec::new();
    let mut alive: Vec<bool> = Vec::new();
    let mut next_var = 0u32;

    let push = |c: Clause, store: &mut Vec<Clause>, alive: &mut Vec<bool>, q: &mut BTreeSet<(usize, usize)>, next_var: &mut u32| {
        let c = rename(&c, *next_var);
        if let Some(m) = max_var(&c) {
            *next_var = m + 1;
        }
        q.insert((weight(&c), store.len()));
        store.push(c);
        alive.push(true);
    };

    for c in clauses {
        if c.is_empty() {
            return ProofResult::Refuted { steps: 0 };
        }
        push(c.clone(), &mut store, &mut alive, &mut unprocessed, &mut next_var);
    }

    while let Some((w, id)) = unprocessed.pop_first() {
        let _ = w;
        if limits.deadline.is_some_and(|d| Instant::now() >= d) {
            return ProofResult::Timeout;
        }
        let given = store[id].clone();
        if processed.iter().any(|&p| alive[p] && subsumes(&store[p], &given)) {
            alive[id] = false;
            continue;
        }
        for &p in &processed {
            if alive[p] && subsumes(&given, &store[p]) {
                alive[p] = false;
            }
        }
        processed.retain(|&p| alive[p]);
        processed.push(id);

        let mut fresh: Vec<Clause> = Vec::new();
        // factors of the given clause
        for i in 0..given.len() {
            for j in i + 1..given.len() {
                let (a, b) = (&given[i], &given[j]);
                if a.positive == b.positive && a.pred == b.pred {
                    let mut s = Subst::new();
                    if unify_args(&a.args, &b.args, &mut s) {
                        let f: Clause = given.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, l)| apply_lit(l, &s)).collect();
                        fresh.push(f);
                    }
                }
            }
        }
        // binary resolvents with every processed clause, the given one included
        for &p in &processed {
            let other = if p == id { rename(&given, next_var + 1_000_000) } else { store[p].clone() };
            for (i, a) in given.iter().enumerate() {
                for (j, b) in other.iter().enumerate() {
                    if a.positive == b.positive || a.pred != b.pred {
                        continue;
                    }
                    let mut s = Subst::new();
                    if !unify_args(&a.args, &b.args, &mut s) {
                        continue;
                    }
                    let r: Clause = given
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != i)
                        .map(|(_, l)| apply_lit(l, &s))
                        .chain(other.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, l)| apply_lit(l, &s)))
                        .collect();
                    fresh.push(r);
                }
            }
        }
        for c in fresh {
            steps += 1;
            if steps > limits.max_steps {
                return ProofResult::StepLimit;
            }
            let Some(c) = normalize(c) else { continue };
            if c.is_empty() {
                return ProofResult::Refuted { steps };
            }
            if c.len() > MAX_CLAUSE_LEN || c.iter().any(|l| l.args.iter().any(|t| term_depth(t) > MAX_TERM_DEPTH)) {
                continue;
            }
            if processed.iter().any(|&p| alive[p] && subsumes(&store[p], &c)) {
                continue;
            }
            push(c, &mut store, &mut alive, &mut unprocessed, &mut next_var);
        }
    }
    ProofResult::Saturated { steps }
}
