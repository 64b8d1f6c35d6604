//! Finite interpretations and countermodel search by propositional
//! grounding.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::sat::{solve_circuit, BExpr, SatLimits, SatResult};
use crate::syntax::{Formula, Term};

/// Grounded circuits larger than this are not built.
pub const MAX_GROUND_SIZE: usize = 400_000;

/// Truth table of one predicate; `values[i]` is the value on the `i`-th
/// tuple in lexicographic order over the universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateTable {
    pub arity: usize,
    pub values: Vec<bool>,
}

/// Interpretation over the universe `{0, .., size-1}`. Propositions are
/// zero-ary predicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteModel {
    pub size: usize,
    pub objects: BTreeMap<String, usize>,
    pub predicates: BTreeMap<String, PredicateTable>,
}

fn tuple_index(size: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * size + e)
}

fn tuples(size: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = size.pow(arity as u32);
    (0..total).map(move |mut i| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = i % size;
            i /= size;
        }
        t
    })
}

impl FiniteModel {
    /// Truth value of a sentence. Objects and predicates missing from the
    /// model evaluate to element 0 and false respectively.
    pub fn eval(&self, f: &Formula) -> bool {
        self.eval_in(f, &mut Vec::new())
    }

    fn eval_in(&self, f: &Formula, env: &mut Vec<(String, usize)>) -> bool {
        match f {
            Formula::Prop(p) => self.predicates.get(p).is_some_and(|t| t.values.first().copied().unwrap_or(false)),
            Formula::Pred(name, args) => {
                let tuple: Vec<usize> = args
                    .iter()
                    .map(|a| match a {
                        Term::Var(v) => env.iter().rev().find(|(n, _)| n == v).map(|(_, e)| *e).unwrap_or(0),
                        Term::Object(o) => self.objects.get(o).copied().unwrap_or(0),
                    })
                    .collect();
                self.predicates
                    .get(name)
                    .filter(|t| t.arity == tuple.len())
                    .is_some_and(|t| t.values[tuple_index(self.size, &tuple)])
            }
            Formula::Not(g) => !self.eval_in(g, env),
            Formula::And(gs) => gs.iter().all(|g| self.eval_in(g, env)),
            Formula::Or(gs) => gs.iter().any(|g| self.eval_in(g, env)),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let universal = matches!(f, Formula::Forall(..));
                for e in 0..self.size {
                    env.push((x.clone(), e));
                    let v = self.eval_in(body, env);
                    env.pop();
                    if v != universal {
                        return !universal;
                    }
                }
                universal
            }
        }
    }
}

impl fmt::Display for FiniteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let elems: Vec<String> = (0..self.size).map(|e| format!("e{e}")).collect();
        write!(f, "universe {{{}}}", elems.join(", "))?;
        for (o, e) in &self.objects {
            write!(f, "; {o} ↦ e{e}")?;
        }
        for (p, t) in &self.predicates {
            let cells: Vec<String> = tuples(self.size, t.arity)
                .map(|tup| {
                    let args: Vec<String> = tup.iter().map(|e| format!("e{e}")).collect();
                    let v = t.values[tuple_index(self.size, &tup)];
                    if t.arity == 0 {
                        format!("{p}={v}")
                    } else {
                        format!("{p}({})={v}", args.join(", "))
                    }
                })
                .collect();
            write!(f, "; {}", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Signature shared by the formulas being compared.
#[derive(Debug, Clone)]
pub struct Signature {
    pub objects: Vec<String>,
    /// (name, arity); propositions have arity 0.
    pub predicates: Vec<(String, usize)>,
}

impl Signature {
    pub fn of(formulas: &[&Formula]) -> Self {
        let mut objects = Vec::new();
        let mut predicates = Vec::new();
        for f in formulas {
            objects.extend(f.objects());
            predicates.extend(f.predicates());
            predicates.extend(f.propositions().into_iter().map(|p| (p, 0)));
        }
        objects.sort();
        objects.dedup();
        predicates.sort();
        predicates.dedup();
        Self { objects, predicates }
    }
}

struct Grounder<'a> {
    size: usize,
    objects: HashMap<&'a str, usize>,
    pred_index: HashMap<(&'a str, usize), usize>,
    /// First variable of each predicate's block.
    offsets: Vec<u32>,
    nodes: usize,
}

impl<'a> Grounder<'a> {
    fn new(sig: &'a Signature, size: usize) -> Self {
        let objects = sig.objects.iter().enumerate().map(|(i, o)| (o.as_str(), i)).collect();
        let mut offsets = Vec::new();
        let mut next = 0u32;
        let mut pred_index = HashMap::new();
        for (i, (name, arity)) in sig.predicates.iter().enumerate() {
            pred_index.insert((name.as_str(), *arity), i);
            offsets.push(next);
            next += size.pow(*arity as u32) as u32;
        }
        offsets.push(next);
        Self { size, objects, pred_index, offsets, nodes: 0 }
    }

    fn inputs(&self) -> u32 {
        *self.offsets.last().unwrap()
    }

    fn atom(&self, name: &str, tuple: &[usize]) -> BExpr {
        let i = self.pred_index[&(name, tuple.len())];
        BExpr::Var(self.offsets[i] + tuple_index(self.size, tuple) as u32)
    }

    fn ground(&mut self, f: &'a Formula, env: &mut Vec<(&'a str, usize)>) -> Option<BExpr> {
        self.nodes += 1;
        if self.nodes > MAX_GROUND_SIZE {
            return None;
        }
        Some(match f {
            Formula::Prop(p) => self.atom(p, &[]),
            Formula::Pred(name, args) => {
                let tuple: Vec<usize> = args
                    .iter()
                    .map(|a| match a {
                        Term::Var(v) => env.iter().rev().find(|(n, _)| n == v).map(|(_, e)| *e).unwrap_or(0),
                        Term::Object(o) => self.objects[o.as_str()],
                    })
                    .collect();
                self.atom(name, &tuple)
            }
            Formula::Not(g) => self.ground(g, env)?.negate(),
            Formula::And(gs) => BExpr::and(gs.iter().map(|g| self.ground(g, env)).collect::<Option<_>>()?),
            Formula::Or(gs) => BExpr::or(gs.iter().map(|g| self.ground(g, env)).collect::<Option<_>>()?),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let mut parts = Vec::with_capacity(self.size);
                for e in 0..self.size {
                    env.push((x.as_str(), e));
                    let g = self.ground(body, env);
                    env.pop();
                    parts.push(g?);
                }
                if matches!(f, Formula::Forall(..)) {
                    BExpr::and(parts)
                } else {
                    BExpr::or(parts)
                }
            }
        })
    }

    fn model(&self, sig: &Signature, assignment: &[bool]) -> FiniteModel {
        let objects = sig.objects.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();
        let predicates = sig
            .predicates
            .iter()
            .enumerate()
            .map(|(i, (name, arity))| {
                let lo = self.offsets[i] as usize;
                let hi = self.offsets[i + 1] as usize;
                (name.clone(), PredicateTable { arity: *arity, values: assignment[lo..hi].to_vec() })
            })
            .collect();
        FiniteModel { size: self.size, objects, predicates }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSearch {
    Found(FiniteModel),
    /// Every size in range was searched without success.
    Exhausted,
    /// Some size was skipped (too large) or a limit was hit.
    Incomplete { timed_out: bool },
}

/// Universe sizes searched: `max(1, |objects|)` upward, `count` sizes.
pub fn universe_sizes(sig: &Signature, count: usize) -> std::ops::Range<usize> {
    let lo = sig.objects.len().max(1);
    lo..lo + count
}

/// Searches for a finite model on which `f1` and `f2` differ. Objects are
/// interpreted as pairwise distinct elements; without equality this loses
/// no countermodel up to the size bound shifted by the object count.
pub fn find_countermodel(f1: &Formula, f2: &Formula, sizes: usize, deadline: Option<Instant>) -> ModelSearch {
    let sig = Signature::of(&[f1, f2]);
    let mut incomplete = None;
    for k in universe_sizes(&sig, sizes) {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return ModelSearch::Incomplete { timed_out: true };
        }
        let mut g = Grounder::new(&sig, k);
        let (Some(a), Some(b)) = (g.ground(f1, &mut Vec::new()), g.ground(f2, &mut Vec::new())) else {
            incomplete = Some(false);
            continue;
        };
        let differ = BExpr::and(vec![
            BExpr::or(vec![a.clone(), b.clone()]),
            BExpr::or(vec![a.negate(), b.negate()]),
        ]);
        match solve_circuit(&differ, g.inputs(), SatLimits { max_decisions: None, deadline }) {
            SatResult::Sat(assignment) => {
                let m = g.model(&sig, &assignment);
                if m.eval(f1) != m.eval(f2) {
                    return ModelSearch::Found(m);
                }
                log::error!("grounded countermodel failed re-evaluation; discarding");
                incomplete = Some(false);
            }
            SatResult::Unsat => {}
            SatResult::Unknown { timed_out } => {
                if timed_out {
                    return ModelSearch::Incomplete { timed_out: true };
                }
                incomplete = Some(false);
            }
        }
    }
    match incomplete {
        Some(t) => ModelSearch::Incomplete { timed_out: t },
        None => ModelSearch::Exhausted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsing::{parse_logic, LogicMode};

    fn fol(s: &str) -> Formula {
        parse_logic(s, LogicMode::Fol, None).unwrap()
    }

    #[test]
    fn table_countermodel_has_two_elements() {
        let a = fol("∃x1.¬pred2(p4)");
        let b = fol("∃x1.¬pred2(x1)");
        let ModelSearch::Found(m) = find_countermodel(&a, &b, 4, None) else { panic!() };
        assert_eq!(m.size, 2);
        assert_ne!(m.eval(&a), m.eval(&b));
        let t = &m.predicates["pred2"];
        assert!(t.values[m.objects["p4"]]);
    }

    #[test]
    fn duality_has_no_countermodel() {
        let a = fol("¬∀x. Man(x)");
        let b = fol("∃y. ¬Man(y)");
        assert_eq!(find_countermodel(&a, &b, 4, None), ModelSearch::Exhausted);
    }

    #[test]
    fn display_lists_cells() {
        let a = fol("∃x1.¬pred2(p4)");
        let b = fol("∃x1.¬pred2(x1)");
        let ModelSearch::Found(m) = find_countermodel(&a, &b, 4, None) else { panic!() };
        let s = m.to_string();
        assert!(s.starts_with("universe {e0, e1}"), "{s}");
        assert!(s.contains("p4 ↦ e0"));
    }
}
