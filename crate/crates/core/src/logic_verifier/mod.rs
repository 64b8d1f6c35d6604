//! Equivalence checking for propositional and first-order formulas.
//!
//! Propositional equivalence is decided completely. First-order
//! equivalence is three-valued: a finite countermodel proves
//! non-equivalence, a resolution refutation of both directions proves
//! equivalence, and anything else within the budget is Unknown.

pub mod model;
pub mod resolution;
pub mod sat;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use model::{find_countermodel, FiniteModel, ModelSearch, PredicateTable};
pub use resolution::{clausify, refute, ClauseSet, ProofResult, ProverLimits};

use crate::syntax::Formula;
use sat::{solve_circuit, BExpr, SatLimits, SatResult};

/// Atom count up to which propositional equivalence uses a truth table.
pub const TRUTH_TABLE_MAX_ATOMS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownReason {
    Timeout,
    Budget,
}

/// Evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Assignment on which the two formulas differ.
    Assignment { values: BTreeMap<String, bool> },
    /// Finite interpretation on which the two sentences differ.
    Countermodel { model: FiniteModel },
    /// Inference steps used by the two refutations.
    ProofSteps { steps: usize },
    /// The formulas are syntactically identical.
    Identical,
    /// Shortest string accepted by exactly one of two regexes.
    DistinguishingString { string: String, accepted_by_first: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Equivalent {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witness: Option<Witness>,
    },
    NotEquivalent { witness: Witness },
    Unknown { reason: UnknownReason },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }

    pub fn is_not_equivalent(&self) -> bool {
        matches!(self, Verdict::NotEquivalent { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Equivalent { .. } => "equivalent",
            Verdict::NotEquivalent { .. } => "not_equivalent",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

// ---------------------------------------------------------------------------
// Propositional logic

/// Truth value of a quantifier-free formula; atoms missing from the
/// assignment are false. Predicate atoms are keyed by their printed form.
pub fn eval_pl(f: &Formula, assignment: &BTreeMap<String, bool>) -> bool {
    match f {
        Formula::Prop(p) => assignment.get(p).copied().unwrap_or(false),
        Formula::Pred(..) => assignment.get(&f.to_unicode()).copied().unwrap_or(false),
        Formula::Not(g) => !eval_pl(g, assignment),
        Formula::And(gs) => gs.iter().all(|g| eval_pl(g, assignment)),
        Formula::Or(gs) => gs.iter().any(|g| eval_pl(g, assignment)),
        Formula::Forall(_, b) | Formula::Exists(_, b) => eval_pl(b, assignment),
    }
}

fn pl_atoms(fs: &[&Formula]) -> Vec<String> {
    let mut atoms: Vec<String> = fs.iter().flat_map(|f| f.propositions()).collect();
    for f in fs {
        f.visit(&mut |n| {
            if let Formula::Pred(..) = n {
                atoms.push(n.to_unicode());
            }
        });
    }
    atoms.sort();
    atoms.dedup();
    atoms
}

fn atom_index(f: &Formula, atoms: &[String]) -> usize {
    let key = match f {
        Formula::Prop(p) => p.clone(),
        _ => f.to_unicode(),
    };
    atoms.binary_search(&key).expect("atom collected")
}

/// Evaluates `f` on 64 consecutive assignments at once; bit `j` of the
/// result is the value on assignment `64 * block + j`, where bit `i` of an
/// assignment number is the value of atom `i`.
fn eval_block(f: &Formula, atoms: &[String], block: u64) -> u64 {
    const PATTERNS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    match f {
        Formula::Prop(_) | Formula::Pred(..) => {
            let i = atom_index(f, atoms);
            if i < 6 {
                PATTERNS[i]
            } else if (block >> (i - 6)) & 1 == 1 {
                u64::MAX
            } else {
                0
            }
        }
        Formula::Not(g) => !eval_block(g, atoms, block),
        Formula::And(gs) => gs.iter().fold(u64::MAX, |acc, g| acc & eval_block(g, atoms, block)),
        Formula::Or(gs) => gs.iter().fold(0, |acc, g| acc | eval_block(g, atoms, block)),
        Formula::Forall(_, b) | Formula::Exists(_, b) => eval_block(b, atoms, block),
    }
}

fn to_circuit(f: &Formula, atoms: &[String]) -> BExpr {
    match f {
        Formula::Prop(_) | Formula::Pred(..) => BExpr::Var(atom_index(f, atoms) as u32),
        Formula::Not(g) => to_circuit(g, atoms).negate(),
        Formula::And(gs) => BExpr::and(gs.iter().map(|g| to_circuit(g, atoms)).collect()),
        Formula::Or(gs) => BExpr::or(gs.iter().map(|g| to_circuit(g, atoms)).collect()),
        Formula::Forall(_, b) | Formula::Exists(_, b) => to_circuit(b, atoms),
    }
}

fn assignment_of(atoms: &[String], bits: impl Fn(usize) -> bool) -> BTreeMap<String, bool> {
    atoms.iter().enumerate().map(|(i, a)| (a.clone(), bits(i))).collect()
}

/// Decides propositional equivalence: a truth table over the union of atoms
/// for at most 20 atoms, otherwise DPLL on the Tseitin encoding of the
/// exclusive or. A non-equivalence carries the first falsifying assignment.
pub fn pl_equivalent(f1: &Formula, f2: &Formula) -> Verdict {
    if f1 == f2 {
        return Verdict::Equivalent { witness: None };
    }
    let atoms = pl_atoms(&[f1, f2]);
    let n = atoms.len();
    if n <= TRUTH_TABLE_MAX_ATOMS {
        let rows: u64 = 1 << n;
        let blocks = rows.div_ceil(64);
        let valid = if rows >= 64 { u64::MAX } else { (1u64 << rows) - 1 };
        for block in 0..blocks {
            let diff = (eval_block(f1, &atoms, block) ^ eval_block(f2, &atoms, block)) & valid;
            if diff != 0 {
                let row = block * 64 + diff.trailing_zeros() as u64;
                let values = assignment_of(&atoms, |i| (row >> i) & 1 == 1);
                return Verdict::NotEquivalent { witness: Witness::Assignment { values } };
            }
        }
        return Verdict::Equivalent { witness: None };
    }
    let a = to_circuit(f1, &atoms);
    let b = to_circuit(f2, &atoms);
    let xor = BExpr::and(vec![BExpr::or(vec![a.clone(), b.clone()]), BExpr::or(vec![a.negate(), b.negate()])]);
    match solve_circuit(&xor, n as u32, SatLimits::default()) {
        SatResult::Unsat => Verdict::Equivalent { witness: None },
        SatResult::Sat(m) => {
            Verdict::NotEquivalent { witness: Witness::Assignment { values: assignment_of(&atoms, |i| m[i]) } }
        }
        SatResult::Unknown { .. } => unreachable!("no limits were set"),
    }
}

// ---------------------------------------------------------------------------
// First-order logic

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FolBudget {
    /// Number of universe sizes tried, starting at the number of objects
    /// (at least 1).
    pub max_model_size: usize,
    pub max_proof_steps: usize,
    pub timeout: Duration,
}

impl Default for FolBudget {
    fn default() -> Self {
        Self { max_model_size: 4, max_proof_steps: 50_000, timeout: Duration::from_secs(10) }
    }
}

/// Three-valued first-order equivalence of two sentences.
pub fn fol_equivalent(f1: &Formula, f2: &Formula, budget: &FolBudget) -> Verdict {
    if f1 == f2 {
        return Verdict::Equivalent { witness: Some(Witness::Identical) };
    }
    let deadline = Instant::now() + budget.timeout;
    let search = find_countermodel(f1, f2, budget.max_model_size, Some(deadline));
    let mut timed_out = false;
    match search {
        ModelSearch::Found(model) => return Verdict::NotEquivalent { witness: Witness::Countermodel { model } },
        ModelSearch::Incomplete { timed_out: true } => timed_out = true,
        _ => {}
    }
    if !timed_out {
        let limits = ProverLimits { max_steps: budget.max_proof_steps, deadline: Some(deadline) };
        let mut total = 0;
        let mut proved = true;
        for conj in [
            Formula::And(vec![f1.clone(), Formula::not(f2.clone())]),
            Formula::And(vec![Formula::not(f1.clone()), f2.clone()]),
        ] {
            let outcome = match clausify(&conj) {
                Ok(cs) => refute(&cs.clauses, ProverLimits { max_steps: limits.max_steps.saturating_sub(total), ..limits }),
                Err(_) => ProofResult::StepLimit,
            };
            match outcome {
                ProofResult::Refuted { steps } => total += steps,
                ProofResult::Timeout => {
                    timed_out = true;
                    proved = false;
                    break;
                }
                _ => {
                    proved = false;
                    break;
                }
            }
        }
        if proved {
            return Verdict::Equivalent { witness: Some(Witness::ProofSteps { steps: total }) };
        }
    }
    Verdict::Unknown { reason: if timed_out { UnknownReason::Timeout } else { UnknownReason::Budget } }
}

/// Dispatches to the propositional or first-order procedure.
pub fn logic_equivalent(f1: &Formula, f2: &Formula, budget: &FolBudget) -> Verdict {
    if f1.is_first_order() || f2.is_first_order() {
        fol_equivalent(f1, f2, budget)
    } else {
        pl_equivalent(f1, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsing::{parse_logic, LogicMode};

    fn pl(s: &str) -> Formula {
        parse_logic(s, LogicMode::Pl, None).unwrap()
    }

    fn fol(s: &str) -> Formula {
        parse_logic(s, LogicMode::Fol, None).unwrap()
    }

    #[test]
    fn de_morgan() {
        assert!(pl_equivalent(&pl("¬(p1∧p2)"), &pl("¬p1∨¬p2")).is_equivalent());
    }

    #[test]
    fn idempotence_and_commutativity() {
        assert!(pl_equivalent(&pl("p1∧p2∧p1"), &pl("p1∧p2")).is_equivalent());
        assert!(pl_equivalent(&pl("p2∨p1"), &pl("p1∨p2")).is_equivalent());
    }

    #[test]
    fn falsifying_assignment() {
        let v = pl_equivalent(&pl("(¬p11 ∧ ¬p8)"), &pl("¬(p11∧p8)"));
        let Verdict::NotEquivalent { witness: Witness::Assignment { values } } = v else { panic!("{v:?}") };
        assert!(values["p11"]);
        assert!(!values["p8"]);
    }

    #[test]
    fn many_atoms_use_sat() {
        let big: Vec<String> = (1..=25).map(|i| format!("p{i}")).collect();
        let a = pl(&big.join(" ∧ "));
        let mut rev = big.clone();
        rev.reverse();
        let b = pl(&rev.join(" ∧ "));
        assert!(pl_equivalent(&a, &b).is_equivalent());
        let c = pl(&format!("{} ∧ ¬p25", big[..24].join(" ∧ ")));
        let Verdict::NotEquivalent { witness: Witness::Assignment { values } } = pl_equivalent(&a, &c) else {
            panic!()
        };
        assert_ne!(eval_pl(&a, &values), eval_pl(&c, &values));
    }

    #[test]
    fn quantifier_duality() {
        let v = fol_equivalent(&fol("¬∀x. Man(x)"), &fol("∃y. ¬Man(y)"), &FolBudget::default());
        assert!(matches!(v, Verdict::Equivalent { witness: Some(Witness::ProofSteps { .. }) }), "{v:?}");
    }

    #[test]
    fn table_countermodel() {
        let a = fol("∃x1.¬pred2(p4)");
        let b = fol("∃x1.¬pred2(x1)");
        let Verdict::NotEquivalent { witness: Witness::Countermodel { model } } =
            fol_equivalent(&a, &b, &FolBudget::default())
        else {
            panic!()
        };
        assert_eq!(model.size, 2);
        assert_ne!(model.eval(&a), model.eval(&b));
    }

    #[test]
    fn reflexive() {
        let f = fol("∀x1. ∃x2. (pred1(x1) ∨ ¬pred2(x2, p1))");
        assert!(fol_equivalent(&f, &f, &FolBudget::default()).is_equivalent());
    }

    #[test]
    fn verdict_serialization() {
        let v = Verdict::Unknown { reason: UnknownReason::Timeout };
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"verdict":"unknown","reason":"timeout"}"#);
        assert_eq!(serde_json::from_str::<Verdict>(&s).unwrap(), v);
    }
}
