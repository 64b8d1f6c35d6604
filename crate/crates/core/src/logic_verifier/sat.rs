//! Boolean circuits, Tseitin encoding and a DPLL solver with two watched
//! literals.

use std::time::Instant;

/// Literal code: `2 * var + negated`.
pub type Lit = u32;

pub fn lit(var: u32, positive: bool) -> Lit {
    2 * var + u32::from(!positive)
}

fn neg(l: Lit) -> Lit {
    l ^ 1
}

fn var_of(l: Lit) -> usize {
    (l >> 1) as usize
}

/// Propositional circuit over numbered variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BExpr {
    Var(u32),
    Const(bool),
    Not(Box<BExpr>),
    And(Vec<BExpr>),
    Or(Vec<BExpr>),
}

impl BExpr {
    pub fn eval(&self, assignment: &[bool]) -> bool {
        match self {
            BExpr::Var(v) => assignment.get(*v as usize).copied().unwrap_or(false),
            BExpr::Const(b) => *b,
            BExpr::Not(e) => !e.eval(assignment),
            BExpr::And(es) => es.iter().all(|e| e.eval(assignment)),
            BExpr::Or(es) => es.iter().any(|e| e.eval(assignment)),
        }
    }

    /// Negation with constant folding.
    pub fn negate(self) -> BExpr {
        match self {
            BExpr::Const(b) => BExpr::Const(!b),
            BExpr::Not(e) => *e,
            e => BExpr::Not(Box::new(e)),
        }
    }

    /// Conjunction with constant folding.
    pub fn and(items: Vec<BExpr>) -> BExpr {
        let mut out = Vec::with_capacity(items.len());
        for e in items {
            match e {
                BExpr::Const(true) => {}
                BExpr::Const(false) => return BExpr::Const(false),
                e => out.push(e),
            }
        }
        match out.len() {
            0 => BExpr::Const(true),
            1 => out.pop().unwrap(),
            _ => BExpr::And(out),
        }
    }

    /// Disjunction with constant folding.
    pub fn or(items: Vec<BExpr>) -> BExpr {
        let mut out = Vec::with_capacity(items.len());
        for e in items {
            match e {
                BExpr::Const(false) => {}
                BExpr::Const(true) => return BExpr::Const(true),
                e => out.push(e),
            }
        }
        match out.len() {
            0 => BExpr::Const(false),
            1 => out.pop().unwrap(),
            _ => BExpr::Or(out),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            BExpr::Var(_) | BExpr::Const(_) => 1,
            BExpr::Not(e) => 1 + e.size(),
            BExpr::And(es) | BExpr::Or(es) => 1 + es.iter().map(BExpr::size).sum::<usize>(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn fresh(&mut self) -> u32 {
        self.num_vars += 1;
        self.num_vars - 1
    }
}

/// Tseitin encoder. Variables `0..inputs` are the circuit inputs; gate
/// variables are allocated after them.
pub struct Tseitin {
    pub cnf: Cnf,
}

impl Tseitin {
    pub fn new(inputs: u32) -> Self {
        Self { cnf: Cnf { num_vars: inputs, clauses: Vec::new() } }
    }

    /// Returns a literal equivalent to `e` under the added definitions.
    pub fn encode(&mut self, e: &BExpr) -> Lit {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || match e {
            BExpr::Var(v) => lit(*v, true),
            BExpr::Const(b) => {
                let v = self.cnf.fresh();
                self.cnf.clauses.push(vec![lit(v, *b)]);
                lit(v, true)
            }
            BExpr::Not(inner) => neg(self.encode(inner)),
            BExpr::And(items) | BExpr::Or(items) => {
                let is_and = matches!(e, BExpr::And(_));
                let kids: Vec<Lit> = items.iter().map(|i| self.encode(i)).collect();
                let g = lit(self.cnf.fresh(), true);
                if is_and {
                    // g -> k_i ; (and k_i) -> g
                    for &k in &kids {
                        self.cnf.clauses.push(vec![neg(g), k]);
                    }
                    let mut c: Vec<Lit> = kids.iter().map(|&k| neg(k)).collect();
                    c.push(g);
                    self.cnf.clauses.push(c);
                } else {
                    for &k in &kids {
                        self.cnf.clauses.push(vec![neg(k), g]);
                    }
                    let mut c = kids.clone();
                    c.push(neg(g));
                    self.cnf.clauses.push(c);
                }
                g
            }
        })
    }

    pub fn assert(&mut self, e: &BExpr) {
        let l = self.encode(e);
        self.cnf.clauses.push(vec![l]);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Vec<bool>),
    Unsat,
    /// Decision budget or deadline exhausted.
    Unknown { timed_out: bool },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SatLimits {
    pub max_decisions: Option<u64>,
    pub deadline: Option<Instant>,
}

/// Decides satisfiability of `cnf` by DPLL with unit propagation over two
/// watched literals and chronological backtracking.
pub fn solve(cnf: &Cnf, limits: SatLimits) -> SatResult {
    let n = cnf.num_vars as usize;
    let mut clauses: Vec<Vec<Lit>> = Vec::with_capacity(cnf.clauses.len());
    let mut units = Vec::new();
    for c in &cnf.clauses {
        let mut c = c.clone();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] ^ 1 == w[1] && var_of(w[0]) == var_of(w[1])) {
            continue;
        }
        match c.len() {
            0 => return SatResult::Unsat,
            1 => units.push(c[0]),
            _ => clauses.push(c),
        }
    }
    let mut watches: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];
    for (i, c) in clauses.iter().enumerate() {
        watches[c[0] as usize].push(i);
        watches[c[1] as usize].push(i);
    }
    // decision order: most frequent variables first
    let mut occurrences = vec![0usize; n];
    for c in &clauses {
        for &l in c {
            occurrences[var_of(l)] += 1;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(occurrences[v]), v));

    let mut value: Vec<i8> = vec![0; n];
    let lit_value = |value: &[i8], l: Lit| -> i8 {
        let v = value[var_of(l)];
        if l & 1 == 1 {
            -v
        } else {
            v
        }
    };
    let mut trail: Vec<Lit> = Vec::new();
    // (trail length before the decision, decision literal, already flipped)
    let mut levels: Vec<(usize, Lit, bool)> = Vec::new();
    let mut head = 0;
    let mut decisions = 0u64;

    let assign = |value: &mut Vec<i8>, trail: &mut Vec<Lit>, l: Lit| {
        value[var_of(l)] = if l & 1 == 1 { -1 } else { 1 };
        trail.push(l);
    };

    for &u in &units {
        match lit_value(&value, u) {
            1 => {}
            -1 => return SatResult::Unsat,
            _ => assign(&mut value, &mut trail, u),
        }
    }

    loop {
        // unit propagation
        let mut conflict = false;
        while head < trail.len() && !conflict {
            let falsified = neg(trail[head]);
            head += 1;
            let mut ws = std::mem::take(&mut watches[falsified as usize]);
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                let c = &mut clauses[ci];
                if c[0] == falsified {
                    c.swap(0, 1);
                }
                let other = c[0];
                if lit_value(&value, other) == 1 {
                    i += 1;
                    continue;
                }
                if let Some(k) = (2..c.len()).find(|&k| lit_value(&value, c[k]) != -1) {
                    c.swap(1, k);
                    watches[c[1] as usize].push(ci);
                    ws.swap_remove(i);
                    continue;
                }
                match lit_value(&value, other) {
                    0 => assign(&mut value, &mut trail, other),
                    _ => {
                        conflict = true;
                        break;
                    }
                }
                i += 1;
            }
            let rest = std::mem::take(&mut watches[falsified as usize]);
            ws.extend(rest);
            watches[falsified as usize] = ws;
        }

        if conflict {
            loop {
                match levels.pop() {
                    None => return SatResult::Unsat,
                    Some((_, _, true)) => continue,
                    Some((pos, d, false)) => {
                        for &l in &trail[pos..] {
                            value[var_of(l)] = 0;
                        }
                        trail.truncate(pos);
                        head = pos;
                        levels.push((pos, neg(d), true));
                        assign(&mut value, &mut trail, neg(d));
                        break;
                    }
                }
            }
            continue;
        }

        let Some(&v) = order.iter().find(|&&v| value[v] == 0) else {
            return SatResult::Sat(value.iter().map(|&x| x == 1).collect());
        };
        decisions += 1;
        if limits.max_decisions.is_some_and(|m| decisions > m) {
            return SatResult::Unknown { timed_out: false };
        }
        if decisions.is_multiple_of(256) && limits.deadline.is_some_and(|d| Instant::now() >= d) {
            return SatResult::Unknown { timed_out: true };
        }
        let d = lit(v as u32, false);
        levels.push((trail.len(), d, false));
        assign(&mut value, &mut trail, d);
    }
}

/// Satisfiability of a circuit; a model assigns the circuit inputs.
pub fn solve_circuit(e: &BExpr, inputs: u32, limits: SatLimits) -> SatResult {
    match e {
        BExpr::Const(false) => return SatResult::Unsat,
        BExpr::Const(true) => return SatResult::Sat(vec![false; inputs as usize]),
        _ => {}
    }
    let mut t = Tseitin::new(inputs);
    t.assert(e);
    match solve(&t.cnf, limits) {
        SatResult::Sat(mut m) => {
            m.truncate(inputs as usize);
            SatResult::Sat(m)
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(cnf: &Cnf) -> bool {
        let n = cnf.num_vars;
        (0u64..1 << n).any(|m| {
            cnf.clauses
                .iter()
                .all(|c| c.iter().any(|&l| ((m >> var_of(l)) & 1 == 1) == (l & 1 == 0)))
        })
    }

    #[test]
    fn matches_brute_force_on_random_cnfs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.random_range(1..=8u32);
            let m = rng.random_range(0..=30);
            let clauses = (0..m)
                .map(|_| {
                    let len = rng.random_range(1..=3);
                    (0..len).map(|_| lit(rng.random_range(0..n), rng.random_bool(0.5))).collect()
                })
                .collect();
            let cnf = Cnf { num_vars: n, clauses };
            let r = solve(&cnf, SatLimits::default());
            assert_eq!(matches!(r, SatResult::Sat(_)), brute(&cnf), "{cnf:?}");
            if let SatResult::Sat(model) = r {
                assert!(cnf.clauses.iter().all(|c| c.iter().any(|&l| model[var_of(l)] == (l & 1 == 0))));
            }
        }
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p(i,h): pigeon i in hole h
        let v = |i: u32, h: u32| i * 2 + h;
        let mut clauses = Vec::new();
        for i in 0..3 {
            clauses.push(vec![lit(v(i, 0), true), lit(v(i, 1), true)]);
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    clauses.push(vec![lit(v(i, h), false), lit(v(j, h), false)]);
                }
            }
        }
        assert_eq!(solve(&Cnf { num_vars: 6, clauses }, SatLimits::default()), SatResult::Unsat);
    }

    #[test]
    fn circuit_xor() {
        let x = BExpr::Var(0);
        let y = BExpr::Var(1);
        let e = BExpr::and(vec![BExpr::or(vec![x.clone(), y.clone()]), BExpr::or(vec![x.negate(), y.negate()])]);
        let SatResult::Sat(m) = solve_circuit(&e, 2, SatLimits::default()) else { panic!() };
        assert_ne!(m[0], m[1]);
    }

    #[test]
    fn decision_budget() {
        let clauses = (0..20).map(|i| vec![lit(i, true), lit(i + 1, false)]).collect();
        let r = solve(&Cnf { num_vars: 21, clauses }, SatLimits { max_decisions: Some(0), deadline: None });
        assert_eq!(r, SatResult::Unknown { timed_out: false });
    }
}
