//! Regex equivalence through canonical minimal DFAs.
//!
//! Pipeline: Thompson NFA, subset construction (complete, with a sink),
//! Hopcroft partition refinement, then breadth-first renumbering from the
//! start state with symbol-sorted edges. Two regexes denote the same
//! language exactly when their canonical DFAs are identical.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::logic_verifier::{Verdict, Witness};
use crate::syntax::RegexAst;

/// Complete deterministic automaton; `transitions[q][i]` is the successor of
/// `q` on `alphabet[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dfa {
    pub alphabet: Vec<char>,
    pub start: usize,
    pub accepting: Vec<bool>,
    pub transitions: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfaStats {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub nodes_no_sink: usize,
    pub edges_no_sink: usize,
    pub density_no_sink: f64,
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    fn symbol_index(&self, c: char) -> Option<usize> {
        self.alphabet.iter().position(|&a| a == c)
    }

    pub fn accepts(&self, input: &str) -> bool {
        let mut q = self.start;
        for c in input.chars() {
            match self.symbol_index(c) {
                Some(i) => q = self.transitions[q][i],
                None => return false,
            }
        }
        self.accepting[q]
    }

    /// Non-accepting states whose transitions all loop back to themselves.
    pub fn sink_states(&self) -> Vec<usize> {
        (0..self.num_states())
            .filter(|&q| !self.accepting[q] && self.transitions[q].iter().all(|&t| t == q))
            .collect()
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n");
        for q in 0..self.num_states() {
            let shape = if self.accepting[q] { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  q{q} [shape={shape}];");
        }
        let _ = writeln!(out, "  __start -> q{};", self.start);
        for (q, row) in self.transitions.iter().enumerate() {
            for (i, &t) in row.iter().enumerate() {
                let _ = writeln!(out, "  q{q} -> q{t} [label=\"{}\"];", self.alphabet[i]);
            }
        }
        out.push_str("}\n");
        out
    }
}

fn round_tenth(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn density(nodes: usize, edges: usize) -> f64 {
    if nodes <= 1 {
        0.0
    } else {
        round_tenth(edges as f64 / (nodes * (nodes - 1)) as f64)
    }
}

/// Node, edge and density counts, with and without the sink state. Density
/// is `|E| / (|V|(|V|-1))` rounded to the nearest tenth, and 0.0 for a
/// single state.
pub fn dfa_stats(d: &Dfa) -> DfaStats {
    let nodes = d.num_states();
    let edges = nodes * d.alphabet.len();
    let sinks = d.sink_states();
    let nodes_no_sink = nodes - sinks.len();
    let edges_no_sink = d
        .transitions
        .iter()
        .enumerate()
        .filter(|(q, _)| !sinks.contains(q))
        .flat_map(|(_, row)| row.iter())
        .filter(|t| !sinks.contains(t))
        .count();
    DfaStats {
        nodes,
        edges,
        density: density(nodes, edges),
        nodes_no_sink,
        edges_no_sink,
        density_no_sink: density(nodes_no_sink, edges_no_sink),
    }
}

// ---------------------------------------------------------------------------
// Thompson construction

#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    sym: Vec<Vec<(usize, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.sym.push(Vec::new());
        self.eps.len() - 1
    }

    /// Builds a fragment for `r` and returns its (entry, exit) states.
    fn build(&mut self, r: &RegexAst, alphabet: &[char]) -> (usize, usize) {
        stacker::maybe_grow(64 * 1024, 1024 * 1024, || match r {
            RegexAst::Epsilon => {
                let s = self.state();
                (s, s)
            }
            RegexAst::Symbol(c) => {
                let s = self.state();
                let e = self.state();
                if let Some(i) = alphabet.iter().position(|a| a == c) {
                    self.sym[s].push((i, e));
                }
                (s, e)
            }
            RegexAst::Group(inner) => self.build(inner, alphabet),
            RegexAst::Concat(items) => {
                let s = self.state();
                let mut cur = s;
                for item in items {
                    let (a, b) = self.build(item, alphabet);
                    self.eps[cur].push(a);
                    cur = b;
                }
                (s, cur)
            }
            RegexAst::Star(inner) => {
                let s = self.state();
                let e = self.state();
                let (a, b) = self.build(inner, alphabet);
                self.eps[s].extend([a, e]);
                self.eps[b].extend([a, e]);
                (s, e)
            }
        })
    }

    fn closure(&self, set: &mut Vec<usize>) {
        let mut seen = vec![false; self.eps.len()];
        let mut stack = set.clone();
        for &q in set.iter() {
            seen[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &t in &self.eps[q] {
                if !seen[t] {
                    seen[t] = true;
                    set.push(t);
                    stack.push(t);
                }
            }
        }
        set.sort_unstable();
    }
}

fn subset_construction(r: &RegexAst, alphabet: &[char]) -> Dfa {
    let mut nfa = Nfa::default();
    let (entry, exit) = nfa.build(r, alphabet);
    let mut start = vec![entry];
    nfa.closure(&mut start);
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut sets = vec![start.clone()];
    index.insert(start, 0);
    let mut transitions = Vec::new();
    let mut i = 0;
    while i < sets.len() {
        let mut row = Vec::with_capacity(alphabet.len());
        for a in 0..alphabet.len() {
            let mut next: Vec<usize> = sets[i]
                .iter()
                .flat_map(|&q| nfa.sym[q].iter().filter(|(s, _)| *s == a).map(|&(_, t)| t))
                .collect();
            next.sort_unstable();
            next.dedup();
            nfa.closure(&mut next);
            let id = *index.entry(next.clone()).or_insert_with(|| {
                sets.push(next);
                sets.len() - 1
            });
            row.push(id);
        }
        transitions.push(row);
        i += 1;
    }
    let accepting = sets.iter().map(|s| s.binary_search(&exit).is_ok()).collect();
    Dfa { alphabet: alphabet.to_vec(), start: 0, accepting, transitions }
}

// ---------------------------------------------------------------------------
// Hopcroft minimization

fn hopcroft(d: &Dfa) -> Dfa {
    let n = d.num_states();
    let k = d.alphabet.len();
    let mut inverse = vec![vec![Vec::new(); n]; k];
    for q in 0..n {
        for a in 0..k {
            inverse[a][d.transitions[q][a]].push(q);
        }
    }
    let mut block_of = vec![0usize; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let (acc, rej): (Vec<usize>, Vec<usize>) = (0..n).partition(|&q| d.accepting[q]);
    for b in [acc, rej] {
        if !b.is_empty() {
            for &q in &b {
                block_of[q] = blocks.len();
            }
            blocks.push(b);
        }
    }
    let mut work: Vec<usize> = (0..blocks.len()).collect();
    let mut in_work = vec![true; blocks.len()];
    while let Some(splitter) = work.pop() {
        in_work[splitter] = false;
        for a in 0..k {
            let mut marked: HashMap<usize, Vec<usize>> = HashMap::new();
            for &t in &blocks[splitter] {
                for &q in &inverse[a][t] {
                    marked.entry(block_of[q]).or_default().push(q);
                }
            }
            let mut touched: Vec<usize> = marked.keys().copied().collect();
            touched.sort_unstable();
            for y in touched {
                let mut inside = marked.remove(&y).unwrap();
                inside.sort_unstable();
                inside.dedup();
                if inside.len() == blocks[y].len() {
                    continue;
                }
                let outside: Vec<usize> = blocks[y].iter().copied().filter(|q| inside.binary_search(q).is_err()).collect();
                let new_id = blocks.len();
                for &q in &inside {
                    block_of[q] = new_id;
                }
                blocks[y] = outside;
                blocks.push(inside);
                in_work.push(false);
                if in_work[y] {
                    work.push(new_id);
                    in_work[new_id] = true;
                } else {
                    let smaller = if blocks[new_id].len() <= blocks[y].len() { new_id } else { y };
                    work.push(smaller);
                    in_work[smaller] = true;
                }
            }
        }
    }
    let transitions = blocks
        .iter()
        .map(|b| (0..k).map(|a| block_of[d.transitions[b[0]][a]]).collect())
        .collect();
    let accepting = blocks.iter().map(|b| d.accepting[b[0]]).collect();
    Dfa { alphabet: d.alphabet.clone(), start: block_of[d.start], accepting, transitions }
}

/// Renumbers states in breadth-first order from the start state, exploring
/// edges in alphabet order. Unreachable states are dropped.
fn canonicalize(d: &Dfa) -> Dfa {
    let mut order = vec![usize::MAX; d.num_states()];
    let mut queue = VecDeque::from([d.start]);
    order[d.start] = 0;
    let mut seq = vec![d.start];
    while let Some(q) = queue.pop_front() {
        for &t in &d.transitions[q] {
            if order[t] == usize::MAX {
                order[t] = seq.len();
                seq.push(t);
                queue.push_back(t);
            }
        }
    }
    Dfa {
        alphabet: d.alphabet.clone(),
        start: 0,
        accepting: seq.iter().map(|&q| d.accepting[q]).collect(),
        transitions: seq.iter().map(|&q| d.transitions[q].iter().map(|&t| order[t]).collect()).collect(),
    }
}

/// The canonical minimal complete DFA of `r` over `alphabet`.
pub fn minimal_dfa(r: &RegexAst, alphabet: &[char]) -> Dfa {
    let mut sigma = alphabet.to_vec();
    sigma.sort_unstable();
    sigma.dedup();
    canonicalize(&hopcroft(&subset_construction(r, &sigma)))
}

/// Minimizes an arbitrary complete DFA and returns its canonical form.
pub fn minimize(d: &Dfa) -> Dfa {
    canonicalize(&hopcroft(d))
}

/// Shortest string (shortlex-first) accepted by exactly one of the two DFAs,
/// which must share an alphabet.
pub fn distinguishing_string(a: &Dfa, b: &Dfa) -> Option<String> {
    let mut prev: HashMap<(usize, usize), ((usize, usize), char)> = HashMap::new();
    let root = (a.start, b.start);
    let mut queue = VecDeque::from([root]);
    let mut seen = std::collections::HashSet::from([root]);
    while let Some((p, q)) = queue.pop_front() {
        if a.accepting[p] != b.accepting[q] {
            let mut s = Vec::new();
            let mut cur = (p, q);
            while cur != root {
                let (from, c) = prev[&cur];
                s.push(c);
                cur = from;
            }
            s.reverse();
            return Some(s.into_iter().collect());
        }
        for (i, &c) in a.alphabet.iter().enumerate() {
            let next = (a.transitions[p][i], b.transitions[q][i]);
            if seen.insert(next) {
                prev.insert(next, ((p, q), c));
                queue.push_back(next);
            }
        }
    }
    None
}

/// Decides `L(r1) = L(r2)` over `alphabet`. A non-equivalence carries the
/// shortest distinguishing string.
pub fn regex_equivalent(r1: &RegexAst, r2: &RegexAst, alphabet: &[char]) -> Verdict {
    let d1 = minimal_dfa(r1, alphabet);
    let d2 = minimal_dfa(r2, alphabet);
    if d1 == d2 {
        return Verdict::Equivalent { witness: None };
    }
    let s = distinguishing_string(&d1, &d2).expect("distinct canonical minimal DFAs differ on some string");
    let accepted_by_first = d1.accepts(&s);
    Verdict::NotEquivalent { witness: Witness::DistinguishingString { string: s, accepted_by_first } }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsing::parse_regex;

    const AB: [char; 2] = ['0', '1'];

    fn re(s: &str) -> RegexAst {
        parse_regex(s, &AB).unwrap()
    }

    #[test]
    fn single_symbol_has_three_states() {
        let d = minimal_dfa(&re("0"), &AB);
        assert_eq!(d.num_states(), 3);
        let st = dfa_stats(&d);
        assert_eq!((st.nodes, st.edges), (3, 6));
        assert_eq!(st.density, 1.0);
        assert_eq!((st.nodes_no_sink, st.edges_no_sink), (2, 1));
    }

    #[test]
    fn star_has_two_states() {
        let d = minimal_dfa(&re("1*"), &AB);
        assert_eq!(d.num_states(), 2);
        assert!(d.accepting[0]);
        let st = dfa_stats(&d);
        assert_eq!((st.edges, st.density), (4, 2.0));
    }

    #[test]
    fn single_state_density_guard() {
        let d = minimal_dfa(&re("(0*1*)*"), &AB);
        assert_eq!(d.num_states(), 1);
        assert_eq!(dfa_stats(&d).density, 0.0);
    }

    #[test]
    fn table_examples() {
        assert_eq!(regex_equivalent(&re("(1*)*0"), &re("1*0"), &AB), Verdict::Equivalent { witness: None });
        for (a, b) in [("(1*)*0", "((1*)0)*"), ("1*11*", "1*1*1*")] {
            match regex_equivalent(&re(a), &re(b), &AB) {
                Verdict::NotEquivalent { witness: Witness::DistinguishingString { string, .. } } => {
                    assert_eq!(string, "", "{a} vs {b}")
                }
                v => panic!("{a} vs {b}: {v:?}"),
            }
        }
    }

    #[test]
    fn canonical_form_is_stable() {
        let a = minimal_dfa(&re("(01*)0"), &AB);
        let b = minimal_dfa(&re("(01*)0"), &AB);
        assert_eq!(a, b);
        assert_eq!(minimize(&a), a);
    }

    #[test]
    fn dot_export_mentions_every_state() {
        let d = minimal_dfa(&re("0"), &AB);
        let dot = d.to_dot();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("q2"));
        assert!(dot.contains("doublecircle"));
    }
}
