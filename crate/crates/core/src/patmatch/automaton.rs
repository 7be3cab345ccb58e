//! Variable-free patterns as automata over edge orientations.
//!
//! A path is read as the word of its edge orientations: `a` for an edge
//! traversed forward, `b` for one traversed backward.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::pattern::Pattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
}

impl Letter {
    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'b' => Some(Letter::B),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::A => "a",
            Letter::B => "b",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("pattern has variables")]
    HasVariables,
    #[error("pattern has conditions")]
    HasConditions,
}

/// An NFA with ε-transitions, one initial and one final state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeWordAutomaton {
    states: usize,
    /// `(from, letter, to)`; `None` is ε.
    transitions: Vec<(usize, Option<Letter>, usize)>,
    initial: usize,
    fin: usize,
}

impl EdgeWordAutomaton {
    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn transitions(&self) -> &[(usize, Option<Letter>, usize)] {
        &self.transitions
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn final_state(&self) -> usize {
        self.fin
    }

    fn closure(&self, mut set: BTreeSet<usize>) -> BTreeSet<usize> {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(q) = stack.pop() {
            for &(from, l, to) in &self.transitions {
                if from == q && l.is_none() && set.insert(to) {
                    stack.push(to);
                }
            }
        }
        set
    }

    pub fn accepts(&self, word: &[Letter]) -> bool {
        let mut cur = self.closure(BTreeSet::from([self.initial]));
        for &c in word {
            let next: BTreeSet<usize> = self
                .transitions
                .iter()
                .filter(|&&(from, l, _)| l == Some(c) && cur.contains(&from))
                .map(|&(_, _, to)| to)
                .collect();
            cur = self.closure(next);
            if cur.is_empty() {
                return false;
            }
        }
        cur.contains(&self.fin)
    }
}

impl fmt::Display for EdgeWordAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.states)?;
        writeln!(f, "initial q{}", self.initial)?;
        writeln!(f, "final q{}", self.fin)?;
        for (from, l, to) in &self.transitions {
            match l {
                Some(l) => writeln!(f, "q{from} -{l}-> q{to}")?,
                None => writeln!(f, "q{from} -eps-> q{to}")?,
            }
        }
        Ok(())
    }
}

struct Builder {
    states: usize,
    transitions: Vec<(usize, Option<Letter>, usize)>,
}

impl Builder {
    fn state(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    fn edge(&mut self, from: usize, l: Option<Letter>, to: usize) {
        self.transitions.push((from, l, to));
    }

    /// Returns the (initial, final) pair of a fragment for `p`.
    fn build(&mut self, p: &Pattern) -> (usize, usize) {
        let (q0, qf) = (self.state(), self.state());
        match p {
            Pattern::Node(_) => self.edge(q0, None, qf),
            Pattern::Fwd(_) => self.edge(q0, Some(Letter::A), qf),
            Pattern::Bwd(_) => self.edge(q0, Some(Letter::B), qf),
            Pattern::Concat(a, b) => {
                let (a0, af) = self.build(a);
                let (b0, bf) = self.build(b);
                self.edge(q0, None, a0);
                self.edge(af, None, b0);
                self.edge(bf, None, qf);
            }
            Pattern::Union(a, b) => {
                for part in [a, b] {
                    let (p0, pf) = self.build(part);
                    self.edge(q0, None, p0);
                    self.edge(pf, None, qf);
                }
            }
            Pattern::Repeat(q, lo, hi) => {
                let mut cur = q0;
                for _ in 0..*lo {
                    let (p0, pf) = self.build(q);
                    self.edge(cur, None, p0);
                    cur = pf;
                }
                match hi {
                    Some(hi) => {
                        for _ in *lo..*hi {
                            self.edge(cur, None, qf);
                            let (p0, pf) = self.build(q);
                            self.edge(cur, None, p0);
                            cur = pf;
                        }
                        self.edge(cur, None, qf);
                    }
                    None => {
                        let (p0, pf) = self.build(q);
                        self.edge(cur, None, p0);
                        self.edge(pf, None, cur);
                        self.edge(cur, None, qf);
                    }
                }
            }
            Pattern::Cond(..) => unreachable!("rejected before construction"),
        }
        (q0, qf)
    }
}

/// Thompson-style construction for a pattern without variables or
/// conditions.
pub fn pattern_to_automaton(psi: &Pattern) -> Result<EdgeWordAutomaton, AutomatonError> {
    if psi.has_condition() {
        return Err(AutomatonError::HasConditions);
    }
    if !psi.is_variable_free() {
        return Err(AutomatonError::HasVariables);
    }
    let mut b = Builder {
        states: 0,
        transitions: Vec::new(),
    };
    let (initial, fin) = b.build(psi);
    Ok(EdgeWordAutomaton {
        states: b.states,
        transitions: b.transitions,
        initial,
        fin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::parse_pattern;

    fn word(s: &str) -> Vec<Letter> {
        s.chars().map(|c| Letter::from_char(c).unwrap()).collect()
    }

    fn aut(text: &str) -> EdgeWordAutomaton {
        pattern_to_automaton(&parse_pattern(text).unwrap()).unwrap()
    }

    #[test]
    fn base_cases() {
        let a = aut("-->");
        assert!(a.accepts(&word("a")));
        assert!(!a.accepts(&word("")) && !a.accepts(&word("b")) && !a.accepts(&word("aa")));
        let n = aut("()");
        assert!(n.accepts(&word("")) && !n.accepts(&word("a")));
    }

    #[test]
    fn zig_zag_plus() {
        let a = aut("[--> <--]{1..*}");
        for (w, ok) in [("", false), ("ab", true), ("abab", true), ("aba", false), ("ba", false), ("ababab", true)] {
            assert_eq!(a.accepts(&word(w)), ok, "{w}");
        }
    }

    #[test]
    fn bounded_repeat_and_union() {
        let a = aut("[--> + <--]{1..2} ()");
        assert!(a.accepts(&word("a")) && a.accepts(&word("ba")));
        assert!(!a.accepts(&word("")) && !a.accepts(&word("aaa")));
    }

    #[test]
    fn rejects_variables_and_conditions() {
        let p = parse_pattern("(x)").unwrap();
        assert_eq!(pattern_to_automaton(&p), Err(AutomatonError::HasVariables));
        let p = parse_pattern("[-[e]->]{0..*}").unwrap();
        assert_eq!(pattern_to_automaton(&p), Err(AutomatonError::HasVariables));
        let p = parse_pattern("[(x) | :A(x)]").unwrap();
        assert_eq!(pattern_to_automaton(&p), Err(AutomatonError::HasConditions));
    }
}
