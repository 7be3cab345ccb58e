//! Positive Datalog over the relational encoding of a property graph.

mod eval;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{Const, ElemId, PropertyGraph, Value};
use crate::syntax::SyntaxError;

pub use eval::{eval_datalog, eval_naive, eval_seminaive, Model};
pub use parser::parse_program;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(Value),
}

impl Term {
    pub fn var(x: &str) -> Self {
        Term::Var(x.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.to_string(),
            args,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(x) => Some(x.as_str()),
            Term::Const(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatalogError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unsafe rule: head variable `{var}` does not occur in the body of `{rule}`")]
    Unsafe { var: String, rule: String },
    #[error("`{pred}` is used with arities {first} and {second}")]
    Arity {
        pred: String,
        first: usize,
        second: usize,
    },
    #[error("`{0}` is both an input relation and defined by rules")]
    EdbHead(String),
    #[error("output relation `{0}` is not defined by any rule")]
    UnknownOut(String),
}

impl Program {
    /// Predicates that occur in some rule head.
    pub fn idb(&self) -> BTreeSet<String> {
        self.rules.iter().map(|r| r.head.pred.clone()).collect()
    }

    /// Body predicates that no rule defines.
    pub fn edb(&self) -> BTreeSet<String> {
        let idb = self.idb();
        self.rules
            .iter()
            .flat_map(|r| r.body.iter().map(|a| a.pred.clone()))
            .filter(|p| !idb.contains(p))
            .collect()
    }

    pub fn arities(&self) -> Result<BTreeMap<String, usize>, DatalogError> {
        let mut out: BTreeMap<String, usize> = BTreeMap::new();
        for r in &self.rules {
            for a in std::iter::once(&r.head).chain(&r.body) {
                let n = a.args.len();
                match out.get(&a.pred) {
                    Some(&m) if m != n => {
                        return Err(DatalogError::Arity {
                            pred: a.pred.clone(),
                            first: m,
                            second: n,
                        })
                    }
                    _ => {
                        out.insert(a.pred.clone(), n);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), DatalogError> {
        self.arities()?;
        for r in &self.rules {
            let body: BTreeSet<&str> = r.body.iter().flat_map(Atom::vars).collect();
            if let Some(x) = r.head.vars().find(|x| !body.contains(x)) {
                return Err(DatalogError::Unsafe {
                    var: x.to_string(),
                    rule: r.to_string(),
                });
            }
        }
        if let Some(out) = &self.out {
            if !self.idb().contains(out) {
                return Err(DatalogError::UnknownOut(out.clone()));
            }
        }
        Ok(())
    }
}

/// Whether every rule body has at most one atom whose predicate is
/// mutually recursive with the head.
pub fn is_linear(p: &Program) -> bool {
    let idb = p.idb();
    let mut reach: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for r in &p.rules {
        let e = reach.entry(r.head.pred.as_str()).or_default();
        e.extend(r.body.iter().map(|a| a.pred.as_str()).filter(|q| idb.contains(*q)));
    }
    // Transitive closure of the dependency relation; programs are small.
    loop {
        let mut changed = false;
        let snapshot = reach.clone();
        for (_, succ) in reach.iter_mut() {
            let extra: Vec<&str> = succ
                .iter()
                .flat_map(|q| snapshot.get(q).into_iter().flatten().copied())
                .collect();
            for q in extra {
                changed |= succ.insert(q);
            }
        }
        if !changed {
            break;
        }
    }
    let depends = |a: &str, b: &str| reach.get(a).is_some_and(|s| s.contains(b));
    p.rules.iter().all(|r| {
        let h = r.head.pred.as_str();
        r.body
            .iter()
            .filter(|a| a.pred == h || (depends(h, &a.pred) && depends(&a.pred, h)))
            .count()
            <= 1
    })
}

/// Input facts by predicate.
pub type Facts = BTreeMap<String, BTreeSet<Vec<Value>>>;

/// `N(x)`, `E(x, y)`, `lab(x, l)`, `src(e, x)`, `tgt(e, y)` and
/// `prop(x, k, v)`. Labels and properties cover nodes and edges.
pub fn encode_graph(g: &PropertyGraph) -> Facts {
    let mut db = Facts::new();
    for name in ["N", "E", "lab", "src", "tgt", "prop"] {
        db.insert(name.to_string(), BTreeSet::new());
    }
    let mut add = |rel: &str, row: Vec<Value>| {
        db.get_mut(rel).expect("declared above").insert(row);
    };
    let elems = g
        .nodes()
        .map(ElemId::Node)
        .chain(g.edges().map(ElemId::Edge));
    for el in elems {
        let v = match el {
            ElemId::Node(n) => Value::Node(n),
            ElemId::Edge(e) => Value::Edge(e),
        };
        for l in g.labels(el) {
            add("lab", vec![v.clone(), Value::str(l)]);
        }
        for (k, c) in g.props(el) {
            add("prop", vec![v.clone(), Value::str(k), Value::Const(c.clone())]);
        }
    }
    for n in g.nodes() {
        add("N", vec![Value::Node(n)]);
    }
    for e in g.edges() {
        let (s, t) = (Value::Node(g.src(e)), Value::Node(g.tgt(e)));
        add("E", vec![s.clone(), t.clone()]);
        add("src", vec![Value::Edge(e), s]);
        add("tgt", vec![Value::Edge(e), t]);
    }
    db
}

/// Transitive closure of `E`.
pub const TC_PROGRAM: &str = "\
T(x, y) :- E(x, y).
T(x, y) :- T(x, z), E(z, y).
.out T
";

/// Pairs of equally long paths on a dataless path.
pub const EQ_LEN_PROGRAM: &str = "\
eqLen(x, y, z, w) :- E(x, y), E(z, w).
eqLen(x, y, z, w) :- eqLen(x, y1, z, w1), E(y1, y), E(w1, w).
.out eqLen
";

/// True on a dataless path whose length is a power of two, at least 2.
pub const POW2_PROGRAM: &str = "\
eqLen(x, y, z, w) :- E(x, y), E(z, w).
eqLen(x, y, z, w) :- eqLen(x, y1, z, w1), E(y1, y), E(w1, w).
len(x, y) :- E(x, z), E(z, y).
len(x, y) :- len(x, z), len(z, y), eqLen(x, z, z, y).
Out() :- len(x, y), lab(x, \"min_elt\"), lab(y, \"max_elt\").
.out Out
";

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Var(x) => f.write_str(x),
        Term::Const(Value::Const(Const::Int(i))) => write!(f, "{i}"),
        Term::Const(Value::Const(Const::Str(s))) => {
            write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
        }
        Term::Const(other) => write!(f, "{other:?}"),
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write_term(f, t)?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, a) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
        }
        f.write_str(".")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        if let Some(out) = &self.out {
            writeln!(f, ".out {out}")?;
        }
        Ok(())
    }
}
