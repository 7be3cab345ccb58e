//! Seeded random generators for patterns, graphs, algebra expressions,
//! databases and Datalog programs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::datalog::{Atom, Facts, Program, Rule, Term};
use crate::graph::{Const, PropertyGraph, Value};
use crate::lcra::{Clause, LcraQuery};
use crate::patmatch::{saturation_bound, Letter};
use crate::pattern::{Condition, Pattern};
use crate::relalg::{Database, EqCond, RAExpr, Schema, SetOp};
use crate::relation::{Attr, Relation};

#[derive(Debug, Clone)]
pub struct PatternOptions {
    pub max_depth: u32,
    pub node_vars: Vec<String>,
    pub edge_vars: Vec<String>,
    pub key: String,
    pub labels: Vec<String>,
    pub backward: bool,
    pub conditions: bool,
    pub variables: bool,
}

impl Default for PatternOptions {
    fn default() -> Self {
        PatternOptions {
            max_depth: 4,
            node_vars: vec!["x".into(), "y".into(), "z".into()],
            edge_vars: vec!["e".into(), "f".into()],
            key: "k".into(),
            labels: vec!["A".into(), "B".into()],
            backward: true,
            conditions: true,
            variables: true,
        }
    }
}

impl PatternOptions {
    /// No variables, no conditions.
    pub fn variable_free() -> Self {
        PatternOptions {
            conditions: false,
            variables: false,
            ..Self::default()
        }
    }
}

fn maybe_var(rng: &mut impl Rng, pool: &[String], opts: &PatternOptions) -> String {
    if opts.variables && !pool.is_empty() && rng.gen_bool(0.5) {
        pool.choose(rng).expect("nonempty").clone()
    } else {
        String::new()
    }
}

fn leaf(rng: &mut impl Rng, opts: &PatternOptions) -> Pattern {
    let k = if opts.backward { rng.gen_range(0..4) } else { rng.gen_range(0..3) };
    match k {
        0 | 1 => Pattern::node(&maybe_var(rng, &opts.node_vars, opts)),
        2 => Pattern::fwd(&maybe_var(rng, &opts.edge_vars, opts)),
        _ => Pattern::bwd(&maybe_var(rng, &opts.edge_vars, opts)),
    }
}

fn random_condition(rng: &mut impl Rng, vars: &[String], opts: &PatternOptions, depth: u32) -> Condition {
    if depth > 0 && rng.gen_bool(0.3) {
        let a = random_condition(rng, vars, opts, depth - 1);
        return match rng.gen_range(0..3) {
            0 => a.not(),
            1 => a.and(random_condition(rng, vars, opts, depth - 1)),
            _ => a.or(random_condition(rng, vars, opts, depth - 1)),
        };
    }
    let x = vars.choose(rng).expect("nonempty");
    let y = vars.choose(rng).expect("nonempty");
    match rng.gen_range(0..3) {
        0 => Condition::lt(x, &opts.key, y, &opts.key),
        1 => Condition::eq(x, &opts.key, y, &opts.key),
        _ => Condition::has_label(x, opts.labels.choose(rng).expect("nonempty")),
    }
}

/// A well-formed pattern of depth at most `opts.max_depth`.
pub fn random_pattern(rng: &mut impl Rng, opts: &PatternOptions) -> Pattern {
    gen_pattern(rng, opts, opts.max_depth)
}

fn gen_pattern(rng: &mut impl Rng, opts: &PatternOptions, depth: u32) -> Pattern {
    if depth == 0 || rng.gen_bool(0.2) {
        return leaf(rng, opts);
    }
    let choices = if opts.conditions { 5 } else { 4 };
    match rng.gen_range(0..choices) {
        0 | 1 => gen_pattern(rng, opts, depth - 1).concat(gen_pattern(rng, opts, depth - 1)),
        2 => {
            let a = gen_pattern(rng, opts, depth - 1);
            for _ in 0..20 {
                let b = gen_pattern(rng, opts, depth - 1);
                if let Ok(u) = a.clone().union(b) {
                    return u;
                }
            }
            a
        }
        3 => {
            let lo = rng.gen_range(0..=2);
            let hi = match rng.gen_range(0..4) {
                0 => None,
                k => Some(lo + k - 1),
            };
            gen_pattern(rng, opts, depth - 1)
                .repeat(lo, hi)
                .expect("lo <= hi")
        }
        _ => {
            let q = gen_pattern(rng, opts, depth - 1);
            let vars: Vec<String> = q.free_vars().into_iter().collect();
            if vars.is_empty() {
                return q;
            }
            let theta = random_condition(rng, &vars, opts, 2);
            q.with_cond(theta).expect("condition over free variables")
        }
    }
}

/// `count` distinct patterns whose saturation bound on `node_count` nodes
/// is at most `max_bound`.
pub fn pattern_corpus(
    rng: &mut impl Rng,
    opts: &PatternOptions,
    count: usize,
    node_count: usize,
    max_bound: usize,
) -> Vec<Pattern> {
    let mut out: Vec<Pattern> = Vec::with_capacity(count);
    while out.len() < count {
        let p = random_pattern(rng, opts);
        if saturation_bound(&p, node_count) <= max_bound && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// A multigraph with at most `max_nodes` nodes and `max_edges` edges,
/// self-loops allowed. Elements get labels `A`/`B` and an integer `k` in
/// `0..=3` at random, sometimes no `k` at all.
pub fn small_graph(rng: &mut impl Rng, max_nodes: usize, max_edges: usize) -> PropertyGraph {
    let n = rng.gen_range(1..=max_nodes.max(1));
    let m = rng.gen_range(0..=max_edges);
    let mut b = PropertyGraph::builder();
    let decorate = |rng: &mut dyn rand::RngCore| {
        let mut labels = Vec::new();
        if rng.gen_bool(0.5) {
            labels.push("A".to_string());
        }
        if rng.gen_bool(0.3) {
            labels.push("B".to_string());
        }
        let mut props = Vec::new();
        if rng.gen_bool(0.8) {
            props.push(("k".to_string(), Const::Int(rng.gen_range(0..=3))));
        }
        (labels, props)
    };
    for i in 0..n {
        let (labels, props) = decorate(rng);
        b.add_node(&format!("v{i}"), labels, props).expect("fresh name");
    }
    for i in 0..m {
        let (s, t) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (labels, props) = decorate(rng);
        b.add_edge(&format!("e{i}"), &format!("v{s}"), &format!("v{t}"), labels, props)
            .expect("endpoints exist");
    }
    b.build()
}

/// Path `v0 ... vn` whose `i`-th edge points forward for `a` and backward
/// for `b`.
pub fn zigzag_path(word: &[Letter]) -> PropertyGraph {
    let mut b = PropertyGraph::builder();
    for i in 0..=word.len() {
        b.add_node(&format!("v{i}"), Vec::<String>::new(), Vec::new())
            .expect("fresh name");
    }
    for (i, l) in word.iter().enumerate() {
        let (s, t) = match l {
            Letter::A => (i, i + 1),
            Letter::B => (i + 1, i),
        };
        b.add_edge(&format!("e{i}"), &format!("v{s}"), &format!("v{t}"), Vec::<String>::new(), Vec::new())
            .expect("endpoints exist");
    }
    b.build()
}

pub fn random_word(rng: &mut impl Rng, max_len: usize) -> Vec<Letter> {
    let n = rng.gen_range(0..=max_len);
    (0..n)
        .map(|_| if rng.gen_bool(0.5) { Letter::A } else { Letter::B })
        .collect()
}

/// Every word over `{a, b}` of length at most `max_len`.
pub fn all_words(max_len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .into_iter()
            .flat_map(|w: Vec<Letter>| {
                [Letter::A, Letter::B].map(|l| {
                    let mut w = w.clone();
                    w.push(l);
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

// ---------------------------------------------------------------------------
// Relational algebra

/// `R(A,B)`, `S(B,C)`, `T(A,C)`, `U(A)`.
pub fn ra_schema() -> Schema {
    [
        ("R", &["A", "B"][..]),
        ("S", &["B", "C"][..]),
        ("T", &["A", "C"][..]),
        ("U", &["A"][..]),
    ]
    .into_iter()
    .map(|(n, attrs)| (n.to_string(), attrs.iter().map(|a| a.to_string()).collect()))
    .collect()
}

const ATTR_POOL: [&str; 4] = ["A", "B", "C", "D"];

fn random_eq_cond(rng: &mut impl Rng, attrs: &[Attr], depth: u32, negation: bool) -> EqCond {
    if depth > 0 && rng.gen_bool(0.3) {
        let k = if negation { rng.gen_range(0..3) } else { rng.gen_range(1..3) };
        let a = random_eq_cond(rng, attrs, depth - 1, negation);
        return match k {
            0 => a.not(),
            1 => a.and(random_eq_cond(rng, attrs, depth - 1, negation)),
            _ => a.or(random_eq_cond(rng, attrs, depth - 1, negation)),
        };
    }
    let a = attrs.choose(rng).expect("nonempty");
    let b = attrs.choose(rng).expect("nonempty");
    let atom = EqCond::eq(a, b);
    if negation && rng.gen_bool(0.3) {
        atom.not()
    } else {
        atom
    }
}

/// A well-formed expression over `schema` with its attributes.
pub fn random_ra(rng: &mut impl Rng, schema: &Schema, depth: u32) -> RAExpr {
    gen_ra(rng, schema, depth).0
}

fn gen_ra(rng: &mut impl Rng, schema: &Schema, depth: u32) -> (RAExpr, Vec<Attr>) {
    if depth == 0 || rng.gen_bool(0.25) {
        let names: Vec<&String> = schema.keys().collect();
        let s = *names.choose(rng).expect("nonempty schema");
        return (RAExpr::base(s), schema[s].iter().cloned().collect());
    }
    let (e, attrs) = gen_ra(rng, schema, depth - 1);
    match rng.gen_range(0..6) {
        0 => {
            let kept: Vec<Attr> = attrs.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
            (RAExpr::Project(kept.clone(), Box::new(e)), kept)
        }
        1 if !attrs.is_empty() => (e.select(random_eq_cond(rng, &attrs, 2, true)), attrs),
        2 => {
            let free: Vec<&str> = ATTR_POOL.iter().copied().filter(|a| !attrs.iter().any(|b| b == a)).collect();
            match (attrs.choose(rng), free.choose(rng)) {
                (Some(from), Some(to)) => {
                    let mut next: Vec<Attr> = attrs.iter().filter(|a| *a != from).cloned().collect();
                    next.push(to.to_string());
                    next.sort();
                    (e.rename(from, to), next)
                }
                _ => (e, attrs),
            }
        }
        3 => {
            let (f, fattrs) = gen_ra(rng, schema, depth - 1);
            let mut all = attrs;
            all.extend(fattrs);
            all.sort();
            all.dedup();
            (e.join(f), all)
        }
        _ => {
            let (f, fattrs) = gen_ra(rng, schema, depth - 1);
            let op = *[SetOp::Union, SetOp::Intersect, SetOp::Diff].choose(rng).expect("nonempty");
            if attrs == fattrs {
                return (RAExpr::set_op(op, e, f), attrs);
            }
            let common: Vec<Attr> = attrs.iter().filter(|a| fattrs.contains(a)).cloned().collect();
            let (l, r) = (
                RAExpr::Project(common.clone(), Box::new(e)),
                RAExpr::Project(common.clone(), Box::new(f)),
            );
            (RAExpr::set_op(op, l, r), common)
        }
    }
}

/// Integers `1..=domain` in each column, up to `max_rows` rows per relation.
pub fn random_database(rng: &mut impl Rng, schema: &Schema, domain: i64, max_rows: usize) -> Database {
    schema
        .iter()
        .map(|(name, attrs)| {
            let mut r = Relation::empty(attrs.iter().cloned());
            for _ in 0..rng.gen_range(0..=max_rows) {
                r.insert_row(attrs.iter().map(|_| Value::int(rng.gen_range(1..=domain))).collect());
            }
            (name.clone(), r)
        })
        .collect()
}

/// `U = {a1}` and `U = {a1, a2}`.
pub fn unary_databases() -> (Database, Database) {
    let u1 = Relation::from_rows(&["A"], [vec![Value::str("a1")]]);
    let u2 = Relation::from_rows(&["A"], [vec![Value::str("a1")], vec![Value::str("a2")]]);
    (
        Database::from([("U".to_string(), u1)]),
        Database::from([("U".to_string(), u2)]),
    )
}

/// Boolean query: does `U` have exactly one element?
pub fn cardinality_one_query() -> RAExpr {
    let u = RAExpr::base("U");
    let pairs = u.clone().join(u.clone().rename("A", "B"));
    let two = pairs.select(EqCond::eq("A", "B").not()).project::<&str>(&[]);
    u.project::<&str>(&[]).diff(two)
}

/// A Boolean query without `call` over `U(A)`: set operations over linear
/// arms, each ending in `pi()`, with equality-only conditions.
pub fn random_boolean_slcra(rng: &mut impl Rng, depth: u32) -> LcraQuery {
    if depth == 0 || rng.gen_bool(0.4) {
        let mut clauses = Vec::new();
        let mut attrs: Vec<Attr> = Vec::new();
        for _ in 0..rng.gen_range(1..=6) {
            match rng.gen_range(0..4) {
                0 => {
                    clauses.push(Clause::Scan("U".into()));
                    if !attrs.contains(&"A".to_string()) {
                        attrs.push("A".into());
                    }
                }
                1 => {
                    let kept: Vec<Attr> = attrs.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
                    clauses.push(Clause::Proj(kept.clone()));
                    attrs = kept;
                }
                2 if !attrs.is_empty() => clauses.push(Clause::Filt(random_eq_cond(rng, &attrs, 2, false))),
                _ => {
                    let free: Vec<&str> = ATTR_POOL.iter().copied().filter(|a| !attrs.iter().any(|b| b == a)).collect();
                    if let (Some(from), Some(to)) = (attrs.choose(rng).cloned(), free.choose(rng)) {
                        clauses.push(Clause::Ren(from.clone(), to.to_string()));
                        attrs.retain(|a| *a != from);
                        attrs.push(to.to_string());
                    }
                }
            }
        }
        clauses.push(Clause::Proj(Vec::new()));
        return LcraQuery::Lin(clauses);
    }
    let op = *[SetOp::Union, SetOp::Intersect, SetOp::Diff].choose(rng).expect("nonempty");
    LcraQuery::set_op(op, random_boolean_slcra(rng, depth - 1), random_boolean_slcra(rng, depth - 1))
}

// ---------------------------------------------------------------------------
// Datalog

/// A safe program over `E/2` and `N/1` with at most `max_idb` derived
/// predicates and `max_rules` rules.
pub fn random_datalog(rng: &mut impl Rng, max_idb: usize, max_rules: usize) -> Program {
    let idb: Vec<(String, usize)> = (0..rng.gen_range(1..=max_idb))
        .map(|i| (["P", "Q", "R"][i % 3].to_string(), rng.gen_range(0..=2)))
        .collect();
    let edb = [("E".to_string(), 2), ("N".to_string(), 1)];
    let vars = ["x", "y", "z", "w"];
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(1..=max_rules) {
        let body: Vec<Atom> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let (pred, arity) = if rng.gen_bool(0.5) {
                    idb.choose(rng).expect("nonempty").clone()
                } else {
                    edb.choose(rng).expect("nonempty").clone()
                };
                let args = (0..arity)
                    .map(|_| {
                        if rng.gen_bool(0.1) {
                            Term::Const(Value::int(rng.gen_range(0..4)))
                        } else {
                            Term::var(vars.choose(rng).expect("nonempty"))
                        }
                    })
                    .collect();
                Atom { pred, args }
            })
            .collect();
        let body_vars: Vec<String> = body.iter().flat_map(|a| a.vars().map(str::to_string)).collect();
        let (pred, arity) = idb.choose(rng).expect("nonempty").clone();
        let args = (0..arity)
            .map(|_| match body_vars.choose(rng) {
                Some(x) => Term::Var(x.clone()),
                None => Term::Const(Value::int(rng.gen_range(0..4))),
            })
            .collect();
        rules.push(Rule {
            head: Atom { pred, args },
            body,
        });
    }
    Program { rules, out: None }
}

/// Up to `max_facts` facts over `E/2` and `N/1` with values `0..4`.
pub fn random_facts(rng: &mut impl Rng, max_facts: usize) -> Facts {
    let mut facts = Facts::new();
    facts.insert("E".into(), Default::default());
    facts.insert("N".into(), Default::default());
    for _ in 0..rng.gen_range(0..=max_facts) {
        if rng.gen_bool(0.7) {
            let row = vec![Value::int(rng.gen_range(0..4)), Value::int(rng.gen_range(0..4))];
            facts.get_mut("E").expect("inserted").insert(row);
        } else {
            facts.get_mut("N").expect("inserted").insert(vec![Value::int(rng.gen_range(0..4))]);
        }
    }
    facts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relalg::{eval_ra, ra_attrs};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_items_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            random_pattern(&mut rng, &PatternOptions::default()).validate().unwrap();
            let p = random_pattern(&mut rng, &PatternOptions::variable_free());
            assert!(p.is_variable_free() && !p.has_condition());
            let e = random_ra(&mut rng, &ra_schema(), 4);
            ra_attrs(&e, &ra_schema()).unwrap();
            random_datalog(&mut rng, 3, 4).validate().unwrap();
        }
    }

    #[test]
    fn cardinality_query_separates() {
        let (d1, d2) = unary_databases();
        let q = cardinality_one_query();
        assert!(!eval_ra(&d1, &q).unwrap().is_empty());
        assert!(eval_ra(&d2, &q).unwrap().is_empty());
    }

    #[test]
    fn words_and_zigzags() {
        assert_eq!(all_words(2).len(), 7);
        let g = zigzag_path(&[Letter::A, Letter::B]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.node_name(g.src(crate::graph::EdgeId(1))), "v2");
    }
}
