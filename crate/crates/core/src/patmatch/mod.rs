//! Pattern evaluation.
//!
//! Patterns never return paths, so the evaluator keeps only the endpoints
//! of every matched path together with its binding. Unbounded repetition
//! then becomes a reachability closure over endpoint pairs and evaluation
//! always terminates.

mod automaton;
mod oracle;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::graph::{NodeId, PropertyGraph, Value};
use crate::pattern::{Condition, OutputItem, OutputSpec, Pattern, PropRef, Var};
use crate::relation::{Relation, Tuple};

pub use automaton::{pattern_to_automaton, AutomatonError, EdgeWordAutomaton, Letter};
pub use oracle::{enumerate_matches_oracle, oracle_match_rel, saturation_bound};

/// A partial assignment of variables to graph elements.
pub type Binding = BTreeMap<Var, Value>;

/// Endpoint abstraction of a pattern's matches: `(src, tgt, μ)` triples,
/// with `μ` stored as values aligned to `vars`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchRel {
    vars: Vec<Var>,
    rows: BTreeSet<(NodeId, NodeId, Vec<Value>)>,
}

impl MatchRel {
    pub fn new(vars: BTreeSet<Var>) -> Self {
        MatchRel {
            vars: vars.into_iter().collect(),
            rows: BTreeSet::new(),
        }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, src: NodeId, tgt: NodeId, mu: &Binding) {
        debug_assert!(mu.keys().eq(self.vars.iter()));
        self.rows.insert((src, tgt, mu.values().cloned().collect()));
    }

    pub fn contains(&self, src: NodeId, tgt: NodeId, mu: &Binding) -> bool {
        mu.keys().eq(self.vars.iter())
            && self
                .rows
                .contains(&(src, tgt, mu.values().cloned().collect()))
    }

    pub fn triples(&self) -> impl Iterator<Item = (NodeId, NodeId, Binding)> + '_ {
        self.rows.iter().map(|(s, t, vals)| {
            (
                *s,
                *t,
                self.vars.iter().cloned().zip(vals.iter().cloned()).collect(),
            )
        })
    }

    /// The `(src, tgt)` projection.
    pub fn endpoints(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.rows.iter().map(|(s, t, _)| (*s, *t)).collect()
    }

    fn from_pairs(pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        MatchRel {
            vars: Vec::new(),
            rows: pairs.into_iter().map(|(s, t)| (s, t, Vec::new())).collect(),
        }
    }
}

fn holds<'a>(
    g: &PropertyGraph,
    get: &impl Fn(&str) -> Option<&'a Value>,
    theta: &Condition,
) -> bool {
    let prop = |r: &PropRef| {
        get(&r.var)
            .and_then(Value::element)
            .and_then(|el| g.prop(el, &r.key))
    };
    match theta {
        Condition::Eq(a, b) => matches!((prop(a), prop(b)), (Some(x), Some(y)) if x == y),
        Condition::Lt(a, b) => matches!(
            (prop(a).and_then(|c| c.as_int()), prop(b).and_then(|c| c.as_int())),
            (Some(i), Some(j)) if i < j
        ),
        Condition::HasLabel(x, l) => get(x)
            .and_then(Value::element)
            .is_some_and(|el| g.has_label(el, l)),
        Condition::And(a, b) => holds(g, get, a) && holds(g, get, b),
        Condition::Or(a, b) => holds(g, get, a) || holds(g, get, b),
        Condition::Not(a) => !holds(g, get, a),
    }
}

/// `μ ⊨ θ`. Comparisons need both properties defined; `<` additionally
/// needs both to be integers.
pub fn eval_condition(mu: &Binding, g: &PropertyGraph, theta: &Condition) -> bool {
    holds(g, &|x: &str| mu.get(x), theta)
}

/// `⟦ψ⟧_G` under the endpoint abstraction.
pub fn eval_pattern(g: &PropertyGraph, psi: &Pattern) -> MatchRel {
    match psi {
        Pattern::Node(x) => {
            let mut r = MatchRel::new(x.iter().cloned().collect());
            for n in g.nodes() {
                let vals = x.iter().map(|_| Value::Node(n)).collect();
                r.rows.insert((n, n, vals));
            }
            r
        }
        Pattern::Fwd(x) | Pattern::Bwd(x) => {
            let forward = matches!(psi, Pattern::Fwd(_));
            let mut r = MatchRel::new(x.iter().cloned().collect());
            for e in g.edges() {
                let (s, t) = if forward {
                    (g.src(e), g.tgt(e))
                } else {
                    (g.tgt(e), g.src(e))
                };
                r.rows.insert((s, t, x.iter().map(|_| Value::Edge(e)).collect()));
            }
            r
        }
        Pattern::Concat(a, b) => concat(&eval_pattern(g, a), &eval_pattern(g, b)),
        Pattern::Union(a, b) => {
            let mut r = eval_pattern(g, a);
            let other = eval_pattern(g, b);
            debug_assert_eq!(r.vars, other.vars);
            r.rows.extend(other.rows);
            r
        }
        Pattern::Cond(q, theta) => {
            let mut r = eval_pattern(g, q);
            let vars = r.vars.clone();
            r.rows.retain(|(_, _, vals)| {
                let get = |x: &str| vars.iter().position(|v| v == x).map(|i| &vals[i]);
                holds(g, &get, theta)
            });
            r
        }
        Pattern::Repeat(q, lo, hi) => {
            let step: HashSet<(NodeId, NodeId)> = eval_pattern(g, q).endpoints().into_iter().collect();
            MatchRel::from_pairs(repeat_pairs(g, &step, *lo, *hi))
        }
    }
}

fn concat(a: &MatchRel, b: &MatchRel) -> MatchRel {
    let vars: BTreeSet<Var> = a.vars.iter().chain(&b.vars).cloned().collect();
    let vars: Vec<Var> = vars.into_iter().collect();
    let shared: Vec<(usize, usize)> = a
        .vars
        .iter()
        .enumerate()
        .filter_map(|(i, v)| b.vars.iter().position(|w| w == v).map(|j| (i, j)))
        .collect();
    let layout: Vec<(bool, usize)> = vars
        .iter()
        .map(|v| match a.vars.iter().position(|w| w == v) {
            Some(i) => (true, i),
            None => (false, b.vars.iter().position(|w| w == v).unwrap()),
        })
        .collect();
    let mut index: HashMap<(NodeId, Vec<&Value>), Vec<&(NodeId, NodeId, Vec<Value>)>> =
        HashMap::new();
    for row in &b.rows {
        let key = shared.iter().map(|&(_, j)| &row.2[j]).collect();
        index.entry((row.0, key)).or_default().push(row);
    }
    let mut out = MatchRel {
        vars,
        rows: BTreeSet::new(),
    };
    for (s, t, la) in &a.rows {
        let key = shared.iter().map(|&(i, _)| &la[i]).collect();
        if let Some(matches) = index.get(&(*t, key)) {
            for (_, t2, lb) in matches {
                let vals = layout
                    .iter()
                    .map(|&(left, i)| if left { la[i].clone() } else { lb[i].clone() })
                    .collect();
                out.rows.insert((*s, *t2, vals));
            }
        }
    }
    out
}

type Layer = Vec<Vec<bool>>;

/// Pairs `(s, t)` joined by a walk of `i` steps through `step`, for some
/// `lo ≤ i ≤ hi`.
fn repeat_pairs(
    g: &PropertyGraph,
    step: &HashSet<(NodeId, NodeId)>,
    lo: u32,
    hi: Option<u32>,
) -> BTreeSet<(NodeId, NodeId)> {
    let n = g.node_count();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(s, t) in step {
        succ[s.index()].push(t.index());
    }
    let next = |layer: &Layer| -> Layer {
        let mut out = vec![vec![false; n]; n];
        for (s, row) in layer.iter().enumerate() {
            for (m, &hit) in row.iter().enumerate() {
                if hit {
                    for &t in &succ[m] {
                        out[s][t] = true;
                    }
                }
            }
        }
        out
    };
    // Walks of exactly lo steps. The layer sequence is eventually periodic,
    // so a large lo is reduced modulo the period.
    let mut layer: Layer = (0..n).map(|s| (0..n).map(|t| s == t).collect()).collect();
    let mut history: HashMap<Layer, u32> = HashMap::new();
    let mut layers: Vec<Layer> = Vec::new();
    for i in 0..lo {
        if let Some(&j) = history.get(&layer) {
            layer = layers[(j + (lo - j) % (i - j)) as usize].clone();
            break;
        }
        history.insert(layer.clone(), i);
        layers.push(layer.clone());
        layer = next(&layer);
    }
    let mut acc = vec![vec![false; n]; n];
    match hi {
        Some(hi) => {
            // Once a layer repeats, every later one has been added already.
            let mut seen: HashSet<Layer> = HashSet::new();
            for _ in lo..=hi {
                if !seen.insert(layer.clone()) {
                    break;
                }
                for (a, l) in acc.iter_mut().zip(&layer) {
                    for (x, &y) in a.iter_mut().zip(l) {
                        *x |= y;
                    }
                }
                layer = next(&layer);
            }
        }
        None => {
            let mut reach = vec![vec![false; n]; n];
            for (m, row) in reach.iter_mut().enumerate() {
                let mut stack = vec![m];
                row[m] = true;
                while let Some(v) = stack.pop() {
                    for &w in &succ[v] {
                        if !row[w] {
                            row[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
            for s in 0..n {
                for m in 0..n {
                    if layer[s][m] {
                        for t in 0..n {
                            acc[s][t] |= reach[m][t];
                        }
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for (s, row) in acc.iter().enumerate() {
        for (t, &hit) in row.iter().enumerate() {
            if hit {
                out.insert((NodeId(s as u32), NodeId(t as u32)));
            }
        }
    }
    out
}

/// `⟦ψ_ω⟧_G`. Rows that request an undefined property are dropped.
pub fn eval_pattern_with_output(g: &PropertyGraph, psi: &Pattern, omega: &OutputSpec) -> Relation {
    let m = eval_pattern(g, psi);
    rel_from_match(g, &m, omega)
}

pub(crate) fn rel_from_match(g: &PropertyGraph, m: &MatchRel, omega: &OutputSpec) -> Relation {
    let mut rel = Relation::empty(omega.attr_names());
    let pos: Vec<Option<usize>> = omega
        .items()
        .iter()
        .map(|it| m.vars.iter().position(|v| v == it.var()))
        .collect();
    'rows: for (_, _, vals) in &m.rows {
        let mut t = Tuple::new();
        for (it, p) in omega.items().iter().zip(&pos) {
            let Some(v) = p.map(|i| &vals[i]) else {
                continue 'rows;
            };
            let out = match it {
                OutputItem::Var(_) => v.clone(),
                OutputItem::Prop(_, k) => match v.element().and_then(|el| g.prop(el, k)) {
                    Some(c) => Value::Const(c.clone()),
                    None => continue 'rows,
                },
            };
            t.insert(it.attr_name(), out);
        }
        rel.insert(t).expect("tuple built over the output attributes");
    }
    rel
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{annotated_path, node_annotated_path, Const};
    use crate::pattern::parse_pattern;

    fn one_edge() -> PropertyGraph {
        let mut b = PropertyGraph::builder();
        b.add_node("a", Vec::<String>::new(), []).unwrap();
        b.add_node("b", Vec::<String>::new(), []).unwrap();
        b.add_edge("e", "a", "b", ["Friends"], []).unwrap();
        b.build()
    }

    fn binding(pairs: &[(&str, Value)]) -> Binding {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn edge_atom() {
        let g = one_edge();
        let r = eval_pattern(&g, &parse_pattern("-[x]->").unwrap());
        let (a, b, e) = (g.node("a").unwrap(), g.node("b").unwrap(), g.edge("e").unwrap());
        assert_eq!(r.len(), 1);
        assert!(r.contains(a, b, &binding(&[("x", Value::Edge(e))])));
        let r = eval_pattern(&g, &parse_pattern("<-[x]-").unwrap());
        assert!(r.contains(b, a, &binding(&[("x", Value::Edge(e))])));
    }

    #[test]
    fn zero_repetition_is_identity() {
        let g = annotated_path("k", &[1, 2, 3]);
        let r = eval_pattern(&g, &parse_pattern("[-->]{0..0}").unwrap());
        let expected: BTreeSet<_> = g.nodes().map(|n| (n, n)).collect();
        assert_eq!(r.endpoints(), expected);
        assert!(r.vars().is_empty());
    }

    #[test]
    fn erroneous_pattern_accepts_the_counterexample() {
        let g = annotated_path("k", &[3, 4, 1, 2]);
        let psi = parse_pattern("[() -[x]-> () -[y]-> () | x.k < y.k]{0..*}").unwrap();
        let r = eval_pattern(&g, &psi);
        let (v0, v4) = (g.node("v0").unwrap(), g.node("v4").unwrap());
        assert!(r.endpoints().contains(&(v0, v4)));
    }

    #[test]
    fn node_increasing_on_a_path() {
        let g = node_annotated_path("k", &[1, 2, 3]);
        let psi = parse_pattern("(xs) [(x) --> (y) | x.k < y.k]{0..*} (xt)").unwrap();
        let rel = eval_pattern_with_output(&g, &psi, &OutputSpec::vars(&["xs", "xt"]).unwrap());
        let n = |s: &str| Value::Node(g.node(s).unwrap());
        assert_eq!(rel.len(), 6);
        let mut t = Tuple::new();
        t.insert("xs".into(), n("v0"));
        t.insert("xt".into(), n("v2"));
        assert!(rel.contains(&t));
    }

    #[test]
    fn edge_increasing_pattern_on_annotated_path() {
        let g = annotated_path("k", &[1, 5, 9]);
        let psi = parse_pattern(
            "(xs) [(u) -[x]-> (z) -[y]-> (v) <-[w]- (z) | x.k < y.k]{1..*} --> (xt) + (xs) --> (xt)",
        )
        .unwrap();
        let m = eval_pattern(&g, &psi);
        let name = |n: NodeId| g.node_name(n).to_string();
        let pairs: BTreeSet<(String, String)> = m
            .triples()
            .map(|(_, _, mu)| {
                let get = |x: &str| match mu[x] {
                    Value::Node(n) => name(n),
                    _ => unreachable!(),
                };
                (get("xs"), get("xt"))
            })
            .collect();
        let expected: BTreeSet<(String, String)> = [
            ("v0", "v3"),
            ("v0", "v1"),
            ("v1", "v2"),
            ("v2", "v3"),
            ("v1", "v3"),
            ("v0", "v2"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn conditions() {
        let mut b = PropertyGraph::builder();
        b.add_node("x", Vec::<String>::new(), [("k".to_string(), Const::Int(5))]).unwrap();
        b.add_node("y", Vec::<String>::new(), [("k".to_string(), Const::Int(5))]).unwrap();
        b.add_node("z", Vec::<String>::new(), []).unwrap();
        b.add_edge("e", "x", "y", ["Friends"], []).unwrap();
        let g = b.build();
        let mu = binding(&[
            ("x", Value::Node(g.node("x").unwrap())),
            ("y", Value::Node(g.node("y").unwrap())),
            ("z", Value::Node(g.node("z").unwrap())),
            ("e", Value::Edge(g.edge("e").unwrap())),
        ]);
        assert!(!eval_condition(&mu, &g, &Condition::lt("x", "k", "y", "k")));
        assert!(eval_condition(&mu, &g, &Condition::eq("x", "k", "y", "k")));
        assert!(!eval_condition(&mu, &g, &Condition::eq("x", "k", "z", "k")));
        assert!(eval_condition(&mu, &g, &Condition::eq("x", "k", "z", "k").not()));
        assert!(eval_condition(&mu, &g, &Condition::has_label("e", "Friends")));
        assert!(!eval_condition(&mu, &g, &Condition::has_label("x", "Friends")));
    }

    #[test]
    fn undefined_output_properties_drop_rows() {
        let mut b = PropertyGraph::builder();
        b.add_node("a", Vec::<String>::new(), [("k".to_string(), Const::Int(1))]).unwrap();
        b.add_node("b", Vec::<String>::new(), []).unwrap();
        let g = b.build();
        let psi = parse_pattern("(x)").unwrap();
        let out = crate::pattern::parse_output("x, x.k").unwrap();
        let rel = eval_pattern_with_output(&g, &psi, &out);
        assert_eq!(rel.attrs(), &["x".to_string(), "x.k".to_string()]);
        assert_eq!(rel.len(), 1);
        let all = eval_pattern_with_output(&g, &psi, &OutputSpec::vars(&["x"]).unwrap());
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn bounded_repeat_counts_steps() {
        let g = annotated_path("k", &[0, 0, 0, 0]);
        let r = eval_pattern(&g, &parse_pattern("[-->]{2..3}").unwrap());
        let v = |i: usize| g.node(&format!("v{i}")).unwrap();
        let expected: BTreeSet<_> = [(0, 2), (1, 3), (2, 4), (0, 3), (1, 4)]
            .iter()
            .map(|&(a, b)| (v(a), v(b)))
            .collect();
        assert_eq!(r.endpoints(), expected);
        let r = eval_pattern(&g, &parse_pattern("[-->]{2..*}").unwrap());
        assert_eq!(r.len(), 6);
    }
}
