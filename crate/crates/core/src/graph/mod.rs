//! Property graphs and paths.
//!
//! A [`PropertyGraph`] is immutable once built. Node and edge identifiers
//! from the outside world are strings; internally they are interned into
//! dense [`NodeId`] / [`EdgeId`] indices in insertion order.

mod generate;
mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use generate::{
    annotated_path, dataless_path, generate, node_annotated_path, GraphFamily, GraphFamilySpec,
    MAX_ELT, MIN_ELT,
};
pub use io::{load_graph, save_graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A property value. Only integers are ordered.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Const {
    Int(i64),
    Str(String),
}

impl Const {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Const::Int(i) => Some(*i),
            Const::Str(_) => None,
        }
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Int(i) => write!(f, "{i}"),
            Const::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Const {
    fn from(v: i64) -> Self {
        Const::Int(v)
    }
}

impl From<&str> for Const {
    fn from(v: &str) -> Self {
        Const::Str(v.to_string())
    }
}

/// Anything that can appear in a relation: node ids, edge ids, constants.
///
/// The three spaces are disjoint; two values of different kinds are never
/// equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Node(NodeId),
    Edge(EdgeId),
    Const(Const),
}

impl Value {
    pub fn int(v: i64) -> Self {
        Value::Const(Const::Int(v))
    }

    pub fn str(v: &str) -> Self {
        Value::Const(Const::Str(v.to_string()))
    }

    /// `Some(self < other)` when both are integer constants, `None` otherwise.
    pub fn less_than(&self, other: &Value) -> Option<bool> {
        match (self, other) {
            (Value::Const(Const::Int(a)), Value::Const(Const::Int(b))) => Some(a < b),
            _ => None,
        }
    }

    pub fn element(&self) -> Option<ElemId> {
        match self {
            Value::Node(n) => Some(ElemId::Node(*n)),
            Value::Edge(e) => Some(ElemId::Edge(*e)),
            Value::Const(_) => None,
        }
    }
}

impl From<NodeId> for Value {
    fn from(n: NodeId) -> Self {
        Value::Node(n)
    }
}

impl From<EdgeId> for Value {
    fn from(e: EdgeId) -> Self {
        Value::Edge(e)
    }
}

impl From<Const> for Value {
    fn from(c: Const) -> Self {
        Value::Const(c)
    }
}

/// A graph element: either a node or an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElemId {
    Node(NodeId),
    Edge(EdgeId),
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("malformed graph document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("edge `{edge}` refers to undeclared node `{node}`")]
    DanglingEndpoint { edge: String, node: String },
    #[error("duplicate element id `{0}`")]
    DuplicateId(String),
    #[error("property `{key}` of `{id}` is neither an integer nor a string")]
    BadProperty { id: String, key: String },
    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct ElemData {
    name: String,
    labels: BTreeSet<String>,
    props: BTreeMap<String, Const>,
}

/// A directed property graph `⟨N, E, lab, src, tgt, prop⟩`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyGraph {
    nodes: Vec<ElemData>,
    edges: Vec<ElemData>,
    src: Vec<NodeId>,
    tgt: Vec<NodeId>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
    by_name: HashMap<String, ElemId>,
}

impl PropertyGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + Clone {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = EdgeId> + Clone {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn src(&self, e: EdgeId) -> NodeId {
        self.src[e.index()]
    }

    pub fn tgt(&self, e: EdgeId) -> NodeId {
        self.tgt[e.index()]
    }

    pub fn out_edges(&self, n: NodeId) -> &[EdgeId] {
        &self.out_edges[n.index()]
    }

    pub fn in_edges(&self, n: NodeId) -> &[EdgeId] {
        &self.in_edges[n.index()]
    }

    fn data(&self, el: ElemId) -> &ElemData {
        match el {
            ElemId::Node(n) => &self.nodes[n.index()],
            ElemId::Edge(e) => &self.edges[e.index()],
        }
    }

    pub fn name(&self, el: ElemId) -> &str {
        &self.data(el).name
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.nodes[n.index()].name
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.index()].name
    }

    pub fn lookup(&self, name: &str) -> Option<ElemId> {
        self.by_name.get(name).copied()
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        match self.lookup(name)? {
            ElemId::Node(n) => Some(n),
            ElemId::Edge(_) => None,
        }
    }

    pub fn edge(&self, name: &str) -> Option<EdgeId> {
        match self.lookup(name)? {
            ElemId::Edge(e) => Some(e),
            ElemId::Node(_) => None,
        }
    }

    pub fn labels(&self, el: ElemId) -> &BTreeSet<String> {
        &self.data(el).labels
    }

    pub fn has_label(&self, el: ElemId, label: &str) -> bool {
        self.data(el).labels.contains(label)
    }

    /// `prop(el, key)`, a partial function.
    pub fn prop(&self, el: ElemId, key: &str) -> Option<&Const> {
        self.data(el).props.get(key)
    }

    pub fn props(&self, el: ElemId) -> &BTreeMap<String, Const> {
        &self.data(el).props
    }

    /// Renders a value for output: element ids by name, constants verbatim.
    pub fn render(&self, v: &Value) -> String {
        match v {
            Value::Node(n) => self.node_name(*n).to_string(),
            Value::Edge(e) => self.edge_name(*e).to_string(),
            Value::Const(c) => c.to_string(),
        }
    }
}

/// Incremental construction of a [`PropertyGraph`]; nodes must be added
/// before the edges that reference them.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    graph: PropertyGraph,
}

impl GraphBuilder {
    pub fn add_node<L, P>(&mut self, name: &str, labels: L, props: P) -> Result<NodeId, GraphError>
    where
        L: IntoIterator,
        L::Item: Into<String>,
        P: IntoIterator<Item = (String, Const)>,
    {
        let g = &mut self.graph;
        if g.by_name.contains_key(name) {
            return Err(GraphError::DuplicateId(name.to_string()));
        }
        let id = NodeId(g.nodes.len() as u32);
        g.nodes.push(ElemData {
            name: name.to_string(),
            labels: labels.into_iter().map(Into::into).collect(),
            props: props.into_iter().collect(),
        });
        g.out_edges.push(Vec::new());
        g.in_edges.push(Vec::new());
        g.by_name.insert(name.to_string(), ElemId::Node(id));
        Ok(id)
    }

    pub fn add_edge<L, P>(
        &mut self,
        name: &str,
        src: &str,
        tgt: &str,
        labels: L,
        props: P,
    ) -> Result<EdgeId, GraphError>
    where
        L: IntoIterator,
        L::Item: Into<String>,
        P: IntoIterator<Item = (String, Const)>,
    {
        let g = &mut self.graph;
        if g.by_name.contains_key(name) {
            return Err(GraphError::DuplicateId(name.to_string()));
        }
        let endpoint = |n: &str| match g.by_name.get(n) {
            Some(ElemId::Node(id)) => Ok(*id),
            _ => Err(GraphError::DanglingEndpoint {
                edge: name.to_string(),
                node: n.to_string(),
            }),
        };
        let (s, t) = (endpoint(src)?, endpoint(tgt)?);
        let id = EdgeId(g.edges.len() as u32);
        g.edges.push(ElemData {
            name: name.to_string(),
            labels: labels.into_iter().map(Into::into).collect(),
            props: props.into_iter().collect(),
        });
        g.src.push(s);
        g.tgt.push(t);
        g.out_edges[s.index()].push(id);
        g.in_edges[t.index()].push(id);
        g.by_name.insert(name.to_string(), ElemId::Edge(id));
        Ok(id)
    }

    pub fn build(self) -> PropertyGraph {
        self.graph
    }
}

/// Direction in which a path traverses an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

/// An alternating node/edge sequence `u0 e1 u1 … en un`, `n ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    nodes: Vec<NodeId>,
    edges: Vec<(EdgeId, Direction)>,
}

impl Path {
    pub fn single(n: NodeId) -> Self {
        Path {
            nodes: vec![n],
            edges: Vec::new(),
        }
    }

    /// One-edge path traversing `e` in direction `dir`.
    pub fn edge(g: &PropertyGraph, e: EdgeId, dir: Direction) -> Self {
        let (a, b) = match dir {
            Direction::Forward => (g.src(e), g.tgt(e)),
            Direction::Backward => (g.tgt(e), g.src(e)),
        };
        Path {
            nodes: vec![a, b],
            edges: vec![(e, dir)],
        }
    }

    /// Builds a path after checking the incidence invariant against `g`.
    pub fn new(
        g: &PropertyGraph,
        nodes: Vec<NodeId>,
        edges: Vec<(EdgeId, Direction)>,
    ) -> Option<Self> {
        if nodes.len() != edges.len() + 1 {
            return None;
        }
        let ok = edges.iter().enumerate().all(|(i, &(e, dir))| {
            let (a, b) = (nodes[i], nodes[i + 1]);
            match dir {
                Direction::Forward => g.src(e) == a && g.tgt(e) == b,
                Direction::Backward => g.src(e) == b && g.tgt(e) == a,
            }
        });
        ok.then_some(Path { nodes, edges })
    }

    pub fn first(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn last(&self) -> NodeId {
        *self.nodes.last().expect("paths are nonempty")
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(EdgeId, Direction)] {
        &self.edges
    }

    /// `self · other`, defined iff `last(self) = first(other)`.
    pub fn concat(&self, other: &Path) -> Option<Path> {
        if self.last() != other.first() {
            return None;
        }
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&other.nodes[1..]);
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Some(Path { nodes, edges })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> PropertyGraph {
        let mut b = PropertyGraph::builder();
        for n in ["a", "b", "c"] {
            b.add_node(n, ["Account"], []).unwrap();
        }
        b.add_edge("e1", "a", "b", ["T"], []).unwrap();
        b.add_edge("e2", "b", "c", ["T"], []).unwrap();
        b.build()
    }

    #[test]
    fn concat_unit_and_mismatch() {
        let g = chain();
        let a = g.node("a").unwrap();
        let (e1, e2) = (g.edge("e1").unwrap(), g.edge("e2").unwrap());
        let pa = Path::single(a);
        assert_eq!(pa.concat(&pa), Some(pa.clone()));
        let p1 = Path::edge(&g, e1, Direction::Forward);
        let p2 = Path::edge(&g, e2, Direction::Forward);
        let joined = p1.concat(&p2).unwrap();
        assert_eq!(joined.nodes(), &[a, g.node("b").unwrap(), g.node("c").unwrap()]);
        assert_eq!(joined.len(), 2);
        assert_eq!(p1.concat(&Path::single(g.node("c").unwrap())), None);
        assert_eq!(p1.concat(&Path::single(g.node("b").unwrap())), Some(p1.clone()));
    }

    #[test]
    fn backward_edges_swap_endpoints() {
        let g = chain();
        let e1 = g.edge("e1").unwrap();
        let p = Path::edge(&g, e1, Direction::Backward);
        assert_eq!(p.first(), g.node("b").unwrap());
        assert_eq!(p.last(), g.node("a").unwrap());
        assert!(Path::new(&g, vec![p.first(), p.last()], vec![(e1, Direction::Forward)]).is_none());
    }

    #[test]
    fn ids_are_disjoint_across_nodes_and_edges() {
        let mut b = PropertyGraph::builder();
        b.add_node("x", Vec::<String>::new(), []).unwrap();
        let err = b.add_edge("x", "x", "x", Vec::<String>::new(), []).unwrap_err();
        assert!(matches!(err, GraphError::DuplicateId(_)));
    }

    #[test]
    fn only_integers_are_ordered() {
        assert_eq!(Value::int(1).less_than(&Value::int(2)), Some(true));
        assert_eq!(Value::str("a").less_than(&Value::str("b")), None);
        assert_eq!(Value::int(1).less_than(&Value::Node(NodeId(0))), None);
        assert_ne!(Value::Node(NodeId(0)), Value::Edge(EdgeId(0)));
    }
}
