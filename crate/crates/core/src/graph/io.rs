use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{Const, ElemId, GraphError, PropertyGraph};

// Field order is alphabetical so that serialized documents have sorted keys.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    edges: Vec<EdgeDoc>,
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: String,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    properties: BTreeMap<String, Json>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: String,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    properties: BTreeMap<String, Json>,
    src: String,
    tgt: String,
}

fn to_const(id: &str, key: &str, v: Json) -> Result<Const, GraphError> {
    match v {
        Json::Number(n) if n.is_i64() => Ok(Const::Int(n.as_i64().unwrap())),
        Json::String(s) => Ok(Const::Str(s)),
        _ => Err(GraphError::BadProperty {
            id: id.to_string(),
            key: key.to_string(),
        }),
    }
}

fn to_props(
    id: &str,
    props: BTreeMap<String, Json>,
) -> Result<Vec<(String, Const)>, GraphError> {
    props
        .into_iter()
        .map(|(k, v)| {
            let c = to_const(id, &k, v)?;
            Ok((k, c))
        })
        .collect()
}

fn from_const(c: &Const) -> Json {
    match c {
        Const::Int(i) => Json::from(*i),
        Const::Str(s) => Json::from(s.as_str()),
    }
}

/// Parses the JSON graph format.
pub fn load_graph(bytes: &[u8]) -> Result<PropertyGraph, GraphError> {
    let doc: GraphDoc = serde_json::from_slice(bytes)?;
    let mut b = PropertyGraph::builder();
    for n in doc.nodes {
        let props = to_props(&n.id, n.properties)?;
        b.add_node(&n.id, n.labels, props)?;
    }
    for e in doc.edges {
        let props = to_props(&e.id, e.properties)?;
        b.add_edge(&e.id, &e.src, &e.tgt, e.labels, props)?;
    }
    Ok(b.build())
}

/// Serializes a graph with nodes, edges, labels and keys all sorted, so the
/// output depends only on the graph and not on insertion order.
pub fn save_graph(g: &PropertyGraph) -> String {
    let props = |el| {
        g.props(el)
            .iter()
            .map(|(k, v)| (k.clone(), from_const(v)))
            .collect()
    };
    let mut nodes: Vec<NodeDoc> = g
        .nodes()
        .map(|n| NodeDoc {
            id: g.node_name(n).to_string(),
            labels: g.labels(ElemId::Node(n)).iter().cloned().collect(),
            properties: props(ElemId::Node(n)),
        })
        .collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    let mut edges: Vec<EdgeDoc> = g
        .edges()
        .map(|e| EdgeDoc {
            id: g.edge_name(e).to_string(),
            labels: g.labels(ElemId::Edge(e)).iter().cloned().collect(),
            properties: props(ElemId::Edge(e)),
            src: g.node_name(g.src(e)).to_string(),
            tgt: g.node_name(g.tgt(e)).to_string(),
        })
        .collect();
    edges.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = serde_json::to_string_pretty(&GraphDoc { edges, nodes })
        .expect("graph documents always serialize");
    out.push('\n');
    out
}
