use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Const, GraphError, PropertyGraph};

/// Label of the first node of a dataless path.
pub const MIN_ELT: &str = "min_elt";
/// Label of the last node of a dataless path.
pub const MAX_ELT: &str = "max_elt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFamily {
    /// Directed G(n,p) without self-loops; each edge carries a value.
    Gnp,
    /// `v0 → v1 → … → vn` with `min_elt`/`max_elt` endpoint labels, no data.
    DatalessPath,
    /// Path of `n` edges, each edge carrying a value.
    AnnotatedPath,
    /// Path of `n` edges, each node carrying a value.
    NodeAnnotatedPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphFamilySpec {
    pub family: GraphFamily,
    pub n: usize,
    pub p: f64,
    pub value_key: String,
    /// Inclusive range of generated values.
    pub value_range: (i64, i64),
    pub seed: u64,
}

impl GraphFamilySpec {
    pub fn new(family: GraphFamily, n: usize) -> Self {
        GraphFamilySpec {
            family,
            n,
            p: 0.0,
            value_key: "val".to_string(),
            value_range: (0, 100),
            seed: 0,
        }
    }

    pub fn gnp(n: usize, p: f64, seed: u64) -> Self {
        GraphFamilySpec {
            p,
            seed,
            ..Self::new(GraphFamily::Gnp, n)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_values(mut self, key: &str, lo: i64, hi: i64) -> Self {
        self.value_key = key.to_string();
        self.value_range = (lo, hi);
        self
    }

    fn validate(&self) -> Result<(), GraphError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(GraphError::InvalidSpec(format!("p = {} not in [0,1]", self.p)));
        }
        if self.family != GraphFamily::DatalessPath && self.value_range.0 > self.value_range.1 {
            return Err(GraphError::InvalidSpec(format!(
                "empty value range {}..={}",
                self.value_range.0, self.value_range.1
            )));
        }
        Ok(())
    }
}

fn node_name(i: usize) -> String {
    format!("v{i}")
}

fn edge_name(i: usize) -> String {
    format!("e{i}")
}

/// Generates a graph of the requested family. Deterministic in `spec`.
pub fn generate(spec: &GraphFamilySpec) -> Result<PropertyGraph, GraphError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.value_range;
    let value = |rng: &mut ChaCha8Rng| Const::Int(rng.gen_range(lo..=hi));
    match spec.family {
        GraphFamily::Gnp => {
            let mut b = PropertyGraph::builder();
            for i in 0..spec.n {
                b.add_node(&node_name(i), Vec::<String>::new(), [])?;
            }
            let mut k = 0;
            for i in 0..spec.n {
                for j in 0..spec.n {
                    if i != j && rng.gen_bool(spec.p) {
                        let v = value(&mut rng);
                        b.add_edge(
                            &edge_name(k),
                            &node_name(i),
                            &node_name(j),
                            Vec::<String>::new(),
                            [(spec.value_key.clone(), v)],
                        )?;
                        k += 1;
                    }
                }
            }
            Ok(b.build())
        }
        GraphFamily::DatalessPath => Ok(dataless_path(spec.n)),
        GraphFamily::AnnotatedPath => {
            let values: Vec<i64> = (0..spec.n)
                .map(|_| value(&mut rng).as_int().unwrap())
                .collect();
            Ok(annotated_path(&spec.value_key, &values))
        }
        GraphFamily::NodeAnnotatedPath => {
            let values: Vec<i64> = (0..=spec.n)
                .map(|_| value(&mut rng).as_int().unwrap())
                .collect();
            Ok(node_annotated_path(&spec.value_key, &values))
        }
    }
}

fn path_graph(
    n: usize,
    node_labels: impl Fn(usize) -> Vec<String>,
    node_props: impl Fn(usize) -> Vec<(String, Const)>,
    edge_props: impl Fn(usize) -> Vec<(String, Const)>,
) -> PropertyGraph {
    let mut b = PropertyGraph::builder();
    for i in 0..=n {
        b.add_node(&node_name(i), node_labels(i), node_props(i))
            .expect("fresh names");
    }
    for i in 0..n {
        b.add_edge(
            &edge_name(i),
            &node_name(i),
            &node_name(i + 1),
            Vec::<String>::new(),
            edge_props(i),
        )
        .expect("endpoints exist");
    }
    b.build()
}

/// The dataless path `G_n` with nodes `v0..vn`.
pub fn dataless_path(n: usize) -> PropertyGraph {
    path_graph(
        n,
        |i| {
            let mut labels = Vec::new();
            if i == 0 {
                labels.push(MIN_ELT.to_string());
            }
            if i == n {
                labels.push(MAX_ELT.to_string());
            }
            labels
        },
        |_| Vec::new(),
        |_| Vec::new(),
    )
}

/// Path `v0 → … → vn` where edge `ei` (from `vi` to `vi+1`) has `key = values[i]`.
pub fn annotated_path(key: &str, values: &[i64]) -> PropertyGraph {
    path_graph(
        values.len(),
        |_| Vec::new(),
        |_| Vec::new(),
        |i| vec![(key.to_string(), Const::Int(values[i]))],
    )
}

/// Path `v0 → … → vn` where node `vi` has `key = values[i]`; `n = values.len() - 1`.
pub fn node_annotated_path(key: &str, values: &[i64]) -> PropertyGraph {
    assert!(!values.is_empty(), "a path has at least one node");
    path_graph(
        values.len() - 1,
        |_| Vec::new(),
        |i| vec![(key.to_string(), Const::Int(values[i]))],
        |_| Vec::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{save_graph, ElemId};

    #[test]
    fn gnp_extremes() {
        let g = generate(&GraphFamilySpec::gnp(3, 0.0, 1)).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 0));
        let g = generate(&GraphFamilySpec::gnp(4, 1.0, 1)).unwrap();
        assert_eq!(g.edge_count(), 12);
        assert!(g.edges().all(|e| g.src(e) != g.tgt(e)));
        assert!(g
            .edges()
            .all(|e| matches!(g.prop(ElemId::Edge(e), "val"), Some(Const::Int(0..=100)))));
    }

    #[test]
    fn dataless_path_labels() {
        let g = generate(&GraphFamilySpec::new(GraphFamily::DatalessPath, 2)).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        let v0 = ElemId::Node(g.node("v0").unwrap());
        let v1 = ElemId::Node(g.node("v1").unwrap());
        let v2 = ElemId::Node(g.node("v2").unwrap());
        assert!(g.has_label(v0, MIN_ELT) && g.labels(v0).len() == 1);
        assert!(g.labels(v1).is_empty());
        assert!(g.has_label(v2, MAX_ELT) && g.labels(v2).len() == 1);
        assert!(g.edges().all(|e| g.props(ElemId::Edge(e)).is_empty()));
    }

    #[test]
    fn annotated_paths_carry_values() {
        let spec = GraphFamilySpec::new(GraphFamily::AnnotatedPath, 5).with_values("k", 0, 3);
        let g = generate(&spec).unwrap();
        assert_eq!(g.edge_count(), 5);
        assert!(g.edges().all(|e| g.prop(ElemId::Edge(e), "k").is_some()));
        let spec = GraphFamilySpec::new(GraphFamily::NodeAnnotatedPath, 5);
        let g = generate(&spec).unwrap();
        assert_eq!(g.node_count(), 6);
        assert!(g.nodes().all(|n| g.prop(ElemId::Node(n), "val").is_some()));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GraphFamilySpec::gnp(12, 0.3, 42);
        assert_eq!(
            save_graph(&generate(&spec).unwrap()),
            save_graph(&generate(&spec).unwrap())
        );
        let other = GraphFamilySpec::gnp(12, 0.3, 43);
        assert_ne!(
            save_graph(&generate(&spec).unwrap()),
            save_graph(&generate(&other).unwrap())
        );
    }

    #[test]
    fn invalid_specs() {
        assert!(generate(&GraphFamilySpec::gnp(3, 1.5, 0)).is_err());
        let spec = GraphFamilySpec::new(GraphFamily::AnnotatedPath, 3).with_values("k", 5, 1);
        assert!(generate(&spec).is_err());
    }
}
