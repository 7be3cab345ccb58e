//! Increasing values along paths: oracles and the enumeration benchmark.
//!
//! The benchmark mimics an engine that can only check "values increase"
//! after materializing each path: it enumerates every trail of length at
//! least 2 and folds over the edge values of each one.

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use crate::graph::{generate, EdgeId, ElemId, GraphError, GraphFamilySpec, NodeId, PropertyGraph};
use crate::patmatch::eval_pattern;
use crate::pattern::{Condition, Pattern};

pub type NodePairs = BTreeSet<(NodeId, NodeId)>;

fn edge_value(g: &PropertyGraph, e: EdgeId, key: &str) -> Option<i64> {
    g.prop(ElemId::Edge(e), key).and_then(|c| c.as_int())
}

fn node_value(g: &PropertyGraph, n: NodeId, key: &str) -> Option<i64> {
    g.prop(ElemId::Node(n), key).and_then(|c| c.as_int())
}

fn diagonal(g: &PropertyGraph) -> NodePairs {
    g.nodes().map(|n| (n, n)).collect()
}

/// Pairs joined by a directed path whose edge values strictly increase,
/// including every `(u, u)`.
///
/// Edges are processed in ascending value order. `reach[v]` holds the
/// sources of increasing paths ending at `v`; edges of equal value are
/// applied together, reading the sets as they were before the batch.
pub fn q_edge_increasing_oracle(g: &PropertyGraph, key: &str) -> NodePairs {
    let n = g.node_count();
    let mut edges: Vec<(i64, EdgeId)> = g
        .edges()
        .filter_map(|e| edge_value(g, e, key).map(|v| (v, e)))
        .collect();
    edges.sort();
    let mut reach = vec![vec![false; n]; n];
    let mut i = 0;
    while i < edges.len() {
        let j = i + edges[i..].iter().take_while(|(v, _)| *v == edges[i].0).count();
        let updates: Vec<(usize, Vec<bool>)> = edges[i..j]
            .iter()
            .map(|&(_, e)| {
                let (s, t) = (g.src(e).index(), g.tgt(e).index());
                let mut from = reach[s].clone();
                from[s] = true;
                (t, from)
            })
            .collect();
        for (t, from) in updates {
            for (slot, f) in reach[t].iter_mut().zip(from) {
                *slot |= f;
            }
        }
        i = j;
    }
    let mut out = diagonal(g);
    for (v, row) in reach.iter().enumerate() {
        for (u, &r) in row.iter().enumerate() {
            if r {
                out.insert((NodeId(u as u32), NodeId(v as u32)));
            }
        }
    }
    out
}

/// Pairs joined by a strictly increasing directed path of at least
/// `min_len` edges, by depth-first search. Strictness bounds the depth.
pub fn q_edge_increasing_dfs(g: &PropertyGraph, key: &str, min_len: usize) -> NodePairs {
    fn go(g: &PropertyGraph, key: &str, min_len: usize, start: NodeId, at: NodeId, len: usize, last: Option<i64>, out: &mut NodePairs) {
        if len >= min_len {
            out.insert((start, at));
        }
        for &e in g.out_edges(at) {
            if let Some(v) = edge_value(g, e, key) {
                if last.map_or(true, |l| v > l) {
                    go(g, key, min_len, start, g.tgt(e), len + 1, Some(v), out);
                }
            }
        }
    }
    let mut out = NodePairs::new();
    for s in g.nodes() {
        go(g, key, min_len, s, s, 0, None, &mut out);
    }
    out
}

/// Outcome of the enumeration workaround.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Enumeration {
    Completed {
        /// Trails of admissible length that were enumerated.
        trails: u64,
        /// Trails whose fold did not fail.
        survivors: u64,
        endpoints: NodePairs,
    },
    TimedOut {
        trails: u64,
    },
}

impl Enumeration {
    pub fn timed_out(&self) -> bool {
        matches!(self, Enumeration::TimedOut { .. })
    }

    pub fn trails(&self) -> u64 {
        match self {
            Enumeration::Completed { trails, .. } | Enumeration::TimedOut { trails } => *trails,
        }
    }
}

const POLL_EVERY: u64 = 1024;

struct TrailSearch<'g> {
    g: &'g PropertyGraph,
    values: Vec<Option<i64>>,
    used: Vec<bool>,
    min_len: usize,
    deadline: Option<Instant>,
    steps: u64,
    timed_out: bool,
    trails: u64,
    survivors: u64,
    endpoints: NodePairs,
}

impl TrailSearch<'_> {
    /// `acc` is the running fold: the last value if the values so far
    /// increase, `None` once they have not.
    fn extend(&mut self, start: NodeId, at: NodeId, len: usize, acc: Option<i64>) {
        let g = self.g;
        for &e in g.out_edges(at) {
            if self.used[e.index()] {
                continue;
            }
            self.steps += 1;
            if self.steps % POLL_EVERY == 0 && self.deadline.is_some_and(|d| Instant::now() >= d) {
                self.timed_out = true;
                return;
            }
            let v = self.values[e.index()];
            let next = if len == 0 {
                v
            } else {
                acc.and_then(|a| v.filter(|&v| v > a))
            };
            let t = g.tgt(e);
            if len + 1 >= self.min_len {
                self.trails += 1;
                if next.is_some() {
                    self.survivors += 1;
                    self.endpoints.insert((start, t));
                }
            }
            self.used[e.index()] = true;
            self.extend(start, t, len + 1, next);
            self.used[e.index()] = false;
            if self.timed_out {
                return;
            }
        }
    }
}

/// Enumerates every directed trail with at least `min_len` edges and keeps
/// those whose values strictly increase, or gives up at `timeout`.
pub fn q_edge_increasing_enumeration(
    g: &PropertyGraph,
    key: &str,
    min_len: usize,
    timeout: Option<Duration>,
) -> Enumeration {
    let mut s = TrailSearch {
        g,
        values: g.edges().map(|e| edge_value(g, e, key)).collect(),
        used: vec![false; g.edge_count()],
        min_len,
        deadline: timeout.map(|t| Instant::now() + t),
        steps: 0,
        timed_out: false,
        trails: 0,
        survivors: 0,
        endpoints: NodePairs::new(),
    };
    for n in g.nodes() {
        s.extend(n, n, 0, None);
        if s.timed_out {
            return Enumeration::TimedOut { trails: s.trails };
        }
    }
    Enumeration::Completed {
        trails: s.trails,
        survivors: s.survivors,
        endpoints: s.endpoints,
    }
}

/// `(xs) [(x) --> (y) | x.key < y.key]{0..*} (xt)`.
pub fn node_increasing_pattern(key: &str) -> Pattern {
    let step = Pattern::node("x")
        .concat(Pattern::fwd(""))
        .concat(Pattern::node("y"))
        .with_cond(Condition::lt("x", key, "y", key))
        .and_then(|p| p.repeat(0, None))
        .expect("well-formed pattern");
    Pattern::node("xs").concat(step).concat(Pattern::node("xt"))
}

/// Pairs joined by a path with strictly increasing node values, evaluated
/// through the pattern.
pub fn q_node_increasing(g: &PropertyGraph, key: &str) -> NodePairs {
    eval_pattern(g, &node_increasing_pattern(key)).endpoints()
}

/// The same pairs by depth-first search.
pub fn q_node_increasing_dfs(g: &PropertyGraph, key: &str) -> NodePairs {
    fn go(g: &PropertyGraph, key: &str, start: NodeId, at: NodeId, out: &mut NodePairs) {
        out.insert((start, at));
        let Some(v) = node_value(g, at, key) else {
            return;
        };
        for &e in g.out_edges(at) {
            let t = g.tgt(e);
            if node_value(g, t, key).is_some_and(|w| v < w) {
                go(g, key, start, t, out);
            }
        }
    }
    let mut out = NodePairs::new();
    for s in g.nodes() {
        go(g, key, s, s, &mut out);
    }
    out
}

/// Pairs joined by a directed path whose node values are pairwise
/// distinct. Exponential; meant for small graphs.
pub fn q_node_distinct_oracle(g: &PropertyGraph, key: &str) -> NodePairs {
    let mut out = diagonal(g);
    let mut seen: HashSet<(NodeId, NodeId, Vec<i64>)> = HashSet::new();
    for s in g.nodes() {
        let Some(v) = node_value(g, s, key) else {
            continue;
        };
        let mut stack = vec![(s, vec![v])];
        while let Some((at, values)) = stack.pop() {
            for &e in g.out_edges(at) {
                let t = g.tgt(e);
                let Some(w) = node_value(g, t, key) else {
                    continue;
                };
                if values.contains(&w) {
                    continue;
                }
                let mut next = values.clone();
                next.push(w);
                next.sort_unstable();
                if seen.insert((s, t, next.clone())) {
                    out.insert((s, t));
                    stack.push((t, next));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Benchmark grid

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub ns: Vec<usize>,
    pub ps: Vec<f64>,
    pub graphs_per_point: usize,
    pub timeout: Duration,
    pub min_path_len: usize,
    pub value_key: String,
    pub value_range: (i64, i64),
    pub seed: u64,
    /// Keep going in `n` for a given `p` after a point whose median is ∞.
    pub full_grid: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ns: (4..=30).collect(),
            ps: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            graphs_per_point: 10,
            timeout: Duration::from_secs(10),
            min_path_len: 2,
            value_key: "val".to_string(),
            value_range: (0, 100),
            seed: 0,
            full_grid: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphRun {
    pub n: usize,
    pub p: f64,
    pub graph_seed: u64,
    pub edges: usize,
    pub runtime: Duration,
    pub timed_out: bool,
    pub trails: u64,
    pub oracle_runtime: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub n: usize,
    pub p: f64,
    pub timeout_fraction: f64,
    /// `None` stands for ∞.
    pub median: Option<Duration>,
    pub oracle_max: Duration,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub runs: Vec<GraphRun>,
    pub points: Vec<PointSummary>,
}

/// Lower median with timeouts counted as +∞: finite exactly when at most
/// half of the runs timed out.
pub fn median_with_timeouts(runs: &[(Duration, bool)]) -> Option<Duration> {
    if runs.is_empty() {
        return None;
    }
    let mut v: Vec<Option<Duration>> = runs
        .iter()
        .map(|&(d, timed_out)| (!timed_out).then_some(d))
        .collect();
    v.sort_by(|a, b| match (a, b) {
        (Some(x), Some(y)) => x.cmp(y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let timeouts = runs.iter().filter(|r| r.1).count();
    if timeouts * 2 > runs.len() {
        return None;
    }
    v[(v.len() - 1) / 2]
}

/// Seed of graph `i` at grid point `(n, p_index)`.
pub fn graph_seed(seed: u64, n: usize, p_index: usize, i: usize) -> u64 {
    let mut z = seed ^ ((n as u64) << 32) ^ ((p_index as u64) << 16) ^ i as u64;
    // splitmix64 finalizer
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn point_graph(cfg: &ExperimentConfig, n: usize, p: f64, seed: u64) -> Result<PropertyGraph, GraphError> {
    let (lo, hi) = cfg.value_range;
    generate(&GraphFamilySpec::gnp(n, p, seed).with_values(&cfg.value_key, lo, hi))
}

/// Runs the grid point by point. Unless `full_grid` is set, larger `n` are
/// skipped for a `p` once a point's median is ∞. `progress` sees every
/// finished point.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    mut progress: impl FnMut(&PointSummary),
) -> Result<ExperimentResult, GraphError> {
    let mut result = ExperimentResult::default();
    if let (Some(&n), Some(&p)) = (cfg.ns.first(), cfg.ps.first()) {
        // warm-up, discarded
        let g = point_graph(cfg, n, p, graph_seed(cfg.seed, n, 0, usize::MAX))?;
        q_edge_increasing_enumeration(&g, &cfg.value_key, cfg.min_path_len, Some(cfg.timeout));
        q_edge_increasing_oracle(&g, &cfg.value_key);
    }
    for (pi, &p) in cfg.ps.iter().enumerate() {
        for &n in &cfg.ns {
            let mut runs = Vec::new();
            for i in 0..cfg.graphs_per_point {
                let seed = graph_seed(cfg.seed, n, pi, i);
                let g = point_graph(cfg, n, p, seed)?;
                let t0 = Instant::now();
                let outcome = q_edge_increasing_enumeration(&g, &cfg.value_key, cfg.min_path_len, Some(cfg.timeout));
                let runtime = t0.elapsed();
                let t1 = Instant::now();
                q_edge_increasing_oracle(&g, &cfg.value_key);
                let oracle_runtime = t1.elapsed();
                runs.push(GraphRun {
                    n,
                    p,
                    graph_seed: seed,
                    edges: g.edge_count(),
                    runtime,
                    timed_out: outcome.timed_out(),
                    trails: outcome.trails(),
                    oracle_runtime,
                });
            }
            let timings: Vec<(Duration, bool)> = runs.iter().map(|r| (r.runtime, r.timed_out)).collect();
            let timeouts = runs.iter().filter(|r| r.timed_out).count();
            let summary = PointSummary {
                n,
                p,
                timeout_fraction: if runs.is_empty() { 0.0 } else { timeouts as f64 / runs.len() as f64 },
                median: median_with_timeouts(&timings),
                oracle_max: runs.iter().map(|r| r.oracle_runtime).max().unwrap_or_default(),
            };
            progress(&summary);
            let infinite = summary.median.is_none();
            result.runs.extend(runs);
            result.points.push(summary);
            if infinite && !cfg.full_grid {
                break;
            }
        }
    }
    Ok(result)
}

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1000.0)
}

impl ExperimentResult {
    /// Smallest `n` whose median is ∞ at this `p`.
    pub fn threshold(&self, p: f64) -> Option<usize> {
        self.points
            .iter()
            .filter(|s| s.p == p && s.median.is_none())
            .map(|s| s.n)
            .min()
    }

    /// One `run` row per graph and one `summary` row per grid point.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "kind",
            "n",
            "p",
            "graph_seed",
            "edges",
            "runtime_ms",
            "timed_out",
            "trails",
            "oracle_ms",
            "timeout_fraction",
            "median_ms",
        ])
        .expect("in-memory write");
        for r in &self.runs {
            w.write_record([
                "run".to_string(),
                r.n.to_string(),
                r.p.to_string(),
                r.graph_seed.to_string(),
                r.edges.to_string(),
                ms(r.runtime),
                r.timed_out.to_string(),
                r.trails.to_string(),
                ms(r.oracle_runtime),
                String::new(),
                String::new(),
            ])
            .expect("in-memory write");
        }
        for s in &self.points {
            w.write_record([
                "summary".to_string(),
                s.n.to_string(),
                s.p.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                ms(s.oracle_max),
                format!("{:.2}", s.timeout_fraction),
                s.median.map_or_else(|| "inf".to_string(), ms),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{annotated_path, node_annotated_path};

    fn n(i: u32) -> NodeId {
        NodeId(i)
    }

    fn upper_triangle(k: u32) -> NodePairs {
        (0..=k).flat_map(|i| (i..=k).map(move |j| (n(i), n(j)))).collect()
    }

    #[test]
    fn edge_oracle_on_paths() {
        let g = annotated_path("k", &[3, 4, 1, 2]);
        let r = q_edge_increasing_oracle(&g, "k");
        assert!(r.contains(&(n(0), n(2))));
        assert!(!r.contains(&(n(0), n(4))));
        assert!(!r.contains(&(n(1), n(3))));
        assert_eq!(r, q_edge_increasing_dfs(&g, "k", 0));
        let g = annotated_path("k", &[1, 2, 3]);
        assert_eq!(q_edge_increasing_oracle(&g, "k"), upper_triangle(3));
        // equal values do not chain
        let g = annotated_path("k", &[5, 5]);
        assert!(!q_edge_increasing_oracle(&g, "k").contains(&(n(0), n(2))));
    }

    #[test]
    fn enumeration_fold() {
        let g = annotated_path("k", &[1, 2, 3]);
        match q_edge_increasing_enumeration(&g, "k", 2, None) {
            Enumeration::Completed { trails, survivors, endpoints } => {
                assert_eq!((trails, survivors), (3, 3));
                assert_eq!(endpoints, [(n(0), n(2)), (n(1), n(3)), (n(0), n(3))].into());
            }
            other => panic!("{other:?}"),
        }
        let g = annotated_path("k", &[3, 4, 1, 2]);
        match q_edge_increasing_enumeration(&g, "k", 2, None) {
            Enumeration::Completed { trails, endpoints, .. } => {
                assert_eq!(trails, 6);
                assert_eq!(endpoints, [(n(0), n(2)), (n(2), n(4))].into());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn enumeration_times_out() {
        let g = point_graph(&ExperimentConfig::default(), 24, 0.3, 7).unwrap();
        let r = q_edge_increasing_enumeration(&g, "val", 2, Some(Duration::from_millis(50)));
        assert!(r.timed_out());
    }

    #[test]
    fn node_queries() {
        let g = node_annotated_path("k", &[1, 2, 3]);
        assert_eq!(q_node_increasing(&g, "k"), upper_triangle(2));
        let g = node_annotated_path("k", &[2, 1]);
        assert_eq!(q_node_increasing(&g, "k"), [(n(0), n(0)), (n(1), n(1))].into());
        let g = node_annotated_path("k", &[1, 2, 1]);
        let d = q_node_distinct_oracle(&g, "k");
        assert!(d.contains(&(n(0), n(1))) && d.contains(&(n(1), n(2))));
        assert!(!d.contains(&(n(0), n(2))));
        let g = node_annotated_path("k", &[4, 7, 1, 9]);
        assert_eq!(q_node_distinct_oracle(&g, "k"), upper_triangle(3));
    }

    #[test]
    fn medians() {
        let ms = Duration::from_millis;
        let runs = [(ms(5), false), (ms(1), false), (ms(9), true), (ms(3), false), (ms(9), true)];
        assert_eq!(median_with_timeouts(&runs), Some(ms(5)));
        let runs = [(ms(5), true), (ms(1), false), (ms(9), true), (ms(3), false), (ms(9), true)];
        assert_eq!(median_with_timeouts(&runs), None);
        let runs = [(ms(5), true), (ms(1), false)];
        assert_eq!(median_with_timeouts(&runs), Some(ms(1)));
    }

    #[test]
    fn tiny_grid() {
        let cfg = ExperimentConfig {
            ns: vec![4],
            ps: vec![0.1],
            graphs_per_point: 3,
            ..ExperimentConfig::default()
        };
        let r = run_experiment(&cfg, |_| {}).unwrap();
        assert_eq!(r.runs.len(), 3);
        assert_eq!(r.points[0].timeout_fraction, 0.0);
        assert!(r.points[0].median.unwrap() < Duration::from_millis(100));
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 1 + 3 + 1);
        assert!(csv.starts_with("kind,n,p,graph_seed"));
    }
}
