//! Literal path semantics by exhaustive enumeration, for testing.

use std::collections::{BTreeSet, HashMap};

use crate::graph::{Direction, Path, PropertyGraph, Value};
use crate::pattern::Pattern;

use super::{eval_condition, Binding, MatchRel};

fn compatible(a: &Binding, b: &Binding) -> bool {
    a.iter().all(|(k, v)| b.get(k).map_or(true, |w| w == v))
}

/// All `(p, μ) ∈ ⟦ψ⟧_G` with `|p| ≤ max_len`, by enumerating paths.
///
/// Paths may repeat nodes and edges and traverse edges in either
/// direction. Cost is exponential in `max_len`.
pub fn enumerate_matches_oracle(
    g: &PropertyGraph,
    psi: &Pattern,
    max_len: usize,
) -> BTreeSet<(Path, Binding)> {
    match psi {
        Pattern::Node(x) => g
            .nodes()
            .map(|n| {
                let mu = x.iter().map(|x| (x.clone(), Value::Node(n))).collect();
                (Path::single(n), mu)
            })
            .collect(),
        Pattern::Fwd(x) | Pattern::Bwd(x) => {
            if max_len == 0 {
                return BTreeSet::new();
            }
            let dir = if matches!(psi, Pattern::Fwd(_)) {
                Direction::Forward
            } else {
                Direction::Backward
            };
            g.edges()
                .map(|e| {
                    let mu = x.iter().map(|x| (x.clone(), Value::Edge(e))).collect();
                    (Path::edge(g, e, dir), mu)
                })
                .collect()
        }
        Pattern::Concat(a, b) => {
            let left = enumerate_matches_oracle(g, a, max_len);
            let right = enumerate_matches_oracle(g, b, max_len);
            let mut by_first: HashMap<_, Vec<&(Path, Binding)>> = HashMap::new();
            for m in &right {
                by_first.entry(m.0.first()).or_default().push(m);
            }
            let mut out = BTreeSet::new();
            for (p1, mu1) in &left {
                for (p2, mu2) in by_first.get(&p1.last()).into_iter().flatten() {
                    if p1.len() + p2.len() <= max_len && compatible(mu1, mu2) {
                        let mut mu = mu1.clone();
                        mu.extend(mu2.iter().map(|(k, v)| (k.clone(), v.clone())));
                        out.insert((p1.concat(p2).expect("endpoints agree"), mu));
                    }
                }
            }
            out
        }
        Pattern::Union(a, b) => {
            let mut out = enumerate_matches_oracle(g, a, max_len);
            out.extend(enumerate_matches_oracle(g, b, max_len));
            out
        }
        Pattern::Cond(q, theta) => enumerate_matches_oracle(g, q, max_len)
            .into_iter()
            .filter(|(_, mu)| eval_condition(mu, g, theta))
            .collect(),
        Pattern::Repeat(q, lo, hi) => {
            let pieces: BTreeSet<Path> = enumerate_matches_oracle(g, q, max_len)
                .into_iter()
                .map(|(p, _)| p)
                .collect();
            let mut by_first: HashMap<_, Vec<&Path>> = HashMap::new();
            for p in &pieces {
                by_first.entry(p.first()).or_default().push(p);
            }
            // layer i = concatenations of exactly i pieces.
            let mut layer: BTreeSet<Path> = g.nodes().map(Path::single).collect();
            let mut layers: Vec<BTreeSet<Path>> = Vec::new();
            let mut out = BTreeSet::new();
            let mut i: u32 = 0;
            loop {
                if i >= *lo {
                    if layers[(*lo as usize).min(layers.len())..].contains(&layer) {
                        break;
                    }
                    out.extend(layer.iter().cloned());
                }
                if hi.is_some_and(|h| i >= h) {
                    break;
                }
                let next: BTreeSet<Path> = layer
                    .iter()
                    .flat_map(|p| {
                        by_first
                            .get(&p.last())
                            .into_iter()
                            .flatten()
                            .filter(move |q| p.len() + q.len() <= max_len)
                            .map(move |q| p.concat(q).expect("endpoints agree"))
                    })
                    .collect();
                layers.push(std::mem::replace(&mut layer, next));
                i += 1;
            }
            out.into_iter().map(|p| (p, Binding::new())).collect()
        }
    }
}

/// Path length that suffices to witness every endpoint triple of `ψ` on a
/// graph with `node_count` nodes.
///
/// Walks through a repetition can be shortened to at most
/// `lo + node_count - 1` iterations without leaving the admissible range,
/// and each iteration needs at most the bound of the body.
pub fn saturation_bound(psi: &Pattern, node_count: usize) -> usize {
    let n = node_count.max(1);
    match psi {
        Pattern::Node(_) => 0,
        Pattern::Fwd(_) | Pattern::Bwd(_) => 1,
        Pattern::Concat(a, b) => saturation_bound(a, n) + saturation_bound(b, n),
        Pattern::Union(a, b) => saturation_bound(a, n).max(saturation_bound(b, n)),
        Pattern::Cond(q, _) => saturation_bound(q, n),
        Pattern::Repeat(q, lo, hi) => {
            let reps = *lo as usize + n - 1;
            let reps = hi.map_or(reps, |h| reps.min(h as usize));
            reps * saturation_bound(q, n)
        }
    }
}

/// Endpoint projection of the oracle's matches.
pub fn oracle_match_rel(g: &PropertyGraph, psi: &Pattern, max_len: usize) -> MatchRel {
    let mut r = MatchRel::new(psi.free_vars());
    for (p, mu) in enumerate_matches_oracle(g, psi, max_len) {
        r.insert(p.first(), p.last(), &mu);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::parse_pattern;

    fn two_cycle() -> PropertyGraph {
        let mut b = PropertyGraph::builder();
        b.add_node("a", Vec::<String>::new(), []).unwrap();
        b.add_node("b", Vec::<String>::new(), []).unwrap();
        b.add_edge("ab", "a", "b", Vec::<String>::new(), []).unwrap();
        b.add_edge("ba", "b", "a", Vec::<String>::new(), []).unwrap();
        b.build()
    }

    #[test]
    fn single_nodes() {
        let g = two_cycle();
        let m = enumerate_matches_oracle(&g, &parse_pattern("(x)").unwrap(), 3);
        assert_eq!(m.len(), 2);
        assert!(m.iter().all(|(p, mu)| p.is_empty() && mu.len() == 1));
    }

    #[test]
    fn two_cycle_closure() {
        // From each start node there is exactly one forward walk of each
        // length, so lengths 0..=4 give 2 * 5 paths.
        let g = two_cycle();
        let m = enumerate_matches_oracle(&g, &parse_pattern("[-->]{0..*}").unwrap(), 4);
        assert_eq!(m.len(), 10);
        for len in 0..=4 {
            assert_eq!(m.iter().filter(|(p, _)| p.len() == len).count(), 2);
        }
        let alternate = m.iter().all(|(p, mu)| {
            mu.is_empty() && p.nodes().windows(2).all(|w| w[0] != w[1])
        });
        assert!(alternate);
    }

    #[test]
    fn agrees_with_evaluator_on_small_case() {
        let g = two_cycle();
        let psi = parse_pattern("(x) [-[e]-> | :T(e)]{0..1} [--> <--]{1..*} (y)").unwrap();
        let bound = saturation_bound(&psi, g.node_count());
        assert_eq!(oracle_match_rel(&g, &psi, bound), super::super::eval_pattern(&g, &psi));
    }

    #[test]
    fn bounds() {
        let p = parse_pattern("(x) [-->]{0..*} [--> -->]{1..2}").unwrap();
        assert_eq!(saturation_bound(&p, 4), 3 + 4);
    }
}
