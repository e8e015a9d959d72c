use std::collections::HashSet;

use super::{Graph, NodeKind};
use crate::error::{Error, Result};

/// Keeps, for every user node, the `k` user neighbors closest in age.
///
/// Each user nominates `min(k, user-degree)` neighbors ranked by absolute
/// age difference; neighbors without an age rank after all aged ones, and
/// ties go to the smaller external id. An edge survives if either endpoint
/// nominated it. Group–member edges are always kept.
pub fn sparsify_by_age(graph: &Graph, k: usize) -> Result<Graph> {
    if k == 0 {
        return Err(Error::InvalidParam("sparsification K must be positive".into()));
    }
    let mut nominated: HashSet<(u32, u32)> = HashSet::new();
    for u in 0..graph.num_nodes() {
        if graph.kind(u) != NodeKind::User {
            continue;
        }
        let mut cands: Vec<usize> = graph
            .neighbors(u)
            .iter()
            .map(|&v| v as usize)
            .filter(|&v| graph.kind(v) == NodeKind::User)
            .collect();
        if cands.len() > k {
            let age_u = graph.age(u);
            let rank = |v: usize| match (age_u, graph.age(v)) {
                (Some(a), Some(b)) => (false, a.abs_diff(b)),
                (None, Some(_)) => (false, 0),
                (_, None) => (true, 0),
            };
            cands.sort_by(|&a, &b| rank(a).cmp(&rank(b)).then_with(|| graph.id(a).cmp(graph.id(b))));
            cands.truncate(k);
        }
        for v in cands {
            nominated.insert((u.min(v) as u32, u.max(v) as u32));
        }
    }
    let builder = graph.to_builder_filtered(|u, v, _| {
        graph.kind(u) == NodeKind::Group
            || graph.kind(v) == NodeKind::Group
            || nominated.contains(&(u as u32, v as u32))
    });
    Ok(builder.build(graph.num_types()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn aged(nodes: &[(&str, Option<u32>)], edges: &[(&str, &str)]) -> Graph {
        let mut b = GraphBuilder::new();
        for (id, age) in nodes {
            let u = b.node(id);
            if let Some(a) = age {
                b.set_age(u, *a);
            }
        }
        for (x, y) in edges {
            let (u, v) = (b.index_of(x).unwrap(), b.index_of(y).unwrap());
            b.add_edge(u, v, 1.0).unwrap();
        }
        b.build(0)
    }

    fn edge_ids(g: &Graph) -> Vec<(String, String)> {
        g.edges().map(|(u, v, _)| (g.id(u).to_string(), g.id(v).to_string())).collect()
    }

    #[test]
    fn zero_k_is_rejected() {
        let g = aged(&[("a", Some(1))], &[]);
        assert!(sparsify_by_age(&g, 0).is_err());
    }

    #[test]
    fn large_k_leaves_graph_unchanged() {
        let g = aged(
            &[("a", Some(20)), ("b", Some(30)), ("c", Some(40)), ("d", None)],
            &[("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")],
        );
        assert_eq!(sparsify_by_age(&g, 3).unwrap(), g);
    }

    #[test]
    fn star_keeps_all_edges_through_leaf_nominations() {
        let g = aged(
            &[
                ("center", Some(21)),
                ("l1", Some(20)),
                ("l2", Some(21)),
                ("l3", Some(22)),
                ("l4", Some(30)),
                ("l5", Some(40)),
            ],
            &[("center", "l1"), ("center", "l2"), ("center", "l3"), ("center", "l4"), ("center", "l5")],
        );
        let s = sparsify_by_age(&g, 2).unwrap();
        assert_eq!(s.num_edges(), 5);
    }

    #[test]
    fn path_keeps_both_edges() {
        let g = aged(&[("a", Some(20)), ("b", Some(21)), ("c", Some(40))], &[("a", "b"), ("b", "c")]);
        let s = sparsify_by_age(&g, 1).unwrap();
        assert_eq!(edge_ids(&s), edge_ids(&g));
    }

    #[test]
    fn drops_edges_nobody_nominates() {
        // triangle plus a far-aged pair: with K=1 a-b are mutual picks,
        // c picks b, d picks c; a-c is nominated by neither.
        let g = aged(
            &[("a", Some(20)), ("b", Some(21)), ("c", Some(23)), ("d", Some(60))],
            &[("a", "b"), ("a", "c"), ("b", "c"), ("c", "d")],
        );
        let s = sparsify_by_age(&g, 1).unwrap();
        let kept = edge_ids(&s);
        assert!(!kept.contains(&("a".into(), "c".into())));
        assert_eq!(kept.len(), 3);
    }

    #[test]
    fn missing_ages_rank_last_then_by_id() {
        let g = aged(
            &[("u", Some(30)), ("z", None), ("y", Some(80)), ("x", None)],
            &[("u", "z"), ("u", "y"), ("u", "x")],
        );
        // u nominates y (aged) first; x and z only nominate u themselves.
        let s = sparsify_by_age(&g, 1).unwrap();
        assert_eq!(s.num_edges(), 3);
        let g2 = aged(&[("u", Some(30)), ("z", None), ("x", None), ("hub", Some(1))], &[("u", "z"), ("u", "x"), ("z", "hub"), ("x", "hub")]);
        // u picks x over z by id; unaged x and z both pick "hub" < "u";
        // hub sees two unaged neighbors and picks x by id.
        let s2 = sparsify_by_age(&g2, 1).unwrap();
        let kept = edge_ids(&s2);
        assert!(kept.contains(&("u".into(), "x".into())));
        assert!(!kept.contains(&("u".into(), "z".into())));
    }

    #[test]
    fn group_edges_survive() {
        let mut b = GraphBuilder::new();
        let a = b.node("a");
        let c = b.node("c");
        let d = b.node("d");
        b.set_age(a, 20);
        b.set_age(c, 21);
        b.set_age(d, 50);
        let g = b.node_of_kind("g", NodeKind::Group);
        b.add_edge(a, c, 1.0).unwrap();
        b.add_edge(a, d, 1.0).unwrap();
        b.add_edge(g, a, 1.0).unwrap();
        b.add_edge(g, c, 1.0).unwrap();
        b.add_edge(g, d, 1.0).unwrap();
        let graph = b.build(0);
        let s = sparsify_by_age(&graph, 1).unwrap();
        assert_eq!(s.degree(g), 3);
    }
}
