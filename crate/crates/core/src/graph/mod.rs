//! Graph storage, label vocabulary, observed labels and file ingestion.
//!
//! The graph is undirected and stored as a compressed neighbor structure:
//! node `u`'s neighbors live in `neighbors[offsets[u]..offsets[u + 1]]`,
//! sorted by index, with a parallel `weights` array. Every edge appears in
//! both endpoints' lists with the same weight.

mod io;
mod labels;
mod sparsify;

use std::collections::BTreeMap;

use indexmap::IndexSet;

pub use io::{expand_groups, ingest, read_groups, write_dataset, Dataset, InputFiles};
pub use labels::{LabelSchema, ObservedLabels};
pub use sparsify::sparsify_by_age;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    User,
    Group,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    ids: IndexSet<String>,
    kinds: Vec<NodeKind>,
    ages: Vec<Option<u32>>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
    /// Per-slot, per-type multipliers, `num_types` entries per slot.
    /// `None` means every multiplier is 1.
    type_multipliers: Option<Vec<f64>>,
    num_types: usize,
}

impl Graph {
    pub fn num_nodes(&self) -> usize {
        self.kinds.len()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn neighbor_weights(&self, u: usize) -> &[f64] {
        &self.weights[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Slot range of `u` into the adjacency arrays.
    pub fn slots(&self, u: usize) -> std::ops::Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    pub fn slot_neighbor(&self, slot: usize) -> usize {
        self.neighbors[slot] as usize
    }

    pub fn slot_weight(&self, slot: usize) -> f64 {
        self.weights[slot]
    }

    /// Effective weight of the edge at `slot` for `label_type`: the scalar
    /// edge weight times the per-type multiplier.
    pub fn slot_type_weight(&self, slot: usize, label_type: usize) -> f64 {
        match &self.type_multipliers {
            Some(m) => self.weights[slot] * m[slot * self.num_types + label_type],
            None => self.weights[slot],
        }
    }

    pub fn has_type_weights(&self) -> bool {
        self.type_multipliers.is_some()
    }

    pub fn type_multiplier(&self, slot: usize, label_type: usize) -> f64 {
        self.type_multipliers
            .as_ref()
            .map_or(1.0, |m| m[slot * self.num_types + label_type])
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn weighted_degree(&self, u: usize) -> f64 {
        self.neighbor_weights(u).iter().sum()
    }

    /// Number of label types the per-type multipliers were built for.
    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn id(&self, u: usize) -> &str {
        &self.ids[u]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.get_index_of(id)
    }

    pub fn kind(&self, u: usize) -> NodeKind {
        self.kinds[u]
    }

    pub fn age(&self, u: usize) -> Option<u32> {
        self.ages[u]
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        let nbrs = self.neighbors(u);
        nbrs.binary_search(&(v as u32))
            .ok()
            .map(|i| self.weights[self.offsets[u] + i])
    }

    pub fn slot_of(&self, u: usize, v: usize) -> Option<usize> {
        self.neighbors(u)
            .binary_search(&(v as u32))
            .ok()
            .map(|i| self.offsets[u] + i)
    }

    /// Undirected edges as `(u, v, weight)` with `u < v`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.slots(u).filter_map(move |s| {
                let v = self.neighbors[s] as usize;
                (u < v).then(|| (u, v, self.weights[s]))
            })
        })
    }

    /// Rebuilds a builder holding this graph's nodes and the edges `keep` accepts.
    pub(crate) fn to_builder_filtered<F>(&self, mut keep: F) -> GraphBuilder
    where
        F: FnMut(usize, usize, usize) -> bool,
    {
        let mut b = GraphBuilder {
            ids: self.ids.clone(),
            kinds: self.kinds.clone(),
            ages: self.ages.clone(),
            edges: BTreeMap::new(),
            multipliers: BTreeMap::new(),
        };
        for u in 0..self.num_nodes() {
            for s in self.slots(u) {
                let v = self.neighbors[s] as usize;
                if u < v && keep(u, v, s) {
                    b.edges.insert((u as u32, v as u32), self.weights[s]);
                    if let Some(m) = &self.type_multipliers {
                        for t in 0..self.num_types {
                            let x = m[s * self.num_types + t];
                            if x != 1.0 {
                                b.multipliers.insert((u as u32, v as u32, t), x);
                            }
                        }
                    }
                }
            }
        }
        b
    }

    pub(crate) fn to_builder(&self) -> GraphBuilder {
        self.to_builder_filtered(|_, _, _| true)
    }
}

/// Conflicts that can arise while adding edges.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeError {
    SelfLoop,
    NonPositiveWeight(f64),
    ConflictingWeight { existing: f64, new: f64 },
    MissingEdge,
}

impl std::fmt::Display for EdgeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EdgeError::SelfLoop => write!(f, "self-loop"),
            EdgeError::NonPositiveWeight(w) => write!(f, "weight must be positive and finite, got {w}"),
            EdgeError::ConflictingWeight { existing, new } => {
                write!(f, "duplicate edge with conflicting weight ({existing} vs {new})")
            }
            EdgeError::MissingEdge => write!(f, "no such edge"),
        }
    }
}

/// Accumulates nodes and undirected edges, deduplicating symmetric repeats.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    ids: IndexSet<String>,
    kinds: Vec<NodeKind>,
    ages: Vec<Option<u32>>,
    edges: BTreeMap<(u32, u32), f64>,
    multipliers: BTreeMap<(u32, u32, usize), f64>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of user node `id`, created on first sight.
    pub fn node(&mut self, id: &str) -> usize {
        self.node_of_kind(id, NodeKind::User)
    }

    pub fn node_of_kind(&mut self, id: &str, kind: NodeKind) -> usize {
        if let Some(i) = self.ids.get_index_of(id) {
            return i;
        }
        let (i, _) = self.ids.insert_full(id.to_string());
        self.kinds.push(kind);
        self.ages.push(None);
        i
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.get_index_of(id)
    }

    pub fn kind(&self, u: usize) -> NodeKind {
        self.kinds[u]
    }

    pub fn num_nodes(&self) -> usize {
        self.kinds.len()
    }

    pub fn set_age(&mut self, u: usize, age: u32) {
        self.ages[u] = Some(age);
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) -> Result<(), EdgeError> {
        if u == v {
            return Err(EdgeError::SelfLoop);
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(EdgeError::NonPositiveWeight(weight));
        }
        let key = (u.min(v) as u32, u.max(v) as u32);
        match self.edges.get(&key) {
            Some(&existing) if existing != weight => Err(EdgeError::ConflictingWeight { existing, new: weight }),
            Some(_) => Ok(()),
            None => {
                self.edges.insert(key, weight);
                Ok(())
            }
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&(u.min(v) as u32, u.max(v) as u32))
    }

    pub fn set_type_multiplier(&mut self, u: usize, v: usize, label_type: usize, m: f64) -> Result<(), EdgeError> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(EdgeError::NonPositiveWeight(m));
        }
        let (a, b) = (u.min(v) as u32, u.max(v) as u32);
        if !self.edges.contains_key(&(a, b)) {
            return Err(EdgeError::MissingEdge);
        }
        self.multipliers.insert((a, b, label_type), m);
        Ok(())
    }

    pub fn build(self, num_types: usize) -> Graph {
        let n = self.kinds.len();
        let mut degree = vec![0usize; n];
        for &(u, v) in self.edges.keys() {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let nnz = offsets[n];
        let mut neighbors = vec![0u32; nnz];
        let mut weights = vec![0.0; nnz];
        let mut cursor = offsets[..n].to_vec();
        // Keys arrive in (min, max) order, so for node `a` every smaller
        // neighbor is pushed before every larger one: each list ends up sorted.
        for (&(u, v), &w) in &self.edges {
            for (a, b) in [(u, v), (v, u)] {
                let c = &mut cursor[a as usize];
                neighbors[*c] = b;
                weights[*c] = w;
                *c += 1;
            }
        }
        debug_assert!((0..n).all(|u| neighbors[offsets[u]..offsets[u + 1]].windows(2).all(|w| w[0] < w[1])));

        let type_multipliers = if self.multipliers.is_empty() || num_types == 0 {
            None
        } else {
            let mut m = vec![1.0; nnz * num_types];
            for (&(u, v, t), &x) in &self.multipliers {
                for (a, b) in [(u, v), (v, u)] {
                    let r = offsets[a as usize]..offsets[a as usize + 1];
                    let i = neighbors[r.clone()].binary_search(&b).expect("edge present");
                    m[(r.start + i) * num_types + t] = x;
                }
            }
            Some(m)
        };

        Graph {
            ids: self.ids,
            kinds: self.kinds,
            ages: self.ages,
            offsets,
            neighbors,
            weights,
            type_multipliers,
            num_types,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        let mut b = GraphBuilder::new();
        let a = b.node("a");
        let bb = b.node("b");
        let c = b.node("c");
        b.add_edge(a, bb, 1.0).unwrap();
        b.add_edge(c, bb, 2.0).unwrap();
        b.build(1)
    }

    #[test]
    fn adjacency_is_symmetric_and_sorted() {
        let g = path3();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbor_weights(1), &[1.0, 2.0]);
        assert_eq!(g.edge_weight(2, 1), Some(2.0));
        assert_eq!(g.edge_weight(1, 2), Some(2.0));
        assert_eq!(g.edge_weight(0, 2), None);
        assert_eq!(g.weighted_degree(1), 3.0);
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1, 1.0), (1, 2, 2.0)]);
    }

    #[test]
    fn builder_rejects_bad_edges() {
        let mut b = GraphBuilder::new();
        let a = b.node("a");
        let c = b.node("c");
        assert_eq!(b.add_edge(a, a, 1.0), Err(EdgeError::SelfLoop));
        assert!(matches!(b.add_edge(a, c, 0.0), Err(EdgeError::NonPositiveWeight(_))));
        assert!(matches!(b.add_edge(a, c, -1.0), Err(EdgeError::NonPositiveWeight(_))));
        b.add_edge(a, c, 1.0).unwrap();
        b.add_edge(c, a, 1.0).unwrap();
        assert!(matches!(b.add_edge(c, a, 2.0), Err(EdgeError::ConflictingWeight { .. })));
        assert_eq!(b.build(0).num_edges(), 1);
    }

    #[test]
    fn type_weights_default_to_scalar_weight() {
        let mut b = GraphBuilder::new();
        let a = b.node("a");
        let c = b.node("c");
        let d = b.node("d");
        b.add_edge(a, c, 2.0).unwrap();
        b.add_edge(a, d, 1.0).unwrap();
        b.set_type_multiplier(c, a, 1, 0.5).unwrap();
        assert_eq!(b.set_type_multiplier(c, d, 0, 2.0), Err(EdgeError::MissingEdge));
        let g = b.build(2);
        let s = g.slot_of(a, c).unwrap();
        assert_eq!(g.slot_type_weight(s, 0), 2.0);
        assert_eq!(g.slot_type_weight(s, 1), 1.0);
        let s = g.slot_of(c, a).unwrap();
        assert_eq!(g.slot_type_weight(s, 1), 1.0);
        let s = g.slot_of(a, d).unwrap();
        assert_eq!(g.slot_type_weight(s, 1), 1.0);
    }
}
