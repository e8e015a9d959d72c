//! Sparse per-(node, type) label distributions.

use std::cmp::Ordering;

use crate::graph::ObservedLabels;

/// A sparse distribution over the labels of one type: `(label, prob)`
/// pairs sorted by label, with strictly positive probabilities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseDist {
    entries: Vec<(u32, f64)>,
}

/// Orders by probability descending, then label ascending.
pub(crate) fn by_rank(a: &(u32, f64), b: &(u32, f64)) -> Ordering {
    b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
}

impl SparseDist {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn point_mass(label: u32) -> Self {
        SparseDist {
            entries: vec![(label, 1.0)],
        }
    }

    /// Builds from arbitrary entries: drops non-positive weights and sums
    /// duplicates. No normalization is applied.
    pub fn from_entries(mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (l, p) in entries {
            match out.last_mut() {
                Some(last) if last.0 == l => last.1 += p,
                _ => out.push((l, p)),
            }
        }
        out.retain(|e| e.1 > 0.0);
        SparseDist { entries: out }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn get(&self, label: u32) -> f64 {
        self.entries
            .binary_search_by_key(&label, |e| e.0)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Sparse inner product.
    pub fn dot(&self, other: &SparseDist) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn l1_distance(&self, other: &SparseDist) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                acc += a[i].1;
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                acc += b[j].1;
                j += 1;
            } else {
                acc += (a[i].1 - b[j].1).abs();
                i += 1;
                j += 1;
            }
        }
        acc
    }

    /// Squared Euclidean distance, absent entries counted as zero.
    pub fn squared_distance(&self, other: &SparseDist) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                acc += a[i].1 * a[i].1;
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                acc += b[j].1 * b[j].1;
                j += 1;
            } else {
                let d = a[i].1 - b[j].1;
                acc += d * d;
                i += 1;
                j += 1;
            }
        }
        acc
    }

    /// Entries by probability descending, ties by smaller label.
    pub fn ranked(&self) -> Vec<(u32, f64)> {
        let mut r = self.entries.clone();
        r.sort_by(by_rank);
        r
    }

    pub fn top(&self) -> Option<u32> {
        self.entries.iter().min_by(|a, b| by_rank(a, b)).map(|e| e.0)
    }

    /// Keeps the `k` most probable entries and renormalizes to sum one.
    pub fn clip_renormalize(&self, k: usize) -> SparseDist {
        let mut kept = if self.entries.len() > k {
            let mut r = self.ranked();
            r.truncate(k);
            r.sort_by_key(|e| e.0);
            r
        } else {
            self.entries.clone()
        };
        let total: f64 = kept.iter().map(|e| e.1).sum();
        if total > 0.0 {
            for e in &mut kept {
                e.1 /= total;
            }
        }
        SparseDist { entries: kept }
    }
}

/// Per-node, per-type distributions plus the clamped flags.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    num_types: usize,
    dists: Vec<SparseDist>,
    clamped: Vec<bool>,
}

impl BeliefState {
    /// Everything empty and unclamped.
    pub fn new(num_nodes: usize, num_types: usize) -> Self {
        BeliefState {
            num_types,
            dists: vec![SparseDist::empty(); num_nodes * num_types],
            clamped: vec![false; num_nodes * num_types],
        }
    }

    /// Observed pairs become clamped point masses; all others start empty.
    pub fn from_observed(num_nodes: usize, num_types: usize, observed: &ObservedLabels) -> Self {
        let mut s = Self::new(num_nodes, num_types);
        for (u, t, l) in observed.iter() {
            let i = u * num_types + t;
            s.dists[i] = SparseDist::point_mass(l);
            s.clamped[i] = true;
        }
        s
    }

    pub fn num_nodes(&self) -> usize {
        self.dists.len().checked_div(self.num_types).unwrap_or(0)
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn get(&self, u: usize, t: usize) -> &SparseDist {
        &self.dists[u * self.num_types + t]
    }

    /// All types of node `u`.
    pub fn node(&self, u: usize) -> &[SparseDist] {
        &self.dists[u * self.num_types..(u + 1) * self.num_types]
    }

    pub fn is_clamped(&self, u: usize, t: usize) -> bool {
        self.clamped[u * self.num_types + t]
    }

    pub fn node_clamped(&self, u: usize) -> &[bool] {
        &self.clamped[u * self.num_types..(u + 1) * self.num_types]
    }

    /// Replaces an unclamped distribution.
    ///
    /// # Panics
    ///
    /// Panics if `(u, t)` is clamped.
    pub fn set(&mut self, u: usize, t: usize, dist: SparseDist) {
        let i = u * self.num_types + t;
        assert!(!self.clamped[i], "attempt to overwrite clamped ({u}, {t})");
        self.dists[i] = dist;
    }

    /// Replaces all unclamped types of `u`; clamped slots in `dists` are ignored.
    pub fn set_node(&mut self, u: usize, dists: Vec<SparseDist>) {
        for (t, d) in dists.into_iter().enumerate() {
            if !self.is_clamped(u, t) {
                self.dists[u * self.num_types + t] = d;
            }
        }
    }

    /// Largest L1 change over all `(node, type)` pairs.
    pub fn max_l1_change(&self, other: &BeliefState) -> f64 {
        self.dists
            .iter()
            .zip(&other.dists)
            .map(|(a, b)| a.l1_distance(b))
            .fold(0.0, f64::max)
    }

    /// Total `(node, type, entry)` tuples currently held.
    pub fn entry_count(&self) -> usize {
        self.dists.iter().map(SparseDist::len).sum()
    }

    pub fn max_support(&self) -> usize {
        self.dists.iter().map(SparseDist::len).max().unwrap_or(0)
    }
}
