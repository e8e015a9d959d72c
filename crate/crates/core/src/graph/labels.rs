use std::collections::BTreeMap;

use indexmap::IndexSet;

/// Label types and their per-type vocabularies. Interning is first-seen
/// and stable, so label indices are dense in `[0, num_labels(t))`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSchema {
    types: IndexSet<String>,
    vocab: Vec<IndexSet<String>>,
}

impl LabelSchema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_types<I, S>(types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut schema = Self::new();
        for t in types {
            schema.add_type(t);
        }
        schema
    }

    /// Returns the index of `name`, registering it if new.
    pub fn add_type(&mut self, name: impl Into<String>) -> usize {
        let (idx, inserted) = self.types.insert_full(name.into());
        if inserted {
            self.vocab.push(IndexSet::new());
        }
        idx
    }

    pub fn intern(&mut self, label_type: usize, label: &str) -> u32 {
        let vocab = &mut self.vocab[label_type];
        match vocab.get_index_of(label) {
            Some(i) => i as u32,
            None => vocab.insert_full(label.to_string()).0 as u32,
        }
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn num_labels(&self, label_type: usize) -> usize {
        self.vocab[label_type].len()
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.get_index_of(name)
    }

    pub fn type_name(&self, label_type: usize) -> &str {
        &self.types[label_type]
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.types.iter().map(String::as_str)
    }

    pub fn label_index(&self, label_type: usize, label: &str) -> Option<u32> {
        self.vocab[label_type].get_index_of(label).map(|i| i as u32)
    }

    pub fn label_name(&self, label_type: usize, label: u32) -> &str {
        &self.vocab[label_type][label as usize]
    }
}

/// Publicly declared labels: at most one per `(node, type)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservedLabels {
    map: BTreeMap<(usize, usize), u32>,
}

impl ObservedLabels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records an observation. Re-inserting the same label is a no-op;
    /// a different label for the same pair returns the existing one as `Err`.
    pub fn insert(&mut self, node: usize, label_type: usize, label: u32) -> Result<(), u32> {
        match self.map.get(&(node, label_type)) {
            Some(&existing) if existing != label => Err(existing),
            Some(_) => Ok(()),
            None => {
                self.map.insert((node, label_type), label);
                Ok(())
            }
        }
    }

    pub fn get(&self, node: usize, label_type: usize) -> Option<u32> {
        self.map.get(&(node, label_type)).copied()
    }

    pub fn contains(&self, node: usize, label_type: usize) -> bool {
        self.map.contains_key(&(node, label_type))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Iterates `(node, type, label)` ordered by node then type.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.map.iter().map(|(&(n, t), &l)| (n, t, l))
    }

    /// Splits into (kept, removed) by a node predicate.
    pub fn partition_nodes<F: Fn(usize) -> bool>(&self, remove: F) -> (ObservedLabels, ObservedLabels) {
        let (removed, kept): (BTreeMap<_, _>, BTreeMap<_, _>) =
            self.map.iter().map(|(k, v)| (*k, *v)).partition(|((n, _), _)| remove(*n));
        (ObservedLabels { map: kept }, ObservedLabels { map: removed })
    }
}

impl FromIterator<(usize, usize, u32)> for ObservedLabels {
    fn from_iter<I: IntoIterator<Item = (usize, usize, u32)>>(iter: I) -> Self {
        let mut obs = ObservedLabels::new();
        for (n, t, l) in iter {
            obs.map.insert((n, t), l);
        }
        obs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_dense_and_stable() {
        let mut s = LabelSchema::with_types(["hometown", "college"]);
        assert_eq!(s.intern(0, "Chicago"), 0);
        assert_eq!(s.intern(0, "Boston"), 1);
        assert_eq!(s.intern(0, "Chicago"), 0);
        assert_eq!(s.intern(1, "MIT"), 0);
        assert_eq!(s.num_labels(0), 2);
        assert_eq!(s.label_name(0, 1), "Boston");
        assert_eq!(s.add_type("college"), 1);
        assert_eq!(s.num_types(), 2);
    }

    #[test]
    fn duplicate_observation_is_idempotent_and_conflict_errors() {
        let mut obs = ObservedLabels::new();
        assert!(obs.insert(0, 0, 3).is_ok());
        assert!(obs.insert(0, 0, 3).is_ok());
        assert_eq!(obs.len(), 1);
        assert_eq!(obs.insert(0, 0, 4), Err(3));
    }
}
