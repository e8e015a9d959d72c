//! Small hand-built graphs with known answers.

use crate::graph::{Dataset, GraphBuilder, LabelSchema, NodeKind, ObservedLabels};

/// A constructed dataset, the node of interest, and the labels each
/// method is expected to rank first for it, as `(type, label)`.
#[derive(Debug, Clone)]
pub struct ConstructedInstance {
    pub dataset: Dataset,
    pub focus: usize,
    pub expected_edgeexplain: Vec<(usize, u32)>,
    pub expected_lp: Vec<(usize, u32)>,
}

impl ConstructedInstance {
    /// Expected answers rendered as `(type name, label name)`.
    pub fn named(&self, expected: &[(usize, u32)]) -> Vec<(String, String)> {
        let s = &self.dataset.schema;
        expected
            .iter()
            .map(|&(t, l)| (s.type_name(t).to_string(), s.label_name(t, l).to_string()))
            .collect()
    }
}

/// An unlabeled user `u` with twelve friends from hometown `H` (five of
/// whom live in `C'`, the rest in cities of their own) and four friends
/// from another hometown who live in `C`. Every friend is fully labeled.
pub fn make_fig1_instance() -> ConstructedInstance {
    let mut schema = LabelSchema::with_types(["hometown", "current_city"]);
    let h = schema.intern(0, "H");
    let h2 = schema.intern(0, "H''");
    let c = schema.intern(1, "C");
    let c_prime = schema.intern(1, "C'");

    let mut b = GraphBuilder::new();
    let mut observed = ObservedLabels::new();
    let u = b.node("u");
    for i in 1..=12 {
        let f = b.node(&format!("h{i}"));
        b.add_edge(u, f, 1.0).expect("star edge");
        let city = if i <= 5 {
            c_prime
        } else {
            schema.intern(1, &format!("C{i}"))
        };
        observed.insert(f, 0, h).expect("fresh");
        observed.insert(f, 1, city).expect("fresh");
    }
    for i in 1..=4 {
        let f = b.node(&format!("c{i}"));
        b.add_edge(u, f, 1.0).expect("star edge");
        observed.insert(f, 0, h2).expect("fresh");
        observed.insert(f, 1, c).expect("fresh");
    }
    ConstructedInstance {
        dataset: Dataset {
            graph: b.build(2),
            observed,
            schema,
        },
        focus: u,
        expected_edgeexplain: vec![(0, h), (1, c)],
        expected_lp: vec![(0, h), (1, c_prime)],
    }
}

/// A group of six users joined only through the group node. Five declare
/// college `X` and unrelated hometowns; the sixth declares nothing.
/// Everyone has an age so the instance survives a write/ingest round trip.
pub fn make_group_instance() -> ConstructedInstance {
    let mut schema = LabelSchema::with_types(["college", "hometown"]);
    let x = schema.intern(0, "X");
    let mut b = GraphBuilder::new();
    let mut observed = ObservedLabels::new();
    let mut members = Vec::new();
    for i in 1..=6 {
        let m = b.node(&format!("m{i}"));
        b.set_age(m, 20);
        members.push(m);
    }
    for (i, &m) in members.iter().take(5).enumerate() {
        observed.insert(m, 0, x).expect("fresh");
        let home = schema.intern(1, &format!("town{}", i + 1));
        observed.insert(m, 1, home).expect("fresh");
    }
    let g = b.node_of_kind("g", NodeKind::Group);
    for &m in &members {
        b.add_edge(g, m, 1.0).expect("membership edge");
    }
    ConstructedInstance {
        dataset: Dataset {
            graph: b.build(2),
            observed,
            schema,
        },
        focus: members[5],
        expected_edgeexplain: vec![(0, x)],
        expected_lp: vec![(0, x)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_shape() {
        let inst = make_fig1_instance();
        let g = &inst.dataset.graph;
        assert_eq!(g.degree(inst.focus), 16);
        let obs = &inst.dataset.observed;
        let city_votes = |label: &str| {
            let l = inst.dataset.schema.label_index(1, label).unwrap();
            g.neighbors(inst.focus)
                .iter()
                .filter(|&&v| obs.get(v as usize, 1) == Some(l))
                .count()
        };
        assert_eq!(city_votes("C'"), 5);
        assert_eq!(city_votes("C"), 4);
        // under (H, C') the four C friends share nothing with u
        let h = inst.dataset.schema.label_index(0, "H").unwrap();
        let cp = inst.dataset.schema.label_index(1, "C'").unwrap();
        for i in 1..=4 {
            let v = g.index_of(&format!("c{i}")).unwrap();
            assert_ne!(obs.get(v, 0), Some(h));
            assert_ne!(obs.get(v, 1), Some(cp));
        }
    }

    #[test]
    fn group_shape() {
        let inst = make_group_instance();
        let g = &inst.dataset.graph;
        assert_eq!(g.degree(inst.focus), 1);
        let grp = g.neighbors(inst.focus)[0] as usize;
        assert_eq!(g.kind(grp), NodeKind::Group);
        assert_eq!(g.degree(grp), 6);
        assert!(!inst.dataset.observed.contains(inst.focus, 0));
    }
}
