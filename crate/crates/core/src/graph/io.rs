use std::path::{Path, PathBuf};

use super::{Graph, GraphBuilder, LabelSchema, NodeKind, ObservedLabels};
use crate::error::{Conflict, Error, Result};
use crate::tsv;

pub const EDGES_FILE: &str = "edges.tsv";
pub const LABELS_FILE: &str = "labels.tsv";
pub const AGES_FILE: &str = "ages.tsv";
pub const GROUPS_FILE: &str = "groups.tsv";
pub const TYPE_WEIGHTS_FILE: &str = "edge_type_weights.tsv";

/// Paths of the interchange files making up one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputFiles {
    pub edges: PathBuf,
    pub labels: Option<PathBuf>,
    pub ages: Option<PathBuf>,
    pub groups: Option<PathBuf>,
    pub type_weights: Option<PathBuf>,
}

impl InputFiles {
    pub fn new(edges: impl Into<PathBuf>) -> Self {
        InputFiles {
            edges: edges.into(),
            labels: None,
            ages: None,
            groups: None,
            type_weights: None,
        }
    }

    /// The standard file names inside `dir`. `edges.tsv` is always
    /// expected; the others are picked up only if present.
    pub fn from_dir(dir: &Path) -> Self {
        let opt = |name: &str| {
            let p = dir.join(name);
            p.is_file().then_some(p)
        };
        InputFiles {
            edges: dir.join(EDGES_FILE),
            labels: opt(LABELS_FILE),
            ages: opt(AGES_FILE),
            groups: opt(GROUPS_FILE),
            type_weights: opt(TYPE_WEIGHTS_FILE),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    pub observed: ObservedLabels,
    pub schema: LabelSchema,
}

pub fn ingest(files: &InputFiles) -> Result<Dataset> {
    let mut builder = GraphBuilder::new();
    let mut schema = LabelSchema::new();
    let mut observed = ObservedLabels::new();

    let path = files.edges.as_path();
    tsv::for_each_record(path, |rec| {
        rec.expect_fields(path, 2, 3)?;
        let weight = if rec.fields.len() == 3 {
            rec.parse_field::<f64>(path, 2, "weight")?
        } else {
            1.0
        };
        let u = builder.node(rec.fields[0]);
        let v = builder.node(rec.fields[1]);
        builder
            .add_edge(u, v, weight)
            .map_err(|e| Error::parse(path, rec.line, e.to_string()))
    })?;

    if let Some(path) = files.labels.as_deref() {
        tsv::for_each_record(path, |rec| {
            rec.expect_fields(path, 3, 3)?;
            let u = builder.node(rec.fields[0]);
            let t = schema.add_type(rec.fields[1]);
            let l = schema.intern(t, rec.fields[2]);
            observed.insert(u, t, l).map_err(|prev| {
                Error::ConflictingObservation(Box::new(Conflict {
                    path: path.to_path_buf(),
                    line: rec.line,
                    node: rec.fields[0].to_string(),
                    label_type: rec.fields[1].to_string(),
                    first: schema.label_name(t, prev).to_string(),
                    second: rec.fields[2].to_string(),
                }))
            })
        })?;
    }

    if let Some(path) = files.ages.as_deref() {
        let mut seen: Vec<Option<u32>> = Vec::new();
        tsv::for_each_record(path, |rec| {
            rec.expect_fields(path, 2, 2)?;
            let age: u32 = rec.parse_field(path, 1, "age")?;
            let u = builder.node(rec.fields[0]);
            if seen.len() <= u {
                seen.resize(u + 1, None);
            }
            match seen[u] {
                Some(a) if a != age => {
                    return Err(Error::parse(path, rec.line, format!("conflicting age for {:?}", rec.fields[0])))
                }
                _ => seen[u] = Some(age),
            }
            builder.set_age(u, age);
            Ok(())
        })?;
    }

    if let Some(path) = files.groups.as_deref() {
        let memberships = read_groups(path)?;
        apply_groups(&mut builder, &memberships, path)?;
    }

    if let Some(path) = files.type_weights.as_deref() {
        let mut pending = Vec::new();
        tsv::for_each_record(path, |rec| {
            rec.expect_fields(path, 4, 4)?;
            let m: f64 = rec.parse_field(path, 3, "multiplier")?;
            let lookup = |id: &str| {
                builder.index_of(id).ok_or_else(|| Error::UnknownNode {
                    path: path.to_path_buf(),
                    line: rec.line,
                    node: id.to_string(),
                })
            };
            let u = lookup(rec.fields[0])?;
            let v = lookup(rec.fields[1])?;
            let t = schema.add_type(rec.fields[2]);
            pending.push((rec.line, u, v, t, m));
            Ok(())
        })?;
        for (line, u, v, t, m) in pending {
            builder
                .set_type_multiplier(u, v, t, m)
                .map_err(|e| Error::parse(path, line, e.to_string()))?;
        }
    }

    Ok(Dataset {
        graph: builder.build(schema.num_types()),
        observed,
        schema,
    })
}

/// One `group_id<TAB>member_node` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupMembership {
    pub line: usize,
    pub group: String,
    pub member: String,
}

pub fn read_groups(path: &Path) -> Result<Vec<GroupMembership>> {
    let mut out = Vec::new();
    tsv::for_each_record(path, |rec| {
        rec.expect_fields(path, 2, 2)?;
        out.push(GroupMembership {
            line: rec.line,
            group: rec.fields[0].to_string(),
            member: rec.fields[1].to_string(),
        });
        Ok(())
    })?;
    Ok(out)
}

fn apply_groups(builder: &mut GraphBuilder, memberships: &[GroupMembership], source: &Path) -> Result<()> {
    for m in memberships {
        let member = match builder.index_of(&m.member) {
            Some(i) if builder.kind(i) == NodeKind::User => i,
            _ => {
                return Err(Error::UnknownNode {
                    path: source.to_path_buf(),
                    line: m.line,
                    node: m.member.clone(),
                })
            }
        };
        if let Some(i) = builder.index_of(&m.group) {
            if builder.kind(i) == NodeKind::User {
                return Err(Error::parse(
                    source,
                    m.line,
                    format!("group id {:?} collides with a user node", m.group),
                ));
            }
        }
        let g = builder.node_of_kind(&m.group, NodeKind::Group);
        builder
            .add_edge(g, member, 1.0)
            .map_err(|e| Error::parse(source, m.line, e.to_string()))?;
    }
    Ok(())
}

/// Adds one node per group and an edge from it to each listed member.
/// `source` only labels error messages.
pub fn expand_groups(graph: &Graph, memberships: &[GroupMembership], source: &Path) -> Result<Graph> {
    let mut builder = graph.to_builder();
    apply_groups(&mut builder, memberships, source)?;
    Ok(builder.build(graph.num_types()))
}

/// Writes the dataset back out in the interchange formats. Re-ingesting
/// the directory reproduces the same graph up to index renumbering.
///
/// A user node with no user-user edge, no observation and no age has no
/// line to live on and is reported as an error.
pub fn write_dataset(dir: &Path, data: &Dataset) -> Result<()> {
    let g = &data.graph;
    let mut observed_nodes = vec![false; g.num_nodes()];
    for (u, _, _) in data.observed.iter() {
        observed_nodes[u] = true;
    }
    for (u, &observed) in observed_nodes.iter().enumerate() {
        let represented = g.kind(u) == NodeKind::Group
            || g.age(u).is_some()
            || observed
            || g.neighbors(u).iter().any(|&v| g.kind(v as usize) == NodeKind::User);
        if !represented {
            return Err(Error::InvalidParam(format!(
                "user {:?} has no edge, label or age to write",
                g.id(u)
            )));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    tsv::write_file(&dir.join(EDGES_FILE), |w| {
        for (u, v, wt) in g.edges() {
            if g.kind(u) == NodeKind::User && g.kind(v) == NodeKind::User {
                if wt == 1.0 {
                    writeln!(w, "{}\t{}", g.id(u), g.id(v))?;
                } else {
                    writeln!(w, "{}\t{}\t{}", g.id(u), g.id(v), wt)?;
                }
            }
        }
        Ok(())
    })?;

    let has_groups = (0..g.num_nodes()).any(|u| g.kind(u) == NodeKind::Group);
    if has_groups {
        tsv::write_file(&dir.join(GROUPS_FILE), |w| {
            for u in 0..g.num_nodes() {
                if g.kind(u) == NodeKind::Group {
                    for &v in g.neighbors(u) {
                        writeln!(w, "{}\t{}", g.id(u), g.id(v as usize))?;
                    }
                }
            }
            Ok(())
        })?;
    }

    tsv::write_file(&dir.join(LABELS_FILE), |w| {
        for (u, t, l) in data.observed.iter() {
            writeln!(w, "{}\t{}\t{}", g.id(u), data.schema.type_name(t), data.schema.label_name(t, l))?;
        }
        Ok(())
    })?;

    if (0..g.num_nodes()).any(|u| g.age(u).is_some()) {
        tsv::write_file(&dir.join(AGES_FILE), |w| {
            for u in 0..g.num_nodes() {
                if let Some(a) = g.age(u) {
                    writeln!(w, "{}\t{}", g.id(u), a)?;
                }
            }
            Ok(())
        })?;
    }

    if g.has_type_weights() {
        tsv::write_file(&dir.join(TYPE_WEIGHTS_FILE), |w| {
            for u in 0..g.num_nodes() {
                for s in g.slots(u) {
                    let v = g.slot_neighbor(s);
                    if u >= v {
                        continue;
                    }
                    for t in 0..g.num_types() {
                        let m = g.type_multiplier(s, t);
                        if m != 1.0 {
                            writeln!(w, "{}\t{}\t{}\t{}", g.id(u), g.id(v), data.schema.type_name(t), m)?;
                        }
                    }
                }
            }
            Ok(())
        })?;
    }
    Ok(())
}
