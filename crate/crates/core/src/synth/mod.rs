//! Planted-truth graphs where every edge has exactly one reason type.
//!
//! Each node draws one true label per type. Nodes sharing a label are cut
//! into small pockets and edges only form inside pockets, so sharing a
//! label is necessary for an edge of that type but far from sufficient.

mod config;
mod instances;

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, Zipf};

use crate::error::{Error, Result};
use crate::graph::{write_dataset, Dataset, GraphBuilder, LabelSchema, ObservedLabels};
use crate::tsv;

pub use config::{GeneratorConfig, TypeConfig};
pub use instances::{make_fig1_instance, make_group_instance, ConstructedInstance};

pub const TRUTH_FILE: &str = "truth.tsv";
pub const REASONS_FILE: &str = "reasons.tsv";

/// Ground truth behind a generated graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTruth {
    /// `labels[t][u]`: true label of node `u` for type `t`.
    pub labels: Vec<Vec<u32>>,
    /// Reason type of every edge, keyed by `(min, max)` node index.
    pub reasons: BTreeMap<(usize, usize), usize>,
    /// `pockets[t]`: the pockets of type `t`, each a list of members.
    pub pockets: Vec<Vec<Vec<usize>>>,
}

impl PlantedTruth {
    pub fn label(&self, u: usize, t: usize) -> u32 {
        self.labels[t][u]
    }

    /// Checks that every edge has a reason whose label both endpoints share.
    pub fn audit(&self, data: &Dataset) -> std::result::Result<(), String> {
        if self.reasons.len() != data.graph.num_edges() {
            return Err(format!(
                "{} reasons for {} edges",
                self.reasons.len(),
                data.graph.num_edges()
            ));
        }
        for (u, v, _) in data.graph.edges() {
            let t = *self
                .reasons
                .get(&(u, v))
                .ok_or_else(|| format!("edge {u}-{v} has no reason"))?;
            if self.labels[t][u] != self.labels[t][v] {
                return Err(format!("edge {u}-{v} reason {t} but labels differ"));
            }
        }
        Ok(())
    }

    /// Every true label as `(node, type, label)`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        let n = self.labels.first().map_or(0, Vec::len);
        (0..n).flat_map(move |u| (0..self.labels.len()).map(move |t| (u, t, self.labels[t][u])))
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub dataset: Dataset,
    pub truth: PlantedTruth,
}

/// Index of label `k` of type `t` in the schema equals `k`.
fn label_name(type_name: &str, k: usize) -> String {
    format!("{type_name}_{k}")
}

/// Draws pocket edges: each pair of `pocket` independently with
/// probability `p`, in lexicographic pair order.
pub fn sample_pocket_edges<R: Rng>(pocket: &[usize], p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..pocket.len() {
        for j in i + 1..pocket.len() {
            if p >= 1.0 || rng.random::<f64>() < p {
                out.push((pocket[i], pocket[j]));
            }
        }
    }
    out
}

pub fn generate(cfg: &GeneratorConfig) -> Result<Generated> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.nodes;
    let nt = cfg.types.len();

    // 1. true labels
    let mut labels: Vec<Vec<u32>> = Vec::with_capacity(nt);
    for tc in &cfg.types {
        let zipf = Zipf::new(tc.labels as f64, tc.zipf).map_err(|e| Error::InvalidParam(format!("{}: {e}", tc.name)))?;
        let draw = |rng: &mut ChaCha8Rng| (zipf.sample(rng) as usize).clamp(1, tc.labels) as u32 - 1;
        let row = match &tc.follows {
            Some(anchor) => {
                let a = cfg.types.iter().position(|o| &o.name == anchor).expect("validated");
                let local: Vec<u32> = (0..cfg.types[a].labels).map(|_| draw(&mut rng)).collect();
                (0..n)
                    .map(|u| {
                        let follow = rng.random::<f64>() < tc.follow_prob;
                        let own = draw(&mut rng);
                        if follow {
                            local[labels[a][u] as usize]
                        } else {
                            own
                        }
                    })
                    .collect()
            }
            None => (0..n).map(|_| draw(&mut rng)).collect(),
        };
        labels.push(row);
    }

    // 2. pockets inside each label community
    let mut pockets: Vec<Vec<Vec<usize>>> = Vec::with_capacity(nt);
    for t in 0..nt {
        let poisson = Poisson::new(cfg.pocket_size_of(t)).map_err(|e| Error::InvalidParam(e.to_string()))?;
        let mut communities: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for u in 0..n {
            communities.entry(labels[t][u]).or_default().push(u);
        }
        let mut type_pockets = Vec::new();
        for (_, mut members) in communities {
            members.shuffle(&mut rng);
            let mut rest = members.as_slice();
            while !rest.is_empty() {
                let size = (poisson.sample(&mut rng) as usize).max(2).min(rest.len());
                let (head, tail) = rest.split_at(size);
                type_pockets.push(head.to_vec());
                rest = tail;
            }
        }
        pockets.push(type_pockets);
    }

    // 3. edges, type by type, until each budget is met
    let total = cfg.total_edges();
    let mut reasons: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut active: Vec<Vec<bool>> = Vec::with_capacity(nt);
    for t in 0..nt {
        let budget = (cfg.types[t].edge_fraction * total as f64).round() as usize;
        let p = cfg.edge_prob_of(t);
        let mut order: Vec<usize> = (0..pockets[t].len()).collect();
        order.shuffle(&mut rng);
        let mut used = vec![false; pockets[t].len()];
        let mut made = 0usize;
        for &pi in &order {
            if made >= budget {
                break;
            }
            for (a, b) in sample_pocket_edges(&pockets[t][pi], p, &mut rng) {
                if made >= budget {
                    break;
                }
                let key = (a.min(b), a.max(b));
                if let std::collections::btree_map::Entry::Vacant(e) = reasons.entry(key) {
                    e.insert(t);
                    made += 1;
                    used[pi] = true;
                }
            }
        }
        if made < budget {
            let capacity: usize = pockets[t].iter().map(|p| p.len() * (p.len() - 1) / 2).sum();
            return Err(Error::Infeasible(format!(
                "type {:?} needs {budget} edges but its pockets produced only {made} \
                 ({capacity} candidate pairs at edge probability {p}); \
                 raise nodes or pocket size, or lower mean_degree or edge_fraction",
                cfg.types[t].name
            )));
        }
        active.push(used);
    }

    // 4. observations
    let mut observed = ObservedLabels::new();
    for u in 0..n {
        for (t, tc) in cfg.types.iter().enumerate() {
            if rng.random::<f64>() < tc.visibility {
                observed.insert(u, t, labels[t][u]).expect("fresh pair");
            }
        }
    }

    // 5. ages: school pockets that formed edges share an age within a year
    let mut ages: Vec<Option<u32>> = vec![None; n];
    for t in (0..nt).filter(|&t| cfg.types[t].school) {
        for (pi, pocket) in pockets[t].iter().enumerate() {
            if !active[t][pi] {
                continue;
            }
            let base: i64 = rng.random_range(18..=65);
            for &u in pocket {
                let jitter: i64 = rng.random_range(-1..=1);
                if ages[u].is_none() {
                    ages[u] = Some((base + jitter).max(0) as u32);
                }
            }
        }
    }
    for age in ages.iter_mut() {
        if age.is_none() {
            *age = Some(rng.random_range(18..=65));
        }
    }

    let mut schema = LabelSchema::new();
    for tc in &cfg.types {
        let t = schema.add_type(tc.name.as_str());
        for k in 0..tc.labels {
            schema.intern(t, &label_name(&tc.name, k));
        }
    }
    let mut builder = GraphBuilder::new();
    for (u, age) in ages.iter().enumerate() {
        let i = builder.node(&format!("n{u}"));
        builder.set_age(i, age.expect("assigned"));
    }
    for &(u, v) in reasons.keys() {
        builder.add_edge(u, v, 1.0).expect("valid generated edge");
    }
    let dataset = Dataset {
        graph: builder.build(nt),
        observed,
        schema,
    };
    let truth = PlantedTruth {
        labels,
        reasons,
        pockets,
    };
    truth.audit(&dataset).map_err(Error::Infeasible)?;
    Ok(Generated { dataset, truth })
}

/// Writes the dataset files plus `truth.tsv` and `reasons.tsv`.
pub fn write_generated(dir: &Path, gen: &Generated) -> Result<()> {
    write_dataset(dir, &gen.dataset)?;
    let g = &gen.dataset.graph;
    let schema = &gen.dataset.schema;
    write_truth(&dir.join(TRUTH_FILE), gen.truth.pairs(), g, schema)?;
    tsv::write_file(&dir.join(REASONS_FILE), |w| {
        for (&(u, v), &t) in &gen.truth.reasons {
            writeln!(w, "{}\t{}\t{}", g.id(u), g.id(v), schema.type_name(t))?;
        }
        Ok(())
    })
}

/// Writes `(node, type, label)` triples as `node<TAB>type<TAB>label`.
pub fn write_truth<I>(path: &Path, pairs: I, graph: &crate::graph::Graph, schema: &LabelSchema) -> Result<()>
where
    I: IntoIterator<Item = (usize, usize, u32)>,
{
    tsv::write_file(path, |w| {
        for (u, t, l) in pairs {
            writeln!(w, "{}\t{}\t{}", graph.id(u), schema.type_name(t), schema.label_name(t, l))?;
        }
        Ok(())
    })
}

/// Empirical label counts of type `t`, indexed by label.
pub fn label_counts(truth: &PlantedTruth, t: usize, num_labels: usize) -> Vec<usize> {
    let mut c = vec![0usize; num_labels];
    for &l in &truth.labels[t] {
        c[l as usize] += 1;
    }
    c
}

/// Node degree by reason type, used for diagnostics.
pub fn reason_degrees(truth: &PlantedTruth, num_nodes: usize, num_types: usize) -> Vec<Vec<usize>> {
    let mut deg = vec![vec![0usize; num_nodes]; num_types];
    for (&(u, v), &t) in &truth.reasons {
        deg[t][u] += 1;
        deg[t][v] += 1;
    }
    deg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            nodes: 600,
            mean_degree: 6.0,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.dataset, b.dataset);
        let c = generate(&GeneratorConfig { seed: 1, ..small() }).unwrap();
        assert_ne!(a.truth.reasons, c.truth.reasons);
    }

    #[test]
    fn audit_passes_and_budgets_are_met() {
        let cfg = small();
        let g = generate(&cfg).unwrap();
        g.truth.audit(&g.dataset).unwrap();
        for (t, tc) in cfg.types.iter().enumerate() {
            let want = (tc.edge_fraction * cfg.total_edges() as f64).round() as usize;
            let got = g.truth.reasons.values().filter(|&&r| r == t).count();
            assert_eq!(got, want, "{}", tc.name);
        }
    }

    #[test]
    fn full_visibility_reveals_everything() {
        let mut cfg = small();
        for t in &mut cfg.types {
            t.visibility = 1.0;
        }
        let g = generate(&cfg).unwrap();
        assert_eq!(g.dataset.observed.len(), cfg.nodes * cfg.types.len());
        for (u, t, l) in g.truth.pairs() {
            assert_eq!(g.dataset.observed.get(u, t), Some(l));
        }
    }

    #[test]
    fn complete_pockets_at_probability_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for m in 0..9 {
            let pocket: Vec<usize> = (0..m).collect();
            assert_eq!(sample_pocket_edges(&pocket, 1.0, &mut rng).len(), m * m.saturating_sub(1) / 2);
        }
    }

    #[test]
    fn impossible_budget_is_reported() {
        let cfg = GeneratorConfig {
            nodes: 100,
            mean_degree: 60.0,
            ..GeneratorConfig::default()
        };
        match generate(&cfg) {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("needs"), "{msg}"),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn school_pockets_share_ages() {
        let g = generate(&small()).unwrap();
        let school = small().types.iter().position(|t| t.school).unwrap();
        let graph = &g.dataset.graph;
        // an earlier school pocket may have aged a node first, so most but
        // not all edges of a school type join near-equal ages
        let close = g
            .truth
            .reasons
            .iter()
            .filter(|(_, &t)| t == school)
            .filter(|(&(u, v), _)| graph.age(u).unwrap().abs_diff(graph.age(v).unwrap()) <= 2)
            .count();
        let total = g.truth.reasons.values().filter(|&&t| t == school).count();
        assert!(close * 10 >= total * 9, "{close} of {total}");
        assert!((0..graph.num_nodes()).all(|u| (17..=66).contains(&graph.age(u).unwrap())));
    }

    #[test]
    fn written_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = generate(&small()).unwrap();
        write_generated(dir.path(), &g).unwrap();
        let back = crate::graph::ingest(&crate::graph::InputFiles::from_dir(dir.path())).unwrap();
        assert_eq!(back.graph.num_edges(), g.dataset.graph.num_edges());
        assert_eq!(back.observed.len(), g.dataset.observed.len());
        let truth = std::fs::read_to_string(dir.path().join(TRUTH_FILE)).unwrap();
        assert_eq!(truth.lines().count(), 600 * 5);
        let reasons = std::fs::read_to_string(dir.path().join(REASONS_FILE)).unwrap();
        assert_eq!(reasons.lines().count(), g.dataset.graph.num_edges());
    }
}
