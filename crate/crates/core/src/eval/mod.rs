//! Cross-validation, recall@k, lift, resolution curves and parameter sweeps.

mod curve;
mod sweep;

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use indexmap::IndexSet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::belief::BeliefState;
use crate::engine::{run_inference, Mode};
use crate::error::{Error, Result};
use crate::explain::ModelParams;
use crate::graph::{Dataset, Graph, LabelSchema, NodeKind, ObservedLabels};
use crate::tsv;

pub use curve::{resolution_curve, spearman, write_curve, Bucket, ResolutionCurve};
pub use sweep::{sweep, write_sweep, SweepParam, SweepRow, SweepSetup};

/// Splits `nodes` into `folds` groups of sizes differing by at most one.
pub fn make_folds(nodes: &[usize], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidParam(format!("need at least 2 folds, got {folds}")));
    }
    if folds > nodes.len() {
        return Err(Error::InvalidParam(format!(
            "{folds} folds requested for {} nodes",
            nodes.len()
        )));
    }
    let mut order = nodes.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = vec![Vec::new(); folds];
    for (i, u) in order.into_iter().enumerate() {
        out[i % folds].push(u);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

/// User nodes of `graph`; group nodes never carry labels.
pub fn user_nodes(graph: &Graph) -> Vec<usize> {
    (0..graph.num_nodes()).filter(|&u| graph.kind(u) == NodeKind::User).collect()
}

/// Observations visible during inference and the ones hidden from it.
#[derive(Debug, Clone)]
pub struct TrainingView {
    pub train: ObservedLabels,
    pub held_out: ObservedLabels,
}

/// Hides every observation of the nodes in `fold`.
pub fn hide_fold(observed: &ObservedLabels, fold: &[usize]) -> TrainingView {
    let (train, held_out) = observed.partition_nodes(|u| fold.binary_search(&u).is_ok());
    assert!(
        held_out.iter().all(|(u, t, _)| !train.contains(u, t)),
        "training view leaks a held-out observation"
    );
    TrainingView { train, held_out }
}

/// One held-out pair and where its true label landed in the prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scored {
    pub node: usize,
    pub label_type: usize,
    /// `None` when the true label is unknown to the training schema.
    pub label: Option<u32>,
    /// Zero-based rank of the true label, `None` if it was not predicted.
    pub rank: Option<usize>,
}

impl Scored {
    pub fn hit(&self, k: usize) -> bool {
        self.rank.is_some_and(|r| r < k)
    }
}

/// Scores every held-out pair against the ranked beliefs in `state`.
pub fn score_state(state: &BeliefState, held_out: &ObservedLabels) -> Vec<Scored> {
    held_out
        .iter()
        .map(|(u, t, l)| {
            let rank = state.get(u, t).ranked().iter().position(|&(x, _)| x == l);
            Scored {
                node: u,
                label_type: t,
                label: Some(l),
                rank,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeRecall {
    pub name: String,
    pub evaluable: usize,
    /// Hits at each cutoff of the owning report's `ks`.
    pub hits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ks: Vec<usize>,
    pub types: Vec<TypeRecall>,
}

impl EvalReport {
    pub fn from_scored<S: AsRef<str>>(scored: &[Scored], type_names: &[S], ks: &[usize]) -> Result<Self> {
        if ks.is_empty() || ks.contains(&0) {
            return Err(Error::InvalidParam(format!("cutoffs must be at least 1, got {ks:?}")));
        }
        let mut types: Vec<TypeRecall> = type_names
            .iter()
            .map(|n| TypeRecall {
                name: n.as_ref().to_string(),
                evaluable: 0,
                hits: vec![0; ks.len()],
            })
            .collect();
        for s in scored {
            let tr = &mut types[s.label_type];
            tr.evaluable += 1;
            for (i, &k) in ks.iter().enumerate() {
                if s.hit(k) {
                    tr.hits[i] += 1;
                }
            }
        }
        Ok(EvalReport { ks: ks.to_vec(), types })
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.iter().position(|t| t.name == name)
    }

    /// Recall of type `t` at cutoff `k`; zero when nothing was evaluable.
    pub fn recall(&self, t: usize, k: usize) -> f64 {
        let i = self.ks.iter().position(|&x| x == k).expect("cutoff not in report");
        let tr = &self.types[t];
        if tr.evaluable == 0 {
            0.0
        } else {
            tr.hits[i] as f64 / tr.evaluable as f64
        }
    }

    pub fn recall_by_name(&self, name: &str, k: usize) -> Option<f64> {
        self.type_index(name).map(|t| self.recall(t, k))
    }

    /// Relative improvement over `base` per `(type, k)`, matched by type
    /// name. Types missing from `base` are skipped.
    pub fn lift(&self, base: &EvalReport) -> Vec<(String, usize, f64)> {
        let mut out = Vec::new();
        for (t, tr) in self.types.iter().enumerate() {
            let Some(bt) = base.type_index(&tr.name) else { continue };
            for &k in &self.ks {
                if base.ks.contains(&k) {
                    out.push((tr.name.clone(), k, lift(self.recall(t, k), base.recall(bt, k))));
                }
            }
        }
        out
    }

    /// `type<TAB>metric<TAB>value` rows, with lift rows when `base` is given.
    pub fn write(&self, path: &Path, base: Option<&EvalReport>) -> Result<()> {
        let lifts = base.map(|b| self.lift(b)).unwrap_or_default();
        tsv::write_file(path, |w| {
            for (t, tr) in self.types.iter().enumerate() {
                writeln!(w, "{}\tevaluable\t{}", tr.name, tr.evaluable)?;
                for &k in &self.ks {
                    writeln!(w, "{}\trecall@{}\t{}", tr.name, k, self.recall(t, k))?;
                }
                for (name, k, l) in lifts.iter().filter(|(n, _, _)| *n == tr.name) {
                    writeln!(w, "{name}\tlift@{k}\t{l}")?;
                }
            }
            Ok(())
        })
    }
}

/// `(new - base) / base`. Equal zeros give zero; any gain over a zero
/// base is infinite.
pub fn lift(new: f64, base: f64) -> f64 {
    if base == 0.0 {
        if new == 0.0 {
            0.0
        } else {
            f64::INFINITY * new.signum()
        }
    } else {
        (new - base) / base
    }
}

/// Result of running every fold of a cross-validation.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub scored: Vec<Scored>,
    pub inference_time: Duration,
    pub supersteps: usize,
}

impl CrossValidation {
    pub fn report(&self, schema: &LabelSchema, ks: &[usize]) -> Result<EvalReport> {
        let names: Vec<&str> = schema.type_names().collect();
        EvalReport::from_scored(&self.scored, &names, ks)
    }
}

/// Hides each fold in turn, infers from the rest and scores the hidden
/// pairs. With `limit`, only the first `limit` folds are run.
pub fn cross_validate(
    data: &Dataset,
    params: &ModelParams,
    mode: Mode,
    folds: usize,
    limit: Option<usize>,
    seed: u64,
    threads: usize,
) -> Result<CrossValidation> {
    let parts = make_folds(&user_nodes(&data.graph), folds, seed)?;
    let mut scored = Vec::new();
    let mut inference_time = Duration::ZERO;
    let mut supersteps = 0;
    for fold in parts.iter().take(limit.unwrap_or(folds)) {
        let view = hide_fold(&data.observed, fold);
        let start = Instant::now();
        let (state, reports) = run_inference(&data.graph, &view.train, params, mode, threads);
        inference_time += start.elapsed();
        supersteps += reports.len();
        scored.extend(score_state(&state, &view.held_out));
    }
    Ok(CrossValidation {
        scored,
        inference_time,
        supersteps,
    })
}

/// Writes `node<TAB>type<TAB>rank<TAB>label<TAB>prob` for every user node,
/// ranks starting at 1.
pub fn write_predictions(path: &Path, graph: &Graph, schema: &LabelSchema, state: &BeliefState) -> Result<()> {
    tsv::write_file(path, |w| {
        for u in user_nodes(graph) {
            for t in 0..state.num_types() {
                for (r, (l, p)) in state.get(u, t).ranked().into_iter().enumerate() {
                    writeln!(
                        w,
                        "{}\t{}\t{}\t{}\t{}",
                        graph.id(u),
                        schema.type_name(t),
                        r + 1,
                        schema.label_name(t, l),
                        p
                    )?;
                }
            }
        }
        Ok(())
    })
}

/// Ranked label names keyed by `(node, type)` names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NamedPredictions {
    ranked: HashMap<(String, String), Vec<(String, f64)>>,
}

impl NamedPredictions {
    pub fn get(&self, node: &str, label_type: &str) -> Option<&[(String, f64)]> {
        self.ranked
            .get(&(node.to_string(), label_type.to_string()))
            .map(Vec::as_slice)
    }

    pub fn rank_of(&self, node: &str, label_type: &str, label: &str) -> Option<usize> {
        self.get(node, label_type)?.iter().position(|(l, _)| l == label)
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }
}

pub fn read_predictions(path: &Path) -> Result<NamedPredictions> {
    // (rank, label, prob, line) per (node, type)
    type Row = (usize, String, f64, usize);
    let mut rows: HashMap<(String, String), Vec<Row>> = HashMap::new();
    tsv::for_each_record(path, |rec| {
        rec.expect_fields(path, 5, 5)?;
        let rank: usize = rec.parse_field(path, 2, "rank")?;
        if rank == 0 {
            return Err(Error::parse(path, rec.line, "ranks start at 1"));
        }
        let prob: f64 = rec.parse_field(path, 4, "probability")?;
        rows.entry((rec.fields[0].to_string(), rec.fields[1].to_string()))
            .or_default()
            .push((rank, rec.fields[3].to_string(), prob, rec.line));
        Ok(())
    })?;
    let mut ranked = HashMap::with_capacity(rows.len());
    for (key, mut list) in rows {
        list.sort_by_key(|r| r.0);
        for (i, r) in list.iter().enumerate() {
            if r.0 != i + 1 {
                return Err(Error::parse(
                    path,
                    r.3,
                    format!("ranks for {:?}/{:?} are not 1..n", key.0, key.1),
                ));
            }
        }
        ranked.insert(key, list.into_iter().map(|(_, l, p, _)| (l, p)).collect());
    }
    Ok(NamedPredictions { ranked })
}

/// One `node<TAB>type<TAB>label` row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthRow {
    pub line: usize,
    pub node: String,
    pub label_type: String,
    pub label: String,
}

pub fn read_truth(path: &Path) -> Result<Vec<TruthRow>> {
    let mut out = Vec::new();
    tsv::for_each_record(path, |rec| {
        rec.expect_fields(path, 3, 3)?;
        out.push(TruthRow {
            line: rec.line,
            node: rec.fields[0].to_string(),
            label_type: rec.fields[1].to_string(),
            label: rec.fields[2].to_string(),
        });
        Ok(())
    })?;
    Ok(out)
}

/// Recall of file predictions against file truth. Types are reported in
/// order of first appearance in the truth.
pub fn evaluate_named(preds: &NamedPredictions, truth: &[TruthRow], ks: &[usize]) -> Result<EvalReport> {
    let mut types: IndexSet<&str> = IndexSet::new();
    let scored: Vec<Scored> = truth
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let (t, _) = types.insert_full(row.label_type.as_str());
            Scored {
                node: i,
                label_type: t,
                label: None,
                rank: preds.rank_of(&row.node, &row.label_type, &row.label),
            }
        })
        .collect();
    let names: Vec<&str> = types.into_iter().collect();
    EvalReport::from_scored(&scored, &names, ks)
}

/// Writes observations as `node<TAB>type<TAB>label`.
pub fn write_observed(path: &Path, graph: &Graph, schema: &LabelSchema, observed: &ObservedLabels) -> Result<()> {
    crate::synth::write_truth(path, observed.iter(), graph, schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::SparseDist;

    #[test]
    fn folds_of_ten() {
        let nodes: Vec<usize> = (0..10).collect();
        let f = make_folds(&nodes, 5, 3).unwrap();
        assert!(f.iter().all(|x| x.len() == 2));
        assert_eq!(f, make_folds(&nodes, 5, 3).unwrap());
        let mut all: Vec<usize> = f.concat();
        all.sort();
        assert_eq!(all, nodes);
    }

    #[test]
    fn fold_errors() {
        assert!(make_folds(&[0, 1, 2], 1, 0).is_err());
        assert!(make_folds(&[0, 1, 2], 4, 0).is_err());
    }

    #[test]
    fn rank_semantics() {
        let mut st = BeliefState::new(2, 1);
        st.set(0, 0, SparseDist::from_entries(vec![(3, 0.6), (7, 0.4)]));
        let mut held = ObservedLabels::new();
        held.insert(0, 0, 7).unwrap();
        held.insert(1, 0, 2).unwrap();
        let scored = score_state(&st, &held);
        let rep = EvalReport::from_scored(&scored, &["t"], &[1, 3]).unwrap();
        assert_eq!(rep.types[0].evaluable, 2);
        assert_eq!(rep.recall(0, 1), 0.0);
        assert_eq!(rep.recall(0, 3), 0.5);
    }

    #[test]
    fn self_lift_is_zero() {
        let rep = EvalReport {
            ks: vec![1, 3],
            types: vec![TypeRecall {
                name: "a".into(),
                evaluable: 4,
                hits: vec![1, 3],
            }],
        };
        assert!(rep.lift(&rep).iter().all(|&(_, _, l)| l == 0.0));
        assert_eq!(lift(0.0, 0.0), 0.0);
        assert!((lift(0.3, 0.2) - 0.5).abs() < 1e-12);
    }
}
