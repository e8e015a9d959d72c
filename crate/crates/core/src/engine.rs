//! Bulk-synchronous superstep execution.
//!
//! Each superstep freezes the current state, lets every node recompute
//! its unclamped distributions from that snapshot, and swaps in the
//! result. Workers take nodes striped by index and only read the
//! snapshot, so the output does not depend on the worker count.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::belief::{BeliefState, SparseDist};
use crate::error::Result;
use crate::explain::{node_objective, objective, solve_node, ModelParams, Neighborhood};
use crate::graph::{Graph, ObservedLabels};
use crate::propagation::{lp_energy, lp_update};
use crate::tsv;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    LabelPropagation,
    EdgeExplain,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lp" => Ok(Mode::LabelPropagation),
            "edgeexplain" => Ok(Mode::EdgeExplain),
            _ => Err(format!("unknown mode {s:?} (expected lp or edgeexplain)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::LabelPropagation => "lp",
            Mode::EdgeExplain => "edgeexplain",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperstepReport {
    pub superstep: usize,
    pub max_change: f64,
    /// Edge-explanation objective, or total quadratic energy in LP mode.
    pub objective: f64,
    pub duration: Duration,
    /// `(node, type, entry)` tuples published at the start of the superstep.
    pub messages: usize,
}

type Update = (usize, Vec<SparseDist>, f64);

fn update_node(
    graph: &Graph,
    snapshot: &BeliefState,
    hints: &[f64],
    params: &ModelParams,
    mode: Mode,
    u: usize,
) -> Option<Update> {
    let clamped = snapshot.node_clamped(u);
    if graph.degree(u) == 0 || clamped.iter().all(|&c| c) {
        return None;
    }
    match mode {
        Mode::LabelPropagation => {
            let dists = (0..snapshot.num_types())
                .map(|t| {
                    if clamped[t] {
                        return snapshot.get(u, t).clone();
                    }
                    let nbrs = graph
                        .slots(u)
                        .map(|s| (snapshot.get(graph.slot_neighbor(s), t), graph.slot_type_weight(s, t)));
                    lp_update(nbrs, params.clip_size)
                })
                .collect();
            Some((u, dists, 0.0))
        }
        Mode::EdgeExplain => {
            let nbhd = Neighborhood::of_node(graph, snapshot, u);
            let hint = hints[u];
            let out = solve_node(&nbhd, snapshot.node(u), clamped, params, (hint > 0.0).then_some(hint));
            Some((u, out.dists, out.step))
        }
    }
}

fn compute_superstep(
    graph: &Graph,
    snapshot: &BeliefState,
    hints: &[f64],
    params: &ModelParams,
    mode: Mode,
    threads: usize,
) -> Vec<Update> {
    let n = graph.num_nodes();
    if threads <= 1 {
        return (0..n)
            .filter_map(|u| update_node(graph, snapshot, hints, params, mode, u))
            .collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                scope.spawn(move || {
                    (w..n)
                        .step_by(threads)
                        .filter_map(|u| update_node(graph, snapshot, hints, params, mode, u))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("superstep worker panicked"))
            .collect()
    })
}

fn state_score(graph: &Graph, state: &BeliefState, params: &ModelParams, mode: Mode) -> f64 {
    match mode {
        Mode::EdgeExplain => objective(graph, state, params),
        Mode::LabelPropagation => (0..state.num_types()).map(|t| lp_energy(graph, state, t)).sum(),
    }
}

/// Runs Jacobi supersteps until the largest L1 change drops below
/// `params.tol` or `params.max_supersteps` is reached.
///
/// Observed pairs are clamped point masses for the whole run; every other
/// pair starts empty.
pub fn run_inference(
    graph: &Graph,
    observed: &ObservedLabels,
    params: &ModelParams,
    mode: Mode,
    threads: usize,
) -> (BeliefState, Vec<SuperstepReport>) {
    let mut state = BeliefState::from_observed(graph.num_nodes(), graph.num_types(), observed);
    let mut hints = vec![0.0; graph.num_nodes()];
    let mut reports = Vec::new();
    for superstep in 1..=params.max_supersteps {
        let start = Instant::now();
        let messages = state.entry_count();
        let updates = compute_superstep(graph, &state, &hints, params, mode, threads.max(1));
        let mut next = state.clone();
        for (u, dists, step) in updates {
            next.set_node(u, dists);
            hints[u] = step;
        }
        let max_change = next.max_l1_change(&state);
        state = next;
        let score = state_score(graph, &state, params, mode);
        reports.push(SuperstepReport {
            superstep,
            max_change,
            objective: score,
            duration: start.elapsed(),
            messages,
        });
        if max_change < params.tol {
            break;
        }
    }
    (state, reports)
}

/// Sequential sweeps in node order where each update is visible to the
/// nodes after it. Returns the final state and the global objective after
/// every node update, starting with the initial value.
pub fn gauss_seidel_pass(
    graph: &Graph,
    observed: &ObservedLabels,
    params: &ModelParams,
    sweeps: usize,
) -> (BeliefState, Vec<f64>) {
    let mut state = BeliefState::from_observed(graph.num_nodes(), graph.num_types(), observed);
    let mut hints: Vec<Option<f64>> = vec![None; graph.num_nodes()];
    let mut trace = vec![objective(graph, &state, params)];
    for _ in 0..sweeps {
        for u in 0..graph.num_nodes() {
            let clamped = state.node_clamped(u).to_vec();
            if graph.degree(u) == 0 || clamped.iter().all(|&c| c) {
                continue;
            }
            let (out, delta) = {
                let nbhd = Neighborhood::of_node(graph, &state, u);
                let out = solve_node(&nbhd, state.node(u), &clamped, params, hints[u]);
                let delta = node_objective(&nbhd, &out.dists, params) - node_objective(&nbhd, state.node(u), params);
                (out, delta)
            };
            hints[u] = Some(out.step);
            state.set_node(u, out.dists);
            let last = *trace.last().unwrap();
            trace.push(last + delta);
        }
    }
    (state, trace)
}

/// Writes `superstep, max_change, objective, millis, messages` rows.
pub fn write_trace(path: &Path, reports: &[SuperstepReport]) -> Result<()> {
    tsv::write_file(path, |w| {
        writeln!(w, "superstep\tmax_change\tobjective\tmillis\tmessages")?;
        for r in reports {
            writeln!(
                w,
                "{}\t{}\t{}\t{:.3}\t{}",
                r.superstep,
                r.max_change,
                r.objective,
                r.duration.as_secs_f64() * 1e3,
                r.messages
            )?;
        }
        Ok(())
    })
}
