//! Multi-type label propagation baseline: each type independently
//! minimizes `½ Σ_{u~v} w_uv ‖f_u - f_v‖²` by Jacobi sweeps of the
//! weighted-average fixed point.

use crate::belief::{BeliefState, SparseDist};
use crate::engine::{run_inference, Mode, SuperstepReport};
use crate::explain::ModelParams;
use crate::graph::{Graph, ObservedLabels};

/// Quadratic energy of one type; absent sparse entries count as zero.
pub fn lp_energy(graph: &Graph, state: &BeliefState, label_type: usize) -> f64 {
    let mut e = 0.0;
    for u in 0..graph.num_nodes() {
        for slot in graph.slots(u) {
            let v = graph.slot_neighbor(slot);
            if v > u {
                let w = graph.slot_type_weight(slot, label_type);
                e += w * state.get(u, label_type).squared_distance(state.get(v, label_type));
            }
        }
    }
    0.5 * e
}

/// Weighted average of the non-empty neighbor distributions, clipped to
/// the `clip` most probable labels and renormalized. Returns an empty
/// distribution when no neighbor has one.
pub fn lp_update<'a, I>(neighbors: I, clip: usize) -> SparseDist
where
    I: IntoIterator<Item = (&'a SparseDist, f64)>,
{
    let mut degree = 0.0;
    let mut acc = Vec::new();
    for (dist, w) in neighbors {
        if dist.is_empty() {
            continue;
        }
        degree += w;
        acc.extend(dist.entries().iter().map(|&(l, p)| (l, w * p)));
    }
    if degree <= 0.0 {
        return SparseDist::empty();
    }
    for e in &mut acc {
        e.1 /= degree;
    }
    SparseDist::from_entries(acc).clip_renormalize(clip)
}

/// Runs Jacobi label propagation for every type to convergence.
pub fn run_label_propagation(
    graph: &Graph,
    observed: &ObservedLabels,
    params: &ModelParams,
    threads: usize,
) -> (BeliefState, Vec<SuperstepReport>) {
    run_inference(graph, observed, params, Mode::LabelPropagation, threads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn d(e: &[(u32, f64)]) -> SparseDist {
        SparseDist::from_entries(e.to_vec())
    }

    fn edge(w: f64) -> Graph {
        let mut b = GraphBuilder::new();
        let u = b.node("u");
        let v = b.node("v");
        b.add_edge(u, v, w).unwrap();
        b.build(1)
    }

    #[test]
    fn energy_examples() {
        let same: ObservedLabels = [(0, 0, 0), (1, 0, 0)].into_iter().collect();
        let diff: ObservedLabels = [(0, 0, 0), (1, 0, 1)].into_iter().collect();
        let g = edge(1.0);
        assert_eq!(lp_energy(&g, &BeliefState::from_observed(2, 1, &same), 0), 0.0);
        assert_eq!(lp_energy(&g, &BeliefState::from_observed(2, 1, &diff), 0), 1.0);
        assert_eq!(lp_energy(&edge(3.0), &BeliefState::from_observed(2, 1, &diff), 0), 3.0);
    }

    #[test]
    fn update_examples() {
        let a = d(&[(1, 1.0)]);
        let b = d(&[(2, 1.0)]);
        assert_eq!(lp_update([(&a, 1.0), (&a, 2.0)], 8), a);
        assert_eq!(lp_update([(&a, 1.0), (&b, 1.0)], 8).entries(), &[(1, 0.5), (2, 0.5)]);
        assert_eq!(lp_update([(&a, 3.0), (&b, 1.0)], 8).entries(), &[(1, 0.75), (2, 0.25)]);
    }

    #[test]
    fn update_ignores_empty_neighbors_and_abstains() {
        let a = d(&[(1, 1.0)]);
        let e = SparseDist::empty();
        assert_eq!(lp_update([(&a, 1.0), (&e, 5.0)], 8), a);
        assert!(lp_update([(&e, 1.0)], 8).is_empty());
        assert!(lp_update(std::iter::empty(), 8).is_empty());
    }

    #[test]
    fn update_clips_and_renormalizes() {
        let a = d(&[(1, 0.5), (2, 0.3), (3, 0.2)]);
        let out = lp_update([(&a, 1.0)], 2);
        assert_eq!(out.len(), 2);
        assert!((out.get(1) - 0.625).abs() < 1e-15);
        assert!((out.get(2) - 0.375).abs() < 1e-15);
    }
}
