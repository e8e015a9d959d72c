use super::objective::{node_gradient, node_objective, Neighborhood, TypeGradient};
use super::simplex::project_simplex_ksparse;
use super::{LipschitzRule, ModelParams, StepPolicy};
use crate::belief::SparseDist;

const MAX_HALVINGS: usize = 60;
const MAX_STEP_GROWTH: f64 = (1u64 << 20) as f64;

/// Result of [`solve_node`]: the new distributions for every type (clamped
/// types copied through) and the last accepted step size.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeUpdate {
    pub dists: Vec<SparseDist>,
    pub step: f64,
}

/// `L` for the node under the configured rule; zero for isolated nodes.
pub fn lipschitz_constant(nbhd: &Neighborhood<'_>, params: &ModelParams) -> f64 {
    let mass = nbhd.weight_mass();
    match params.lipschitz_rule {
        LipschitzRule::Paper => params.alpha * mass,
        LipschitzRule::Conservative => params.alpha.max(params.alpha * params.alpha / 4.0) * mass,
    }
}

/// Runs `params.inner_steps` projected gradient ascent steps on the
/// node's objective, holding neighbors fixed.
///
/// Each step moves along the gradient over the candidate support (current
/// support ∪ neighbor labels) and applies the `clip_size`-sparse simplex
/// projection per unclamped type. `step_hint` is the step accepted by
/// this node last time; backtracking starts from twice that value.
pub fn solve_node(
    nbhd: &Neighborhood<'_>,
    current: &[SparseDist],
    clamped: &[bool],
    params: &ModelParams,
    step_hint: Option<f64>,
) -> NodeUpdate {
    let lip = lipschitz_constant(nbhd, params);
    let base_step = if lip > 0.0 { 1.0 / lip } else { 0.0 };
    let mut f = current.to_vec();
    if nbhd.is_empty() || lip <= 0.0 || clamped.iter().all(|&c| c) {
        return NodeUpdate {
            dists: f,
            step: step_hint.unwrap_or(base_step),
        };
    }

    let mut step = step_hint.filter(|s| *s > 0.0).unwrap_or(base_step);
    for _ in 0..params.inner_steps {
        let grad = node_gradient(nbhd, &f, params);
        match params.step_policy {
            StepPolicy::Lipschitz => {
                step = base_step;
                f = proximal_step(&f, &grad, clamped, step, params.clip_size);
            }
            StepPolicy::Backtracking => {
                let g0 = node_objective(nbhd, &f, params);
                let mut trial = (2.0 * step).min(base_step * MAX_STEP_GROWTH);
                let mut accepted = None;
                for _ in 0..MAX_HALVINGS {
                    let cand = proximal_step(&f, &grad, clamped, trial, params.clip_size);
                    if cand == f {
                        accepted = Some(cand);
                        break;
                    }
                    let g1 = node_objective(nbhd, &cand, params);
                    let (lin, sq) = displacement_terms(&f, &cand, &grad);
                    let model = g0 + lin - sq / (2.0 * trial);
                    let slack = 1e-12 * (1.0 + g0.abs());
                    if g1 >= g0 && g1 >= model - slack {
                        accepted = Some(cand);
                        break;
                    }
                    trial *= 0.5;
                }
                step = trial;
                match accepted {
                    Some(cand) => f = cand,
                    None => break,
                }
            }
        }
    }
    NodeUpdate { dists: f, step }
}

/// One gradient step of size `step` followed by the sparse projection.
fn proximal_step(
    f: &[SparseDist],
    grad: &[TypeGradient],
    clamped: &[bool],
    step: f64,
    clip: usize,
) -> Vec<SparseDist> {
    f.iter()
        .zip(grad)
        .zip(clamped)
        .map(|((ft, gt), &is_clamped)| {
            if is_clamped {
                return ft.clone();
            }
            let (labels, q) = ascent_point(ft, gt, step);
            if labels.is_empty() {
                return ft.clone();
            }
            let p = project_simplex_ksparse(&q, clip).expect("non-empty finite candidate vector");
            SparseDist::from_entries(labels.into_iter().zip(p).filter(|e| e.1 > 0.0).collect())
        })
        .collect()
}

/// Merges current support with gradient support: returns sorted labels
/// and `f + step * grad` over them.
fn ascent_point(ft: &SparseDist, gt: &TypeGradient, step: f64) -> (Vec<u32>, Vec<f64>) {
    let a = ft.entries();
    let mut labels = Vec::with_capacity(a.len() + gt.len());
    let mut q = Vec::with_capacity(a.len() + gt.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < gt.len() {
        if j == gt.len() || (i < a.len() && a[i].0 < gt[j].0) {
            labels.push(a[i].0);
            q.push(a[i].1);
            i += 1;
        } else if i == a.len() || gt[j].0 < a[i].0 {
            labels.push(gt[j].0);
            q.push(step * gt[j].1);
            j += 1;
        } else {
            labels.push(a[i].0);
            q.push(a[i].1 + step * gt[j].1);
            i += 1;
            j += 1;
        }
    }
    (labels, q)
}

/// `(⟨∇g, new - old⟩, ‖new - old‖²)`.
fn displacement_terms(old: &[SparseDist], new: &[SparseDist], grad: &[TypeGradient]) -> (f64, f64) {
    let mut lin = 0.0;
    let mut sq = 0.0;
    for ((o, n), g) in old.iter().zip(new).zip(grad) {
        sq += o.squared_distance(n);
        for &(l, gv) in g {
            lin += gv * (n.get(l) - o.get(l));
        }
    }
    (lin, sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(l: u32) -> SparseDist {
        SparseDist::point_mass(l)
    }

    #[test]
    fn all_clamped_is_unchanged() {
        let nb = [pm(1)];
        let mut n = Neighborhood::new(1);
        n.push_unit(&nb);
        let cur = [pm(0)];
        let out = solve_node(&n, &cur, &[true], &ModelParams::default(), None);
        assert_eq!(out.dists, cur);
    }

    #[test]
    fn isolated_node_is_unchanged() {
        let n = Neighborhood::new(1);
        let cur = [SparseDist::empty()];
        let out = solve_node(&n, &cur, &[false], &ModelParams::default(), None);
        assert_eq!(out.dists, cur);
    }

    #[test]
    fn single_step_from_empty_reaches_the_neighbor_label() {
        let nb = [pm(7)];
        let mut n = Neighborhood::new(1);
        n.push_unit(&nb);
        for policy in [StepPolicy::Lipschitz, StepPolicy::Backtracking] {
            let p = ModelParams { step_policy: policy, ..Default::default() };
            let out = solve_node(&n, &[SparseDist::empty()], &[false], &p, None);
            assert_eq!(out.dists, vec![pm(7)], "{policy}");
        }
    }

    #[test]
    fn clamped_types_pass_through() {
        let nb = [pm(1), pm(2)];
        let mut n = Neighborhood::new(2);
        n.push_unit(&nb);
        let cur = [pm(5), SparseDist::empty()];
        let out = solve_node(&n, &cur, &[true, false], &ModelParams::default(), None);
        assert_eq!(out.dists[0], pm(5));
        assert_eq!(out.dists[1], pm(2));
    }

    #[test]
    fn lipschitz_rules() {
        let nb = [pm(1)];
        let mut n = Neighborhood::new(1);
        n.push_unit(&nb);
        n.push_unit(&nb);
        let p = ModelParams { alpha: 10.0, ..Default::default() };
        assert_eq!(lipschitz_constant(&n, &p), 20.0);
        let p = ModelParams { lipschitz_rule: LipschitzRule::Conservative, ..p };
        assert_eq!(lipschitz_constant(&n, &p), 50.0);
        let p = ModelParams { alpha: 2.0, ..p };
        assert_eq!(lipschitz_constant(&n, &p), 4.0);
    }
}
