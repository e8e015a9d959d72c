use super::ModelParams;
use crate::belief::{BeliefState, SparseDist};
use crate::graph::Graph;

/// `1 / (1 + e^{-x})` without overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log σ(x)`, accurate for large `|x|`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Weighted probability that both endpoints carry the same label.
pub fn edge_affinity(fu: &SparseDist, fv: &SparseDist, weight: f64) -> f64 {
    weight * fu.dot(fv)
}

fn edge_score(fu: &[SparseDist], fv: &[SparseDist], weights: &[f64], params: &ModelParams) -> f64 {
    let s: f64 = fu
        .iter()
        .zip(fv)
        .zip(weights)
        .map(|((a, b), &w)| edge_affinity(a, b, w))
        .sum();
    params.alpha * s + params.c
}

/// `log σ(α Σ_t w_t r_t + c)` for one edge; `weights` holds one weight per type.
pub fn edge_logscore(fu: &[SparseDist], fv: &[SparseDist], weights: &[f64], params: &ModelParams) -> f64 {
    log_sigmoid(edge_score(fu, fv, weights, params))
}

/// Sum of edge log-scores over all undirected edges, each counted once.
pub fn objective(graph: &Graph, state: &BeliefState, params: &ModelParams) -> f64 {
    let nt = state.num_types();
    let mut weights = vec![0.0; nt];
    let mut total = 0.0;
    for u in 0..graph.num_nodes() {
        for slot in graph.slots(u) {
            let v = graph.slot_neighbor(slot);
            if v <= u {
                continue;
            }
            for (t, w) in weights.iter_mut().enumerate() {
                *w = graph.slot_type_weight(slot, t);
            }
            total += edge_logscore(state.node(u), state.node(v), &weights, params);
        }
    }
    total
}

/// The neighbors of one node as seen from a frozen snapshot: each
/// neighbor's distributions plus the per-type edge weights.
#[derive(Debug, Clone)]
pub struct Neighborhood<'a> {
    num_types: usize,
    dists: Vec<&'a [SparseDist]>,
    weights: Vec<f64>,
}

impl<'a> Neighborhood<'a> {
    pub fn new(num_types: usize) -> Self {
        Neighborhood {
            num_types,
            dists: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn push(&mut self, dists: &'a [SparseDist], weights: &[f64]) {
        assert_eq!(dists.len(), self.num_types);
        assert_eq!(weights.len(), self.num_types);
        self.dists.push(dists);
        self.weights.extend_from_slice(weights);
    }

    /// Unit-weight neighbors.
    pub fn push_unit(&mut self, dists: &'a [SparseDist]) {
        let ones = vec![1.0; self.num_types];
        self.push(dists, &ones);
    }

    pub fn of_node(graph: &Graph, state: &'a BeliefState, u: usize) -> Self {
        let nt = state.num_types();
        let mut n = Neighborhood {
            num_types: nt,
            dists: Vec::with_capacity(graph.degree(u)),
            weights: Vec::with_capacity(graph.degree(u) * nt),
        };
        for slot in graph.slots(u) {
            n.dists.push(state.node(graph.slot_neighbor(slot)));
            n.weights.extend((0..nt).map(|t| graph.slot_type_weight(slot, t)));
        }
        n
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn len(&self) -> usize {
        self.dists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dists.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a [SparseDist], &[f64])> + '_ {
        self.dists
            .iter()
            .copied()
            .zip(self.weights.chunks_exact(self.num_types.max(1)))
    }

    /// `Σ_v max_t w_uvt`; equals `|Γ(u)|` for unit weights.
    pub fn weight_mass(&self) -> f64 {
        self.iter()
            .map(|(_, w)| w.iter().copied().fold(0.0, f64::max))
            .sum()
    }
}

/// The per-node objective `g(f_u)`: sum of log-scores of `u`'s edges.
pub fn node_objective(nbhd: &Neighborhood<'_>, fu: &[SparseDist], params: &ModelParams) -> f64 {
    nbhd.iter().map(|(fv, w)| edge_logscore(fu, fv, w, params)).sum()
}

/// Gradient entries of one type, sorted by label. Covers exactly the
/// labels appearing in some neighbor's distribution; it is zero elsewhere.
pub type TypeGradient = Vec<(u32, f64)>;

/// `∂g/∂f_utℓ = Σ_v α w_uvt f_vtℓ σ(-α Σ_t' w_uvt' r_t' - c)`.
pub fn node_gradient(nbhd: &Neighborhood<'_>, fu: &[SparseDist], params: &ModelParams) -> Vec<TypeGradient> {
    let nt = nbhd.num_types();
    let mut raw: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nt];
    for (fv, w) in nbhd.iter() {
        let coeff = params.alpha * sigmoid(-edge_score(fu, fv, w, params));
        for t in 0..nt {
            let scale = coeff * w[t];
            raw[t].extend(fv[t].entries().iter().map(|&(l, p)| (l, scale * p)));
        }
    }
    raw.into_iter()
        .map(|mut entries| {
            entries.sort_by_key(|e| e.0);
            let mut out: TypeGradient = Vec::with_capacity(entries.len());
            for (l, g) in entries {
                match out.last_mut() {
                    Some(last) if last.0 == l => last.1 += g,
                    _ => out.push((l, g)),
                }
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(l: u32) -> SparseDist {
        SparseDist::point_mass(l)
    }

    #[test]
    fn log_sigmoid_values() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        // log(1 / (1 + e^-10)) = -4.539889921686465e-5
        assert!((log_sigmoid(10.0) - (-4.539889921686465e-5)).abs() < 1e-17);
        assert!(log_sigmoid(1e4).is_finite() && log_sigmoid(1e4) <= 0.0);
        assert!((log_sigmoid(-1e4) + 1e4).abs() < 1e-9);
        assert!((sigmoid(-1e4)).abs() < 1e-300);
        assert_eq!(sigmoid(1e4), 1.0);
    }

    #[test]
    fn logscore_examples() {
        let p = ModelParams::default();
        let a = [pm(0)];
        let b = [pm(0)];
        let c = [pm(1)];
        assert!((edge_logscore(&a, &b, &[1.0], &p) - log_sigmoid(10.0)).abs() < 1e-18);
        assert!((edge_logscore(&a, &c, &[1.0], &p) - 0.5f64.ln()).abs() < 1e-15);
        let p0 = ModelParams { alpha: 1.0, c: 0.0, ..Default::default() };
        assert!((edge_logscore(&[SparseDist::empty()], &b, &[1.0], &p0) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn gradient_single_neighbor_point_mass() {
        let p = ModelParams { alpha: 1.0, c: 0.0, ..Default::default() };
        let nb = [pm(3)];
        let mut n = Neighborhood::new(1);
        n.push_unit(&nb);
        let g = node_gradient(&n, &[SparseDist::empty()], &p);
        assert_eq!(g, vec![vec![(3, 0.5)]]);
    }

    #[test]
    fn isolated_node_has_empty_gradient() {
        let n = Neighborhood::new(2);
        let g = node_gradient(&n, &[SparseDist::empty(), SparseDist::empty()], &ModelParams::default());
        assert!(g.iter().all(Vec::is_empty));
        assert_eq!(node_objective(&n, &[SparseDist::empty(), SparseDist::empty()], &ModelParams::default()), 0.0);
    }
}
