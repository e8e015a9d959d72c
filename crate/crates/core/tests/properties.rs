use approx::assert_relative_eq;
use proptest::prelude::*;

use edgeexplain::eval::{hide_fold, make_folds};
use edgeexplain::explain::{node_gradient, node_objective, project_simplex, project_simplex_ksparse, Neighborhood};
use edgeexplain::graph::{ingest, write_dataset, InputFiles};
use edgeexplain::propagation::lp_update;
use edgeexplain::synth::{generate, GeneratorConfig};
use edgeexplain::{run_inference, GraphBuilder, Mode, ModelParams, ObservedLabels, SparseDist};

fn dense(labels: u32) -> impl Strategy<Value = SparseDist> {
    prop::collection::vec(0.05f64..1.0, labels as usize).prop_map(|w| {
        let total: f64 = w.iter().sum();
        SparseDist::from_entries(w.iter().enumerate().map(|(l, x)| (l as u32, x / total)).collect())
    })
}

fn sparse(labels: u32) -> impl Strategy<Value = SparseDist> {
    prop::collection::vec((0..labels, 0.0f64..1.0), 0..4).prop_map(SparseDist::from_entries)
}

prop_compose! {
    fn small_graph()(n in 3usize..14)
        (edges in prop::collection::vec((0..n, 0..n, 1u8..4), 1..40),
         labels in prop::collection::vec((0..n, 0usize..2, 0u32..4), 0..20),
         n in Just(n))
        -> (usize, Vec<(usize, usize, f64)>, Vec<(usize, usize, u32)>) {
        let edges = edges.into_iter().filter(|e| e.0 != e.1).map(|(u, v, w)| (u, v, w as f64)).collect();
        (n, edges, labels)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Optimality conditions: positive outputs are v - θ for one shared θ,
    // and every zeroed coordinate sits at or below θ.
    #[test]
    fn simplex_projection_kkt(v in prop::collection::vec(-3.0f64..3.0, 1..12)) {
        let p = project_simplex(&v).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let (i, _) = p.iter().enumerate().find(|e| *e.1 > 0.0).unwrap();
        let theta = v[i] - p[i];
        for (x, y) in v.iter().zip(&p) {
            if *y > 0.0 {
                assert_relative_eq!(x - y, theta, epsilon = 1e-12);
            } else {
                prop_assert!(*x <= theta + 1e-12);
            }
        }
    }

    #[test]
    fn ksparse_keeps_the_largest(v in prop::collection::vec(-2.0f64..2.0, 1..10), k in 1usize..5) {
        let p = project_simplex_ksparse(&v, k).unwrap();
        prop_assert!(p.iter().filter(|&&x| x > 0.0).count() <= k);
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        let top = &order[..k.min(v.len())];
        prop_assert!((0..v.len()).all(|i| p[i] == 0.0 || top.contains(&i)));
    }

    #[test]
    fn gradient_matches_central_differences(
        fu in prop::collection::vec(dense(3), 2),
        nbrs in prop::collection::vec((prop::collection::vec(sparse(3), 2), 0.5f64..2.0), 1..5),
        alpha in 0.1f64..20.0,
        c in -2.0f64..2.0,
    ) {
        let params = ModelParams { alpha, c, ..ModelParams::default() };
        let mut nbhd = Neighborhood::new(2);
        for (d, w) in &nbrs {
            nbhd.push(d, &[*w, 1.0]);
        }
        let grad = node_gradient(&nbhd, &fu, &params);
        let h = 1e-6;
        for t in 0..2 {
            for l in 0..3u32 {
                let shift = |delta: f64| {
                    let mut f = fu.clone();
                    let mut e = f[t].entries().to_vec();
                    e.iter_mut().filter(|x| x.0 == l).for_each(|x| x.1 += delta);
                    f[t] = SparseDist::from_entries(e);
                    node_objective(&nbhd, &f, &params)
                };
                let fd = (shift(h) - shift(-h)) / (2.0 * h);
                let g = grad[t].iter().find(|e| e.0 == l).map_or(0.0, |e| e.1);
                assert_relative_eq!(g, fd, epsilon = 1e-5, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn lp_update_matches_dense_average(nbrs in prop::collection::vec((sparse(5), 0.1f64..3.0), 0..6)) {
        let got = lp_update(nbrs.iter().map(|(d, w)| (d, *w)), 5);
        let mut sum = [0.0; 5];
        let mut mass = 0.0;
        for (d, w) in nbrs.iter().filter(|(d, _)| !d.is_empty()) {
            mass += w;
            for l in 0..5u32 {
                sum[l as usize] += w * d.get(l);
            }
        }
        if mass == 0.0 {
            prop_assert!(got.is_empty());
        } else {
            let total: f64 = sum.iter().sum();
            for l in 0..5u32 {
                assert_relative_eq!(got.get(l), sum[l as usize] / total, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn inference_ignores_thread_count((n, edges, labels) in small_graph(), lp in any::<bool>()) {
        let mut b = GraphBuilder::new();
        for u in 0..n {
            b.node(&format!("n{u}"));
        }
        for (u, v, w) in edges {
            let _ = b.add_edge(u, v, w);
        }
        let graph = b.build(2);
        let mut observed = ObservedLabels::new();
        for (u, t, l) in labels {
            let _ = observed.insert(u, t, l);
        }
        let mode = if lp { Mode::LabelPropagation } else { Mode::EdgeExplain };
        let params = ModelParams { max_supersteps: 5, ..ModelParams::default() };
        let (one, r1) = run_inference(&graph, &observed, &params, mode, 1);
        let (many, r3) = run_inference(&graph, &observed, &params, mode, 3);
        prop_assert_eq!(one, many);
        let trace = |r: &[edgeexplain::SuperstepReport]| r.iter().map(|x| x.objective.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(trace(&r1), trace(&r3));
    }

    // Once every node that can be reached from a label holds a distribution,
    // Jacobi averaging is a descent step on the energy (clip inactive).
    #[test]
    fn lp_energy_settles_into_descent((n, edges, labels) in small_graph()) {
        let mut b = GraphBuilder::new();
        for u in 0..n {
            b.node(&format!("n{u}"));
        }
        for (u, v, w) in edges {
            let _ = b.add_edge(u, v, w);
        }
        let graph = b.build(1);
        let mut observed = ObservedLabels::new();
        for (u, _, l) in labels {
            let _ = observed.insert(u, 0, l);
        }
        let params = ModelParams { max_supersteps: n + 40, tol: 1e-300, clip_size: 4, ..ModelParams::default() };
        let (_, reports) = run_inference(&graph, &observed, &params, Mode::LabelPropagation, 1);
        let energy: Vec<f64> = reports.iter().map(|r| r.objective).collect();
        for w in energy[n.min(energy.len())..].windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * (1.0 + w[0]), "{energy:?}");
        }
    }

    #[test]
    fn folds_partition_and_hide(nodes in prop::collection::btree_set(0usize..500, 2..80), folds in 2usize..7, seed in any::<u64>()) {
        let nodes: Vec<usize> = nodes.into_iter().collect();
        prop_assume!(nodes.len() >= folds);
        let parts = make_folds(&nodes, folds, seed).unwrap();
        prop_assert_eq!(parts.len(), folds);
        let mut all: Vec<usize> = parts.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(&all, &nodes);

        let mut observed = ObservedLabels::new();
        for &u in &nodes {
            observed.insert(u, u % 2, (u % 3) as u32).unwrap();
        }
        let view = hide_fold(&observed, &parts[0]);
        prop_assert_eq!(view.train.len() + view.held_out.len(), observed.len());
        prop_assert!(view.held_out.iter().all(|(u, _, _)| parts[0].contains(&u)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn generated_datasets_survive_a_round_trip(seed in any::<u64>()) {
        let cfg = GeneratorConfig { seed, ..GeneratorConfig::default() };
        let data = generate(&cfg).unwrap().dataset;
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &data).unwrap();
        let back = ingest(&InputFiles::from_dir(dir.path())).unwrap();
        prop_assert_eq!(back.graph.num_nodes(), data.graph.num_nodes());
        let named = |d: &edgeexplain::Dataset| {
            let mut e: Vec<(String, String, u64)> = d
                .graph
                .edges()
                .map(|(u, v, w)| {
                    let (a, b) = (d.graph.id(u).to_string(), d.graph.id(v).to_string());
                    if a < b { (a, b, w.to_bits()) } else { (b, a, w.to_bits()) }
                })
                .collect();
            e.sort();
            e
        };
        prop_assert_eq!(named(&back), named(&data));
        let obs = |d: &edgeexplain::Dataset| {
            let mut o: Vec<(String, String, String)> = d
                .observed
                .iter()
                .map(|(u, t, l)| {
                    (d.graph.id(u).into(), d.schema.type_name(t).into(), d.schema.label_name(t, l).into())
                })
                .collect();
            o.sort();
            o
        };
        prop_assert_eq!(obs(&back), obs(&data));
        for u in 0..data.graph.num_nodes() {
            let v = back.graph.index_of(data.graph.id(u)).unwrap();
            prop_assert_eq!(back.graph.age(v), data.graph.age(u));
        }
    }
}

// Before the empty nodes fill in, a Jacobi step can raise the energy: x
// adopts a's label while its two still-empty neighbors adopt the other one.
#[test]
fn lp_energy_can_rise_while_filling_in() {
    let mut b = GraphBuilder::new();
    let [x, y, z, a, p, q] = ["x", "y", "z", "a", "p", "q"].map(|id| b.node(id));
    for (u, v) in [(x, a), (x, y), (x, z), (y, p), (z, q)] {
        b.add_edge(u, v, 1.0).unwrap();
    }
    let graph = b.build(1);
    let observed: ObservedLabels = [(a, 0, 0), (p, 0, 1), (q, 0, 1)].into_iter().collect();
    let params = ModelParams { max_supersteps: 1, ..ModelParams::default() };
    let before = edgeexplain::propagation::lp_energy(&graph, &edgeexplain::BeliefState::from_observed(6, 1, &observed), 0);
    let (_, reports) = run_inference(&graph, &observed, &params, Mode::LabelPropagation, 1);
    assert!(reports[0].objective > before, "{before} -> {}", reports[0].objective);
}
