//! Python bindings: load or generate datasets, run inference, read ranked
//! predictions and cross-validate, all from Python.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;

use edgeexplain::engine::SuperstepReport;
use edgeexplain::eval::{cross_validate, write_predictions};
use edgeexplain::explain;
use edgeexplain::graph::{ingest, sparsify_by_age, write_dataset, InputFiles};
use edgeexplain::synth::{generate, make_fig1_instance, make_group_instance, GeneratorConfig};
use edgeexplain::{BeliefState, Dataset, Error, Mode, ModelParams, StepPolicy};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

/// A graph with its observed labels.
#[pyclass(name = "Dataset", module = "edgeexplain", frozen)]
struct PyDataset {
    inner: Arc<Dataset>,
}

impl PyDataset {
    fn wrap(d: Dataset) -> Self {
        PyDataset { inner: Arc::new(d) }
    }

    fn node(&self, id: &str) -> PyResult<usize> {
        self.inner
            .graph
            .index_of(id)
            .ok_or_else(|| PyKeyError::new_err(format!("unknown node {id:?}")))
    }

    fn label_type(&self, name: &str) -> PyResult<usize> {
        self.inner
            .schema
            .type_index(name)
            .ok_or_else(|| PyKeyError::new_err(format!("unknown label type {name:?}")))
    }
}

#[pymethods]
impl PyDataset {
    /// Reads `edges.tsv` and the optional label, age, group and per-type
    /// weight files from a directory.
    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        ingest(&InputFiles::from_dir(&dir)).map(Self::wrap).map_err(to_py)
    }

    /// Generates a planted-truth graph from a TOML config string (the
    /// built-in mix when omitted).
    #[staticmethod]
    #[pyo3(signature = (config=None, seed=None))]
    fn generate(config: Option<&str>, seed: Option<u64>) -> PyResult<Self> {
        let mut cfg = match config {
            Some(text) => GeneratorConfig::from_toml_str(text).map_err(PyValueError::new_err)?,
            None => GeneratorConfig::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        generate(&cfg).map(|g| Self::wrap(g.dataset)).map_err(to_py)
    }

    /// The small graph where a user's hometown friends outvote the
    /// friends from the user's actual city. The user is node `"u"`.
    #[staticmethod]
    fn fig1() -> Self {
        Self::wrap(make_fig1_instance().dataset)
    }

    /// Six users linked only through group `"g"`; `"m6"` is unlabeled.
    #[staticmethod]
    fn group_example() -> Self {
        Self::wrap(make_group_instance().dataset)
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        write_dataset(&dir, &self.inner).map_err(to_py)
    }

    fn sparsify(&self, k: usize) -> PyResult<Self> {
        let graph = sparsify_by_age(&self.inner.graph, k).map_err(to_py)?;
        Ok(Self::wrap(Dataset {
            graph,
            observed: self.inner.observed.clone(),
            schema: self.inner.schema.clone(),
        }))
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.graph.num_nodes()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.graph.num_edges()
    }

    #[getter]
    fn label_types(&self) -> Vec<String> {
        self.inner.schema.type_names().map(str::to_string).collect()
    }

    #[getter]
    fn num_observed(&self) -> usize {
        self.inner.observed.len()
    }

    fn neighbors(&self, node: &str) -> PyResult<Vec<String>> {
        let u = self.node(node)?;
        let g = &self.inner.graph;
        Ok(g.neighbors(u).iter().map(|&v| g.id(v as usize).to_string()).collect())
    }

    /// Observed label of `node` for `label_type`, if any.
    fn observed(&self, node: &str, label_type: &str) -> PyResult<Option<String>> {
        let (u, t) = (self.node(node)?, self.label_type(label_type)?);
        Ok(self
            .inner
            .observed
            .get(u, t)
            .map(|l| self.inner.schema.label_name(t, l).to_string()))
    }

    /// Runs `"edgeexplain"` or `"lp"` inference.
    #[pyo3(signature = (
        mode="edgeexplain", alpha=10.0, c=0.0, clip=8, inner_steps=1,
        max_supersteps=30, tol=1e-4, step="backtracking", threads=1
    ))]
    #[allow(clippy::too_many_arguments)]
    fn infer(
        &self,
        py: Python<'_>,
        mode: &str,
        alpha: f64,
        c: f64,
        clip: usize,
        inner_steps: usize,
        max_supersteps: usize,
        tol: f64,
        step: &str,
        threads: usize,
    ) -> PyResult<Beliefs> {
        let mode: Mode = parse(mode)?;
        let params = ModelParams {
            alpha,
            c,
            clip_size: clip,
            inner_steps,
            max_supersteps,
            tol,
            step_policy: parse::<StepPolicy>(step)?,
            ..ModelParams::default()
        };
        params.validate().map_err(to_py)?;
        let data = Arc::clone(&self.inner);
        let (state, reports) =
            py.detach(|| edgeexplain::run_inference(&data.graph, &data.observed, &params, mode, threads));
        Ok(Beliefs { data, state, reports })
    }

    /// Cross-validated `(type, recall@1, recall@3)` rows.
    #[pyo3(signature = (mode="edgeexplain", alpha=10.0, folds=5, seed=0, fold_limit=None, threads=1))]
    #[allow(clippy::too_many_arguments)]
    fn cross_validate(
        &self,
        py: Python<'_>,
        mode: &str,
        alpha: f64,
        folds: usize,
        seed: u64,
        fold_limit: Option<usize>,
        threads: usize,
    ) -> PyResult<Vec<(String, f64, f64)>> {
        let mode: Mode = parse(mode)?;
        let params = ModelParams {
            alpha,
            ..ModelParams::default()
        };
        params.validate().map_err(to_py)?;
        let data = Arc::clone(&self.inner);
        let report = py
            .detach(|| {
                cross_validate(&data, &params, mode, folds, fold_limit, seed, threads)
                    .and_then(|cv| cv.report(&data.schema, &[1, 3]))
            })
            .map_err(to_py)?;
        Ok((0..report.types.len())
            .map(|t| (report.types[t].name.clone(), report.recall(t, 1), report.recall(t, 3)))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(nodes={}, edges={}, types={:?})",
            self.num_nodes(),
            self.num_edges(),
            self.label_types()
        )
    }
}

/// Inferred label distributions.
#[pyclass(module = "edgeexplain", frozen)]
struct Beliefs {
    data: Arc<Dataset>,
    state: BeliefState,
    reports: Vec<SuperstepReport>,
}

#[pymethods]
impl Beliefs {
    /// `(label, probability)` pairs, most probable first.
    fn ranked(&self, node: &str, label_type: &str) -> PyResult<Vec<(String, f64)>> {
        let u = self
            .data
            .graph
            .index_of(node)
            .ok_or_else(|| PyKeyError::new_err(format!("unknown node {node:?}")))?;
        let t = self
            .data
            .schema
            .type_index(label_type)
            .ok_or_else(|| PyKeyError::new_err(format!("unknown label type {label_type:?}")))?;
        Ok(self
            .state
            .get(u, t)
            .ranked()
            .into_iter()
            .map(|(l, p)| (self.data.schema.label_name(t, l).to_string(), p))
            .collect())
    }

    fn top(&self, node: &str, label_type: &str) -> PyResult<Option<String>> {
        Ok(self.ranked(node, label_type)?.into_iter().next().map(|(l, _)| l))
    }

    #[getter]
    fn supersteps(&self) -> usize {
        self.reports.len()
    }

    /// Objective after each superstep (total quadratic energy for `lp`).
    #[getter]
    fn objective_trace(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.objective).collect()
    }

    /// Writes `node, type, rank, label, prob` rows for every user.
    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_predictions(&path, &self.data.graph, &self.data.schema, &self.state).map_err(to_py)
    }
}

/// Euclidean projection of `v` onto the probability simplex.
#[pyfunction]
fn project_simplex(v: Vec<f64>) -> PyResult<Vec<f64>> {
    explain::project_simplex(&v).map_err(to_py)
}

/// Closest point of the simplex with at most `k` non-zero entries.
#[pyfunction]
fn project_simplex_ksparse(v: Vec<f64>, k: usize) -> PyResult<Vec<f64>> {
    explain::project_simplex_ksparse(&v, k).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "edgeexplain")]
fn edgeexplain_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<Beliefs>()?;
    m.add_function(wrap_pyfunction!(project_simplex, m)?)?;
    m.add_function(wrap_pyfunction!(project_simplex_ksparse, m)?)?;
    Ok(())
}
