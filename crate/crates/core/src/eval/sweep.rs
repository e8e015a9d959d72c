use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use super::{cross_validate, EvalReport};
use crate::engine::Mode;
use crate::error::{Error, Result};
use crate::explain::ModelParams;
use crate::graph::{sparsify_by_age, Dataset};
use crate::synth::{generate, GeneratorConfig};
use crate::tsv;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    /// Per-user friend budget of age-based sparsification.
    K,
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "alpha" => Ok(SweepParam::Alpha),
            "K" | "k" => Ok(SweepParam::K),
            _ => Err(format!("unknown sweep parameter {s:?} (expected alpha or K)")),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Alpha => "alpha",
            SweepParam::K => "K",
        })
    }
}

/// Everything held fixed across the values of a sweep.
#[derive(Debug, Clone)]
pub struct SweepSetup {
    pub generator: GeneratorConfig,
    pub params: ModelParams,
    pub mode: Mode,
    pub folds: usize,
    /// Run only the first few folds when set.
    pub fold_limit: Option<usize>,
    pub seed: u64,
    pub threads: usize,
    pub ks: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub report: EvalReport,
    pub edges: usize,
    pub inference_time: Duration,
    pub supersteps: usize,
}

fn run_one(data: &Dataset, params: &ModelParams, setup: &SweepSetup) -> Result<(EvalReport, Duration, usize)> {
    let cv = cross_validate(
        data,
        params,
        setup.mode,
        setup.folds,
        setup.fold_limit,
        setup.seed,
        setup.threads,
    )?;
    Ok((cv.report(&data.schema, &setup.ks)?, cv.inference_time, cv.supersteps))
}

/// Generates one planted graph and cross-validates it once per value.
/// Every run shares the graph, the folds and the seed.
pub fn sweep(param: SweepParam, values: &[f64], setup: &SweepSetup) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidParam("sweep needs at least one value".into()));
    }
    let data = generate(&setup.generator)?.dataset;
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let row = match param {
            SweepParam::Alpha => {
                let params = ModelParams {
                    alpha: value,
                    ..setup.params.clone()
                };
                params.validate()?;
                let (report, time, steps) = run_one(&data, &params, setup)?;
                SweepRow {
                    value,
                    report,
                    edges: data.graph.num_edges(),
                    inference_time: time,
                    supersteps: steps,
                }
            }
            SweepParam::K => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::InvalidParam(format!("K must be a positive integer, got {value}")));
                }
                let sparse = Dataset {
                    graph: sparsify_by_age(&data.graph, value as usize)?,
                    observed: data.observed.clone(),
                    schema: data.schema.clone(),
                };
                let (report, time, steps) = run_one(&sparse, &setup.params, setup)?;
                SweepRow {
                    value,
                    report,
                    edges: sparse.graph.num_edges(),
                    inference_time: time,
                    supersteps: steps,
                }
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

/// `param<TAB>value<TAB>type<TAB>recall1<TAB>recall3<TAB>lift1<TAB>lift3<TAB>millis`
/// with lifts against the first row.
pub fn write_sweep(path: &Path, param: SweepParam, rows: &[SweepRow]) -> Result<()> {
    let Some(base) = rows.first() else {
        return tsv::write_file(path, |_| Ok(()));
    };
    tsv::write_file(path, |w| {
        writeln!(w, "param\tvalue\ttype\trecall1\trecall3\tlift1\tlift3\tmillis")?;
        for row in rows {
            let r = &row.report;
            for (t, tr) in r.types.iter().enumerate() {
                let bt = base.report.type_index(&tr.name).expect("same schema");
                let (r1, r3) = (r.recall(t, 1), r.recall(t, 3));
                let l1 = super::lift(r1, base.report.recall(bt, 1));
                let l3 = super::lift(r3, base.report.recall(bt, 3));
                writeln!(
                    w,
                    "{param}\t{}\t{}\t{r1}\t{r3}\t{l1}\t{l3}\t{}",
                    row.value,
                    tr.name,
                    row.inference_time.as_millis()
                )?;
            }
        }
        Ok(())
    })
}
