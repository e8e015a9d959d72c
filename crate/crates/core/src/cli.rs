//! The `edgeexplain` command line.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for bad or missing
//! data. Diagnostics go to stderr; stdout only carries progress lines,
//! which `--quiet` silences.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::engine::{run_inference, write_trace, Mode};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_named, hide_fold, make_folds, read_predictions, read_truth, resolution_curve, sweep, user_nodes,
    write_curve, write_observed, write_predictions, write_sweep, Scored, SweepParam, SweepSetup,
};
use crate::explain::{LipschitzRule, ModelParams, StepPolicy};
use crate::graph::{ingest, sparsify_by_age, write_dataset, Dataset, InputFiles};
use crate::synth::{generate, write_generated, GeneratorConfig};

#[derive(Debug, Parser)]
#[command(name = "edgeexplain", version, about = "Joint multi-type label inference on graphs")]
pub struct Cli {
    /// Suppress progress output.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted-truth graph.
    Generate {
        /// Generator TOML; the built-in default mix when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep at most K closest-in-age friends per user.
    Sparsify {
        #[arg(long)]
        k: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hide one cross-validation fold, writing the training view and the
    /// hidden observations.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Zero-based fold to hide.
        #[arg(long)]
        fold: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for the training view.
        #[arg(long)]
        out: PathBuf,
        /// File for the hidden observations.
        #[arg(long)]
        heldout: PathBuf,
    },
    /// Infer label distributions and write ranked predictions.
    Infer {
        #[arg(long, default_value = "edgeexplain")]
        mode: Mode,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-superstep statistics.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Recall@k of predictions against truth.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,3")]
        k: Vec<usize>,
        /// Predictions to report lift against.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate a generated graph once per parameter value.
    Sweep {
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "edgeexplain")]
        mode: Mode,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Run only the first N folds.
        #[arg(long)]
        fold_limit: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// P(correct@3) bucketed by the share of label-known neighbors that
    /// carry the true label.
    ResolutionCurve {
        /// Training view the predictions were made from.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Held-out observations.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long = "type")]
        label_type: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Model flags. Unset flags keep the library defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Maximum entries kept per distribution.
    #[arg(long)]
    pub clip: Option<usize>,
    #[arg(long)]
    pub inner_steps: Option<usize>,
    #[arg(long)]
    pub max_supersteps: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub step: Option<StepPolicy>,
    #[arg(long)]
    pub lipschitz: Option<LipschitzRule>,
}

impl ModelArgs {
    pub fn to_params(&self) -> Result<ModelParams> {
        let d = ModelParams::default();
        let p = ModelParams {
            alpha: self.alpha.unwrap_or(d.alpha),
            c: self.c.unwrap_or(d.c),
            clip_size: self.clip.unwrap_or(d.clip_size),
            inner_steps: self.inner_steps.unwrap_or(d.inner_steps),
            max_supersteps: self.max_supersteps.unwrap_or(d.max_supersteps),
            tol: self.tol.unwrap_or(d.tol),
            step_policy: self.step.unwrap_or(d.step_policy),
            lipschitz_rule: self.lipschitz.unwrap_or(d.lipschitz_rule),
        };
        p.validate()?;
        Ok(p)
    }
}

struct Progress {
    quiet: bool,
}

impl Progress {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        })
    }
}

fn load_dir(dir: &Path) -> Result<Dataset> {
    let files = InputFiles::from_dir(dir);
    require_file(&files.edges)?;
    ingest(&files)
}

fn load_generator(config: Option<&Path>) -> Result<GeneratorConfig> {
    match config {
        Some(p) => {
            require_file(p)?;
            GeneratorConfig::load(p)
        }
        None => Ok(GeneratorConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let progress = Progress { quiet: cli.quiet };
    match cli.command {
        Command::Generate { config, seed, out } => {
            let mut cfg = load_generator(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let gen = generate(&cfg)?;
            write_generated(&out, &gen)?;
            progress.say(format!(
                "generated {} nodes, {} edges into {}",
                gen.dataset.graph.num_nodes(),
                gen.dataset.graph.num_edges(),
                out.display()
            ));
        }
        Command::Sparsify { k, input, out } => {
            let data = load_dir(&input)?;
            let graph = sparsify_by_age(&data.graph, k)?;
            progress.say(format!("kept {} of {} edges", graph.num_edges(), data.graph.num_edges()));
            write_dataset(&out, &Dataset { graph, ..data })?;
        }
        Command::Split {
            input,
            folds,
            fold,
            seed,
            out,
            heldout,
        } => {
            let data = load_dir(&input)?;
            if fold >= folds {
                return Err(Error::InvalidParam(format!("fold {fold} out of range for {folds} folds")));
            }
            let parts = make_folds(&user_nodes(&data.graph), folds, seed)?;
            let view = hide_fold(&data.observed, &parts[fold]);
            write_observed(&heldout, &data.graph, &data.schema, &view.held_out)?;
            progress.say(format!("held out {} observations", view.held_out.len()));
            write_dataset(
                &out,
                &Dataset {
                    observed: view.train,
                    ..data
                },
            )?;
        }
        Command::Infer {
            mode,
            model,
            threads,
            input,
            out,
            trace,
        } => {
            let params = model.to_params()?;
            let data = load_dir(&input)?;
            let (state, reports) = run_inference(&data.graph, &data.observed, &params, mode, threads);
            for r in &reports {
                progress.say(format!(
                    "superstep {}: max change {:.3e}, objective {:.6}",
                    r.superstep, r.max_change, r.objective
                ));
            }
            write_predictions(&out, &data.graph, &data.schema, &state)?;
            if let Some(path) = trace {
                write_trace(&path, &reports)?;
            }
        }
        Command::Evaluate {
            pred,
            truth,
            k,
            baseline,
            out,
        } => {
            require_file(&pred)?;
            require_file(&truth)?;
            if let Some(b) = &baseline {
                require_file(b)?;
            }
            let truth = read_truth(&truth)?;
            let report = evaluate_named(&read_predictions(&pred)?, &truth, &k)?;
            let base = match &baseline {
                Some(b) => Some(evaluate_named(&read_predictions(b)?, &truth, &k)?),
                None => None,
            };
            report.write(&out, base.as_ref())?;
            for (t, tr) in report.types.iter().enumerate() {
                let cells: Vec<String> = k.iter().map(|&k| format!("recall@{k} {:.4}", report.recall(t, k))).collect();
                progress.say(format!("{} ({} pairs): {}", tr.name, tr.evaluable, cells.join(", ")));
            }
        }
        Command::Sweep {
            param,
            values,
            config,
            mode,
            model,
            folds,
            fold_limit,
            seed,
            threads,
            out,
        } => {
            let setup = SweepSetup {
                generator: load_generator(config.as_deref())?,
                params: model.to_params()?,
                mode,
                folds,
                fold_limit,
                seed,
                threads,
                ks: vec![1, 3],
            };
            let rows = sweep(param, &values, &setup)?;
            for r in &rows {
                progress.say(format!(
                    "{param}={}: {} edges, {} supersteps, {} ms",
                    r.value,
                    r.edges,
                    r.supersteps,
                    r.inference_time.as_millis()
                ));
            }
            write_sweep(&out, param, &rows)?;
        }
        Command::ResolutionCurve {
            input,
            pred,
            truth,
            label_type,
            out,
        } => {
            require_file(&pred)?;
            require_file(&truth)?;
            let data = load_dir(&input)?;
            let t = data
                .schema
                .type_index(&label_type)
                .ok_or_else(|| Error::InvalidParam(format!("unknown label type {label_type:?}")))?;
            let preds = read_predictions(&pred)?;
            let mut scored = Vec::new();
            for row in read_truth(&truth)?.into_iter().filter(|r| r.label_type == label_type) {
                let node = data.graph.index_of(&row.node).ok_or_else(|| Error::UnknownNode {
                    path: truth.clone(),
                    line: row.line,
                    node: row.node.clone(),
                })?;
                scored.push(Scored {
                    node,
                    label_type: t,
                    label: data.schema.label_index(t, &row.label),
                    rank: preds.rank_of(&row.node, &row.label_type, &row.label),
                });
            }
            let curve = resolution_curve(&data.graph, &data.observed, t, &scored);
            write_curve(&out, &curve)?;
            progress.say(format!(
                "{} pairs bucketed, {} without label-known neighbors, spearman {:.3}",
                scored.len() - curve.excluded,
                curve.excluded,
                curve.spearman()
            ));
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e @ Error::InvalidParam(_)) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_valid() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unset_flags_keep_library_defaults() {
        assert_eq!(ModelArgs::default().to_params().unwrap(), ModelParams::default());
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(main_with_args(["edgeexplain", "infer", "--bogus"]), 1);
        assert_eq!(main_with_args(["edgeexplain", "infer", "--in", "x", "--out", "y", "--alpha", "-1"]), 1);
    }
}
