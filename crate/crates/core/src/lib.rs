//! Joint inference of several label types (hometown, college, employer,
//! ...) on a partially labeled graph.
//!
//! The main model asks every edge to be explained by at least one shared
//! label type and solves for sparse per-node label distributions with
//! projected gradient ascent, run as bulk-synchronous supersteps. A
//! multi-type label propagation baseline, a planted-truth graph generator
//! and an evaluation harness come with it.

pub mod belief;
pub mod cli;
pub mod engine;
mod error;
pub mod eval;
pub mod explain;
pub mod graph;
pub mod propagation;
pub mod synth;
mod tsv;

pub use belief::{BeliefState, SparseDist};
pub use engine::{gauss_seidel_pass, run_inference, Mode, SuperstepReport};
pub use error::{Conflict, Error, Result};
pub use explain::{LipschitzRule, ModelParams, StepPolicy};
pub use graph::{Dataset, Graph, GraphBuilder, LabelSchema, NodeKind, ObservedLabels};
