//! The edge-explanation objective and its per-node solver.
//!
//! Every edge `u ~ v` contributes `log σ(α Σ_t w_uvt r(u, v, t) + c)`,
//! where `r` is the probability that both endpoints share a label of type
//! `t`. For fixed neighbors this is concave in `f_u`, so each node runs
//! projected gradient ascent onto a product of probability simplices.

mod objective;
mod simplex;
mod solver;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use objective::{
    edge_affinity, edge_logscore, log_sigmoid, node_gradient, node_objective, objective, sigmoid, Neighborhood,
    TypeGradient,
};
pub use simplex::{project_simplex, project_simplex_ksparse};
pub use solver::{lipschitz_constant, solve_node, NodeUpdate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPolicy {
    /// Constant step `1 / L`.
    Lipschitz,
    /// Start from the previous accepted step (or `1 / L`) and halve until
    /// the proximal sufficient-ascent test passes.
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipschitzRule {
    /// `α · |Γ(u)|`.
    Paper,
    /// `max(α, α²/4) · |Γ(u)|`, a valid bound on the gradient's Lipschitz
    /// constant for unit weights.
    Conservative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub c: f64,
    pub clip_size: usize,
    pub inner_steps: usize,
    pub max_supersteps: usize,
    pub tol: f64,
    pub step_policy: StepPolicy,
    pub lipschitz_rule: LipschitzRule,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha: 10.0,
            c: 0.0,
            clip_size: 8,
            inner_steps: 1,
            max_supersteps: 30,
            tol: 1e-4,
            step_policy: StepPolicy::Backtracking,
            lipschitz_rule: LipschitzRule::Paper,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParam(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !self.c.is_finite() {
            return Err(Error::InvalidParam(format!("c must be finite, got {}", self.c)));
        }
        if self.clip_size == 0 {
            return Err(Error::InvalidParam("clip size must be at least 1".into()));
        }
        if self.inner_steps == 0 {
            return Err(Error::InvalidParam("inner steps must be at least 1".into()));
        }
        if self.max_supersteps == 0 {
            return Err(Error::InvalidParam("max supersteps must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParam(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

impl FromStr for StepPolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lipschitz" => Ok(StepPolicy::Lipschitz),
            "backtracking" => Ok(StepPolicy::Backtracking),
            _ => Err(format!("unknown step policy {s:?} (expected lipschitz or backtracking)")),
        }
    }
}

impl fmt::Display for StepPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepPolicy::Lipschitz => "lipschitz",
            StepPolicy::Backtracking => "backtracking",
        })
    }
}

impl FromStr for LipschitzRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(LipschitzRule::Paper),
            "conservative" => Ok(LipschitzRule::Conservative),
            _ => Err(format!("unknown Lipschitz rule {s:?} (expected paper or conservative)")),
        }
    }
}

impl fmt::Display for LipschitzRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LipschitzRule::Paper => "paper",
            LipschitzRule::Conservative => "conservative",
        })
    }
}
