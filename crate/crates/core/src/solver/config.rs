use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tuning for both Newton drivers. `nonmonotone_depth` (the memory `M`) is
/// ignored by the pure Newton driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Stop once `||X(p_k)|| < tol_residual`.
    pub tol_residual: f64,
    pub max_iters: usize,
    /// Sufficient-decrease constant, in (0, 1/2).
    pub sigma: f64,
    /// Backtracking factor, in (0, 1).
    pub beta: f64,
    #[serde(alias = "M")]
    pub nonmonotone_depth: usize,
    pub max_backtracks: usize,
    /// A Newton step is accepted only if `||V v + X|| <= factor * ||X||`.
    pub solve_residual_factor: f64,
    /// Newton systems with a larger 1-norm condition estimate are treated as singular.
    pub condition_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-6,
            max_iters: 100,
            sigma: 1e-4,
            beta: 0.5,
            nonmonotone_depth: 0,
            max_backtracks: 60,
            solve_residual_factor: 1e-8,
            condition_cap: 1e14,
        }
    }
}

impl SolverConfig {
    pub fn with_depth(mut self, depth: usize) -> Self {
        self.nonmonotone_depth = depth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_owned()));
        if !(self.sigma > 0.0 && self.sigma < 0.5) {
            return bad("sigma must lie in (0, 1/2)");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if !(self.tol_residual > 0.0) {
            return bad("tol_residual must be positive");
        }
        if !(self.solve_residual_factor > 0.0) {
            return bad("solve_residual_factor must be positive");
        }
        if !(self.condition_cap >= 1.0) {
            return bad("condition_cap must be at least 1");
        }
        Ok(())
    }
}
