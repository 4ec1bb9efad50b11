//! Accelerated proximal gradient engine and the proximal operators it uses.

mod apg;
mod prox;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use apg::{apg_solve, ApgResult};
pub use prox::{singular_value_threshold, soft_threshold, soft_threshold_scalar};

/// Convergence controls for [`apg_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once the relative change of the total objective drops below this.
    pub tol: f64,
    /// First step size tried by the line search (an inverse-Lipschitz guess).
    pub step_init: f64,
    /// Step shrink factor applied on each failed sufficient-decrease test.
    pub backtrack_factor: f64,
    /// Keep the best iterate seen, so the objective never increases.
    pub monotone: bool,
    /// Reset momentum whenever the objective would increase.
    pub restart: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 5000,
            tol: 1e-6,
            step_init: 1.0,
            backtrack_factor: 0.5,
            monotone: true,
            restart: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Argument(format!("tol must be > 0, got {}", self.tol)));
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return Err(Error::Argument(format!("step_init must be > 0, got {}", self.step_init)));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::Argument(format!(
                "backtrack_factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        Ok(())
    }
}
