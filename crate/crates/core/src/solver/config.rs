use serde::{Deserialize, Serialize};

use crate::error::{DiscaError, Result};

/// Parameters for the augmented-Lagrangian / DCA / ADMM solver stack and
/// the independence test that drives elimination.
///
/// `xi0`, `xi_max` and `psi0` are expressed in units of the problem scale
/// (the summed row norms of `M₊` and `M₋` divided by `√p`), so the same
/// defaults work for any sample size or data scaling. The raw value used
/// on a problem is the configured value times that scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub xi0: f64,
    pub xi_growth: f64,
    pub xi_max: f64,
    pub psi0: f64,
    /// ADMM penalty.
    pub rho: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Relative-change threshold for the DCA loop.
    pub dca_tol: f64,
    /// Outer loop stops when `|‖u‖₂ - 1|` falls below this.
    pub norm_tol: f64,
    pub max_dca_iters: usize,
    pub max_admm_iters: usize,
    pub max_outer_iters: usize,
    pub n_restarts: usize,
    pub seed: u64,
    /// Significance level of the independence test.
    pub alpha: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            xi0: 1.0,
            xi_growth: 2.0,
            xi_max: 1e6,
            psi0: 0.0,
            rho: 1.0,
            eps_abs: 1e-6,
            eps_rel: 1e-4,
            dca_tol: 1e-6,
            norm_tol: 1e-6,
            max_dca_iters: 1000,
            max_admm_iters: 5000,
            max_outer_iters: 50,
            n_restarts: 5,
            seed: 0,
            alpha: 0.05,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, n: usize) -> Self {
        self.n_restarts = n;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("xi0", self.xi0),
            ("xi_max", self.xi_max),
            ("rho", self.rho),
            ("eps_abs", self.eps_abs),
            ("eps_rel", self.eps_rel),
            ("dca_tol", self.dca_tol),
            ("norm_tol", self.norm_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DiscaError::param(name, format!("{v} must be positive and finite")));
            }
        }
        if !(self.xi_growth > 1.0 && self.xi_growth.is_finite()) {
            return Err(DiscaError::param("xi_growth", format!("{} must exceed 1", self.xi_growth)));
        }
        if self.xi_max < self.xi0 {
            return Err(DiscaError::param("xi_max", "must be at least xi0"));
        }
        if !self.psi0.is_finite() {
            return Err(DiscaError::param("psi0", "must be finite"));
        }
        let counts = [
            ("max_dca_iters", self.max_dca_iters),
            ("max_admm_iters", self.max_admm_iters),
            ("max_outer_iters", self.max_outer_iters),
            ("n_restarts", self.n_restarts),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(DiscaError::param(name, "must be at least 1"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha <= crate::dcov::MAX_ALPHA) {
            return Err(DiscaError::param(
                "alpha",
                format!("{} outside (0, {}]", self.alpha, crate::dcov::MAX_ALPHA),
            ));
        }
        Ok(())
    }
}
