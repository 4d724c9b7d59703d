//! Backward elimination of independent directions.
//!
//! Starting from the full space, each step finds the unit direction `u` of
//! the current working subspace whose projection is least dependent on the
//! other sample, and tests `(Xu, Y)` for independence. Accepted directions
//! are removed and the search continues in their orthogonal complement;
//! the first rejection ends the loop and the working subspace at that point
//! is the estimate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dcov::{dcov_from_distances, pairwise_distances, rejection_threshold};
use crate::error::{DiscaError, Result};
use crate::reduction::{build_signed_diffs, g_from_distances};
use crate::sample::SampleMatrix;
use crate::seed::mix_seed;
use crate::solver::{solve_min_direction, SolverConfig};
use crate::subspace::{complement, orthonormalize, project_samples, Basis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    /// Independence not rejected; the direction is removed.
    Eliminate,
    /// Independence rejected; the loop ends here.
    Stop,
}

/// One pass of the elimination loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationStep {
    /// Dimension of the working subspace searched at this step.
    pub working_dim: usize,
    /// Minimising direction in original coordinates.
    pub direction: Vec<f64>,
    pub objective_value: f64,
    pub v2n: f64,
    pub statistic: f64,
    pub threshold: f64,
    pub decision: Decision,
    pub solver_converged: bool,
}

/// All steps of one elimination run and the resulting basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrace", into = "RawTrace")]
pub struct EliminationTrace {
    pub steps: Vec<EliminationStep>,
    pub basis: Basis,
}

#[derive(Serialize, Deserialize)]
struct RawTrace {
    ambient_dim: usize,
    steps: Vec<EliminationStep>,
    basis: Vec<Vec<f64>>,
}

impl From<EliminationTrace> for RawTrace {
    fn from(t: EliminationTrace) -> Self {
        Self {
            ambient_dim: t.basis.ambient_dim(),
            basis: t.basis.column_vectors(),
            steps: t.steps,
        }
    }
}

impl TryFrom<RawTrace> for EliminationTrace {
    type Error = DiscaError;

    fn try_from(r: RawTrace) -> Result<Self> {
        Ok(Self {
            basis: Basis::from_columns(r.ambient_dim, &r.basis)?,
            steps: r.steps,
        })
    }
}

impl EliminationTrace {
    /// Directions removed by the loop, in order.
    pub fn eliminated(&self) -> impl Iterator<Item = &EliminationStep> {
        self.steps.iter().filter(|s| s.decision == Decision::Eliminate)
    }

    pub fn eliminated_count(&self) -> usize {
        self.eliminated().count()
    }
}

/// Estimates the subspace of `x` that carries all dependence on `y`.
///
/// A constant projection (zero mean distance) counts as independent.
/// Solver failures come back as [`DiscaError::PartialElimination`] holding
/// the steps completed so far.
pub fn estimate_subspace(x: &SampleMatrix, y: &SampleMatrix, cfg: &SolverConfig) -> Result<EliminationTrace> {
    cfg.validate()?;
    if x.n() != y.n() {
        return Err(DiscaError::DimensionMismatch {
            context: "sample row counts",
            expected: x.n(),
            actual: y.n(),
        });
    }
    let p = x.dim();
    let threshold = rejection_threshold(cfg.alpha)?;
    let y_dist = pairwise_distances(y);
    let g = g_from_distances(&y_dist);
    let mut working = Basis::identity(p);
    let mut removed: Vec<DVector<f64>> = Vec::new();
    let mut steps = Vec::new();
    while working.rank() > 0 {
        let xr = project_samples(x, &working)?;
        let step_cfg = cfg.clone().with_seed(mix_seed(cfg.seed, steps.len() as u64));
        let solved = build_signed_diffs(&xr, &g).and_then(|prob| solve_min_direction(&prob, &step_cfg));
        let dir = match solved {
            Ok(d) => d,
            Err(cause) => {
                return Err(DiscaError::PartialElimination {
                    trace: Box::new(EliminationTrace { steps, basis: working }),
                    cause: Box::new(cause),
                })
            }
        };
        let u = dir.direction();
        let stats = dcov_from_distances(&pairwise_distances(&xr.project_onto(&u)?), &y_dist)?;
        let statistic = stats.statistic_or_zero();
        let original = working.columns() * &u;
        let decision = if statistic > threshold {
            Decision::Stop
        } else {
            Decision::Eliminate
        };
        steps.push(EliminationStep {
            working_dim: working.rank(),
            direction: original.iter().copied().collect(),
            objective_value: dir.objective_value,
            v2n: stats.v2n,
            statistic,
            threshold,
            decision,
            solver_converged: dir.converged,
        });
        if decision == Decision::Stop {
            break;
        }
        removed.push(original);
        let span = DMatrix::from_columns(&removed);
        working = complement(&orthonormalize(&span));
    }
    Ok(EliminationTrace { steps, basis: working })
}

/// Estimates of both dependent subspaces with their traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOutput")]
pub struct DiscaOutput {
    pub config: SolverConfig,
    pub basis_x: Basis,
    pub basis_y: Basis,
    pub trace_x: EliminationTrace,
    pub trace_y: EliminationTrace,
}

#[derive(Deserialize)]
struct RawOutput {
    config: SolverConfig,
    basis_x: Vec<Vec<f64>>,
    basis_y: Vec<Vec<f64>>,
    trace_x: EliminationTrace,
    trace_y: EliminationTrace,
}

impl TryFrom<RawOutput> for DiscaOutput {
    type Error = DiscaError;

    fn try_from(r: RawOutput) -> Result<Self> {
        Ok(Self {
            basis_x: Basis::from_columns(r.trace_x.basis.ambient_dim(), &r.basis_x)?,
            basis_y: Basis::from_columns(r.trace_y.basis.ambient_dim(), &r.basis_y)?,
            trace_x: r.trace_x,
            trace_y: r.trace_y,
            config: r.config,
        })
    }
}

impl DiscaOutput {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }
}

/// Runs the elimination for `x` against `y`, then for `y` against the
/// coordinates of `x` in the estimated subspace.
///
/// When every direction of `x` is eliminated the second pass sees a
/// constant sample and removes every direction of `y` as well.
pub fn disca(x: &SampleMatrix, y: &SampleMatrix, cfg: &SolverConfig) -> Result<DiscaOutput> {
    let trace_x = estimate_subspace(x, y, cfg)?;
    let x_reduced = if trace_x.basis.rank() > 0 {
        project_samples(x, &trace_x.basis)?
    } else {
        SampleMatrix::new(DMatrix::zeros(x.n(), 1))?
    };
    let trace_y = estimate_subspace(y, &x_reduced, cfg)?;
    Ok(DiscaOutput {
        basis_x: trace_x.basis.clone(),
        basis_y: trace_y.basis.clone(),
        trace_x,
        trace_y,
        config: cfg.clone(),
    })
}
