//! Distance-covariance based screening of the dependent subspaces of two
//! paired random vectors.
//!
//! Given samples `X` (N×p) and `Y` (N×q), the estimator repeatedly finds the
//! unit direction `u` minimising the empirical distance covariance between
//! `Xu` and `Y`, tests that projection for independence, and removes it
//! while independence is not rejected. The span that remains is the
//! estimate of the part of `X` that carries all dependence on `Y`; the same
//! loop with the roles swapped gives the part of `Y`.

pub mod dcov;
pub mod engine;
pub mod error;
pub mod harness;
pub mod reduction;
pub mod sample;
pub mod seed;
pub mod solver;
pub mod subspace;

pub use dcov::{empirical_dcov, reject_independence, rejection_threshold, test_statistic, DistanceStats};
pub use engine::{disca, estimate_subspace, Decision, DiscaOutput, EliminationStep, EliminationTrace};
pub use error::{DiscaError, Result};
pub use reduction::{build_problem, build_signed_diffs, g_coefficients, GMatrix, SignedDiffProblem};
pub use sample::SampleMatrix;
pub use solver::{solve_min_direction, DirectionResult, SolverConfig};
pub use subspace::{complement, orthonormalize, project_samples, projector_distance, subspace_distance, varimax, Basis};
