//! Minimisation of `‖M₊u‖₁ - ‖M₋u‖₁` on the unit sphere: augmented
//! Lagrangian outer loop, DCA middle loop, ADMM inner solver.

pub mod admm;
pub mod config;
pub mod dca;
pub mod direction;

pub use admm::{admm_subproblem, soft_threshold, AdmmOutcome, InnerSolution, SubproblemSolver};
pub use config::SolverConfig;
pub use dca::{augmented_lagrangian, dca_converged, dca_solve, h_value, subgradient_h, DcaRun};
pub use direction::{problem_scale, sign_normalize, solve_min_direction, stationarity_residual, DirectionResult};
