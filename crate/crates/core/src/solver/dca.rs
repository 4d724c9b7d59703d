//! DCA on the augmented Lagrangian
//!
//! ```text
//! L(u; ψ, ξ) = ‖M₊u‖₁ - ‖M₋u‖₁ + ψ(‖u‖₂ - 1) + (ξ/2)(‖u‖₂ - 1)²
//!            = g(u) - h(u) + ξ/2 - ψ
//! g(u) = (ξ/2)uᵀu + ‖M₊u‖₁
//! h(u) = ‖M₋u‖₁ + (ξ - ψ)‖u‖₂
//! ```
//!
//! Each step linearises `h` at the current point and minimises the convex
//! remainder with the ADMM inner solver.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::admm::SubproblemSolver;
use super::config::SolverConfig;
use crate::error::{DiscaError, Result};
use crate::reduction::{l1_of_product, SignedDiffProblem};

/// Value of the augmented Lagrangian at `u`.
pub fn augmented_lagrangian(problem: &SignedDiffProblem, u: &DVector<f64>, xi: f64, psi: f64) -> f64 {
    let gap = u.norm() - 1.0;
    problem.objective_unchecked(u) + psi * gap + 0.5 * xi * gap * gap
}

/// `h(u) = ‖M₋u‖₁ + (ξ - ψ)‖u‖₂`.
pub fn h_value(m_minus: &DMatrix<f64>, u: &DVector<f64>, xi: f64, psi: f64) -> f64 {
    l1_of_product(m_minus, u) + (xi - psi) * u.norm()
}

/// A subgradient of `h` at `u`; the sign subgradient of `|·|` is taken as
/// 0 wherever `M₋u` vanishes, and the norm term is dropped at `u = 0`.
pub fn subgradient_h(u: &DVector<f64>, m_minus: &DMatrix<f64>, xi: f64, psi: f64) -> Result<DVector<f64>> {
    if xi - psi <= 0.0 {
        return Err(DiscaError::ConvexityViolation { gap: xi - psi });
    }
    if u.len() != m_minus.ncols() {
        return Err(DiscaError::DimensionMismatch {
            context: "direction length",
            expected: m_minus.ncols(),
            actual: u.len(),
        });
    }
    Ok(subgradient_unchecked(u, m_minus, xi, psi))
}

fn subgradient_unchecked(u: &DVector<f64>, m_minus: &DMatrix<f64>, xi: f64, psi: f64) -> DVector<f64> {
    let mut y = if m_minus.nrows() == 0 {
        DVector::zeros(u.len())
    } else {
        let signs = (m_minus * u).map(sign0);
        m_minus.tr_mul(&signs)
    };
    let nrm = u.norm();
    if nrm > 0.0 {
        y += u * ((xi - psi) / nrm);
    }
    y
}

#[inline]
pub(crate) fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Record of one DCA run at fixed `(ξ, ψ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcaRun {
    pub u: Vec<f64>,
    pub xi: f64,
    pub psi: f64,
    /// `L(u_0), L(u_1), …`.
    pub lagrangian: Vec<f64>,
    /// `‖u_{k+1} - u_k‖₂` for each step.
    pub steps: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub admm_iterations: usize,
    /// Inner solves whose ADMM loop met its residual criteria.
    pub admm_converged: usize,
    /// Inner solves whose result was certified optimal.
    pub inner_certified: usize,
}

impl DcaRun {
    pub fn direction(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.u)
    }
}

/// ADMM warm-start state carried between inner solves.
#[derive(Debug, Clone, Default)]
pub(crate) struct WarmStart {
    pub z: Option<DVector<f64>>,
    pub v: Option<DVector<f64>>,
}

/// DCA stop test: componentwise relative change (zero entries guarded by
/// 1e-12) or relative change of the whole vector below `tol`.
pub fn dca_converged(prev: &DVector<f64>, next: &DVector<f64>, tol: f64) -> bool {
    let delta = next - prev;
    let comp = delta
        .iter()
        .zip(prev.iter())
        .map(|(d, p)| d.abs() / p.abs().max(1e-12))
        .fold(0.0f64, f64::max);
    let whole = delta.norm() / prev.norm().max(1e-12);
    comp < tol || whole < tol
}

pub(crate) fn run_dca(
    problem: &SignedDiffProblem,
    gram_plus: &DMatrix<f64>,
    xi: f64,
    psi: f64,
    u0: &DVector<f64>,
    cfg: &SolverConfig,
    warm: &mut WarmStart,
) -> Result<DcaRun> {
    if xi - psi <= 0.0 {
        return Err(DiscaError::ConvexityViolation { gap: xi - psi });
    }
    if u0.len() != problem.dim() || u0.iter().any(|v| !v.is_finite()) {
        return Err(DiscaError::InvalidInput("initial point must be finite with length p".into()));
    }
    let inner = SubproblemSolver::new(problem.m_plus(), gram_plus, xi, cfg)?;
    let mut u = u0.clone();
    let mut run = DcaRun {
        u: Vec::new(),
        xi,
        psi,
        lagrangian: vec![augmented_lagrangian(problem, &u, xi, psi)],
        steps: Vec::new(),
        iterations: 0,
        converged: false,
        admm_iterations: 0,
        admm_converged: 0,
        inner_certified: 0,
    };
    for k in 1..=cfg.max_dca_iters {
        let y = subgradient_unchecked(&u, problem.m_minus(), xi, psi);
        let ws = match (&warm.z, &warm.v) {
            (Some(z), Some(v)) => Some((z, v)),
            _ => None,
        };
        let sol = inner.solve(&y, ws);
        run.admm_iterations += sol.admm.iterations;
        run.admm_converged += usize::from(sol.admm.converged);
        run.inner_certified += usize::from(sol.certified);
        warm.z = Some(sol.admm.z);
        warm.v = Some(sol.admm.v);
        let next = sol.u;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(DiscaError::NumericalFailure(format!("non-finite DCA iterate at step {k}")));
        }
        run.steps.push((&next - &u).norm());
        run.lagrangian.push(augmented_lagrangian(problem, &next, xi, psi));
        run.iterations = k;
        let done = next.norm() == 0.0 || dca_converged(&u, &next, cfg.dca_tol);
        u = next;
        if done {
            run.converged = true;
            break;
        }
    }
    run.u = u.iter().copied().collect();
    Ok(run)
}

/// Runs DCA at fixed `(ξ, ψ)` from `u0` with a cold ADMM start.
pub fn dca_solve(problem: &SignedDiffProblem, xi: f64, psi: f64, u0: &DVector<f64>, cfg: &SolverConfig) -> Result<DcaRun> {
    let gram = problem.m_plus().tr_mul(problem.m_plus());
    run_dca(problem, &gram, xi, psi, u0, cfg, &mut WarmStart::default())
}
