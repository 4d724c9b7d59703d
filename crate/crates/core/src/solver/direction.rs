use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::dca::{run_dca, DcaRun, WarmStart};
use crate::error::{DiscaError, Result};
use crate::reduction::SignedDiffProblem;
use crate::seed::mix_seed;

/// Best unit direction found for `min ‖M₊u‖₁ - ‖M₋u‖₁` on the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionResult {
    /// Unit vector, first nonzero entry positive.
    pub u: Vec<f64>,
    pub objective_value: f64,
    /// `V²_N` of the projected sample, when the caller supplied the data.
    pub v2n: Option<f64>,
    pub statistic: Option<f64>,
    /// Augmented-Lagrangian values of the winning restart, all DCA runs
    /// concatenated; see `dca_runs` for the per-run split.
    pub lagrangian_trace: Vec<f64>,
    pub dca_runs: Vec<DcaRun>,
    /// The winning restart met the unit-norm tolerance.
    pub converged: bool,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub restart_objectives: Vec<Option<f64>>,
    /// Norm of the winning iterate before renormalisation.
    pub raw_norm: f64,
    pub final_xi: f64,
    pub final_psi: f64,
}

impl DirectionResult {
    pub fn direction(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.u)
    }
}

/// Flips `u` so its first nonzero entry is positive.
pub fn sign_normalize(u: &mut DVector<f64>) {
    if let Some(first) = u.iter().find(|v| **v != 0.0) {
        if *first < 0.0 {
            u.neg_mut();
        }
    }
}

/// Problem scale used to express ξ and ψ in normalised units.
pub fn problem_scale(problem: &SignedDiffProblem) -> f64 {
    problem.total_row_norm() / (problem.dim() as f64).sqrt()
}

struct RestartOutcome {
    u: DVector<f64>,
    raw_norm: f64,
    converged: bool,
    runs: Vec<DcaRun>,
    xi: f64,
    psi: f64,
}

fn random_unit(rng: &mut ChaCha8Rng, p: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(p, |_, _| StandardNormal.sample(rng));
        let n: f64 = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

fn one_restart(
    problem: &SignedDiffProblem,
    gram: &DMatrix<f64>,
    cfg: &SolverConfig,
    scale: f64,
    u0: DVector<f64>,
) -> Result<RestartOutcome> {
    let mut xi = cfg.xi0 * scale;
    let xi_cap = cfg.xi_max * scale;
    let mut psi = cfg.psi0 * scale;
    let mut u = u0.clone();
    let mut last_dir = u0;
    let mut warm = WarmStart::default();
    let mut runs = Vec::new();
    let mut converged = false;
    let mut raw_norm = 0.0;
    for _ in 0..cfg.max_outer_iters {
        while xi - psi <= 0.0 {
            if xi >= xi_cap {
                return Err(DiscaError::ConvexityViolation { gap: xi - psi });
            }
            xi = (xi * cfg.xi_growth).min(xi_cap);
        }
        let start = if u.norm() > 0.0 { u.clone() } else { last_dir.clone() };
        let run = run_dca(problem, gram, xi, psi, &start, cfg, &mut warm)?;
        u = run.direction();
        runs.push(run);
        raw_norm = u.norm();
        if raw_norm > 0.0 {
            last_dir = &u / raw_norm;
        }
        psi += xi * (raw_norm - 1.0);
        if (raw_norm - 1.0).abs() < cfg.norm_tol {
            converged = true;
            break;
        }
        xi = (xi * cfg.xi_growth).min(xi_cap);
    }
    if raw_norm == 0.0 {
        return Err(DiscaError::NumericalFailure("iterates collapsed to the origin".into()));
    }
    Ok(RestartOutcome {
        u: last_dir,
        raw_norm,
        converged,
        runs,
        xi,
        psi,
    })
}

/// Multistart minimisation of `‖M₊u‖₁ - ‖M₋u‖₁` over unit vectors.
///
/// The iterations run on [`SignedDiffProblem::merge_parallel_rows`], which has
/// the same objective; reported objective values use `problem` itself.
///
/// Each restart runs the multiplier loop (`ψ ← ψ + ξ(‖u‖ - 1)`, `ξ ← growth·ξ`)
/// around DCA until the norm constraint is met; the restart with the lowest
/// objective at `u/‖u‖` wins, ties going to the lower restart index.
pub fn solve_min_direction(problem: &SignedDiffProblem, cfg: &SolverConfig) -> Result<DirectionResult> {
    cfg.validate()?;
    let p = problem.dim();
    let flat = problem.n_plus() + problem.n_minus() == 0;
    if p == 1 || flat {
        let mut u = DVector::zeros(p);
        u[0] = 1.0;
        let objective_value = problem.objective_unchecked(&u);
        return Ok(DirectionResult {
            u: u.iter().copied().collect(),
            objective_value,
            v2n: None,
            statistic: None,
            lagrangian_trace: Vec::new(),
            dca_runs: Vec::new(),
            converged: true,
            restarts_used: 0,
            best_restart: 0,
            restart_objectives: Vec::new(),
            raw_norm: 1.0,
            final_xi: 0.0,
            final_psi: 0.0,
        });
    }
    let original = problem;
    let merged = problem.merge_parallel_rows();
    let problem = &merged;
    let scale = problem_scale(problem);
    let gram = problem.m_plus().tr_mul(problem.m_plus());
    let mut best: Option<(usize, f64, RestartOutcome)> = None;
    let mut objectives = Vec::with_capacity(cfg.n_restarts);
    let mut failures = Vec::new();
    for r in 0..cfg.n_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, r as u64));
        let u0 = random_unit(&mut rng, p);
        match one_restart(problem, &gram, cfg, scale, u0) {
            Ok(out) => {
                let f = original.objective_unchecked(&out.u);
                objectives.push(Some(f));
                if best.as_ref().is_none_or(|(_, bf, _)| f < *bf) {
                    best = Some((r, f, out));
                }
            }
            Err(e) => {
                objectives.push(None);
                failures.push(format!("restart {r}: {e}"));
            }
        }
    }
    let Some((idx, _, out)) = best else {
        return Err(DiscaError::SolverFailure {
            restarts: cfg.n_restarts,
            diagnostics: failures.join("; "),
        });
    };
    let mut u = out.u.normalize();
    sign_normalize(&mut u);
    let objective_value = original.objective_unchecked(&u);
    Ok(DirectionResult {
        u: u.iter().copied().collect(),
        objective_value,
        v2n: None,
        statistic: None,
        lagrangian_trace: out.runs.iter().flat_map(|r| r.lagrangian.iter().copied()).collect(),
        dca_runs: out.runs,
        converged: out.converged,
        restarts_used: cfg.n_restarts,
        best_restart: idx,
        restart_objectives: objectives,
        raw_norm: out.raw_norm,
        final_xi: out.xi,
        final_psi: out.psi,
    })
}

/// First-order residual at a nonzero point `u`:
///
/// ```text
/// min ‖M₊ᵀs₊ - M₋ᵀs₋ + ξu - (ξ - ψ)u/‖u‖‖₂
/// ```
///
/// over sign vectors `s±` that equal `sgn(M±u)` on rows where `|m_r·u|`
/// exceeds `zero_tol·‖m_r‖·‖u‖` and range over `[-1, 1]` elsewhere. The
/// free part is a box-constrained least-squares problem solved by cyclic
/// coordinate descent.
pub fn stationarity_residual(problem: &SignedDiffProblem, u: &DVector<f64>, xi: f64, psi: f64, zero_tol: f64) -> f64 {
    let nrm = u.norm();
    if nrm == 0.0 {
        return f64::INFINITY;
    }
    let p = u.len();
    let mut base = u * xi - u * ((xi - psi) / nrm);
    let mut free: Vec<DVector<f64>> = Vec::new();
    for (m, sign) in [(problem.m_plus(), 1.0), (problem.m_minus(), -1.0)] {
        for row in m.row_iter() {
            let r: DVector<f64> = row.transpose();
            let a = r.dot(u);
            if a.abs() <= zero_tol * r.norm() * nrm {
                if r.norm() > 0.0 {
                    free.push(r);
                }
            } else {
                base += &r * (sign * a.signum());
            }
        }
    }
    if free.is_empty() {
        return base.norm();
    }
    let mut w = vec![0.0; free.len()];
    let mut res = base.clone();
    let norms: Vec<f64> = free.iter().map(|r| r.norm_squared()).collect();
    for _ in 0..10_000 {
        let mut moved = 0.0f64;
        for k in 0..free.len() {
            let old = w[k];
            let step = -res.dot(&free[k]) / norms[k];
            let new = (old + step).clamp(-1.0, 1.0);
            if new != old {
                res += &free[k] * (new - old);
                w[k] = new;
                moved = moved.max((new - old).abs());
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    debug_assert_eq!(res.len(), p);
    res.norm()
}
