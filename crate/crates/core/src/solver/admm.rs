//! ADMM for the strongly convex DCA subproblem
//!
//! ```text
//! min_u  (ξ/2) uᵀu + ‖M₊u‖₁ - yᵀu
//! ```
//!
//! split as `z = M₊u`. Updates:
//!
//! ```text
//! u ← (ξI + ρM₊ᵀM₊)⁻¹ (y + M₊ᵀ(ρz - v))
//! z ← S(v/ρ + M₊u, 1/ρ)
//! v ← v + ρ(M₊u - z)
//! ```
//!
//! stopping once the primal residual `r = M₊u - z` and dual residual
//! `s = ρM₊ᵀ(z - z_prev)` satisfy the usual absolute/relative bounds.
//!
//! [`SubproblemSolver::solve`] turns ADMM iterates into the exact minimiser
//! with a minimum-norm-point solve on the dual, which the DCA descent
//! guarantee relies on.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::config::SolverConfig;
use crate::error::{DiscaError, Result};

/// Componentwise `sgn(x_i) max(|x_i| - r, 0)`.
pub fn soft_threshold(x: &DVector<f64>, r: f64) -> Result<DVector<f64>> {
    if r.is_nan() || r < 0.0 {
        return Err(DiscaError::param("r", format!("threshold {r} must be >= 0")));
    }
    Ok(x.map(|v| shrink(v, r)))
}

#[inline]
fn shrink(v: f64, r: f64) -> f64 {
    if v > r {
        v - r
    } else if v < -r {
        v + r
    } else {
        0.0
    }
}

/// ADMM iterate plus its stopping diagnostics.
#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    pub u: DVector<f64>,
    pub z: DVector<f64>,
    pub v: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub primal_bound: f64,
    pub dual_bound: f64,
}

/// Solver for one fixed `(M₊, ξ, ρ)`; the factorisation of
/// `ξI + ρM₊ᵀM₊` is computed once and reused for every right-hand side.
pub struct SubproblemSolver<'a> {
    m: &'a DMatrix<f64>,
    xi: f64,
    rho: f64,
    chol: Cholesky<f64, Dyn>,
    eps_abs: f64,
    eps_rel: f64,
    max_iters: usize,
    row_norm: Vec<f64>,
}

impl<'a> SubproblemSolver<'a> {
    pub fn new(m_plus: &'a DMatrix<f64>, gram: &DMatrix<f64>, xi: f64, cfg: &SolverConfig) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(DiscaError::param("xi", format!("{xi} must be positive")));
        }
        let p = m_plus.ncols();
        let k = DMatrix::identity(p, p) * xi + gram * cfg.rho;
        let chol = Cholesky::new(k)
            .ok_or_else(|| DiscaError::NumericalFailure("ADMM system not positive definite".into()))?;
        Ok(Self {
            m: m_plus,
            xi,
            rho: cfg.rho,
            chol,
            eps_abs: cfg.eps_abs,
            eps_rel: cfg.eps_rel,
            max_iters: cfg.max_admm_iters,
            row_norm: m_plus.row_iter().map(|r| r.norm()).collect(),
        })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// `(ξ/2)‖u‖² + ‖M₊u‖₁ - yᵀu`.
    pub fn objective(&self, y: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let l1 = if self.m.nrows() == 0 { 0.0 } else { (self.m * u).lp_norm(1) };
        0.5 * self.xi * u.norm_squared() + l1 - y.dot(u)
    }

    /// Runs ADMM from the warm start `(z, v)` (zeros when `None`).
    pub fn admm(&self, y: &DVector<f64>, warm: Option<(&DVector<f64>, &DVector<f64>)>) -> AdmmOutcome {
        let n = self.m.nrows();
        let (z, v) = match warm {
            Some((z, v)) if z.len() == n && v.len() == n => (z.clone(), v.clone()),
            _ => (DVector::zeros(n), DVector::zeros(n)),
        };
        self.admm_from(y, z, v, self.max_iters)
    }

    fn admm_from(&self, y: &DVector<f64>, mut z: DVector<f64>, mut v: DVector<f64>, max_iters: usize) -> AdmmOutcome {
        let n = self.m.nrows();
        let p = self.m.ncols();
        if n == 0 {
            return AdmmOutcome {
                u: y / self.xi,
                z,
                v,
                iterations: 1,
                converged: true,
                primal_residual: 0.0,
                dual_residual: 0.0,
                primal_bound: 0.0,
                dual_bound: (p as f64).sqrt() * self.eps_abs,
            };
        }
        let rho = self.rho;
        let inv_rho = 1.0 / rho;
        let cols: Vec<&[f64]> = (0..p).map(|c| &self.m.as_slice()[c * n..(c + 1) * n]).collect();
        let mut mtz = self.m.tr_mul(&z);
        let mut mtv = self.m.tr_mul(&v);
        let mut u = DVector::zeros(p);
        let mut a = vec![0.0; n];
        let sqrt_n = (n as f64).sqrt();
        let sqrt_p = (p as f64).sqrt();
        let mut out = AdmmOutcome {
            u: DVector::zeros(p),
            z: DVector::zeros(0),
            v: DVector::zeros(0),
            iterations: 0,
            converged: false,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            primal_bound: 0.0,
            dual_bound: 0.0,
        };
        for it in 1..=max_iters {
            let rhs = y + &mtz * rho - &mtv;
            u = self.chol.solve(&rhs);
            a.iter_mut().for_each(|x| *x = 0.0);
            for (col, &uc) in cols.iter().zip(u.iter()) {
                for (ar, m) in a.iter_mut().zip(col.iter()) {
                    *ar += m * uc;
                }
            }
            let (mut r2, mut mu2, mut z2) = (0.0, 0.0, 0.0);
            for ((ar, zr), vr) in a.iter().zip(z.iter_mut()).zip(v.iter_mut()) {
                let znew = shrink(*vr * inv_rho + ar, inv_rho);
                let res = ar - znew;
                *vr += rho * res;
                *zr = znew;
                r2 += res * res;
                mu2 += ar * ar;
                z2 += znew * znew;
            }
            let mut s2 = 0.0;
            let mut mtv2 = 0.0;
            for (c, col) in cols.iter().enumerate() {
                let (mut dz, mut dv) = (0.0, 0.0);
                for ((m, zr), vr) in col.iter().zip(z.iter()).zip(v.iter()) {
                    dz += m * zr;
                    dv += m * vr;
                }
                let d = rho * (dz - mtz[c]);
                s2 += d * d;
                mtv2 += dv * dv;
                mtz[c] = dz;
                mtv[c] = dv;
            }
            let primal = r2.sqrt();
            let dual = s2.sqrt();
            let eps_pri = sqrt_n * self.eps_abs + self.eps_rel * mu2.sqrt().max(z2.sqrt());
            let eps_dual = sqrt_p * self.eps_abs + self.eps_rel * mtv2.sqrt();
            out.iterations = it;
            out.primal_residual = primal;
            out.dual_residual = dual;
            out.primal_bound = eps_pri;
            out.dual_bound = eps_dual;
            if primal <= eps_pri && dual <= eps_dual {
                out.converged = true;
                break;
            }
            if !primal.is_finite() || !dual.is_finite() {
                break;
            }
        }
        out.u = u;
        out.z = z;
        out.v = v;
        out
    }

    /// Vertex of `Z = {y - M₊ᵀw : ‖w‖∞ ≤ 1}` minimising `dᵀv`.
    fn extreme_point(&self, y: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
        let s = (self.m * d).map(|t| if t < 0.0 { -1.0 } else { 1.0 });
        y - self.m.tr_mul(&s)
    }

    /// Exact minimiser by Wolfe's minimum-norm-point method.
    ///
    /// The dual of the subproblem is `min ‖z‖` over the zonotope
    /// `Z = {y - M₊ᵀw : ‖w‖∞ ≤ 1}`, and the primal solution is `z*/ξ`. The
    /// method keeps a small set of vertices of `Z` and the minimum-norm
    /// point of their convex hull, adding the vertex that most decreases
    /// `zᵀv` until the duality gap `‖z‖² - min_v zᵀv` is at rounding level.
    /// `hint` only picks the starting vertex. Returns `None` if the gap does
    /// not close.
    pub fn polish(&self, y: &DVector<f64>, hint: &DVector<f64>) -> Option<DVector<f64>> {
        if self.m.nrows() == 0 {
            return Some(y / self.xi);
        }
        let radius = y.norm() + self.row_norm.iter().sum::<f64>();
        let start = if hint.norm() > 0.0 { hint } else { y };
        let mut pts = vec![self.extreme_point(y, start)];
        let mut lam = vec![1.0];
        let mut x = pts[0].clone();
        let max_major = 100 + 20 * self.m.ncols();
        for _ in 0..max_major {
            let v = self.extreme_point(y, &x);
            let gap = x.dot(&x) - x.dot(&v);
            if gap <= 1e-12 * radius * x.norm() + 1e-15 * radius * radius {
                return Some(x / self.xi);
            }
            if pts.iter().any(|q| q == &v) {
                return None;
            }
            pts.push(v);
            lam.push(0.0);
            loop {
                let alpha = affine_min_norm(&pts)?;
                if alpha.iter().all(|&a| a > 0.0) {
                    lam = alpha;
                    break;
                }
                // step from lam towards alpha until a weight hits zero
                let mut theta = 1.0f64;
                let mut drop = 0;
                for (i, (&l, &a)) in lam.iter().zip(&alpha).enumerate() {
                    if a <= 0.0 && l - a > 0.0 && l / (l - a) < theta {
                        theta = l / (l - a);
                        drop = i;
                    }
                }
                for (l, a) in lam.iter_mut().zip(&alpha) {
                    *l += theta * (a - *l);
                }
                lam[drop] = 0.0;
                let keep: Vec<bool> = lam.iter().map(|&l| l > 0.0).collect();
                let mut k = 0;
                pts.retain(|_| {
                    k += 1;
                    keep[k - 1]
                });
                lam.retain(|&l| l > 0.0);
                if pts.is_empty() {
                    return None;
                }
            }
            let total: f64 = lam.iter().sum();
            x = pts.iter().zip(&lam).fold(DVector::zeros(y.len()), |acc, (q, l)| acc + q * (l / total));
        }
        None
    }

    /// ADMM interleaved with [`polish`](Self::polish): polishing is tried
    /// after 1, 3, 7, … iterations and once ADMM meets its stopping rule,
    /// and the first verified point ends the solve.
    pub fn solve(&self, y: &DVector<f64>, warm: Option<(&DVector<f64>, &DVector<f64>)>) -> InnerSolution {
        let n = self.m.nrows();
        let (mut z, mut v) = match warm {
            Some((z, v)) if z.len() == n && v.len() == n => (z.clone(), v.clone()),
            _ => (DVector::zeros(n), DVector::zeros(n)),
        };
        let mut done = 0;
        let mut chunk = 1;
        loop {
            let budget = chunk.min(self.max_iters - done);
            let mut seg = self.admm_from(y, z, v, budget);
            done += seg.iterations;
            seg.iterations = done;
            let finished = seg.converged || done >= self.max_iters || !seg.primal_residual.is_finite();
            if let Some(u) = self.polish(y, &seg.u) {
                return InnerSolution {
                    u,
                    certified: true,
                    admm: seg,
                };
            }
            if finished {
                return InnerSolution {
                    u: seg.u.clone(),
                    certified: false,
                    admm: seg,
                };
            }
            z = seg.z;
            v = seg.v;
            chunk *= 2;
        }
    }
}

/// Weights `α` (summing to one) of the minimum-norm point in the affine hull
/// of `pts`.
fn affine_min_norm(pts: &[DVector<f64>]) -> Option<Vec<f64>> {
    let m = pts.len();
    if m == 1 {
        return Some(vec![1.0]);
    }
    let p0 = &pts[0];
    let d = DMatrix::from_columns(&pts[1..].iter().map(|q| q - p0).collect::<Vec<_>>());
    let svd = d.svd(true, true);
    let top = svd.singular_values.max();
    let beta = svd.solve(&(-p0), 1e-13 * top).ok()?;
    if beta.iter().any(|b| !b.is_finite()) {
        return None;
    }
    let mut alpha = Vec::with_capacity(m);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter().copied());
    Some(alpha)
}

/// Result of one inner solve inside the DCA loop.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub u: DVector<f64>,
    /// `u` is the verified exact minimiser rather than the ADMM iterate.
    pub certified: bool,
    pub admm: AdmmOutcome,
}

/// One cold-start ADMM solve of `min (ξ/2)uᵀu + ‖M₊u‖₁ - yᵀu`.
pub fn admm_subproblem(m_plus: &DMatrix<f64>, xi: f64, y: &DVector<f64>, cfg: &SolverConfig) -> Result<AdmmOutcome> {
    if y.len() != m_plus.ncols() {
        return Err(DiscaError::DimensionMismatch {
            context: "subproblem linear term",
            expected: m_plus.ncols(),
            actual: y.len(),
        });
    }
    let gram = m_plus.tr_mul(m_plus);
    let solver = SubproblemSolver::new(m_plus, &gram, xi, cfg)?;
    Ok(solver.admm(y, None))
}
