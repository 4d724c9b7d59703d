//! Reference implementations written straight from the definitions, shared
//! by the integration tests. None of them call into the library.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

fn dist(m: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    (0..m.ncols()).map(|c| (m[(i, c)] - m[(j, c)]).powi(2)).sum::<f64>().sqrt()
}

/// `(S1, S2, S3, V²_N)` by the literal sums, including the triple loop
/// for `S3`.
pub fn dcov_oracle(x: &DMatrix<f64>, y: &DMatrix<f64>) -> (f64, f64, f64, f64) {
    let n = x.nrows();
    let nf = n as f64;
    let (mut s1, mut sa, mut sb, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let a = dist(x, i, j);
            let b = dist(y, i, j);
            s1 += a * b;
            sa += a;
            sb += b;
            for m in 0..n {
                s3 += a * dist(y, i, m);
            }
        }
    }
    let s1 = s1 / (nf * nf);
    let s2 = sa / (nf * nf) * sb / (nf * nf);
    let s3 = s3 / (nf * nf * nf);
    (s1, s2, s3, s1 + s2 - 2.0 * s3)
}

/// Doubly centred distance matrix of `y`.
pub fn g_oracle(y: &DMatrix<f64>) -> DMatrix<f64> {
    let n = y.nrows();
    let nf = n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| dist(y, i, j));
    let row: Vec<f64> = (0..n).map(|i| (0..n).map(|k| b[(i, k)]).sum::<f64>() / nf).collect();
    let all: f64 = row.iter().sum::<f64>() / nf;
    DMatrix::from_fn(n, n, |i, j| b[(i, j)] - row[i] - row[j] + all)
}

/// `(N²/2) V²_N(Xu, Y)`, which equals `‖M₊u‖₁ - ‖M₋u‖₁`.
pub fn objective_oracle(x: &DMatrix<f64>, y: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    let n = x.nrows() as f64;
    let xu = x * u;
    let xu = DMatrix::from_column_slice(xu.len(), 1, xu.as_slice());
    0.5 * n * n * dcov_oracle(&xu, y).3
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(rng))
}

pub fn binomial_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize, trials: u64, prob: f64) -> DMatrix<f64> {
    let b = Binomial::new(trials, prob).unwrap();
    DMatrix::from_fn(n, d, |_, _| b.sample(rng) as f64)
}

/// A random `(X, Y)` pair of one of several kinds: independent normals,
/// nonlinear dependence, or discrete data with ties.
pub fn random_pair(rng: &mut ChaCha8Rng, n: usize, p: usize, q: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let x = normal_matrix(rng, n, p);
    let kind = rng.random_range(0..3);
    let y = match kind {
        0 => normal_matrix(rng, n, q),
        1 => {
            let e = normal_matrix(rng, n, q);
            DMatrix::from_fn(n, q, |i, j| {
                let s: f64 = x.row(i).sum();
                (if j % 2 == 0 { s } else { s * s }) + 0.3 * e[(i, j)]
            })
        }
        _ => binomial_matrix(rng, n, q, 4, 0.5),
    };
    (x, y)
}

pub fn random_unit(rng: &mut ChaCha8Rng, p: usize) -> DVector<f64> {
    let v: DVector<f64> = DVector::from_fn(p, |_, _| StandardNormal.sample(rng));
    let n = v.norm();
    v / n
}

/// Minimises `½‖c - Σ w_k r_k‖²` over `w ∈ [-1, 1]^K` by cyclic coordinate
/// descent and returns the residual norm.
pub fn box_least_squares(rows: &[DVector<f64>], c: &DVector<f64>, sweeps: usize) -> DVector<f64> {
    let mut w = vec![0.0; rows.len()];
    let mut res = c.clone();
    for _ in 0..sweeps {
        let mut moved = 0.0f64;
        for (k, r) in rows.iter().enumerate() {
            let rr = r.norm_squared();
            if rr == 0.0 {
                continue;
            }
            let new = (w[k] + res.dot(r) / rr).clamp(-1.0, 1.0);
            if new != w[k] {
                res -= r * (new - w[k]);
                moved = moved.max((new - w[k]).abs());
                w[k] = new;
            }
        }
        if moved == 0.0 {
            break;
        }
    }
    res
}

/// First-order residual of the augmented Lagrangian at `u`, minimised
/// over sign choices on rows where `M±u` vanishes (relative `zero_tol`).
pub fn stationarity_oracle(
    m_plus: &DMatrix<f64>,
    m_minus: &DMatrix<f64>,
    u: &DVector<f64>,
    xi: f64,
    psi: f64,
    zero_tol: f64,
) -> f64 {
    let nu = u.norm();
    let mut fixed = u * xi - u * ((xi - psi) / nu);
    let mut free = Vec::new();
    for (m, side) in [(m_plus, 1.0), (m_minus, -1.0)] {
        for i in 0..m.nrows() {
            let r: DVector<f64> = m.row(i).transpose();
            let t = r.dot(u);
            if t.abs() <= zero_tol * r.norm() * nu {
                free.push(r);
            } else {
                fixed += &r * (side * t.signum());
            }
        }
    }
    box_least_squares(&free, &fixed, 100_000).norm()
}

/// `(ξ/2)‖u‖² + ‖Mu‖₁ - yᵀu`.
pub fn subproblem_objective(m: &DMatrix<f64>, xi: f64, y: &DVector<f64>, u: &DVector<f64>) -> f64 {
    let l1: f64 = if m.nrows() == 0 { 0.0 } else { (m * u).iter().map(|v| v.abs()).sum() };
    0.5 * xi * u.norm_squared() + l1 - y.dot(u)
}

/// High-precision minimum of the subproblem: coordinate descent on its
/// box-constrained dual, run to a stall. Returns the primal point and the
/// duality gap that bounds its suboptimality.
pub fn subproblem_oracle(m: &DMatrix<f64>, xi: f64, y: &DVector<f64>) -> (DVector<f64>, f64) {
    let rows: Vec<DVector<f64>> = (0..m.nrows()).map(|i| m.row(i).transpose()).collect();
    let z = box_least_squares(&rows, y, 1_000_000);
    let u = &z / xi;
    let dual = -z.norm_squared() / (2.0 * xi);
    let gap = subproblem_objective(m, xi, y, &u) - dual;
    (u, gap)
}
