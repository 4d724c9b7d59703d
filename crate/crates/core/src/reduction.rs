//! Rewrites `min V²_N(Xu, Y)` over unit `u` as an ℓ1 difference problem.
//!
//! With doubly centred Y-distances
//!
//! ```text
//! g_ij = |Y_i - Y_j| - (1/N) Σ_k |Y_i - Y_k| - (1/N) Σ_k |Y_j - Y_k| + (1/N²) Σ_kl |Y_k - Y_l|
//! ```
//!
//! the squared empirical distance covariance of the projection `Xu` is
//! `(1/N²) Σ_ij g_ij |uᵀ(X_i - X_j)| = (2/N²)(‖M₊u‖₁ - ‖M₋u‖₁)`, where the
//! rows of `M₊` are `g_ij (X_i - X_j)ᵀ` for `g_ij > 0, j > i` and the rows of
//! `M₋` are `-g_ij (X_i - X_j)ᵀ` for `g_ij < 0, j > i`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::dcov::pairwise_distances;
use crate::error::{DiscaError, Result};
use crate::sample::SampleMatrix;

/// Symmetric N×N matrix of doubly centred distances; entries sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix {
    g: DMatrix<f64>,
}

impl GMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }
}

pub fn g_coefficients(y: &SampleMatrix) -> GMatrix {
    g_from_distances(&pairwise_distances(y))
}

pub(crate) fn g_from_distances(b: &DMatrix<f64>) -> GMatrix {
    let n = b.nrows();
    let nf = n as f64;
    let row_mean: Vec<f64> = (0..n).map(|i| b.column(i).sum() / nf).collect();
    let grand = row_mean.iter().sum::<f64>() / nf;
    let g = DMatrix::from_fn(n, n, |i, j| b[(i, j)] - row_mean[i] - row_mean[j] + grand);
    GMatrix { g }
}

/// The stacked signed difference matrices `M₊` and `M₋`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDiffProblem {
    m_plus: DMatrix<f64>,
    m_minus: DMatrix<f64>,
    plus_pairs: Vec<(usize, usize)>,
    minus_pairs: Vec<(usize, usize)>,
}

impl SignedDiffProblem {
    /// Assembles a problem directly from its two matrices.
    pub fn from_matrices(m_plus: DMatrix<f64>, m_minus: DMatrix<f64>) -> Result<Self> {
        if m_plus.ncols() != m_minus.ncols() {
            return Err(DiscaError::DimensionMismatch {
                context: "M+ / M- column counts",
                expected: m_plus.ncols(),
                actual: m_minus.ncols(),
            });
        }
        if m_plus.ncols() == 0 {
            return Err(DiscaError::InvalidInput("ambient dimension must be >= 1".into()));
        }
        if m_plus.iter().chain(m_minus.iter()).any(|v| !v.is_finite()) {
            return Err(DiscaError::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self {
            m_plus,
            m_minus,
            plus_pairs: Vec::new(),
            minus_pairs: Vec::new(),
        })
    }

    pub fn m_plus(&self) -> &DMatrix<f64> {
        &self.m_plus
    }

    pub fn m_minus(&self) -> &DMatrix<f64> {
        &self.m_minus
    }

    pub fn n_plus(&self) -> usize {
        self.m_plus.nrows()
    }

    pub fn n_minus(&self) -> usize {
        self.m_minus.nrows()
    }

    /// Ambient dimension p.
    pub fn dim(&self) -> usize {
        self.m_plus.ncols()
    }

    /// Observation pairs `(i, j)`, `i < j`, behind each row of `M₊`.
    /// Empty when the problem was assembled from raw matrices.
    pub fn plus_pairs(&self) -> &[(usize, usize)] {
        &self.plus_pairs
    }

    pub fn minus_pairs(&self) -> &[(usize, usize)] {
        &self.minus_pairs
    }

    /// `‖M₊u‖₁ - ‖M₋u‖₁`.
    pub fn objective(&self, u: &DVector<f64>) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(DiscaError::DimensionMismatch {
                context: "direction length",
                expected: self.dim(),
                actual: u.len(),
            });
        }
        Ok(self.objective_unchecked(u))
    }

    pub(crate) fn objective_unchecked(&self, u: &DVector<f64>) -> f64 {
        l1_of_product(&self.m_plus, u) - l1_of_product(&self.m_minus, u)
    }

    /// Sum of Euclidean row norms over both matrices.
    pub fn total_row_norm(&self) -> f64 {
        row_norm_sum(&self.m_plus) + row_norm_sum(&self.m_minus)
    }

    /// Equivalent problem with parallel rows of each matrix summed into one
    /// and zero rows dropped.
    ///
    /// For parallel rows `|a·u| + |b·u| = |(a ± b)·u|` with the sign that
    /// aligns them, so both ℓ1 terms are unchanged for every `u`. Rows count
    /// as parallel when their unit directions agree to about 1e-12, which
    /// catches the heavy duplication of integer-valued samples. Pair indices
    /// are not carried over.
    pub fn merge_parallel_rows(&self) -> Self {
        Self {
            m_plus: merge_rows(&self.m_plus),
            m_minus: merge_rows(&self.m_minus),
            plus_pairs: Vec::new(),
            minus_pairs: Vec::new(),
        }
    }
}

fn merge_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let p = m.ncols();
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut merged: Vec<DVector<f64>> = Vec::new();
    for row in m.row_iter() {
        let norm = row.norm();
        if norm == 0.0 {
            continue;
        }
        let lead = row.iter().position(|v| v.abs() > 1e-9 * norm).expect("nonzero row");
        let sign = row[lead].signum();
        let key: Vec<i64> = row.iter().map(|v| (sign * v / norm * 1e12).round() as i64).collect();
        let aligned = row.transpose() * sign;
        match index.get(&key) {
            Some(&k) => merged[k] += aligned,
            None => {
                index.insert(key, merged.len());
                merged.push(aligned);
            }
        }
    }
    if merged.is_empty() {
        return DMatrix::zeros(0, p);
    }
    DMatrix::from_fn(merged.len(), p, |r, c| merged[r][c])
}

pub(crate) fn l1_of_product(m: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    (m * u).lp_norm(1)
}

fn row_norm_sum(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.norm()).sum()
}

pub fn build_signed_diffs(x: &SampleMatrix, g: &GMatrix) -> Result<SignedDiffProblem> {
    let n = x.n();
    if g.n() != n {
        return Err(DiscaError::DimensionMismatch {
            context: "g-matrix size vs sample rows",
            expected: n,
            actual: g.n(),
        });
    }
    let gv = g.values();
    let mut plus_pairs = Vec::new();
    let mut minus_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = gv[(i, j)];
            if v > 0.0 {
                plus_pairs.push((i, j));
            } else if v < 0.0 {
                minus_pairs.push((i, j));
            }
        }
    }
    let xd = x.data();
    let p = x.dim();
    let fill = |pairs: &[(usize, usize)], sign: f64| {
        DMatrix::from_fn(pairs.len(), p, |r, c| {
            let (i, j) = pairs[r];
            sign * gv[(i, j)] * (xd[(i, c)] - xd[(j, c)])
        })
    };
    let m_plus = fill(&plus_pairs, 1.0);
    let m_minus = fill(&minus_pairs, -1.0);
    Ok(SignedDiffProblem {
        m_plus,
        m_minus,
        plus_pairs,
        minus_pairs,
    })
}

/// Convenience: `build_signed_diffs(x, g_coefficients(y))` with a row check.
pub fn build_problem(x: &SampleMatrix, y: &SampleMatrix) -> Result<SignedDiffProblem> {
    if x.n() != y.n() {
        return Err(DiscaError::DimensionMismatch {
            context: "sample row counts",
            expected: x.n(),
            actual: y.n(),
        });
    }
    build_signed_diffs(x, &g_coefficients(y))
}

#[cfg(test)]
mod tests {
    #[test]
    fn merging_parallel_rows_preserves_objective() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        // integer differences with many repeats, as with binomial data
        let mp = DMatrix::from_fn(300, 3, |_, _| rng.random_range(-2i32..=2) as f64 * 0.37);
        let mm = DMatrix::from_fn(200, 3, |_, _| rng.random_range(-2i32..=2) as f64 * 1.3);
        let prob = SignedDiffProblem::from_matrices(mp, mm).unwrap();
        let merged = prob.merge_parallel_rows();
        assert!(merged.n_plus() < 100 && merged.n_minus() < 100);
        assert!((merged.total_row_norm() - prob.total_row_norm()).abs() < 1e-9 * prob.total_row_norm());
        for _ in 0..50 {
            let u = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let (a, b) = (prob.objective(&u).unwrap(), merged.objective(&u).unwrap());
            assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
        }
        // axis directions hit exact ties
        let e = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        assert!((prob.objective(&e).unwrap() - merged.objective(&e).unwrap()).abs() < 1e-10 * prob.total_row_norm());
    }

    use super::*;
    use crate::dcov::empirical_dcov;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn col(v: &[f64]) -> SampleMatrix {
        SampleMatrix::from_column(v).unwrap()
    }

    fn random(rng: &mut ChaCha8Rng, n: usize, d: usize) -> SampleMatrix {
        SampleMatrix::new(DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0))).unwrap()
    }

    #[test]
    fn g_two_points() {
        let g = g_coefficients(&col(&[0.0, 1.0]));
        let expect = DMatrix::from_row_slice(2, 2, &[-0.5, 0.5, 0.5, -0.5]);
        assert!((g.values() - expect).abs().max() < 1e-15);
    }

    #[test]
    fn g_constant_is_zero() {
        let g = g_coefficients(&col(&[4.0, 4.0, 4.0, 4.0]));
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn g_symmetric_and_centred() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let g = g_coefficients(&random(&mut rng, 15, 2));
            let v = g.values();
            assert!((v - v.transpose()).abs().max() < 1e-10);
            assert!(v.sum().abs() < 1e-10);
        }
    }

    #[test]
    fn two_point_problem() {
        let x = col(&[0.0, 1.0]);
        let g = g_coefficients(&col(&[0.0, 1.0]));
        let p = build_signed_diffs(&x, &g).unwrap();
        assert_eq!(p.n_plus(), 1);
        assert_eq!(p.n_minus(), 0);
        assert_abs_diff_eq!(p.m_plus()[(0, 0)], -0.5, epsilon = 1e-15);
        assert_eq!(p.plus_pairs(), &[(0, 1)]);
        let u = DVector::from_vec(vec![1.0]);
        assert_abs_diff_eq!(p.objective(&u).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(p.objective(&DVector::zeros(1)).unwrap(), 0.0);
    }

    #[test]
    fn zero_g_gives_empty_problem() {
        let x = col(&[0.0, 1.0, 3.0]);
        let g = g_coefficients(&col(&[1.0, 1.0, 1.0]));
        let p = build_signed_diffs(&x, &g).unwrap();
        assert_eq!((p.n_plus(), p.n_minus()), (0, 0));
        assert_eq!(p.objective(&DVector::from_vec(vec![1.0])).unwrap(), 0.0);
    }

    #[test]
    fn row_count_matches_nonzero_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random(&mut rng, 10, 3);
        let g = g_coefficients(&random(&mut rng, 10, 2));
        let p = build_signed_diffs(&x, &g).unwrap();
        let mut nonzero = 0;
        for i in 0..10 {
            for j in (i + 1)..10 {
                if g.values()[(i, j)] != 0.0 {
                    nonzero += 1;
                }
            }
        }
        assert_eq!(p.n_plus() + p.n_minus(), nonzero);
        assert!(p.n_plus() + p.n_minus() <= 45);
        for (r, &(i, j)) in p.plus_pairs().iter().enumerate() {
            let gij = g.values()[(i, j)];
            assert!(gij > 0.0);
            for c in 0..3 {
                let e = gij * (x.data()[(i, c)] - x.data()[(j, c)]);
                assert_eq!(p.m_plus()[(r, c)], e);
            }
        }
    }

    #[test]
    fn mismatched_sizes() {
        let g = g_coefficients(&col(&[0.0, 1.0, 2.0]));
        assert!(build_signed_diffs(&col(&[0.0, 1.0]), &g).is_err());
        let p = build_problem(&col(&[0.0, 1.0]), &col(&[0.0, 2.0])).unwrap();
        assert!(p.objective(&DVector::zeros(2)).is_err());
    }

    #[test]
    fn objective_matches_projected_dcov() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = random(&mut rng, 12, 3);
        let y = random(&mut rng, 12, 2);
        let p = build_problem(&x, &y).unwrap();
        let u = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0)).normalize();
        let xu = x.project_onto(&u).unwrap();
        let v2n = empirical_dcov(&xu, &y).unwrap().v2n_raw;
        let n2 = 144.0;
        assert_abs_diff_eq!(p.objective(&u).unwrap(), n2 / 2.0 * v2n, epsilon = 1e-10);
    }
}
