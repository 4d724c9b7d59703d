//! Orthonormal bases, complements, projections and subspace distances.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Serialize, Serializer};

use crate::error::{DiscaError, Result};
use crate::sample::SampleMatrix;

/// Relative singular-value cut-off used for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// A `d × k` matrix with orthonormal columns spanning a subspace of `ℝ^d`.
/// `k = 0` is the trivial subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    columns: DMatrix<f64>,
}

impl Basis {
    /// Wraps `columns` after checking `columnsᵀ columns = I` to 1e-10.
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        if columns.nrows() == 0 {
            return Err(DiscaError::InvalidInput("ambient dimension must be >= 1".into()));
        }
        if columns.ncols() > columns.nrows() {
            return Err(DiscaError::InvalidInput(format!(
                "{} columns cannot be orthonormal in dimension {}",
                columns.ncols(),
                columns.nrows()
            )));
        }
        let k = columns.ncols();
        let err = (columns.tr_mul(&columns) - DMatrix::identity(k, k)).abs().max();
        if err.is_nan() || err > 1e-10 {
            return Err(DiscaError::InvalidInput(format!("columns are not orthonormal (error {err:.3e})")));
        }
        Ok(Self { columns })
    }

    /// Builds a basis from column vectors given as slices.
    pub fn from_columns(dim: usize, cols: &[Vec<f64>]) -> Result<Self> {
        if let Some(c) = cols.iter().find(|c| c.len() != dim) {
            return Err(DiscaError::DimensionMismatch {
                context: "basis column length",
                expected: dim,
                actual: c.len(),
            });
        }
        let m = DMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i]);
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            columns: DMatrix::identity(dim, dim),
        }
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            columns: DMatrix::zeros(dim, 0),
        }
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    /// Columns as plain vectors, the layout used in reports.
    pub fn column_vectors(&self) -> Vec<Vec<f64>> {
        self.columns.column_iter().map(|c| c.iter().copied().collect()).collect()
    }

    /// Orthogonal projector `BBᵀ`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.columns * self.columns.transpose()
    }
}

/// Serialised as the list of its column vectors.
impl Serialize for Basis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.column_vectors().serialize(s)
    }
}

/// Orthonormal basis for the span of the columns of `vectors` (`d × m`).
///
/// Columns are left singular vectors for singular values above
/// `RANK_TOL · σ_max`. Entries are assumed finite.
pub fn orthonormalize(vectors: &DMatrix<f64>) -> Basis {
    let d = vectors.nrows();
    if vectors.ncols() == 0 || vectors.iter().all(|v| *v == 0.0) {
        return Basis::trivial(d);
    }
    let svd = vectors.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = svd.singular_values[order[0]];
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| svd.singular_values[i] > RANK_TOL * smax)
        .collect();
    let columns = DMatrix::from_fn(d, keep.len(), |i, j| u[(i, keep[j])]);
    Basis { columns }
}

/// Orthonormal basis of the orthogonal complement of `basis`.
pub fn complement(basis: &Basis) -> Basis {
    let d = basis.ambient_dim();
    let k = basis.rank();
    if k == 0 {
        return Basis::identity(d);
    }
    if k == d {
        return Basis::trivial(d);
    }
    let q = DMatrix::identity(d, d) - basis.projector();
    let eig = SymmetricEigen::new(q);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let cols: Vec<DVector<f64>> = order[..d - k].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    // one Gram-Schmidt pass removes the residual overlap with `basis`
    let mut out = DMatrix::zeros(d, d - k);
    for (j, c) in cols.into_iter().enumerate() {
        let mut v = &c - basis.columns() * basis.columns().tr_mul(&c);
        for prev in 0..j {
            let p = out.column(prev).into_owned();
            v -= &p * p.dot(&v);
        }
        out.set_column(j, &v.normalize());
    }
    Basis { columns: out }
}

/// Coordinates `XU` of the samples in `basis`.
pub fn project_samples(x: &SampleMatrix, basis: &Basis) -> Result<SampleMatrix> {
    if x.dim() != basis.ambient_dim() {
        return Err(DiscaError::DimensionMismatch {
            context: "sample columns vs basis dimension",
            expected: basis.ambient_dim(),
            actual: x.dim(),
        });
    }
    if basis.rank() == 0 {
        return Err(DiscaError::InvalidInput("cannot take coordinates in the trivial subspace".into()));
    }
    SampleMatrix::new(x.data() * basis.columns())
}

fn check_comparable(b1: &Basis, b2: &Basis) -> Result<()> {
    if b1.ambient_dim() != b2.ambient_dim() {
        return Err(DiscaError::DimensionMismatch {
            context: "subspace ambient dimensions",
            expected: b1.ambient_dim(),
            actual: b2.ambient_dim(),
        });
    }
    if b1.rank() != b2.rank() {
        return Err(DiscaError::RankMismatch {
            left: b1.rank(),
            right: b2.rank(),
        });
    }
    Ok(())
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// `‖P₁ - P₂‖₂` for two subspaces of equal rank.
pub fn subspace_distance(b1: &Basis, b2: &Basis) -> Result<f64> {
    check_comparable(b1, b2)?;
    Ok(spectral_norm(&(b1.projector() - b2.projector())))
}

/// `‖P₁ - P₂‖₂` without the rank check. Subspaces of different rank are
/// always at distance 1.
pub fn projector_distance(b1: &Basis, b2: &Basis) -> Result<f64> {
    match check_comparable(b1, b2) {
        Err(DiscaError::RankMismatch { .. }) => Ok(1.0),
        Err(e) => Err(e),
        Ok(()) => Ok(spectral_norm(&(b1.projector() - b2.projector()))),
    }
}

/// The same distance computed as `‖A₁ᵀB₂‖₂`, where `A₁` spans `b1` and `B₂`
/// spans the complement of `b2`.
pub fn complement_distance(b1: &Basis, b2: &Basis) -> Result<f64> {
    check_comparable(b1, b2)?;
    let b2c = complement(b2);
    Ok(spectral_norm(&b1.columns().tr_mul(b2c.columns())))
}

/// Raw varimax criterion `Σ_j [mean_i l_ij⁴ - (mean_i l_ij²)²]`.
pub fn varimax_criterion(loadings: &DMatrix<f64>) -> f64 {
    let d = loadings.nrows() as f64;
    loadings
        .column_iter()
        .map(|c| {
            let m2 = c.iter().map(|v| v * v).sum::<f64>() / d;
            let m4 = c.iter().map(|v| v.powi(4)).sum::<f64>() / d;
            m4 - m2 * m2
        })
        .sum()
}

/// Varimax rotation of `basis` (Kaiser criterion, no row normalisation).
///
/// Iterates the SVD update for at most 100 rounds, stopping once the
/// criterion improves by less than a relative 1e-8. Each column is then
/// signed so its largest-magnitude entry is positive.
pub fn varimax(basis: &Basis) -> Basis {
    let k = basis.rank();
    if k == 0 {
        return basis.clone();
    }
    let phi = basis.columns();
    let d = phi.nrows() as f64;
    let mut rot = DMatrix::identity(k, k);
    let mut last = 0.0;
    for _ in 0..100 {
        let l = phi * &rot;
        let col_ss = DVector::from_iterator(k, l.column_iter().map(|c| c.norm_squared()));
        let mut target = l.map(|v| v.powi(3));
        for j in 0..k {
            let s = col_ss[j] / d;
            for i in 0..l.nrows() {
                target[(i, j)] -= l[(i, j)] * s;
            }
        }
        let svd = phi.tr_mul(&target).svd(true, true);
        let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v requested"));
        rot = u * vt;
        let total = svd.singular_values.sum();
        if last != 0.0 && total < last * (1.0 + 1e-8) {
            break;
        }
        last = total;
    }
    let mut out = phi * rot;
    for mut c in out.column_iter_mut() {
        let (idx, _) = c.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
        if c[idx] < 0.0 {
            c.neg_mut();
        }
    }
    Basis { columns: out }
}
