use nalgebra::DMatrix;

use crate::error::{DiscaError, Result};

/// Paired-sample input: one observation per row, one coordinate per column.
///
/// Construction validates that there are at least two rows, at least one
/// column and that every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: DMatrix<f64>,
}

impl SampleMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() < 2 {
            return Err(DiscaError::InvalidInput(format!(
                "need at least 2 observations, got {}",
                data.nrows()
            )));
        }
        if data.ncols() < 1 {
            return Err(DiscaError::InvalidInput(
                "need at least 1 coordinate".into(),
            ));
        }
        if let Some((idx, v)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let (r, c) = (idx % data.nrows(), idx / data.nrows());
            return Err(DiscaError::InvalidInput(format!(
                "non-finite entry {v} at row {r}, column {c}"
            )));
        }
        Ok(Self { data })
    }

    /// Builds a matrix from row slices.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.as_ref().len() != d) {
            return Err(DiscaError::InvalidInput(format!(
                "row {i} has {} entries, expected {d}",
                r.as_ref().len()
            )));
        }
        Self::new(DMatrix::from_fn(n, d, |i, j| rows[i].as_ref()[j]))
    }

    /// Single-column sample from a slice of scalars.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_column_slice(values.len(), 1, values))
    }

    /// Coordinates `Xu` along a single direction, as an N×1 sample.
    pub fn project_onto(&self, u: &nalgebra::DVector<f64>) -> Result<Self> {
        if u.len() != self.dim() {
            return Err(DiscaError::DimensionMismatch {
                context: "projection direction",
                expected: self.dim(),
                actual: u.len(),
            });
        }
        let v = &self.data * u;
        Self::new(DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.row(i)).collect()
    }
}
