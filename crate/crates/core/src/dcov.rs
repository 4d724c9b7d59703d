//! Empirical distance covariance and the asymptotic independence test.
//!
//! For samples `X` (N×p) and `Y` (N×q) with pairwise distance matrices
//! `a_ij = |X_i - X_j|` and `b_ij = |Y_i - Y_j|`:
//!
//! ```text
//! S1 = (1/N²) Σ_ij a_ij b_ij
//! S2 = (1/N²) Σ_ij a_ij · (1/N²) Σ_ij b_ij
//! S3 = (1/N³) Σ_i Σ_jm a_ij b_im
//! V²_N = S1 + S2 - 2 S3
//! ```
//!
//! The test statistic is `N V²_N / S2`; independence is rejected when it
//! exceeds `(Φ⁻¹(1 - α/2))²`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{DiscaError, Result};
use crate::sample::SampleMatrix;

/// Largest significance level for which the asymptotic test keeps its
/// type-I guarantee.
pub const MAX_ALPHA: f64 = 0.215;

/// Components of the empirical distance covariance for one sample pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// `s1 + s2 - 2 s3` clamped at zero.
    pub v2n: f64,
    /// Unclamped `s1 + s2 - 2 s3`.
    pub v2n_raw: f64,
    pub n: usize,
}

/// Euclidean distances between all pairs of rows.
pub fn pairwise_distances(samples: &SampleMatrix) -> DMatrix<f64> {
    let x = samples.data();
    let n = x.nrows();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let mut acc = 0.0;
            for c in 0..x.ncols() {
                let d = x[(i, c)] - x[(j, c)];
                acc += d * d;
            }
            let d = acc.sqrt();
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    out
}

/// Distance statistics from precomputed distance matrices.
pub fn dcov_from_distances(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DistanceStats> {
    let n = a.nrows();
    if b.nrows() != n {
        return Err(DiscaError::DimensionMismatch {
            context: "distance matrices",
            expected: n,
            actual: b.nrows(),
        });
    }
    let nf = n as f64;
    let s1 = a.component_mul(b).sum() / (nf * nf);
    let s2 = (a.sum() / (nf * nf)) * (b.sum() / (nf * nf));
    let row_a = a.column_sum();
    let row_b = b.column_sum();
    let s3 = row_a.dot(&row_b) / (nf * nf * nf);
    let raw = s1 + s2 - 2.0 * s3;
    Ok(DistanceStats {
        s1,
        s2,
        s3,
        v2n: raw.max(0.0),
        v2n_raw: raw,
        n,
    })
}

pub fn empirical_dcov(x: &SampleMatrix, y: &SampleMatrix) -> Result<DistanceStats> {
    if x.n() != y.n() {
        return Err(DiscaError::DimensionMismatch {
            context: "sample row counts",
            expected: x.n(),
            actual: y.n(),
        });
    }
    dcov_from_distances(&pairwise_distances(x), &pairwise_distances(y))
}

impl DistanceStats {
    /// `N V²_N / S2`, or an error when `S2` vanishes.
    pub fn statistic(&self) -> Result<f64> {
        if self.s2 <= 0.0 {
            return Err(DiscaError::DegenerateSample);
        }
        Ok(self.n as f64 * self.v2n / self.s2)
    }

    /// Like [`statistic`](Self::statistic), but a constant sample is treated
    /// as independent and yields 0.
    pub fn statistic_or_zero(&self) -> f64 {
        self.statistic().unwrap_or(0.0)
    }
}

pub fn test_statistic(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    empirical_dcov(x, y)?.statistic()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= MAX_ALPHA) {
        return Err(DiscaError::param(
            "alpha",
            format!("{alpha} outside (0, {MAX_ALPHA}]"),
        ));
    }
    Ok(())
}

/// Rejection threshold `(Φ⁻¹(1 - α/2))²`.
pub fn rejection_threshold(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let z = normal_quantile(1.0 - alpha / 2.0);
    Ok(z * z)
}

pub fn reject_independence(statistic: f64, alpha: f64) -> Result<bool> {
    Ok(statistic > rejection_threshold(alpha)?)
}

/// Standard normal quantile function.
///
/// Wichura's AS 241 (PPND16) rational approximation, relative accuracy
/// about 1e-16 over the open unit interval. Returns ±∞ at the endpoints
/// and NaN outside `[0, 1]`.
pub fn normal_quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&AS241_A, r) / poly(&AS241_B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(&AS241_C, r) / poly(&AS241_D, r)
    } else {
        let r = r - 5.0;
        poly(&AS241_E, r) / poly(&AS241_F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

// Horner evaluation, coefficients in ascending order.
fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const AS241_A: [f64; 8] = [
    3.387_132_872_796_366_5,
    1.331_416_678_917_843_8e2,
    1.971_590_950_306_551_3e3,
    1.373_169_376_550_946e4,
    4.592_195_393_154_987e4,
    6.726_577_092_700_87e4,
    3.343_057_558_358_813e4,
    2.509_080_928_730_122_7e3,
];
const AS241_B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091e1,
    6.871_870_074_920_579e2,
    5.394_196_021_424_751e3,
    2.121_379_430_158_659_7e4,
    3.930_789_580_009_271e4,
    2.872_908_573_572_194_3e4,
    5.226_495_278_852_545e3,
];
const AS241_C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    2.417_807_251_774_506e-1,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
const AS241_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    6.897_673_349_851e-1,
    1.481_039_764_274_800_8e-1,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const AS241_E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    2.965_605_718_285_048_7e-1,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const AS241_F: [f64; 8] = [
    1.0,
    5.998_322_065_558_88e-1,
    1.369_298_809_227_358e-1,
    1.487_536_129_085_061_5e-2,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_8e-15,
];
