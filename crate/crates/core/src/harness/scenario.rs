use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{DiscaError, Result};
use crate::sample::SampleMatrix;
use crate::subspace::{orthonormalize, Basis};

/// Default coefficient on the additive noise terms.
pub const DEFAULT_NOISE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    /// X ~ N(0, I₃); Y = (s + e₁, s² + e₂) with s = X₁ + X₂ + X₃.
    Counterexample,
    /// Equicorrelated normal X; Y = (s + e₁, s² + e₂, independent normal).
    Example1,
    /// Binomial X; Y = (s² + e, independent binomial).
    Example2,
    /// Student-t(2) X; Y = (tanh s + e₁, tanh s + e₂).
    Example3,
    /// User-supplied data.
    Csv,
}

impl ScenarioName {
    pub const GENERATED: [ScenarioName; 4] = [Self::Counterexample, Self::Example1, Self::Example2, Self::Example3];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Counterexample => "counterexample",
            Self::Example1 => "example1",
            Self::Example2 => "example2",
            Self::Example3 => "example3",
            Self::Csv => "csv",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = DiscaError;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Counterexample, Self::Example1, Self::Example2, Self::Example3, Self::Csv]
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| DiscaError::UnknownScenario(s.to_string()))
    }
}

/// Where a `csv` scenario reads its data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSource {
    pub path: PathBuf,
    pub x_cols: Vec<String>,
    pub y_cols: Vec<String>,
    pub weekly: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: ScenarioName,
    pub n: usize,
    pub seed: u64,
    pub noise: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<CsvSource>,
}

impl ScenarioSpec {
    pub fn new(name: ScenarioName, n: usize, seed: u64) -> Self {
        Self {
            name,
            n,
            seed,
            noise: DEFAULT_NOISE,
            csv: None,
        }
    }

    pub fn csv(source: CsvSource) -> Self {
        Self {
            name: ScenarioName::Csv,
            n: 0,
            seed: 0,
            noise: DEFAULT_NOISE,
            csv: Some(source),
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.name == ScenarioName::Csv {
            let src = self
                .csv
                .as_ref()
                .ok_or_else(|| DiscaError::InvalidInput("csv scenario needs a source file".into()))?;
            if src.x_cols.is_empty() || src.y_cols.is_empty() {
                return Err(DiscaError::InvalidInput("x and y column lists must be nonempty".into()));
            }
            if let Some(c) = src.x_cols.iter().find(|c| src.y_cols.contains(c)) {
                return Err(DiscaError::InvalidInput(format!("column `{c}` is listed for both x and y")));
            }
            return Ok(());
        }
        if self.n < 2 {
            return Err(DiscaError::param("n", format!("{} must be >= 2", self.n)));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(DiscaError::param("noise", format!("{} must be finite and >= 0", self.noise)));
        }
        Ok(())
    }
}

/// Samples from a generated scenario with the subspaces they were built on.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub x: SampleMatrix,
    pub y: SampleMatrix,
    pub truth_x: Basis,
    pub truth_y: Basis,
}

fn span_of(cols: &[&[f64]]) -> Basis {
    let d = cols[0].len();
    orthonormalize(&DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i]))
}

/// Ground-truth `(W_X, W_Y)` for a generated scenario.
pub fn true_bases(name: ScenarioName) -> Result<(Basis, Basis)> {
    let ones: &[f64] = &[1.0, 1.0, 1.0];
    Ok(match name {
        ScenarioName::Counterexample => (span_of(&[ones]), Basis::identity(2)),
        ScenarioName::Example1 => (span_of(&[ones]), span_of(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]])),
        ScenarioName::Example2 => (span_of(&[ones]), span_of(&[&[1.0, 0.0]])),
        ScenarioName::Example3 => (span_of(&[ones]), span_of(&[&[1.0, 1.0]])),
        ScenarioName::Csv => {
            return Err(DiscaError::InvalidInput("csv data has no known subspaces".into()));
        }
    })
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws one sample pair. Rows are generated in order from a single
/// ChaCha8 stream seeded with `spec.seed`.
pub fn generate(spec: &ScenarioSpec) -> Result<GeneratedData> {
    spec.validate()?;
    let (truth_x, truth_y) = true_bases(spec.name)?;
    let n = spec.n;
    let e = spec.noise;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let q = truth_y.ambient_dim();
    let mut x = DMatrix::zeros(n, 3);
    let mut y = DMatrix::zeros(n, q);
    let half = 0.5f64.sqrt();
    let binom_x = Binomial::new(10, 0.5).expect("valid binomial");
    let binom_y = Binomial::new(10, 0.35).expect("valid binomial");
    let chi2 = ChiSquared::new(2.0).expect("valid chi-square");
    for i in 0..n {
        match spec.name {
            ScenarioName::Counterexample => {
                for c in 0..3 {
                    x[(i, c)] = normal(&mut rng);
                }
            }
            ScenarioName::Example1 => {
                // unit variances, pairwise covariance 0.5
                let common = normal(&mut rng);
                for c in 0..3 {
                    x[(i, c)] = half * normal(&mut rng) + half * common;
                }
            }
            ScenarioName::Example2 => {
                for c in 0..3 {
                    x[(i, c)] = binom_x.sample(&mut rng) as f64;
                }
            }
            ScenarioName::Example3 => {
                for c in 0..3 {
                    let z = normal(&mut rng);
                    let w: f64 = chi2.sample(&mut rng);
                    x[(i, c)] = z / (w / 2.0).sqrt();
                }
            }
            ScenarioName::Csv => unreachable!("rejected by true_bases"),
        }
        let s = x[(i, 0)] + x[(i, 1)] + x[(i, 2)];
        match spec.name {
            ScenarioName::Counterexample => {
                y[(i, 0)] = s + e * normal(&mut rng);
                y[(i, 1)] = s * s + e * normal(&mut rng);
            }
            ScenarioName::Example1 => {
                y[(i, 0)] = s + e * normal(&mut rng);
                y[(i, 1)] = s * s + e * normal(&mut rng);
                y[(i, 2)] = normal(&mut rng);
            }
            ScenarioName::Example2 => {
                y[(i, 0)] = s * s + e * normal(&mut rng);
                y[(i, 1)] = binom_y.sample(&mut rng) as f64;
            }
            ScenarioName::Example3 => {
                y[(i, 0)] = s.tanh() + e * normal(&mut rng);
                y[(i, 1)] = s.tanh() + e * normal(&mut rng);
            }
            ScenarioName::Csv => unreachable!(),
        }
    }
    // keep the stream position independent of n for any later draws
    let _ = rng.random::<u64>();
    Ok(GeneratedData {
        x: SampleMatrix::new(x)?,
        y: SampleMatrix::new(y)?,
        truth_x,
        truth_y,
    })
}
