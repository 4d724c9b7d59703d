use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{generate, ScenarioName, ScenarioSpec};
use crate::engine::disca;
use crate::error::{DiscaError, Result};
use crate::seed::{mix_seed, replicate_seed};
use crate::solver::SolverConfig;
use crate::subspace::projector_distance;

/// Outcome of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub run: usize,
    pub seed: u64,
    pub rank_x: Option<usize>,
    pub rank_y: Option<usize>,
    /// Projector distance to the true subspace; 1 when the ranks differ.
    pub dist_x: Option<f64>,
    pub dist_y: Option<f64>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Five-number summary, quartiles by linear interpolation between order
/// statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let h = q * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            min: v[0],
            q1: at(0.25),
            median: at(0.5),
            q3: at(0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Aggregates for one sample size. Histogram index is the estimated rank;
/// failed replicates are counted separately, so histogram total plus
/// `failures` equals `runs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub runs: usize,
    pub failures: usize,
    pub rank_hist_x: Vec<usize>,
    pub rank_hist_y: Vec<usize>,
    pub true_rank_x: usize,
    pub true_rank_y: usize,
    pub correct_x: usize,
    pub correct_y: usize,
    pub dist_x: Option<Quantiles>,
    pub dist_y: Option<Quantiles>,
}

impl SizeSummary {
    pub fn rate_x(&self) -> f64 {
        self.correct_x as f64 / self.runs as f64
    }

    pub fn rate_y(&self) -> f64 {
        self.correct_y as f64 / self.runs as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub scenario: ScenarioName,
    pub master_seed: u64,
    pub noise: f64,
    pub runs: usize,
    pub config: SolverConfig,
    pub sizes: Vec<SizeSummary>,
    pub records: Vec<RunRecord>,
}

impl MonteCarloSummary {
    pub fn size(&self, n: usize) -> Option<&SizeSummary> {
        self.sizes.iter().find(|s| s.n == n)
    }
}

fn one_run(spec: &ScenarioSpec, n: usize, run: usize, cfg: &SolverConfig) -> RunRecord {
    let seed = replicate_seed(spec.seed, n, run);
    let mut record = RunRecord {
        n,
        run,
        seed,
        rank_x: None,
        rank_y: None,
        dist_x: None,
        dist_y: None,
        error: None,
    };
    let outcome = (|| {
        let data_spec = ScenarioSpec {
            n,
            seed: mix_seed(seed, 0),
            ..spec.clone()
        };
        let data = generate(&data_spec)?;
        let out = disca(&data.x, &data.y, &cfg.clone().with_seed(mix_seed(seed, 1)))?;
        Ok::<_, DiscaError>((
            out.basis_x.rank(),
            out.basis_y.rank(),
            projector_distance(&out.basis_x, &data.truth_x)?,
            projector_distance(&out.basis_y, &data.truth_y)?,
        ))
    })();
    match outcome {
        Ok((rx, ry, dx, dy)) => {
            record.rank_x = Some(rx);
            record.rank_y = Some(ry);
            record.dist_x = Some(dx);
            record.dist_y = Some(dy);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

fn summarise(n: usize, records: &[RunRecord], p: usize, q: usize, true_x: usize, true_y: usize) -> SizeSummary {
    let mut hx = vec![0; p + 1];
    let mut hy = vec![0; q + 1];
    let mut dx = Vec::new();
    let mut dy = Vec::new();
    for r in records.iter().filter(|r| !r.failed()) {
        hx[r.rank_x.expect("set on success")] += 1;
        hy[r.rank_y.expect("set on success")] += 1;
        dx.extend(r.dist_x);
        dy.extend(r.dist_y);
    }
    SizeSummary {
        n,
        runs: records.len(),
        failures: records.iter().filter(|r| r.failed()).count(),
        correct_x: hx[true_x],
        correct_y: hy[true_y],
        rank_hist_x: hx,
        rank_hist_y: hy,
        true_rank_x: true_x,
        true_rank_y: true_y,
        dist_x: Quantiles::from_values(&dx),
        dist_y: Quantiles::from_values(&dy),
    }
}

/// Replicates a generated scenario `runs` times at each sample size.
///
/// Replicates run in parallel. Each one derives its data and solver seeds
/// from `(spec.seed, n, run)` alone, so the summary does not depend on
/// scheduling. A replicate that errors is recorded, not propagated.
pub fn monte_carlo(spec: &ScenarioSpec, runs: usize, ns: &[usize], cfg: &SolverConfig) -> Result<MonteCarloSummary> {
    if runs == 0 {
        return Err(DiscaError::param("runs", "must be >= 1"));
    }
    if ns.is_empty() {
        return Err(DiscaError::param("n", "at least one sample size is required"));
    }
    for &n in ns {
        ScenarioSpec { n, ..spec.clone() }.validate()?;
    }
    cfg.validate()?;
    let (truth_x, truth_y) = super::scenario::true_bases(spec.name)?;
    let jobs: Vec<(usize, usize)> = ns.iter().flat_map(|&n| (0..runs).map(move |r| (n, r))).collect();
    let records: Vec<RunRecord> = jobs.par_iter().map(|&(n, r)| one_run(spec, n, r, cfg)).collect();
    let sizes = ns
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            summarise(
                n,
                &records[k * runs..(k + 1) * runs],
                truth_x.ambient_dim(),
                truth_y.ambient_dim(),
                truth_x.rank(),
                truth_y.rank(),
            )
        })
        .collect();
    Ok(MonteCarloSummary {
        scenario: spec.name,
        master_seed: spec.seed,
        noise: spec.noise,
        runs,
        config: cfg.clone(),
        sizes,
        records,
    })
}
