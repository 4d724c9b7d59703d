use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::monte_carlo::{MonteCarloSummary, Quantiles};
use super::scenario::{ScenarioName, ScenarioSpec};
use crate::dcov::DistanceStats;
use crate::engine::{DiscaOutput, EliminationTrace};
use crate::error::{DiscaError, Result};
use crate::subspace::Basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

/// A single fit together with where its data came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub scenario: ScenarioSpec,
    /// Bases were rotated by varimax before reporting.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub varimax: bool,
    #[serde(flatten)]
    pub output: DiscaOutput,
}

impl FitReport {
    pub fn x_names(&self) -> Vec<String> {
        names(&self.scenario, true, self.output.basis_x.ambient_dim())
    }

    pub fn y_names(&self) -> Vec<String> {
        names(&self.scenario, false, self.output.basis_y.ambient_dim())
    }
}

fn names(spec: &ScenarioSpec, x: bool, dim: usize) -> Vec<String> {
    match (&spec.csv, x) {
        (Some(src), true) if src.x_cols.len() == dim => src.x_cols.clone(),
        (Some(src), false) if src.y_cols.len() == dim => src.y_cols.clone(),
        _ => {
            let prefix = if x { "X" } else { "Y" };
            (1..=dim).map(|i| format!("{prefix}{i}")).collect()
        }
    }
}

/// Result of a single independence test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcovReport {
    #[serde(flatten)]
    pub stats: DistanceStats,
    pub statistic: f64,
    pub alpha: f64,
    pub threshold: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
#[allow(clippy::large_enum_variant)]
pub enum Report {
    Fit(FitReport),
    MonteCarlo(MonteCarloSummary),
    Dcov(DcovReport),
}

/// Serialises a report. Output depends only on the report's contents.
pub fn emit_report(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| DiscaError::InvalidInput(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => csv_report(report),
        Format::Text => Ok(text_report(report)),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_report(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| DiscaError::Io(e.to_string());
    match report {
        Report::Fit(fit) => {
            w.write_record([
                "side", "step", "working_dim", "objective_value", "v2n", "statistic", "threshold", "decision",
                "solver_converged", "direction",
            ])
            .map_err(io)?;
            for (side, trace) in [("x", &fit.output.trace_x), ("y", &fit.output.trace_y)] {
                for (k, s) in trace.steps.iter().enumerate() {
                    let dir: Vec<String> = s.direction.iter().map(f64::to_string).collect();
                    let decision = serde_json::to_value(s.decision).map_err(|e| DiscaError::Io(e.to_string()))?;
                    w.write_record([
                        side.to_string(),
                        k.to_string(),
                        s.working_dim.to_string(),
                        s.objective_value.to_string(),
                        s.v2n.to_string(),
                        s.statistic.to_string(),
                        s.threshold.to_string(),
                        decision.as_str().unwrap_or_default().to_string(),
                        s.solver_converged.to_string(),
                        dir.join(" "),
                    ])
                    .map_err(io)?;
                }
            }
        }
        Report::MonteCarlo(mc) => {
            w.write_record(["n", "run", "seed", "rank_x", "rank_y", "dist_x", "dist_y", "error"])
                .map_err(io)?;
            for r in &mc.records {
                w.write_record([
                    r.n.to_string(),
                    r.run.to_string(),
                    r.seed.to_string(),
                    opt(r.rank_x),
                    opt(r.rank_y),
                    opt(r.dist_x),
                    opt(r.dist_y),
                    r.error.clone().unwrap_or_default(),
                ])
                .map_err(io)?;
            }
        }
        Report::Dcov(d) => {
            w.write_record(["n", "s1", "s2", "s3", "v2n", "statistic", "alpha", "threshold", "reject"])
                .map_err(io)?;
            w.write_record([
                d.stats.n.to_string(),
                d.stats.s1.to_string(),
                d.stats.s2.to_string(),
                d.stats.s3.to_string(),
                d.stats.v2n.to_string(),
                d.statistic.to_string(),
                d.alpha.to_string(),
                d.threshold.to_string(),
                d.reject.to_string(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| DiscaError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| DiscaError::Io(e.to_string()))
}

/// Loadings table: one row per variable, one column per basis vector.
pub fn basis_table(basis: &Basis, names: &[String]) -> String {
    let width = names.iter().map(String::len).max().unwrap_or(0).max(8);
    let mut out = String::new();
    let _ = write!(out, "{:width$}", "");
    for j in 0..basis.rank() {
        let _ = write!(out, " {:>9}", format!("dir{}", j + 1));
    }
    out.push('\n');
    for (i, name) in names.iter().enumerate() {
        let _ = write!(out, "{name:width$}");
        for j in 0..basis.rank() {
            let _ = write!(out, " {:>9.4}", basis.columns()[(i, j)]);
        }
        out.push('\n');
    }
    out
}

fn trace_table(trace: &EliminationTrace) -> String {
    let mut out = format!(
        "{:>4} {:>4} {:>12} {:>12} {:>10}  {}\n",
        "step", "dim", "V2_N", "statistic", "threshold", "decision"
    );
    for (k, s) in trace.steps.iter().enumerate() {
        let decision = match s.decision {
            crate::engine::Decision::Eliminate => "eliminate",
            crate::engine::Decision::Stop => "stop",
        };
        let _ = writeln!(
            out,
            "{:>4} {:>4} {:>12.6e} {:>12.4} {:>10.4}  {decision}{}",
            k + 1,
            s.working_dim,
            s.v2n,
            s.statistic,
            s.threshold,
            if s.solver_converged { "" } else { " (unconverged)" }
        );
    }
    out
}

fn quantile_row(label: &str, q: Option<&Quantiles>) -> String {
    match q {
        Some(q) => format!(
            "  {label}: min {:.4}  q1 {:.4}  median {:.4}  q3 {:.4}  max {:.4}\n",
            q.min, q.q1, q.median, q.q3, q.max
        ),
        None => format!("  {label}: no successful runs\n"),
    }
}

fn hist(h: &[usize]) -> String {
    h.iter().map(usize::to_string).collect::<Vec<_>>().join("/")
}

fn text_report(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Fit(fit) => {
            let o = &fit.output;
            let source = match (&fit.scenario.name, &fit.scenario.csv) {
                (ScenarioName::Csv, Some(src)) => format!("csv {}", src.path.display()),
                (name, _) => format!("{name} (seed {})", fit.scenario.seed),
            };
            let _ = writeln!(out, "scenario: {source}, N = {}", fit.scenario.n);
            let _ = writeln!(
                out,
                "alpha = {}, solver seed = {}, restarts = {}{}",
                o.config.alpha,
                o.config.seed,
                o.config.n_restarts,
                if fit.varimax { ", varimax rotated" } else { "" }
            );
            for (label, basis, names, trace) in [
                ("W_X", &o.basis_x, fit.x_names(), &o.trace_x),
                ("W_Y", &o.basis_y, fit.y_names(), &o.trace_y),
            ] {
                let _ = writeln!(out, "\n{label}: rank {} of {}", basis.rank(), basis.ambient_dim());
                if basis.rank() > 0 {
                    out.push_str(&basis_table(basis, &names));
                }
                out.push_str(&trace_table(trace));
            }
        }
        Report::MonteCarlo(mc) => {
            let _ = writeln!(
                out,
                "scenario: {}, runs = {}, master seed = {}, noise = {}",
                mc.scenario, mc.runs, mc.master_seed, mc.noise
            );
            for s in &mc.sizes {
                let _ = writeln!(out, "\nN = {} ({} failures)", s.n, s.failures);
                let _ = writeln!(
                    out,
                    "  rank W_X 0..: {}  (true {} found {}/{})",
                    hist(&s.rank_hist_x),
                    s.true_rank_x,
                    s.correct_x,
                    s.runs
                );
                let _ = writeln!(
                    out,
                    "  rank W_Y 0..: {}  (true {} found {}/{})",
                    hist(&s.rank_hist_y),
                    s.true_rank_y,
                    s.correct_y,
                    s.runs
                );
                out.push_str(&quantile_row("dist W_X", s.dist_x.as_ref()));
                out.push_str(&quantile_row("dist W_Y", s.dist_y.as_ref()));
            }
        }
        Report::Dcov(d) => {
            let _ = writeln!(out, "N = {}", d.stats.n);
            let _ = writeln!(out, "V2_N = {:.10e}", d.stats.v2n);
            let _ = writeln!(out, "statistic = {:.6}", d.statistic);
            let _ = writeln!(out, "threshold = {:.6} (alpha = {})", d.threshold, d.alpha);
            let _ = writeln!(
                out,
                "decision: {}",
                if d.reject { "reject independence" } else { "independence not rejected" }
            );
        }
    }
    out
}
