//! Data generators, Monte Carlo replication, CSV ingestion and report
//! output used by the command-line tool.

pub mod csv_input;
pub mod monte_carlo;
pub mod report;
pub mod scenario;

pub use csv_input::{load_csv, read_csv, weekly_means};
pub use monte_carlo::{monte_carlo, MonteCarloSummary, Quantiles, RunRecord, SizeSummary};
pub use report::{basis_table, emit_report, DcovReport, FitReport, Format, Report};
pub use scenario::{generate, true_bases, CsvSource, GeneratedData, ScenarioName, ScenarioSpec, DEFAULT_NOISE};
