use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use disca::harness::{
    emit_report, generate, load_csv, monte_carlo, CsvSource, DcovReport, FitReport, Format, Report, ScenarioName,
    ScenarioSpec, DEFAULT_NOISE,
};
use disca::{disca as fit_disca, empirical_dcov, rejection_threshold, varimax, DiscaError, SolverConfig};

#[derive(Parser)]
#[command(name = "disca", version, about = "Distance-covariance screening of dependent subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Significance level of the independence test, in (0, 0.215].
    #[arg(long, global = true, default_value_t = 0.05)]
    alpha: f64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Random restarts per direction search.
    #[arg(long, global = true, default_value_t = 5)]
    restarts: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct CsvArgs {
    /// Comma-separated numeric file with a header row.
    file: Option<PathBuf>,

    #[arg(long, value_delimiter = ',')]
    x_cols: Vec<String>,

    #[arg(long, value_delimiter = ',')]
    y_cols: Vec<String>,

    /// Average consecutive 7-row blocks before fitting.
    #[arg(long)]
    weekly: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Distance covariance and independence test for two column groups.
    Dcov {
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Estimate both dependent subspaces from a file or a generated scenario.
    Fit {
        #[command(flatten)]
        csv: CsvArgs,

        #[arg(long, value_enum, conflicts_with = "file")]
        scenario: Option<ScenarioName>,

        /// Sample size for a generated scenario.
        #[arg(long, default_value_t = 200)]
        n: usize,

        #[arg(long, default_value_t = DEFAULT_NOISE)]
        noise: f64,

        /// Rotate the reported bases by varimax.
        #[arg(long)]
        varimax: bool,
    },
    /// Monte Carlo replication of a generated scenario.
    Simulate {
        #[arg(long, value_enum)]
        scenario: ScenarioName,

        /// Sample sizes, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "50,100,150,200")]
        n: Vec<usize>,

        #[arg(long, default_value_t = 100)]
        runs: usize,

        #[arg(long, default_value_t = DEFAULT_NOISE)]
        noise: f64,
    },
    /// Print the rejection threshold (Φ⁻¹(1 - α/2))².
    Threshold,
}

fn config(cli: &Cli) -> SolverConfig {
    SolverConfig::default()
        .with_seed(cli.seed)
        .with_restarts(cli.restarts)
        .with_alpha(cli.alpha)
}

fn csv_source(args: &CsvArgs) -> Result<CsvSource, DiscaError> {
    let path = args
        .file
        .clone()
        .ok_or_else(|| DiscaError::InvalidInput("an input file or --scenario is required".into()))?;
    Ok(CsvSource {
        path,
        x_cols: args.x_cols.clone(),
        y_cols: args.y_cols.clone(),
        weekly: args.weekly,
    })
}

fn run(cli: &Cli) -> Result<String, DiscaError> {
    let cfg = config(cli);
    let report = match &cli.command {
        Command::Threshold => return Ok(format!("{:.6}\n", rejection_threshold(cli.alpha)?)),
        Command::Dcov { csv } => {
            let src = csv_source(csv)?;
            ScenarioSpec::csv(src.clone()).validate()?;
            let (x, y) = load_csv(&src.path, &src.x_cols, &src.y_cols, src.weekly)?;
            let threshold = rejection_threshold(cli.alpha)?;
            let stats = empirical_dcov(&x, &y)?;
            let statistic = stats.statistic()?;
            Report::Dcov(DcovReport {
                stats,
                statistic,
                alpha: cli.alpha,
                threshold,
                reject: statistic > threshold,
            })
        }
        Command::Fit {
            csv,
            scenario,
            n,
            noise,
            varimax: rotate,
        } => {
            let (spec, x, y) = match scenario {
                Some(ScenarioName::Csv) | None => {
                    let src = csv_source(csv)?;
                    let mut spec = ScenarioSpec::csv(src.clone());
                    spec.validate()?;
                    let (x, y) = load_csv(&src.path, &src.x_cols, &src.y_cols, src.weekly)?;
                    spec.n = x.n();
                    spec.seed = cli.seed;
                    (spec, x, y)
                }
                Some(name) => {
                    let spec = ScenarioSpec::new(*name, *n, cli.seed).with_noise(*noise);
                    let data = generate(&spec)?;
                    (spec, data.x, data.y)
                }
            };
            let mut output = fit_disca(&x, &y, &cfg)?;
            if *rotate {
                output.basis_x = varimax(&output.basis_x);
                output.basis_y = varimax(&output.basis_y);
            }
            Report::Fit(FitReport {
                scenario: spec,
                varimax: *rotate,
                output,
            })
        }
        Command::Simulate {
            scenario,
            n,
            runs,
            noise,
        } => {
            let spec = ScenarioSpec::new(*scenario, 0, cli.seed).with_noise(*noise);
            Report::MonteCarlo(monte_carlo(&spec, *runs, n, &cfg)?)
        }
    };
    emit_report(&report, cli.format)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
