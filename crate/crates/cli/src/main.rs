use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridshield_core::report::ReportFormat;
use gridshield_core::scenario::DistanceMetric;
use gridshield_core::solver::{ModelFormat, SOLVER_CMD_ENV};

mod commands;
mod manifest;

#[derive(Parser)]
#[command(name = "gridshield", version, about = "Resilience planning with underground lines and mobile generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample damage scenarios and reduce them to a representative set.
    Scenarios(ScenariosArgs),
    /// Choose candidate lines to build by solving the two-stage model.
    Plan(PlanArgs),
    /// Solve one scenario with the build decisions of a plan fixed.
    Restore(RestoreArgs),
    /// Tabulate a solution, optionally against a baseline.
    Report(ReportArgs),
    /// Verify a solution against a model dump.
    Check(CheckArgs),
}

#[derive(Args)]
pub struct ScenariosArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Number of sampled scenarios.
    #[arg(long, short = 'n', default_value_t = 1000)]
    pub count: usize,
    /// Number of scenarios kept after reduction.
    #[arg(long, short = 'k', default_value_t = 20)]
    pub keep: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hazard intensity, in the units of the fragility curve.
    #[arg(long, default_value_t = 1.0)]
    pub intensity: f64,
    /// Intensity at which an overhead line fails with probability 0.5.
    #[arg(long, default_value_t = 1.0)]
    pub intensity_50: f64,
    #[arg(long, default_value_t = 4.0)]
    pub steepness: f64,
    #[arg(long, default_value_t = 0.0)]
    pub underground_multiplier: f64,
    #[arg(long, value_enum, default_value_t = Metric::LengthWeighted)]
    pub metric: Metric,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Sample on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Metric {
    LengthWeighted,
    Hamming,
}

impl From<Metric> for DistanceMetric {
    fn from(m: Metric) -> Self {
        match m {
            Metric::LengthWeighted => DistanceMetric::LengthWeighted,
            Metric::Hamming => DistanceMetric::Hamming,
        }
    }
}

/// Planning parameters: a config file plus overrides.
#[derive(Args)]
pub struct ConfigArgs {
    /// JSON planning config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Investment budget, dollars.
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub max_underground: Option<u32>,
    /// Relative optimality gap.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Number of periods.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Build the model on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args)]
pub struct SolverArgs {
    /// External solver command template; the in-process solver is used when unset.
    #[arg(long, env = SOLVER_CMD_ENV)]
    pub solver_cmd: Option<String>,
    /// Format of the model dump written next to the solution.
    #[arg(long, default_value = "lp", value_parser = parse_model_format)]
    pub model_format: ModelFormat,
}

fn parse_model_format(s: &str) -> Result<ModelFormat, String> {
    s.parse()
}

fn parse_report_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

#[derive(Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub scenarios: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct RestoreArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Plan file written by `plan`.
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub scenarios: PathBuf,
    /// Id of the scenario to restore.
    #[arg(long)]
    pub scenario: String,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Scenario file the solution was computed for.
    #[arg(long)]
    pub scenarios: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    /// Solution to compare against, over the same scenarios.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// JSON planning config; only the period length is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_report_format)]
    pub format: ReportFormat,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct CheckArgs {
    /// Model dump (`.lp` or `.mps`).
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Model format; inferred from the extension when absent.
    #[arg(long, value_parser = parse_model_format)]
    pub format: Option<ModelFormat>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Scenarios(a) => commands::scenarios(a),
        Command::Plan(a) => commands::plan(a),
        Command::Restore(a) => commands::restore(a),
        Command::Report(a) => commands::report(a),
        Command::Check(a) => commands::check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
