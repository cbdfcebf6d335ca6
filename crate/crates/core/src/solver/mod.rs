//! Exchange formats, solver adapters, independent feasibility checking and
//! a brute-force oracle for tiny models.

mod check;
mod format;
#[cfg(feature = "highs")]
mod highs_backend;
mod oracle;
mod process;
mod solution_file;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{MilpModel, PlanningConfig};

pub use check::{check_feasibility, closed_switch_cycles, FeasibilityReport, Violation, INTEGRALITY_TOL};
pub use format::{emit_model, parse_model, ModelFormat};
#[cfg(feature = "highs")]
pub use highs_backend::HighsBackend;
pub use oracle::{brute_force_oracle, DEFAULT_MAX_BINARIES};
pub use process::{ProcessBackend, SOLVER_CMD_ENV};
pub use solution_file::{parse_solution, write_solution};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("no solver backend configured: {0}")]
    NotConfigured(String),
    #[error("solver backend failed: {0}")]
    Backend(String),
    #[error("model format error: {0}")]
    Format(String),
    #[error("solution file error at line {line}: {message}")]
    SolutionFile { line: usize, message: String },
    #[error("solution has no value for variable `{0}`")]
    MissingValue(String),
    #[error("model has {count} free binaries, more than the oracle limit of {max}")]
    TooManyBinaries { count: usize, max: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    GapFeasible,
    Infeasible,
    Timeout,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::GapFeasible => "gap-feasible",
            Status::Infeasible => "infeasible",
            Status::Timeout => "timeout",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "optimal" => Ok(Status::Optimal),
            "gap-feasible" => Ok(Status::GapFeasible),
            "infeasible" => Ok(Status::Infeasible),
            "timeout" => Ok(Status::Timeout),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

/// Result of a solve. `values` is keyed by emitted variable name and is
/// empty when no incumbent exists.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub objective: f64,
    pub gap: f64,
    pub values: BTreeMap<String, f64>,
    pub solve_seconds: f64,
}

impl Solution {
    pub fn infeasible(solve_seconds: f64) -> Self {
        Solution {
            status: Status::Infeasible,
            objective: f64::INFINITY,
            gap: f64::INFINITY,
            values: BTreeMap::new(),
            solve_seconds,
        }
    }

    /// Keys column values by the model's variable names.
    pub fn from_columns(model: &MilpModel, columns: &[f64], status: Status, gap: f64, solve_seconds: f64) -> Self {
        let values = model.variables.iter().zip(columns).map(|(v, &x)| (v.key.name(), x)).collect();
        Solution { status, objective: model.objective_value(columns), gap, values, solve_seconds }
    }

    pub fn has_incumbent(&self) -> bool {
        !self.values.is_empty() || matches!(self.status, Status::Optimal | Status::GapFeasible)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    /// Values in the model's column order.
    pub fn column_values(&self, model: &MilpModel) -> Result<Vec<f64>, SolverError> {
        model
            .variables
            .iter()
            .map(|v| {
                let name = v.key.name();
                self.values.get(&name).copied().ok_or(SolverError::MissingValue(name))
            })
            .collect()
    }
}

/// Gap and time limit handed to a backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub optimality_gap: f64,
    pub time_limit_seconds: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { optimality_gap: 0.01, time_limit_seconds: None }
    }
}

impl From<&PlanningConfig> for SolveOptions {
    fn from(cfg: &PlanningConfig) -> Self {
        SolveOptions { optimality_gap: cfg.optimality_gap, time_limit_seconds: cfg.time_limit_seconds }
    }
}

/// A MILP solver adapter. Implementations must not invent values: a
/// returned incumbent is whatever the underlying solver reported.
pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<Solution, SolverError>;
}

/// Solves `model` with `backend`.
pub fn solve(model: &MilpModel, backend: &dyn MilpBackend, cfg: &PlanningConfig) -> Result<Solution, SolverError> {
    backend.solve(model, &SolveOptions::from(cfg))
}

/// The in-process backend when compiled in, otherwise a process adapter
/// from the environment.
pub fn default_backend() -> Result<Box<dyn MilpBackend>, SolverError> {
    #[cfg(feature = "highs")]
    {
        Ok(Box::new(HighsBackend::default()))
    }
    #[cfg(not(feature = "highs"))]
    {
        Ok(Box::new(ProcessBackend::from_env()?))
    }
}
