use std::fs;
use std::process::Command;
use std::time::Instant;

use super::{emit_model, parse_solution, MilpBackend, ModelFormat, Solution, SolveOptions, SolverError};
use crate::milp::MilpModel;

/// Environment variable holding the default command template.
pub const SOLVER_CMD_ENV: &str = "GRIDSHIELD_SOLVER_CMD";

/// Runs an external solver through a shell command template.
///
/// The template may use `{model_path}`, `{solution_path}`, `{gap}` and
/// `{timeout}`. The command must write a solution file in the format of
/// [`parse_solution`](super::parse_solution) to `{solution_path}`.
#[derive(Debug, Clone)]
pub struct ProcessBackend {
    pub template: String,
    pub format: ModelFormat,
}

impl ProcessBackend {
    pub fn new(template: impl Into<String>) -> Self {
        ProcessBackend { template: template.into(), format: ModelFormat::LpText }
    }

    pub fn from_env() -> Result<Self, SolverError> {
        match std::env::var(SOLVER_CMD_ENV) {
            Ok(t) if !t.trim().is_empty() => Ok(ProcessBackend::new(t)),
            _ => Err(SolverError::NotConfigured(format!("set {SOLVER_CMD_ENV} to a solver command template"))),
        }
    }

    pub fn command_line(&self, model_path: &str, solution_path: &str, opts: &SolveOptions) -> String {
        let timeout = opts.time_limit_seconds.map_or_else(|| "inf".to_string(), |t| t.to_string());
        self.template
            .replace("{model_path}", model_path)
            .replace("{solution_path}", solution_path)
            .replace("{gap}", &opts.optimality_gap.to_string())
            .replace("{timeout}", &timeout)
    }
}

impl MilpBackend for ProcessBackend {
    fn name(&self) -> &str {
        "process"
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<Solution, SolverError> {
        let start = Instant::now();
        let dir = tempfile::tempdir()?;
        let model_path = dir.path().join(format!("model.{}", self.format.extension()));
        let solution_path = dir.path().join("solution.sol");
        fs::write(&model_path, emit_model(model, self.format)?)?;
        let cmd = self.command_line(&model_path.to_string_lossy(), &solution_path.to_string_lossy(), opts);
        let out = Command::new("sh")
            .arg("-c")
            .arg(&cmd)
            .output()
            .map_err(|e| SolverError::Backend(format!("could not run `{cmd}`: {e}")))?;
        if !out.status.success() {
            return Err(SolverError::Backend(format!(
                "`{cmd}` exited with {}: {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let text = fs::read_to_string(&solution_path)
            .map_err(|e| SolverError::Backend(format!("solver wrote no solution file: {e}")))?;
        let mut sol = parse_solution(&text)?;
        if sol.solve_seconds == 0.0 {
            sol.solve_seconds = start.elapsed().as_secs_f64();
        }
        Ok(sol)
    }
}
