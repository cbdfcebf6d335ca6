use std::time::Instant;

use highs::{HighsModelStatus, RowProblem, Sense as HighsSense};

use super::{check_feasibility, MilpBackend, Solution, SolveOptions, SolverError, Status};
use crate::milp::{MilpModel, Sense};

/// In-process HiGHS.
#[derive(Debug, Clone)]
pub struct HighsBackend {
    pub threads: Option<u32>,
    /// Print the HiGHS log to stdout.
    pub log: bool,
}

impl Default for HighsBackend {
    fn default() -> Self {
        HighsBackend { threads: Some(1), log: false }
    }
}

impl MilpBackend for HighsBackend {
    fn name(&self) -> &str {
        "highs"
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<Solution, SolverError> {
        let start = Instant::now();
        let n = model.variables.len();
        let mut obj = vec![0.0; n];
        for &(j, c) in &model.objective {
            obj[j] += c;
        }
        let mut pb = RowProblem::default();
        let cols: Vec<_> = model
            .variables
            .iter()
            .zip(&obj)
            .map(|(v, &c)| pb.add_column_with_integrality(c, v.lb..=v.ub, v.integer))
            .collect();
        for row in &model.constraints {
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            pb.add_row(lo..=hi, row.terms.iter().map(|&(j, a)| (cols[j], a)));
        }

        let mut hm = pb.optimise(HighsSense::Minimise);
        if self.log {
            hm.set_option("output_flag", true);
            hm.set_option("log_to_console", true);
        } else {
            hm.make_quiet();
        }
        hm.set_option("mip_rel_gap", opts.optimality_gap);
        if let Some(t) = opts.time_limit_seconds {
            hm.set_option("time_limit", t);
        }
        if let Some(t) = self.threads {
            hm.set_option("threads", t as i32);
        }
        let solved = hm.try_solve().map_err(|e| SolverError::Backend(format!("HiGHS: {e:?}")))?;
        let secs = start.elapsed().as_secs_f64();
        let has_integers = model.variables.iter().any(|v| v.integer);

        let status = match solved.status() {
            HighsModelStatus::ModelEmpty => {
                return Ok(Solution::from_columns(model, &[], Status::Optimal, 0.0, secs));
            }
            HighsModelStatus::Optimal => Status::Optimal,
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => {
                return Ok(Solution::infeasible(secs));
            }
            HighsModelStatus::ReachedTimeLimit | HighsModelStatus::ReachedIterationLimit => Status::Timeout,
            other => return Err(SolverError::Backend(format!("HiGHS ended with status {other:?}"))),
        };
        let gap = if has_integers { solved.mip_gap() } else { 0.0 };
        let columns = solved.get_solution().columns().to_vec();
        let mut sol = Solution::from_columns(model, &columns, status, gap, secs);
        match status {
            Status::Optimal if gap > 1e-9 => sol.status = Status::GapFeasible,
            Status::Timeout => {
                // keep a time-limited incumbent only if it really is one
                let ok = check_feasibility(model, &sol, 1e-6).map(|r| r.is_empty()).unwrap_or(false);
                if !ok {
                    sol.values.clear();
                    sol.objective = f64::INFINITY;
                    sol.gap = f64::INFINITY;
                }
            }
            _ => {}
        }
        Ok(sol)
    }
}
