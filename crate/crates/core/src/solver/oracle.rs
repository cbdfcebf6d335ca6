use std::time::Instant;

use super::{MilpBackend, Solution, SolveOptions, SolverError, Status};
use crate::exec::{map_indexed, Execution};
use crate::milp::MilpModel;

pub const DEFAULT_MAX_BINARIES: usize = 16;

/// Exhaustive search over the free integer columns of `model` (each must
/// be binary). Every assignment whose fully fixed rows hold is handed to
/// `backend` as a pure LP; the best objective wins, ties going to the
/// lowest assignment index.
pub fn brute_force_oracle(
    model: &MilpModel,
    backend: &dyn MilpBackend,
    max_binaries: usize,
    exec: Execution,
) -> Result<Solution, SolverError> {
    let start = Instant::now();
    let free: Vec<usize> =
        model.variables.iter().enumerate().filter(|(_, v)| v.integer && v.lb < v.ub).map(|(j, _)| j).collect();
    if free.len() > max_binaries {
        return Err(SolverError::TooManyBinaries { count: free.len(), max: max_binaries });
    }
    if let Some(&j) = free.iter().find(|&&j| {
        let v = model.variables.var(j);
        v.lb < 0.0 || v.ub > 1.0
    }) {
        return Err(SolverError::Backend(format!(
            "oracle needs binary columns, `{}` is a general integer",
            model.variables.var(j).key
        )));
    }

    // rows that only touch already-fixed columns never change
    let mut base = model.clone();
    for j in 0..base.variables.len() {
        base.variables.var_mut(j).integer = false;
    }
    let opts = SolveOptions { optimality_gap: 0.0, time_limit_seconds: None };

    let runs = map_indexed(exec, 1usize << free.len(), |mask| -> Result<Option<(f64, Solution)>, SolverError> {
        let mut lp = base.clone();
        for (bit, &j) in free.iter().enumerate() {
            let v = f64::from(((mask >> bit) & 1) as u8);
            let var = lp.variables.var_mut(j);
            var.lb = v;
            var.ub = v;
        }
        let point: Vec<f64> = lp.variables.iter().map(|v| v.lb).collect();
        let fixed_row_broken = lp
            .constraints
            .iter()
            .any(|r| r.terms.iter().all(|&(j, _)| lp.variables.var(j).is_fixed()) && r.violation(&point) > 1e-9);
        if fixed_row_broken {
            return Ok(None);
        }
        let sol = backend.solve(&lp, &opts)?;
        Ok(match sol.status {
            Status::Optimal | Status::GapFeasible => Some((sol.objective, sol)),
            _ => None,
        })
    });

    let mut best: Option<(f64, Solution)> = None;
    for run in runs {
        if let Some((obj, sol)) = run? {
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, sol));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(match best {
        Some((_, mut sol)) => {
            sol.status = Status::Optimal;
            sol.gap = 0.0;
            sol.solve_seconds = secs;
            sol
        }
        None => Solution::infeasible(secs),
    })
}
