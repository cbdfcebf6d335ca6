use serde::Serialize;

use super::{Solution, SolverError};
use crate::milp::{MilpModel, Tag, VarKey, VarKind};
use crate::network::{Network, UnionFind};

/// Integer columns within this distance of an integer are rounded before
/// the rows are evaluated.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub tag: Tag,
    /// Row name, or `variable:lb` / `variable:ub` / `variable:int` for column checks.
    pub row: String,
    /// Amount by which the row or bound is exceeded.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub tolerance: f64,
    pub violations: Vec<Violation>,
    /// Largest violation over every row and bound, including those within tolerance.
    pub max_violation: f64,
}

impl FeasibilityReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-evaluates every bound, integrality requirement and row of `model`
/// at the values in `solution`.
pub fn check_feasibility(model: &MilpModel, solution: &Solution, tol: f64) -> Result<FeasibilityReport, SolverError> {
    let mut x = solution.column_values(model)?;
    let mut violations = Vec::new();
    let mut max_violation: f64 = 0.0;
    let mut record = |tag: Tag, row: String, amount: f64, out: &mut Vec<Violation>| {
        if amount.is_nan() || amount > tol {
            out.push(Violation { tag, row, slack: amount });
        }
        if !amount.is_nan() {
            max_violation = max_violation.max(amount);
        }
    };

    for (j, v) in model.variables.iter().enumerate() {
        let name = v.key.name();
        if v.integer {
            let r = x[j].round();
            let off = (x[j] - r).abs();
            if off > INTEGRALITY_TOL {
                record(Tag::Integrality, format!("{name}:int"), off, &mut violations);
            } else {
                x[j] = r;
            }
        }
        let tag = v.key.kind.bound_tag();
        record(tag, format!("{name}:lb"), (v.lb - x[j]).max(0.0), &mut violations);
        record(tag, format!("{name}:ub"), (x[j] - v.ub).max(0.0), &mut violations);
    }
    for row in &model.constraints {
        record(row.tag, row.name.clone(), row.violation(&x), &mut violations);
    }
    Ok(FeasibilityReport { tolerance: tol, violations, max_violation })
}

/// Lines whose closed switch would close a cycle, as `(scenario, period,
/// line)`, found by a union-find pass over each period's closed lines.
pub fn closed_switch_cycles(
    net: &Network,
    solution: &Solution,
    scenarios: usize,
    horizon: usize,
) -> Result<Vec<(usize, usize, String)>, SolverError> {
    let mut out = Vec::new();
    for pi in 0..scenarios {
        for t in 1..=horizon {
            let mut uf = UnionFind::new(net.buses.len());
            for l in &net.lines {
                let name = VarKey::new(VarKind::Switch, Some(pi), Some(t), &[&l.id]).name();
                let v = solution.value(&name).ok_or(SolverError::MissingValue(name))?;
                if v > 0.5 {
                    let a = net.bus_index(&l.from_bus).expect("validated network");
                    let b = net.bus_index(&l.to_bus).expect("validated network");
                    if !uf.union(a, b) {
                        out.push((pi, t, l.id.clone()));
                    }
                }
            }
        }
    }
    Ok(out)
}
