//! Solution file: `#` comments, a header of `status`, `objective`, `gap`
//! and `solve_seconds` lines, then one `name value` pair per variable.
//!
//! ```text
//! # gridshield solution
//! status optimal
//! objective 81.25
//! gap 0
//! solve_seconds 0.031
//! Plc.0.1.b2 0.5
//! sw.0.1.L12 1
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{Solution, SolverError, Status};

fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

pub fn write_solution(sol: &Solution) -> String {
    let mut out = String::from("# gridshield solution\n");
    let _ = writeln!(out, "status {}", sol.status);
    let _ = writeln!(out, "objective {}", num(sol.objective));
    let _ = writeln!(out, "gap {}", num(sol.gap));
    let _ = writeln!(out, "solve_seconds {}", num(sol.solve_seconds));
    for (k, v) in &sol.values {
        let _ = writeln!(out, "{k} {}", num(*v));
    }
    out
}

pub fn parse_solution(text: &str) -> Result<Solution, SolverError> {
    let mut status = None;
    let mut objective = None;
    let mut gap = None;
    let mut solve_seconds = 0.0;
    let mut values = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let err = |message: String| SolverError::SolutionFile { line: i + 1, message };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(key), Some(val), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(format!("expected `name value`, found `{line}`")));
        };
        if key == "status" {
            status = Some(val.parse::<Status>().map_err(err)?);
            continue;
        }
        let x: f64 = val.parse().map_err(|_| err(format!("bad number `{val}`")))?;
        match key {
            "objective" => objective = Some(x),
            "gap" => gap = Some(x),
            "solve_seconds" => solve_seconds = x,
            _ => {
                if values.insert(key.to_string(), x).is_some() {
                    return Err(err(format!("duplicate value for `{key}`")));
                }
            }
        }
    }
    let missing = |what: &str| SolverError::SolutionFile { line: 0, message: format!("header has no `{what}` line") };
    let status = status.ok_or_else(|| missing("status"))?;
    Ok(Solution {
        status,
        objective: objective.ok_or_else(|| missing("objective"))?,
        gap: gap.unwrap_or(if status == Status::Optimal { 0.0 } else { f64::INFINITY }),
        values,
        solve_seconds,
    })
}
