use super::PlanningConfig;
use crate::network::{line_length_miles, Line};

/// Construction cost of one candidate line: its length in miles at the
/// per-mile rate plus a remote-controlled switch at each end.
pub fn candidate_cost(line: &Line, cfg: &PlanningConfig) -> f64 {
    bundle_cost(line.length_ft, 1, cfg)
}

/// Total cost of building `lines`.
pub fn compute_investment_cost<'a, I>(lines: I, cfg: &PlanningConfig) -> f64
where
    I: IntoIterator<Item = &'a Line>,
{
    lines.into_iter().map(|l| candidate_cost(l, cfg)).sum()
}

/// Cost of `count` lines whose lengths add up to `total_ft`.
pub fn bundle_cost(total_ft: f64, count: usize, cfg: &PlanningConfig) -> f64 {
    line_length_miles(total_ft) * cfg.cost_per_mile + 2.0 * cfg.cost_rcs * count as f64
}
