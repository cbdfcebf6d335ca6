#![allow(dead_code)]

use gridshield_core::exec::Execution;
use gridshield_core::milp::{MilpModel, PlanningConfig};
use gridshield_core::network::{parse_network, Network};
use gridshield_core::scenario::{monte_carlo, reduce_scenarios, DamageScenario, FragilityCurve, ScenarioSet};
use gridshield_core::solver::{check_feasibility, closed_switch_cycles, HighsBackend, Solution, Status};

pub const DESK_FEEDER: &str = include_str!("../../data/desk13.json");
pub const DESK_HORIZON: usize = 8;

pub fn desk() -> Network {
    parse_network(DESK_FEEDER, Some(DESK_HORIZON)).unwrap()
}

/// 100 sampled storms reduced to 3 representatives.
pub fn desk_scenarios(net: &Network) -> ScenarioSet {
    let curve = FragilityCurve::logistic(1.0, 4.0);
    let all = monte_carlo(net, &curve, 1.0, 100, 2024, Execution::Parallel).unwrap();
    reduce_scenarios(&all, 3, net, Default::default()).unwrap()
}

pub fn desk_cfg() -> PlanningConfig {
    PlanningConfig { horizon_periods: DESK_HORIZON, optimality_gap: 1e-6, ..Default::default() }
}

pub fn intact() -> ScenarioSet {
    ScenarioSet::single(&DamageScenario::intact("intact", 1.0))
}

pub fn net(json: &str) -> Network {
    parse_network(json, None).unwrap()
}

pub fn backend() -> HighsBackend {
    HighsBackend::default()
}

/// Zero violations at 1e-6 and no cycle among closed switches.
pub fn assert_clean(model: &MilpModel, sol: &Solution, net: &Network, scenarios: usize, horizon: usize) {
    assert!(matches!(sol.status, Status::Optimal | Status::GapFeasible), "status {}", sol.status);
    let report = check_feasibility(model, sol, 1e-6).unwrap();
    assert!(report.is_empty(), "violations: {:?}", &report.violations[..report.violations.len().min(5)]);
    let cycles = closed_switch_cycles(net, sol, scenarios, horizon).unwrap();
    assert!(cycles.is_empty(), "cycles: {cycles:?}");
}
