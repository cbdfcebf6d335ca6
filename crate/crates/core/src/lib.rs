//! Two-stage stochastic MILP for distribution-system resilience planning.
//!
//! The first stage chooses which candidate underground lines to build; the
//! second stage, per damage scenario, reconfigures switches and dispatches
//! mobile generators to minimise weighted unserved energy.
//!
//! ```no_run
//! use gridshield_core::{milp, network, scenario, solver};
//!
//! let text = std::fs::read_to_string("feeder.json").unwrap();
//! let net = network::parse_network(&text, Some(8)).unwrap();
//! let curve = scenario::FragilityCurve::logistic(1.0, 4.0);
//! let all = scenario::monte_carlo(&net, &curve, 1.2, 200, 7, Default::default()).unwrap();
//! let set = scenario::reduce_scenarios(&all, 3, &net, Default::default()).unwrap();
//! let cfg = milp::PlanningConfig { horizon_periods: 8, ..Default::default() };
//! let model = milp::build_model(&net, &set, &cfg).unwrap();
//! let backend = solver::default_backend().unwrap();
//! let sol = solver::solve(&model, backend.as_ref(), &cfg).unwrap();
//! println!("{} {}", sol.status, sol.objective);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exec;
pub mod milp;
pub mod network;
pub mod report;
pub mod scenario;
pub mod solver;
