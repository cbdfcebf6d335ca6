use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::exec::Execution;

/// Planning and operating parameters shared by model building and solving.
///
/// Defaults: 5-minute periods, 24 periods, 1% optimality gap,
/// $1M per mile of underground line and $15k per remote-controlled switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanningConfig {
    pub dt_minutes: f64,
    pub horizon_periods: usize,
    /// Big-M for the switch-gated voltage rows; computed from the network when absent.
    pub big_m: Option<f64>,
    pub epsilon: f64,
    /// Investment budget, dollars.
    pub budget: f64,
    /// Underground construction cost, dollars per mile.
    pub cost_per_mile: f64,
    /// Remote-controlled switch cost, dollars each (two per built line).
    pub cost_rcs: f64,
    /// Maximum number of built lines; absent means no limit beyond the candidate count.
    pub max_underground: Option<u32>,
    pub optimality_gap: f64,
    pub time_limit_seconds: Option<f64>,
    /// Whether the substation (the DG at the root bus) can supply power.
    pub substation_available: bool,
    /// Adds tree-depth rows so closed switches never form a cycle, even in
    /// islands that do not contain the root.
    pub strict_radiality: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for PlanningConfig {
    fn default() -> Self {
        PlanningConfig {
            dt_minutes: 5.0,
            horizon_periods: 24,
            big_m: None,
            epsilon: 0.5,
            budget: 1_000_000.0,
            cost_per_mile: 1_000_000.0,
            cost_rcs: 15_000.0,
            max_underground: None,
            optimality_gap: 0.01,
            time_limit_seconds: None,
            substation_available: true,
            strict_radiality: true,
            execution: Execution::default(),
        }
    }
}

impl PlanningConfig {
    pub fn dt_hours(&self) -> f64 {
        self.dt_minutes / 60.0
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Config(m));
        if !(self.dt_minutes > 0.0) {
            return bad(format!("dt_minutes must be positive, got {}", self.dt_minutes));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if self.budget < 0.0 || self.cost_per_mile < 0.0 || self.cost_rcs < 0.0 {
            return bad("costs and budget must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.optimality_gap) {
            return bad(format!("optimality_gap must lie in [0, 1), got {}", self.optimality_gap));
        }
        if let Some(m) = self.big_m {
            if !(m > 0.0) {
                return bad(format!("big_m must be positive, got {m}"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let cfg: PlanningConfig =
            serde_json::from_str(text).map_err(|e| ModelError::Config(format!("config file: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
