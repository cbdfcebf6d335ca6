use serde::{Deserialize, Serialize};

use super::constraints::*;
use super::{index_variables, MilpModel, ModelError, PlanningConfig, VarKey, VarKind};
use crate::network::Network;
use crate::scenario::{DamageScenario, ScenarioSet};

/// Composes every constraint family into the two-stage model. Rows are
/// grouped by family, and within a family ordered by scenario, period and
/// entity.
pub fn build_model(net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) -> Result<MilpModel, ModelError> {
    let mut model = MilpModel::new(index_variables(net, scenarios, cfg)?);
    add_objective(&mut model, net, scenarios, cfg);
    add_power_balance(&mut model, net, scenarios, cfg);
    add_load_curtailment(&mut model, net, scenarios, cfg);
    add_voltage_drop(&mut model, net, scenarios, cfg)?;
    add_flow_limits(&mut model, net, scenarios, cfg);
    add_dg_limits(&mut model, net, scenarios, cfg);
    add_radiality(&mut model, net, scenarios, cfg);
    add_mg_logistics(&mut model, net, scenarios, cfg);
    add_mg_output(&mut model, net, scenarios, cfg);
    add_investment_constraints(&mut model, net, scenarios, cfg);
    add_damage_coupling(&mut model, net, scenarios, cfg);
    Ok(model)
}

/// First-stage decision: the candidate lines to build.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvestmentPlan {
    pub lines: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_length_ft: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
}

impl InvestmentPlan {
    pub fn new(mut lines: Vec<String>) -> Self {
        lines.sort();
        lines.dedup();
        InvestmentPlan { lines, ..Default::default() }
    }

    /// Every named line must be a candidate of `net`.
    pub fn check(&self, net: &Network) -> Result<(), ModelError> {
        for id in &self.lines {
            if !net.candidate_lines().any(|l| &l.id == id) {
                return Err(ModelError::UnknownCandidate(id.clone()));
            }
        }
        Ok(())
    }
}

/// Single-scenario operational model with the build decisions fixed by `plan`.
pub fn build_restoration_model(
    net: &Network,
    scenario: &DamageScenario,
    plan: &InvestmentPlan,
    cfg: &PlanningConfig,
) -> Result<MilpModel, ModelError> {
    plan.check(net)?;
    let mut model = build_model(net, &ScenarioSet::single(scenario), cfg)?;
    for l in net.candidate_lines() {
        let id = model.variables.id(&VarKey::new(VarKind::Build, None, None, &[&l.id]));
        let v = if plan.lines.contains(&l.id) { 1.0 } else { 0.0 };
        let var = model.variables.var_mut(id);
        var.lb = v;
        var.ub = v;
    }
    Ok(model)
}
