use std::collections::BTreeMap;

use serde::Serialize;

use super::{MilpModel, Tag, VarKind};
use crate::network::Network;
use crate::scenario::ScenarioSet;

/// Set cardinalities fed to the closed-form size formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SizeInputs {
    /// |Π|
    pub scenarios: u64,
    /// |T|
    pub periods: u64,
    /// |L|
    pub lines: u64,
    /// |N|
    pub buses: u64,
    /// |Ξ|
    pub mobile_gens: u64,
    /// |η|
    pub candidates: u64,
    /// |DG|
    pub dgs: u64,
}

impl SizeInputs {
    /// Cardinalities of an instance: |L| counts every line, |Ξ| the mobile
    /// generators and |η| the candidate lines.
    pub fn of(net: &Network, scenarios: &ScenarioSet, horizon: usize) -> Self {
        SizeInputs {
            scenarios: scenarios.len() as u64,
            periods: horizon as u64,
            lines: net.lines.len() as u64,
            buses: net.buses.len() as u64,
            mobile_gens: net.mobile_gens.len() as u64,
            candidates: net.candidate_lines().count() as u64,
            dgs: net.dgs.len() as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ModelSize {
    pub binaries: u64,
    pub continuous: u64,
    pub constraints: u64,
}

/// Closed-form model size:
///
/// ```text
/// binaries    = Π·T·(2L + 3N) + Π·Ξ·N + N² + η
/// continuous  = 2·Π·T·(N + L + η + DG) + 3·Π·N·Ξ
/// constraints = T·Π·(7N + 5L + 3Ξ·N + 7η + 2DG + 2L + 1 + 2N) + 2·Π·Ξ + 4·Π·N·Ξ + η + 2
/// ```
pub fn predicted_model_size(s: &SizeInputs) -> ModelSize {
    let SizeInputs { scenarios: p, periods: t, lines: l, buses: n, mobile_gens: xi, candidates: eta, dgs: dg } = *s;
    ModelSize {
        binaries: p * t * (2 * l + 3 * n) + p * xi * n + n * n + eta,
        continuous: 2 * p * t * (n + l + eta + dg) + 3 * p * n * xi,
        constraints: t * p * (7 * n + 5 * l + 3 * xi * n + 7 * eta + 2 * dg + 2 * l + 1 + 2 * n)
            + 2 * p * xi
            + 4 * p * n * xi
            + eta
            + 2,
    }
}

/// Direct count of an emitted model. Rows and columns that only the
/// strict-radiality and damage-coupling extensions introduce are kept out
/// of `core` and counted on their own.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ModelCount {
    pub core: ModelSize,
    pub damage_coupling_rows: u64,
    pub radiality_order_rows: u64,
    pub depth_columns: u64,
    pub rows_by_tag: BTreeMap<String, u64>,
    pub columns_by_kind: BTreeMap<String, u64>,
}

impl ModelCount {
    pub fn of(model: &MilpModel) -> Self {
        let mut c = ModelCount::default();
        for v in model.variables.iter() {
            *c.columns_by_kind.entry(v.key.kind.code().to_string()).or_default() += 1;
            match v.key.kind {
                VarKind::Depth => c.depth_columns += 1,
                _ if v.integer => c.core.binaries += 1,
                _ => c.core.continuous += 1,
            }
        }
        for row in &model.constraints {
            *c.rows_by_tag.entry(row.tag.as_str().to_string()).or_default() += 1;
            match row.tag {
                Tag::DamageCoupling => c.damage_coupling_rows += 1,
                Tag::RadialityOrder => c.radiality_order_rows += 1,
                _ => c.core.constraints += 1,
            }
        }
        c
    }
}
