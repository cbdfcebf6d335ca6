//! Solver-agnostic construction of the two-stage stochastic restoration MILP.
//!
//! The model is a flat list of typed variables (each keyed by kind, scenario,
//! period and entity) and tagged linear rows. Tags name the constraint family
//! a row belongs to so that feasibility reports and size counts can be broken
//! down family by family.

mod build;
mod config;
mod constraints;
mod cost;
mod index;
mod size;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use build::{build_model, build_restoration_model, InvestmentPlan};
pub use config::PlanningConfig;
pub use constraints::{
    add_damage_coupling, add_dg_limits, add_flow_limits, add_investment_constraints, add_load_curtailment,
    add_mg_logistics, add_mg_output, add_objective, add_power_balance, add_radiality, add_voltage_drop, arrival_steps,
    big_m,
};
pub use cost::{bundle_cost, candidate_cost, compute_investment_cost};
pub use index::index_variables;
pub use size::{predicted_model_size, ModelCount, ModelSize, SizeInputs};

use crate::network::NetworkError;
use crate::scenario::ScenarioError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid planning config: {0}")]
    Config(String),
    #[error("investment plan names `{0}`, which is not a candidate line")]
    UnknownCandidate(String),
    #[error("variable `{0}` is not registered")]
    UnknownVariable(String),
}

/// Decision-variable families. Declaration order is the column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    FlowPExisting,
    FlowQExisting,
    FlowPAdded,
    FlowQAdded,
    CurtailP,
    CurtailQ,
    DgP,
    DgQ,
    MgP,
    MgQ,
    Voltage,
    Switch,
    DgOn,
    Parent,
    Dispatch,
    Arrive,
    Connected,
    ArrivalTime,
    Build,
    /// Tree depth used by the strict radiality rows.
    Depth,
}

impl VarKind {
    pub const ALL: [VarKind; 20] = [
        VarKind::FlowPExisting,
        VarKind::FlowQExisting,
        VarKind::FlowPAdded,
        VarKind::FlowQAdded,
        VarKind::CurtailP,
        VarKind::CurtailQ,
        VarKind::DgP,
        VarKind::DgQ,
        VarKind::MgP,
        VarKind::MgQ,
        VarKind::Voltage,
        VarKind::Switch,
        VarKind::DgOn,
        VarKind::Parent,
        VarKind::Dispatch,
        VarKind::Arrive,
        VarKind::Connected,
        VarKind::ArrivalTime,
        VarKind::Build,
        VarKind::Depth,
    ];

    /// Short prefix used in emitted variable names.
    pub fn code(self) -> &'static str {
        match self {
            VarKind::FlowPExisting => "pE",
            VarKind::FlowQExisting => "qE",
            VarKind::FlowPAdded => "pA",
            VarKind::FlowQAdded => "qA",
            VarKind::CurtailP => "Plc",
            VarKind::CurtailQ => "Qlc",
            VarKind::DgP => "Pdg",
            VarKind::DgQ => "Qdg",
            VarKind::MgP => "Pmg",
            VarKind::MgQ => "Qmg",
            VarKind::Voltage => "v",
            VarKind::Switch => "sw",
            VarKind::DgOn => "alpha",
            VarKind::Parent => "lambda",
            VarKind::Dispatch => "delta",
            VarKind::Arrive => "gamma",
            VarKind::Connected => "kappa",
            VarKind::ArrivalTime => "arr",
            VarKind::Build => "tau",
            VarKind::Depth => "depth",
        }
    }

    pub fn from_code(code: &str) -> Option<VarKind> {
        VarKind::ALL.into_iter().find(|k| k.code() == code)
    }

    pub fn is_binary(self) -> bool {
        matches!(
            self,
            VarKind::Switch
                | VarKind::DgOn
                | VarKind::Parent
                | VarKind::Dispatch
                | VarKind::Arrive
                | VarKind::Connected
                | VarKind::Build
        )
    }

    /// Family tag reported when the variable's box bounds are violated.
    pub fn bound_tag(self) -> Tag {
        match self {
            VarKind::FlowPExisting | VarKind::FlowQExisting => Tag::Eq5,
            VarKind::FlowPAdded | VarKind::FlowQAdded => Tag::Eq18,
            VarKind::CurtailP => Tag::Eq3a,
            VarKind::CurtailQ => Tag::Eq3b,
            VarKind::DgP | VarKind::DgQ => Tag::Eq6,
            VarKind::MgP => Tag::Eq15,
            VarKind::MgQ => Tag::Eq16,
            VarKind::Voltage => Tag::Eq4b,
            VarKind::ArrivalTime => Tag::Eq10,
            VarKind::Depth => Tag::RadialityOrder,
            _ => Tag::Plumbing,
        }
    }
}

/// Identity of a variable: `(kind, scenario, period, entity)`.
///
/// `period` is 1-based. `entity` holds the ids of the network objects the
/// variable belongs to (a bus, a line, a line plus child bus, ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub kind: VarKind,
    pub scenario: Option<u32>,
    pub period: Option<u32>,
    pub entity: Vec<String>,
}

impl VarKey {
    pub fn new(kind: VarKind, scenario: Option<usize>, period: Option<usize>, entity: &[&str]) -> Self {
        VarKey {
            kind,
            scenario: scenario.map(|s| s as u32),
            period: period.map(|t| t as u32),
            entity: entity.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// `kind.scenario.period.entity...`, with `n` for absent indices.
    pub fn name(&self) -> String {
        let mut s = String::with_capacity(24);
        s.push_str(self.kind.code());
        for idx in [self.scenario, self.period] {
            s.push('.');
            match idx {
                Some(i) => s.push_str(&i.to_string()),
                None => s.push('n'),
            }
        }
        for e in &self.entity {
            s.push('.');
            s.push_str(e);
        }
        s
    }

    pub fn parse(name: &str) -> Option<VarKey> {
        let mut parts = name.split('.');
        let kind = VarKind::from_code(parts.next()?)?;
        let idx = |p: Option<&str>| -> Option<Option<u32>> {
            match p? {
                "n" => Some(None),
                s => s.parse().ok().map(Some),
            }
        };
        let scenario = idx(parts.next())?;
        let period = idx(parts.next())?;
        let entity: Vec<String> = parts.map(str::to_string).collect();
        if entity.iter().any(String::is_empty) {
            return None;
        }
        Some(VarKey { kind, scenario, period, entity })
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub key: VarKey,
    pub lb: f64,
    pub ub: f64,
    pub integer: bool,
}

impl Variable {
    pub fn is_binary(&self) -> bool {
        self.integer && self.lb >= 0.0 && self.ub <= 1.0
    }

    pub fn is_fixed(&self) -> bool {
        self.lb == self.ub
    }
}

/// Dense, ordered enumeration of the model's columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableIndex {
    vars: Vec<Variable>,
    lookup: HashMap<VarKey, usize>,
}

impl VariableIndex {
    /// Registers a column; panics on a duplicate key, which would be a
    /// builder bug.
    pub fn push(&mut self, key: VarKey, lb: f64, ub: f64, integer: bool) -> usize {
        let id = self.vars.len();
        let prev = self.lookup.insert(key.clone(), id);
        assert!(prev.is_none(), "duplicate variable {key}");
        self.vars.push(Variable { key, lb, ub, integer });
        id
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn get(&self, key: &VarKey) -> Option<usize> {
        self.lookup.get(key).copied()
    }

    /// Column of `key`; panics if absent (builder-internal use).
    pub fn id(&self, key: &VarKey) -> usize {
        match self.lookup.get(key) {
            Some(&i) => i,
            None => panic!("variable {key} not registered"),
        }
    }

    pub fn var(&self, id: usize) -> &Variable {
        &self.vars[id]
    }

    pub fn var_mut(&mut self, id: usize) -> &mut Variable {
        &mut self.vars[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Variable> {
        self.vars.iter()
    }

    pub fn count_kind(&self, kind: VarKind) -> usize {
        self.vars.iter().filter(|v| v.key.kind == kind).count()
    }
}

/// Constraint-family tags. Paper-equation families use `eqN` names; rows
/// that exist only to wire the model together carry their own tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Eq2a,
    Eq2b,
    Eq3a,
    Eq3b,
    Eq4a,
    Eq4b,
    Eq5,
    Eq6,
    Eq7a,
    Eq7b,
    Eq7c,
    Eq8,
    Eq9,
    Eq10,
    Eq11,
    Eq12,
    Eq13,
    Eq14,
    Eq15,
    Eq16,
    Eq17a,
    Eq17b,
    Eq18,
    Eq19a,
    Eq19b,
    DamageCoupling,
    RadialityOrder,
    Integrality,
    Plumbing,
}

impl Tag {
    pub const ALL: [Tag; 29] = [
        Tag::Eq2a,
        Tag::Eq2b,
        Tag::Eq3a,
        Tag::Eq3b,
        Tag::Eq4a,
        Tag::Eq4b,
        Tag::Eq5,
        Tag::Eq6,
        Tag::Eq7a,
        Tag::Eq7b,
        Tag::Eq7c,
        Tag::Eq8,
        Tag::Eq9,
        Tag::Eq10,
        Tag::Eq11,
        Tag::Eq12,
        Tag::Eq13,
        Tag::Eq14,
        Tag::Eq15,
        Tag::Eq16,
        Tag::Eq17a,
        Tag::Eq17b,
        Tag::Eq18,
        Tag::Eq19a,
        Tag::Eq19b,
        Tag::DamageCoupling,
        Tag::RadialityOrder,
        Tag::Integrality,
        Tag::Plumbing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Eq2a => "eq2a",
            Tag::Eq2b => "eq2b",
            Tag::Eq3a => "eq3a",
            Tag::Eq3b => "eq3b",
            Tag::Eq4a => "eq4a",
            Tag::Eq4b => "eq4b",
            Tag::Eq5 => "eq5",
            Tag::Eq6 => "eq6",
            Tag::Eq7a => "eq7a",
            Tag::Eq7b => "eq7b",
            Tag::Eq7c => "eq7c",
            Tag::Eq8 => "eq8",
            Tag::Eq9 => "eq9",
            Tag::Eq10 => "eq10",
            Tag::Eq11 => "eq11",
            Tag::Eq12 => "eq12",
            Tag::Eq13 => "eq13",
            Tag::Eq14 => "eq14",
            Tag::Eq15 => "eq15",
            Tag::Eq16 => "eq16",
            Tag::Eq17a => "eq17a",
            Tag::Eq17b => "eq17b",
            Tag::Eq18 => "eq18",
            Tag::Eq19a => "eq19a",
            Tag::Eq19b => "eq19b",
            Tag::DamageCoupling => "damage-coupling",
            Tag::RadialityOrder => "radiality-order",
            Tag::Integrality => "integrality",
            Tag::Plumbing => "plumbing",
        }
    }

    /// Tag spelling usable inside LP/MPS row names.
    pub fn name_prefix(self) -> &'static str {
        match self {
            Tag::DamageCoupling => "damage_coupling",
            Tag::RadialityOrder => "radiality_order",
            other => other.as_str(),
        }
    }

    pub fn from_name_prefix(prefix: &str) -> Option<Tag> {
        Tag::ALL.into_iter().find(|t| t.name_prefix() == prefix)
    }

    /// `eq7a`, `eq7b`, `eq7c` -> `eq7`, etc.
    pub fn equation(self) -> &'static str {
        match self {
            Tag::Eq2a | Tag::Eq2b => "eq2",
            Tag::Eq3a | Tag::Eq3b => "eq3",
            Tag::Eq4a | Tag::Eq4b => "eq4",
            Tag::Eq7a | Tag::Eq7b | Tag::Eq7c => "eq7",
            Tag::Eq17a | Tag::Eq17b => "eq17",
            Tag::Eq19a | Tag::Eq19b => "eq19",
            other => other.as_str(),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub tag: Tag,
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violates the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let act = self.activity(values);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// Row name `tag.scenario.period.entity...`.
pub(crate) fn row_name(tag: Tag, scenario: Option<usize>, period: Option<usize>, entity: &[&str]) -> String {
    let mut s = String::from(tag.name_prefix());
    for idx in [scenario, period] {
        s.push('.');
        match idx {
            Some(i) => s.push_str(&i.to_string()),
            None => s.push('n'),
        }
    }
    for e in entity {
        s.push('.');
        s.push_str(e);
    }
    s
}

/// Tag encoded in a row name produced by this crate.
pub fn tag_of_row_name(name: &str) -> Option<Tag> {
    Tag::from_name_prefix(name.split('.').next()?)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub variables: VariableIndex,
    pub constraints: Vec<Constraint>,
    /// Minimised. Coefficients are weighted kWh per unit of the variable.
    pub objective: Vec<(usize, f64)>,
}

impl MilpModel {
    pub fn new(variables: VariableIndex) -> Self {
        MilpModel { variables, constraints: Vec::new(), objective: Vec::new() }
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * values[j]).sum()
    }

    pub fn var_id(&self, key: &VarKey) -> Option<usize> {
        self.variables.get(key)
    }

    pub fn rows_with_tag(&self, tag: Tag) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(move |c| c.tag == tag)
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.integer).count()
    }

    /// Binaries whose bounds leave both values open.
    pub fn free_binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.integer && !v.is_fixed()).count()
    }

    /// Coefficient of column `col` in the objective (0 if absent).
    pub fn objective_coefficient(&self, col: usize) -> f64 {
        self.objective.iter().filter(|&&(j, _)| j == col).map(|&(_, c)| c).sum()
    }
}
