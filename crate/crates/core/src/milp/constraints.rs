//! One function per constraint family. Each appends its rows to the model
//! in scenario order; scenario blocks may be assembled in parallel.

use std::collections::BTreeMap;

use super::{row_name, Constraint, MilpModel, ModelError, PlanningConfig, Sense, Tag, VarKey, VarKind, VariableIndex};
use crate::exec::flat_map_indexed;
use crate::network::{LineKind, Network};
use crate::scenario::ScenarioSet;

use super::cost::candidate_cost;

/// Arrival step Γ of each (mobile generator, connectable bus) pair from the
/// generator's home depot: `ceil(minutes / dt)`, at least 1. Pairs without
/// a travel time map to `usize::MAX`.
pub fn arrival_steps(net: &Network, cfg: &PlanningConfig) -> BTreeMap<(String, String), usize> {
    let mut out = BTreeMap::new();
    for mg in &net.mobile_gens {
        let depot = net.depot(&mg.home_depot);
        for b in net.connectable_buses() {
            let steps = depot
                .and_then(|d| d.travel_minutes.get(&b.id))
                .map_or(usize::MAX, |&mins| ((mins / cfg.dt_minutes - 1e-9).ceil().max(1.0)) as usize);
            out.insert((mg.id.clone(), b.id.clone()), steps);
        }
    }
    out
}

/// Big-M of the switch-gated voltage rows: the widest voltage spread plus
/// the largest drop any line can carry at its rating.
pub fn big_m(net: &Network, cfg: &PlanningConfig) -> Result<f64, ModelError> {
    let vmax = net.buses.iter().map(|b| b.v_max).fold(f64::NEG_INFINITY, f64::max);
    let vmin = net.buses.iter().map(|b| b.v_min).fold(f64::INFINITY, f64::min);
    let spread = if net.buses.is_empty() { 0.0 } else { vmax - vmin };
    if let Some(m) = cfg.big_m {
        if !(m > spread) {
            return Err(ModelError::Config(format!("big_m {m} must exceed the voltage spread {spread}")));
        }
        return Ok(m);
    }
    let drop = net.lines.iter().map(|l| (l.r + l.x) * l.capacity / net.nominal_voltage_pu).fold(0.0, f64::max);
    Ok(spread + drop)
}

struct Rows<'a> {
    vars: &'a VariableIndex,
    out: Vec<Constraint>,
}

impl<'a> Rows<'a> {
    fn new(vars: &'a VariableIndex) -> Self {
        Rows { vars, out: Vec::new() }
    }

    fn id(&self, kind: VarKind, pi: Option<usize>, t: Option<usize>, e: &[&str]) -> usize {
        self.vars.id(&VarKey::new(kind, pi, t, e))
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        tag: Tag,
        pi: Option<usize>,
        t: Option<usize>,
        entity: &[&str],
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        let terms = terms.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.out.push(Constraint { tag, name: row_name(tag, pi, t, entity), terms, sense, rhs });
    }
}

fn per_scenario<F>(model: &mut MilpModel, scenarios: &ScenarioSet, cfg: &PlanningConfig, f: F)
where
    F: Fn(&mut Rows<'_>, usize) + Sync + Send,
{
    let vars = &model.variables;
    let rows = flat_map_indexed(cfg.execution, scenarios.len(), |pi| {
        let mut r = Rows::new(vars);
        f(&mut r, pi);
        r.out
    });
    model.constraints.extend(rows);
}

/// Σ_π Σ_m Σ_t ω_m · pr_π · P^LC · Δt, in weighted kWh.
pub fn add_objective(model: &mut MilpModel, net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) {
    let per_pu = cfg.dt_hours() * net.base_kva();
    let mut obj = Vec::new();
    for (pi, s) in scenarios.scenarios.iter().enumerate() {
        for t in 1..=cfg.horizon_periods {
            for b in &net.buses {
                let c = b.weight * s.probability * per_pu;
                if c != 0.0 {
                    obj.push((model.variables.id(&VarKey::new(VarKind::CurtailP, Some(pi), Some(t), &[&b.id])), c));
                }
            }
        }
    }
    obj.sort_by_key(|&(j, _)| j);
    model.objective = obj;
}

/// Active and reactive balance at every bus. A flow variable is positive
/// from the line's `from_bus` toward its `to_bus`.
pub fn add_power_balance(model: &mut MilpModel, net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) {
    per_scenario(model, scenarios, cfg, |r, pi| {
        for t in 1..=cfg.horizon_periods {
            for (tag, active) in [(Tag::Eq2a, true), (Tag::Eq2b, false)] {
                let (fe, fa, dg, mg, lc) = if active {
                    (VarKind::FlowPExisting, VarKind::FlowPAdded, VarKind::DgP, VarKind::MgP, VarKind::CurtailP)
                } else {
                    (VarKind::FlowQExisting, VarKind::FlowQAdded, VarKind::DgQ, VarKind::MgQ, VarKind::CurtailQ)
                };
                for b in &net.buses {
                    let mut terms = Vec::new();
                    for l in &net.lines {
                        let kind = if l.kind == LineKind::Existing { fe } else { fa };
                        if l.to_bus == b.id {
                            terms.push((r.id(kind, Some(pi), Some(t), &[&l.id]), 1.0));
                        } else if l.from_bus == b.id {
                            terms.push((r.id(kind, Some(pi), Some(t), &[&l.id]), -1.0));
                        }
                    }
                    if net.dgs.iter().any(|d| d.bus == b.id) {
                        terms.push((r.id(dg, Some(pi), Some(t), &[&b.id]), 1.0));
                    }
                    if b.max_mobile_gens > 0 {
                        terms.push((r.id(mg, Some(pi), Some(t), &[&b.id]), 1.0));
                    }
                    terms.push((r.id(lc, Some(pi), Some(t), &[&b.id]), 1.0));
                    let demand = if active { b.demand_p_at(t - 1) } else { b.demand_q_at(t - 1) };
                    r.push(tag, Some(pi), Some(t), &[&b.id], terms, Sense::Eq, demand);
                }
            }
        }
    });
}

/// Constant power factor curtailment, Q^LC = (Q^D / P^D) · P^LC. The
/// `0 <= P^LC <= P^D` box lives in the variable bounds.
pub fn add_load_curtailment(model: &mut MilpModel, net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) {
    per_scenario(model, scenarios, cfg, |r, pi| {
        for t in 1..=cfg.horizon_periods {
            for b in &net.buses {
                let (p, q) = (b.demand_p_at(t - 1), b.demand_q_at(t - 1));
                if p > 0.0 {
                    let terms = vec![
                        (r.id(VarKind::CurtailQ, Some(pi), Some(t), &[&b.id]), 1.0),
                        (r.id(VarKind::CurtailP, Some(pi), Some(t), &[&b.id]), -q / p),
                    ];
                    r.push(Tag::Eq3b, Some(pi), Some(t), &[&b.id], terms, Sense::Eq, 0.0);
                }
            }
        }
    });
}

/// Linearized DistFlow with switch-gated big-M relaxation:
/// |v_to − v_from + (r·p + x·q)/v₁| <= (1 − ς)·M.
pub fn add_voltage_drop(
    model: &mut MilpModel,
    net: &Network,
    scenarios: &ScenarioSet,
    cfg: &PlanningConfig,
) -> Result<(), ModelError> {
    let m = big_m(net, cfg)?;
    let v1 = net.nominal_voltage_pu;
    per_scenario(model, scenarios, cfg, |r, pi| {
        for t in 1..=cfg.horizon_periods {
            for l in &net.lines {
                let (tag, pk, qk) = match l.kind {
                    LineKind::Existing => (Tag::Eq4a, VarKind::FlowPExisting, VarKind::FlowQExisting),
                    LineKind::Candidate => (Tag::Eq17a, VarKind::FlowPAdded, VarKind::FlowQAdded),
                };
                let base = vec![
                    (r.id(VarKind::Voltage, Some(pi), Some(t), &[&l.to_bus]), 1.0),
                    (r.id(VarKind::Voltage, Some(pi), Some(t), &[&l.from_bus]), -1.0),
                    (r.id(pk, Some(pi), Some(t), &[&l.id]), l.r / v1),
                    (r.id(qk, Some(pi), Some(t), &[&l.id]), l.x / v1),
                ];
                let sw = r.id(VarKind::Switch, Some(pi), Some(t), &[&l.id]);
                let mut hi = base.clone();
                hi.push((sw, m));
                r.push(tag, Some(pi), Some(t), &[&l.id, "ub"], hi, Sense::Le, m);
                let mut lo = base;
                lo.push((sw, -m));
                r.push(tag, Some(pi), Some(t), &[&l.id, "lb"], lo, Sense::Ge, -m);
            }
        }
    });
    Ok(())
}

/// Octagonal inner approximation of the apparent-power limit, gated by the switch.
pub fn add_flow_limits(model: &mut MilpModel, net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) {
    let s2 = std::f64::consts::SQRT_2;
    per_scenario(model, scenarios, cfg, |r, pi| {
        for t in 1..=cfg.horizon_periods {
            for l in &net.lines {
                let (tag, pk, qk) = match l.kind {
                    LineKind::Existing => (Tag::Eq5, VarKind::FlowPExisting, VarKind::FlowQExisting),
                    LineKind::Candidate => (Tag::Eq18, VarKind::FlowPAdded, VarKind::FlowQAdded),
                };
                let p = r.id(pk, Some(pi), Some(t), &[&l.id]);
                let q = r.id(qk, Some(pi), Some(t), &[&l.id]);
                let sw = r.id(VarKind::Switch, Some(pi), Some(t), &[&l.id]);
                let s = l.capacity;
                let faces: [(&str, f64, f64, f64); 8] = [
                    ("p_hi", 1.0, 0.0, s),
                    ("p_lo", -1.0, 0.0, s),
                    ("q_hi", 0.0, 1.0, s),
                    ("q_lo", 0.0, -1.0, s),
                    ("sum_hi", 1.0, 1.0, s2 * s),
                    ("sum_lo", -1.0, -1.0, s2 * s),
                    ("diff_hi", 1.0, -1.0, s2 * s),
                    ("diff_lo", -1.0, 1.0, s2 * s),
                ];
                for (suffix, cp, cq, cap) in faces {
                    r.push(
                        tag,
                        Some(pi),
                        Some(t),
                        &[&l.id, suffix],
                        vec![(p, cp), (q, cq), (sw, -cap)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
        }
    });
}

/// α·P̲ <= P^DG <= α·P̄ and the reactive analogue.
pub fn add_dg_limits(model: &mut MilpModel, net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) {
    per_scenario(model, scenarios, cfg, |r, pi| {
        for t in 1..=cfg.horizon_periods {
            for d in &net.dgs {
                let on = r.id(VarKind::DgOn, Some(pi), Some(t), &[&d.bus]);
                let p = r.id(VarKind::DgP, Some(pi), Some(t), &[&d.bus]);
                let q = r.id(VarKind::DgQ, Some(pi), Some(t), &[&d.bus]);
                let e = |s: &'static str| [d.bus.as_str(), s];
                r.push(Tag::Eq6, Some(pi), Some(t), &e("p_hi"), vec![(p, 1.0), (on, -d.p_max)], Sense::Le, 0.0);
                r.push(Tag::Eq6, Some(pi), Some(t), &e("p_lo"), vec![(p, 1.0), (on, -d.p_min)], Sense::Ge, 0.0);
                r.push(Tag::Eq6, Some(pi), Some(t), &e("q_hi"), vec![(q, 1.0), (on, -d.q_max)], Sense::Le, 0.0);
                r.push(Tag::Eq6, Some(pi), Some(t), &e("q_lo"), vec![(q, 1.0), (on, -d.q_min)], Sense::Ge, 0.0);
            }
        }
    });
}

/// Spanning-tree parent assignment: each closed line gives exactly one of
/// its ends a parent, each bus has at most one parent, the root has none.
/// With `strict_radiality`, depth labels additionally rule out cycles in
/// islands that do not contain the root.
pub fn add_radiality(model: &mut MilpModel, net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) {
    let root = net.root().map(|b| b.id.clone());
    let n_bus = net.buses.len() as f64;
    per_scenario(model, scenarios, cfg, |r, pi| {
        for t in 1..=cfg.horizon_periods {
            let (s, tt) = (Some(pi), Some(t));
            for l in &net.lines {
                let terms = vec![
                    (r.id(VarKind::Parent, s, tt, &[&l.id, &l.from_bus]), 1.0),
                    (r.id(VarKind::Parent, s, tt, &[&l.id, &l.to_bus]), 1.0),
                    (r.id(VarKind::Switch, s, tt, &[&l.id]), -1.0),
                ];
                r.push(Tag::Eq7a, s, tt, &[&l.id], terms, Sense::Eq, 0.0);
            }
            for b in &net.buses {
                let terms: Vec<_> = net
                    .lines
                    .iter()
                    .filter(|l| l.from_bus == b.id || l.to_bus == b.id)
                    .map(|l| (r.id(VarKind::Parent, s, tt, &[&l.id, &b.id]), 1.0))
                    .collect();
                if !terms.is_empty() {
                    r.push(Tag::Eq7b, s, tt, &[&b.id], terms, Sense::Le, 1.0);
                }
            }
            if let Some(root) = &root {
                for l in net.lines.iter().filter(|l| &l.from_bus == root || &l.to_bus == root) {
                    let terms = vec![(r.id(VarKind::Parent, s, tt, &[&l.id, root]), 1.0)];
                    r.push(Tag::Eq7c, s, tt, &[&l.id], terms, Sense::Eq, 0.0);
                }
            }
            if cfg.strict_radiality {
                for l in &net.lines {
                    for (child, parent) in [(&l.from_bus, &l.to_bus), (&l.to_bus, &l.from_bus)] {
                        // depth_child >= depth_parent + 1 whenever parent(child) = parent
                        let terms = vec![
                            (r.id(VarKind::Depth, s, tt, &[child]), 1.0),
                            (r.id(VarKind::Depth, s, tt, &[parent]), -1.0),
                            (r.id(VarKind::Parent, s, tt, &[&l.id, child]), -n_bus),
                        ];
                        r.push(Tag::RadialityOrder, s, tt, &[&l.id, child], terms, Sense::Ge, 1.0 - n_bus);
                    }
                }
            }
        }
    });
}

/// Dispatch, travel time and connection bookkeeping of mobile generators.
pub fn add_mg_logistics(model: &mut MilpModel, net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) {
    let steps = arrival_steps(net, cfg);
    let horizon = cfg.horizon_periods;
    per_scenario(model, scenarios, cfg, |r, pi| {
        let s = Some(pi);
        let delta = |r: &Rows<'_>, mg: &crate::network::MobileGen, bus: &str| {
            r.id(VarKind::Dispatch, s, None, &[&mg.id, &mg.home_depot, bus])
        };
        for b in net.connectable_buses() {
            let terms = net.mobile_gens.iter().map(|mg| (delta(r, mg, &b.id), 1.0)).collect();
            r.push(Tag::Eq8, s, None, &[&b.id], terms, Sense::Le, f64::from(b.max_mobile_gens));
        }
        for mg in &net.mobile_gens {
            let terms = net.connectable_buses().map(|b| (delta(r, mg, &b.id), 1.0)).collect();
            r.push(Tag::Eq9, s, None, &[&mg.id], terms, Sense::Le, 1.0);
        }
        for mg in &net.mobile_gens {
            for b in net.connectable_buses() {
                let d = delta(r, mg, &b.id);
                let arr = r.id(VarKind::ArrivalTime, s, None, &[&mg.id, &mg.home_depot, &b.id]);
                let st = steps[&(mg.id.clone(), b.id.clone())];
                let st = if st == usize::MAX { 0.0 } else { st as f64 };
                let e = [mg.id.as_str(), b.id.as_str()];
                r.push(Tag::Eq10, s, None, &e, vec![(arr, 1.0), (d, -st)], Sense::Eq, 0.0);

                let gammas: Vec<usize> =
                    (1..=horizon).map(|t| r.id(VarKind::Arrive, s, Some(t), &[&mg.id, &b.id])).collect();
                let mut timed: Vec<(usize, f64)> =
                    gammas.iter().enumerate().map(|(i, &g)| (g, (i + 1) as f64)).collect();
                timed.push((arr, -1.0));
                r.push(Tag::Eq11, s, None, &e, timed.clone(), Sense::Ge, 0.0);
                r.push(Tag::Eq12, s, None, &e, timed, Sense::Le, 1.0 - cfg.epsilon);

                let mut once: Vec<(usize, f64)> = gammas.iter().map(|&g| (g, 1.0)).collect();
                once.push((d, -1.0));
                r.push(Tag::Eq13, s, None, &e, once, Sense::Eq, 0.0);

                for t in 1..=horizon {
                    let mut terms = vec![(r.id(VarKind::Connected, s, Some(t), &[&mg.id, &b.id]), 1.0)];
                    terms.extend(gammas[..t].iter().map(|&g| (g, -1.0)));
                    r.push(Tag::Eq14, s, Some(t), &e, terms, Sense::Eq, 0.0);
                }
            }
        }
    });
}

/// P^MG and Q^MG at a bus limited by the capacity of connected generators.
pub fn add_mg_output(model: &mut MilpModel, net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) {
    per_scenario(model, scenarios, cfg, |r, pi| {
        for t in 1..=cfg.horizon_periods {
            let (s, tt) = (Some(pi), Some(t));
            for b in net.connectable_buses() {
                for (tag, kind) in [(Tag::Eq15, VarKind::MgP), (Tag::Eq16, VarKind::MgQ)] {
                    let mut terms = vec![(r.id(kind, s, tt, &[&b.id]), 1.0)];
                    for mg in &net.mobile_gens {
                        let cap = if kind == VarKind::MgP { mg.p_max } else { mg.q_max };
                        terms.push((r.id(VarKind::Connected, s, tt, &[&mg.id, &b.id]), -cap));
                    }
                    r.push(tag, s, tt, &[&b.id], terms, Sense::Le, 0.0);
                }
            }
        }
    });
}

/// Built-line gating of candidate switches, budget, and line-count limit.
pub fn add_investment_constraints(model: &mut MilpModel, net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) {
    let candidates: Vec<_> = net.candidate_lines().collect();
    per_scenario(model, scenarios, cfg, |r, pi| {
        for t in 1..=cfg.horizon_periods {
            for l in &candidates {
                let terms = vec![
                    (r.id(VarKind::Switch, Some(pi), Some(t), &[&l.id]), 1.0),
                    (r.id(VarKind::Build, None, None, &[&l.id]), -1.0),
                ];
                r.push(Tag::Eq17b, Some(pi), Some(t), &[&l.id], terms, Sense::Le, 0.0);
            }
        }
    });
    if candidates.is_empty() {
        return;
    }
    let mut r = Rows::new(&model.variables);
    let budget_terms =
        candidates.iter().map(|l| (r.id(VarKind::Build, None, None, &[&l.id]), candidate_cost(l, cfg))).collect();
    r.push(Tag::Eq19a, None, None, &[], budget_terms, Sense::Le, cfg.budget);
    let count_terms = candidates.iter().map(|l| (r.id(VarKind::Build, None, None, &[&l.id]), 1.0)).collect();
    let limit = cfg.max_underground.map_or(candidates.len() as f64, f64::from);
    r.push(Tag::Eq19b, None, None, &[], count_terms, Sense::Le, limit);
    let rows = r.out;
    model.constraints.extend(rows);
}

/// A damaged existing line cannot have its switch closed: ς <= availability.
pub fn add_damage_coupling(model: &mut MilpModel, net: &Network, scenarios: &ScenarioSet, cfg: &PlanningConfig) {
    per_scenario(model, scenarios, cfg, |r, pi| {
        let scen = &scenarios.scenarios[pi];
        for t in 1..=cfg.horizon_periods {
            for l in net.existing_lines() {
                let terms = vec![(r.id(VarKind::Switch, Some(pi), Some(t), &[&l.id]), 1.0)];
                r.push(
                    Tag::DamageCoupling,
                    Some(pi),
                    Some(t),
                    &[&l.id],
                    terms,
                    Sense::Le,
                    f64::from(scen.availability(&l.id)),
                );
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::exec::Execution;
    use crate::milp::{build_model, index_variables};
    use crate::network::parse_network;
    use crate::scenario::DamageScenario;

    const TWO_BUS: &str = r#"{
        "buses": [
            {"id": "1", "is_root": true},
            {"id": "2", "demand_p": 100, "demand_q": 50}
        ],
        "lines": [
            {"id": "L12", "from_bus": "1", "to_bus": "2", "r": 0.01, "x": 0.02, "capacity": 2000, "length_ft": 700, "kind": "existing"}
        ]
    }"#;

    fn net(json: &str) -> Network {
        parse_network(json, None).unwrap()
    }

    fn intact() -> ScenarioSet {
        ScenarioSet::single(&DamageScenario::intact("s0", 1.0))
    }

    fn cfg(h: usize) -> PlanningConfig {
        PlanningConfig { horizon_periods: h, ..Default::default() }
    }

    fn col(m: &MilpModel, kind: VarKind, pi: Option<usize>, t: Option<usize>, e: &[&str]) -> usize {
        m.variables.id(&VarKey::new(kind, pi, t, e))
    }

    /// Every column at the point of its box closest to zero.
    fn origin(m: &MilpModel) -> Vec<f64> {
        m.variables.iter().map(|v| 0.0f64.clamp(v.lb, v.ub)).collect()
    }

    fn row<'a>(m: &'a MilpModel, name: &str) -> &'a Constraint {
        m.constraints.iter().find(|r| r.name == name).unwrap_or_else(|| panic!("no row {name}"))
    }

    #[test]
    fn objective_is_weighted_kwh() {
        let n = net(TWO_BUS);
        let m = build_model(&n, &intact(), &cfg(1)).unwrap();
        let j = col(&m, VarKind::CurtailP, Some(0), Some(1), &["2"]);
        let per_kw = m.objective_coefficient(j) / n.base_kva();
        assert!((per_kw - 5.0 / 60.0).abs() < 1e-12);
        assert!((per_kw - 0.08333).abs() < 1e-5);

        let two = ScenarioSet {
            seed: 0,
            scenarios: vec![DamageScenario::intact("a", 0.5), DamageScenario::intact("b", 0.5)],
        };
        let m2 = build_model(&n, &two, &cfg(1)).unwrap();
        let j2 = col(&m2, VarKind::CurtailP, Some(1), Some(1), &["2"]);
        assert!((m2.objective_coefficient(j2) - m.objective_coefficient(j) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_bus_has_no_objective_term() {
        let mut n = net(TWO_BUS);
        n.buses.iter_mut().find(|b| b.id == "2").unwrap().weight = 0.0;
        let m = build_model(&n, &intact(), &cfg(1)).unwrap();
        let j = col(&m, VarKind::CurtailP, Some(0), Some(1), &["2"]);
        assert!(m.objective.iter().all(|&(c, _)| c != j));
    }

    #[test]
    fn isolated_bus_balance_only_has_curtailment() {
        let n = net(r#"{"buses": [{"id": "1", "is_root": true, "demand_p": 100, "demand_q": 0}], "lines": []}"#);
        let m = build_model(&n, &intact(), &cfg(1)).unwrap();
        let r = row(&m, "eq2a.0.1.1");
        let plc = col(&m, VarKind::CurtailP, Some(0), Some(1), &["1"]);
        assert_eq!(r.terms, vec![(plc, 1.0)]);
        assert_eq!(r.sense, Sense::Eq);
        assert!((n.to_kw(r.rhs) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn constant_power_factor_curtailment() {
        let n = net(TWO_BUS);
        let m = build_model(&n, &intact(), &cfg(1)).unwrap();
        let r = row(&m, "eq3b.0.1.2");
        let p = col(&m, VarKind::CurtailP, Some(0), Some(1), &["2"]);
        let q = col(&m, VarKind::CurtailQ, Some(0), Some(1), &["2"]);
        let mut x = origin(&m);
        x[p] = n.to_pu(40.0);
        x[q] = n.to_pu(20.0);
        assert!(r.violation(&x) < 1e-12);
        x[q] = n.to_pu(21.0);
        assert!(r.violation(&x) > 1e-6);
        assert!((n.to_kw(m.variables.var(p).ub) - 100.0).abs() < 1e-9);
        // zero-demand root: both curtailments pinned to zero
        let p1 = m.variables.var(col(&m, VarKind::CurtailP, Some(0), Some(1), &["1"]));
        let q1 = m.variables.var(col(&m, VarKind::CurtailQ, Some(0), Some(1), &["1"]));
        assert_eq!((p1.lb, p1.ub, q1.lb, q1.ub), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn closed_switch_voltage_drop_is_an_equality() {
        let n = net(TWO_BUS);
        let m = build_model(&n, &intact(), &cfg(1)).unwrap();
        let (ub, lb) = (row(&m, "eq4a.0.1.L12.ub"), row(&m, "eq4a.0.1.L12.lb"));
        let mut x = origin(&m);
        x[col(&m, VarKind::Switch, Some(0), Some(1), &["L12"])] = 1.0;
        x[col(&m, VarKind::FlowPExisting, Some(0), Some(1), &["L12"])] = 1.0;
        x[col(&m, VarKind::FlowQExisting, Some(0), Some(1), &["L12"])] = 0.5;
        let v1 = col(&m, VarKind::Voltage, Some(0), Some(1), &["1"]);
        let v2 = col(&m, VarKind::Voltage, Some(0), Some(1), &["2"]);
        x[v1] = 1.0;
        x[v2] = 0.98;
        assert!(ub.violation(&x) < 1e-12 && lb.violation(&x) < 1e-12);
        x[v2] = 0.981;
        assert!(ub.violation(&x) > 1e-6);
        x[v2] = 0.979;
        assert!(lb.violation(&x) > 1e-6);
    }

    #[test]
    fn open_switch_relaxes_voltage_rows() {
        let n = net(TWO_BUS);
        let c = cfg(1);
        let m = build_model(&n, &intact(), &c).unwrap();
        let l = &n.lines[0];
        let rows = [row(&m, "eq4a.0.1.L12.ub"), row(&m, "eq4a.0.1.L12.lb")];
        let (p, q) = (
            col(&m, VarKind::FlowPExisting, Some(0), Some(1), &["L12"]),
            col(&m, VarKind::FlowQExisting, Some(0), Some(1), &["L12"]),
        );
        let (v1, v2) =
            (col(&m, VarKind::Voltage, Some(0), Some(1), &["1"]), col(&m, VarKind::Voltage, Some(0), Some(1), &["2"]));
        let m_val = big_m(&n, &c).unwrap();
        let max_drop = (l.r + l.x) * l.capacity;
        assert!(m_val - max_drop > 0.0);
        for va in [0.95, 1.05] {
            for vb in [0.95, 1.05] {
                for sp in [-1.0, 1.0] {
                    for sq in [-1.0, 1.0] {
                        let mut x = origin(&m);
                        x[v1] = va;
                        x[v2] = vb;
                        x[p] = sp * l.capacity;
                        x[q] = sq * l.capacity;
                        for r in rows {
                            assert!(r.violation(&x) == 0.0, "{} at {va} {vb} {sp} {sq}", r.name);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lossless_closed_line_equalizes_voltage() {
        let n = net(&TWO_BUS.replace("\"r\": 0.01, \"x\": 0.02", "\"r\": 0, \"x\": 0"));
        let m = build_model(&n, &intact(), &cfg(1)).unwrap();
        let mut x = origin(&m);
        x[col(&m, VarKind::Switch, Some(0), Some(1), &["L12"])] = 1.0;
        x[col(&m, VarKind::Voltage, Some(0), Some(1), &["1"])] = 1.0;
        let v2 = col(&m, VarKind::Voltage, Some(0), Some(1), &["2"]);
        x[v2] = 1.0;
        assert!(row(&m, "eq4a.0.1.L12.ub").violation(&x) == 0.0);
        assert!(row(&m, "eq4a.0.1.L12.lb").violation(&x) == 0.0);
        x[v2] = 0.999;
        assert!(row(&m, "eq4a.0.1.L12.lb").violation(&x) > 0.0);
    }

    #[test]
    fn octagon_flow_limits() {
        let n = net(&TWO_BUS.replace("\"capacity\": 2000", "\"capacity\": 1000"));
        let m = build_model(&n, &intact(), &cfg(1)).unwrap();
        let rows: Vec<&Constraint> = m.rows_with_tag(Tag::Eq5).collect();
        assert_eq!(rows.len(), 8);
        let sw = col(&m, VarKind::Switch, Some(0), Some(1), &["L12"]);
        let p = col(&m, VarKind::FlowPExisting, Some(0), Some(1), &["L12"]);
        let q = col(&m, VarKind::FlowQExisting, Some(0), Some(1), &["L12"]);
        let worst = |s: f64, pv: f64, qv: f64| {
            let mut x = origin(&m);
            x[sw] = s;
            x[p] = pv;
            x[q] = qv;
            rows.iter().map(|r| r.violation(&x)).fold(0.0, f64::max)
        };
        assert!((worst(1.0, 0.8, 0.8) - (1.6 - 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(worst(1.0, 0.7, 0.7), 0.0);
        assert!(worst(0.0, 0.1, 0.0) > 0.0);
        assert!(worst(0.0, 0.0, -0.1) > 0.0);
        assert_eq!(worst(0.0, 0.0, 0.0), 0.0);
    }

    const DG_BUS: &str = r#"{
        "buses": [
            {"id": "1", "is_root": true},
            {"id": "2", "demand_p": 100, "demand_q": 50}
        ],
        "lines": [
            {"id": "L12", "from_bus": "1", "to_bus": "2", "r": 0.01, "x": 0.02, "capacity": 2000, "length_ft": 700, "kind": "existing"}
        ],
        "dgs": [{"bus": "2", "p_max": 400, "p_min": 0, "q_max": 300, "q_min": -300}]
    }"#;

    #[test]
    fn dg_window_follows_commitment() {
        let n = net(DG_BUS);
        let m = build_model(&n, &intact(), &cfg(1)).unwrap();
        let rows: Vec<&Constraint> = m.rows_with_tag(Tag::Eq6).collect();
        assert_eq!(rows.len(), 4);
        let on = col(&m, VarKind::DgOn, Some(0), Some(1), &["2"]);
        let p = col(&m, VarKind::DgP, Some(0), Some(1), &["2"]);
        let q = col(&m, VarKind::DgQ, Some(0), Some(1), &["2"]);
        let ok = |a: f64, pk: f64, qk: f64| {
            let mut x = origin(&m);
            x[on] = a;
            x[p] = n.to_pu(pk);
            x[q] = n.to_pu(qk);
            rows.iter().all(|r| r.violation(&x) < 1e-12)
        };
        assert!(ok(1.0, 400.0, 300.0) && ok(1.0, 0.0, -300.0) && ok(1.0, 0.0, 0.0));
        assert!(!ok(1.0, 400.5, 0.0) && !ok(1.0, 0.0, -300.5) && !ok(1.0, 0.0, 300.5));
        assert!(ok(0.0, 0.0, 0.0));
        assert!(!ok(0.0, 1.0, 0.0) && !ok(0.0, 0.0, -1.0));
    }

    /// Feasible parent assignments for one period, by enumerating every λ vector.
    fn parent_assignments(json: &str, closed: bool) -> Vec<Vec<f64>> {
        let n = net(json);
        let c = PlanningConfig { strict_radiality: false, ..cfg(1) };
        let m = build_model(&n, &intact(), &c).unwrap();
        let lambdas: Vec<usize> =
            (0..m.variables.len()).filter(|&j| m.variables.var(j).key.kind == VarKind::Parent).collect();
        let rows: Vec<&Constraint> = m.constraints.iter().filter(|r| r.tag.equation() == "eq7").collect();
        let mut x = origin(&m);
        for l in &n.lines {
            x[col(&m, VarKind::Switch, Some(0), Some(1), &[&l.id])] = if closed { 1.0 } else { 0.0 };
        }
        let mut found = Vec::new();
        for mask in 0..(1u32 << lambdas.len()) {
            for (b, &j) in lambdas.iter().enumerate() {
                x[j] = f64::from((mask >> b) & 1);
            }
            if rows.iter().all(|r| r.violation(&x) == 0.0) {
                found.push(lambdas.iter().map(|&j| x[j]).collect());
            }
        }
        found
    }

    const TRIANGLE: &str = r#"{
        "buses": [{"id": "1", "is_root": true}, {"id": "2"}, {"id": "3"}],
        "lines": [
            {"id": "L12", "from_bus": "1", "to_bus": "2", "r": 0.01, "x": 0.01, "capacity": 1000, "length_ft": 100, "kind": "existing"},
            {"id": "L13", "from_bus": "1", "to_bus": "3", "r": 0.01, "x": 0.01, "capacity": 1000, "length_ft": 100, "kind": "existing"},
            {"id": "L23", "from_bus": "2", "to_bus": "3", "r": 0.01, "x": 0.01, "capacity": 1000, "length_ft": 100, "kind": "existing"}
        ]
    }"#;

    const PATH: &str = r#"{
        "buses": [{"id": "1", "is_root": true}, {"id": "2"}, {"id": "3"}],
        "lines": [
            {"id": "L12", "from_bus": "1", "to_bus": "2", "r": 0.01, "x": 0.01, "capacity": 1000, "length_ft": 100, "kind": "existing"},
            {"id": "L23", "from_bus": "2", "to_bus": "3", "r": 0.01, "x": 0.01, "capacity": 1000, "length_ft": 100, "kind": "existing"}
        ]
    }"#;

    #[test]
    fn closed_triangle_has_no_parent_assignment() {
        assert!(parent_assignments(TRIANGLE, true).is_empty());
    }

    #[test]
    fn open_triangle_only_admits_no_parents() {
        assert_eq!(parent_assignments(TRIANGLE, false), vec![vec![0.0; 6]]);
    }

    #[test]
    fn closed_path_orients_away_from_root() {
        // columns: (L12, 1), (L12, 2), (L23, 2), (L23, 3)
        assert_eq!(parent_assignments(PATH, true), vec![vec![0.0, 1.0, 0.0, 1.0]]);
    }

    #[test]
    fn arrival_steps_round_up() {
        let mut n = net(&TWO_BUS.replace(
            r#""demand_p": 100, "demand_q": 50}"#,
            r#""demand_p": 100, "demand_q": 50, "max_mobile_gens": 1}"#,
        ));
        n.mobile_gens.push(crate::network::MobileGen {
            id: "MG1".into(),
            p_max: 0.2,
            q_max: 0.1,
            home_depot: "D".into(),
        });
        n.depots.push(crate::network::Depot { id: "D".into(), travel_minutes: [("2".to_string(), 20.0)].into() });
        let key = ("MG1".to_string(), "2".to_string());
        let one_minute = PlanningConfig { dt_minutes: 1.0, ..cfg(25) };
        assert_eq!(arrival_steps(&n, &one_minute)[&key], 20);
        assert_eq!(arrival_steps(&n, &cfg(25))[&key], 4);
        let three = PlanningConfig { dt_minutes: 3.0, ..cfg(25) };
        assert_eq!(arrival_steps(&n, &three)[&key], 7);
        n.depots[0].travel_minutes.insert("2".into(), 0.0);
        assert_eq!(arrival_steps(&n, &one_minute)[&key], 1);
    }

    fn mg_net() -> Network {
        net(r#"{
            "buses": [{"id": "1", "is_root": true}, {"id": "2", "demand_p": 900, "demand_q": 100, "max_mobile_gens": 2}],
            "lines": [{"id": "L12", "from_bus": "1", "to_bus": "2", "r": 0.01, "x": 0.01, "capacity": 1000, "length_ft": 100, "kind": "existing"}],
            "mobile_gens": [
                {"id": "MG1", "p_max": 200, "q_max": 150, "home_depot": "D"},
                {"id": "MG2", "p_max": 300, "q_max": 250, "home_depot": "D"},
                {"id": "MG5", "p_max": 700, "q_max": 600, "home_depot": "D"}
            ],
            "depots": [{"id": "D", "travel_minutes": {"2": 10}}]
        }"#)
    }

    #[test]
    fn mg_output_bounded_by_connected_capacity() {
        let n = mg_net();
        let m = build_model(&n, &intact(), &cfg(4)).unwrap();
        let (p_row, q_row) = (row(&m, "eq15.0.3.2"), row(&m, "eq16.0.3.2"));
        let kappa = |id: &str| col(&m, VarKind::Connected, Some(0), Some(3), &[id, "2"]);
        let pmg = col(&m, VarKind::MgP, Some(0), Some(3), &["2"]);
        let qmg = col(&m, VarKind::MgQ, Some(0), Some(3), &["2"]);
        let room = |on: &[&str], pk: f64, qk: f64| {
            let mut x = origin(&m);
            for id in on {
                x[kappa(id)] = 1.0;
            }
            x[pmg] = n.to_pu(pk);
            x[qmg] = n.to_pu(qk);
            (p_row.violation(&x) < 1e-12, q_row.violation(&x) < 1e-12)
        };
        assert_eq!(room(&[], 0.0, 0.0), (true, true));
        assert_eq!(room(&[], 1.0, 1.0), (false, false));
        assert_eq!(room(&["MG5"], 700.0, 600.0), (true, true));
        assert_eq!(room(&["MG5"], 700.5, 600.5), (false, false));
        assert_eq!(room(&["MG1", "MG2"], 500.0, 0.0), (true, true));
        assert_eq!(room(&["MG1", "MG2"], 500.5, 0.0), (false, true));
    }

    #[test]
    fn two_units_on_single_slot_bus_break_dispatch_limit() {
        let mut n = mg_net();
        n.buses.iter_mut().find(|b| b.id == "2").unwrap().max_mobile_gens = 1;
        let m = build_model(&n, &intact(), &cfg(4)).unwrap();
        let r = row(&m, "eq8.0.n.2");
        let mut x = origin(&m);
        for id in ["MG1", "MG2"] {
            x[col(&m, VarKind::Dispatch, Some(0), None, &[id, "D", "2"])] = 1.0;
        }
        assert_eq!(r.violation(&x), 1.0);
    }

    fn candidate_net(lengths: &[f64]) -> Network {
        let mut buses = vec![r#"{"id": "0", "is_root": true}"#.to_string()];
        let mut lines = Vec::new();
        for i in 1..=lengths.len() + 1 {
            buses.push(format!(r#"{{"id": "{i}", "demand_p": 10}}"#));
            lines.push(format!(
                r#"{{"id": "E{i}", "from_bus": "{}", "to_bus": "{i}", "r": 0.01, "x": 0.01, "capacity": 1000, "length_ft": 300, "kind": "existing"}}"#,
                i - 1
            ));
        }
        for (i, len) in lengths.iter().enumerate() {
            lines.push(format!(
                r#"{{"id": "C{}", "from_bus": "0", "to_bus": "{}", "r": 0.01, "x": 0.01, "capacity": 1000, "length_ft": {len}, "kind": "candidate"}}"#,
                i + 1,
                i + 2
            ));
        }
        net(&format!(r#"{{"buses": [{}], "lines": [{}]}}"#, buses.join(","), lines.join(",")))
    }

    #[test]
    fn million_dollar_budget_admits_five_lines_not_six() {
        let n = candidate_net(&[700.0, 800.0, 700.0, 900.0, 1000.0, 800.0]);
        let c = PlanningConfig { budget: 1_000_000.0, ..cfg(1) };
        let m = build_model(&n, &intact(), &c).unwrap();
        let budget = row(&m, "eq19a.n.n");
        let with = |k: usize| {
            let mut x = origin(&m);
            for i in 1..=k {
                x[col(&m, VarKind::Build, None, None, &[&format!("C{i}")])] = 1.0;
            }
            budget.violation(&x)
        };
        assert_eq!(with(5), 0.0);
        assert!(with(6) > 0.0);
        let six_cost = 4900.0 / 5280.0 * 1e6 + 6.0 * 30_000.0;
        assert!((with(6) - (six_cost - 1e6)).abs() < 1e-6);
    }

    #[test]
    fn line_count_limit() {
        let n = candidate_net(&[100.0, 100.0, 100.0]);
        let c = PlanningConfig { max_underground: Some(2), ..cfg(1) };
        let m = build_model(&n, &intact(), &c).unwrap();
        let mut x = origin(&m);
        for i in 1..=3 {
            x[col(&m, VarKind::Build, None, None, &[&format!("C{i}")])] = 1.0;
        }
        assert_eq!(row(&m, "eq19b.n.n").violation(&x), 1.0);
    }

    #[test]
    fn unbuilt_candidate_switch_stays_open() {
        let n = candidate_net(&[100.0]);
        let m = build_model(&n, &intact(), &cfg(2)).unwrap();
        let mut x = origin(&m);
        x[col(&m, VarKind::Switch, Some(0), Some(2), &["C1"])] = 1.0;
        assert_eq!(row(&m, "eq17b.0.2.C1").violation(&x), 1.0);
    }

    #[test]
    fn damaged_line_switch_capped_at_zero() {
        let n = net(TWO_BUS);
        let mut s = DamageScenario::intact("storm", 1.0);
        s.damaged.insert("L12".into());
        let m = build_model(&n, &ScenarioSet::single(&s), &cfg(3)).unwrap();
        for t in 1..=3 {
            let r = row(&m, &format!("damage_coupling.0.{t}.L12"));
            assert_eq!((r.sense, r.rhs), (Sense::Le, 0.0));
        }
    }

    #[test]
    fn two_bus_column_counts() {
        let n = net(TWO_BUS);
        let idx = index_variables(&n, &intact(), &cfg(1)).unwrap();
        assert_eq!(idx.count_kind(VarKind::Switch), 1);
        assert_eq!(idx.count_kind(VarKind::Voltage), 2);
        assert_eq!(idx.count_kind(VarKind::Parent), 2);
        let v2 = idx.var(idx.id(&VarKey::new(VarKind::Voltage, Some(0), Some(1), &["2"])));
        assert_eq!((v2.lb, v2.ub), (0.95, 1.05));
        assert_eq!(idx, index_variables(&n, &intact(), &cfg(1)).unwrap());
    }

    #[test]
    fn tiny_model_tags() {
        let n = net(TWO_BUS);
        let m = build_model(&n, &intact(), &cfg(1)).unwrap();
        let tags: BTreeSet<&str> = m.constraints.iter().map(|r| r.tag.as_str()).collect();
        let expected: BTreeSet<&str> =
            ["eq2a", "eq2b", "eq3b", "eq4a", "eq5", "eq7a", "eq7b", "eq7c", "damage-coupling", "radiality-order"]
                .into_iter()
                .collect();
        assert_eq!(tags, expected);
        let n_cols = m.variables.len();
        assert!(m.constraints.iter().all(|r| r.terms.iter().all(|&(j, _)| j < n_cols)));
    }

    #[test]
    fn parallel_and_sequential_builds_match() {
        let n = candidate_net(&[100.0, 200.0]);
        let set = ScenarioSet {
            seed: 1,
            scenarios: (0..4)
                .map(|i| {
                    let mut s = DamageScenario::intact(format!("s{i}"), 0.25);
                    if i % 2 == 1 {
                        s.damaged.insert("E1".into());
                    }
                    s
                })
                .collect(),
        };
        let par = build_model(&n, &set, &PlanningConfig { execution: Execution::Parallel, ..cfg(3) }).unwrap();
        let seq = build_model(&n, &set, &PlanningConfig { execution: Execution::Sequential, ..cfg(3) }).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn configured_big_m_must_exceed_voltage_spread() {
        let n = net(TWO_BUS);
        let c = PlanningConfig { big_m: Some(0.05), ..cfg(1) };
        assert!(build_model(&n, &intact(), &c).is_err());
        let c = PlanningConfig { big_m: Some(0.5), ..cfg(1) };
        assert!(build_model(&n, &intact(), &c).is_ok());
    }
}
