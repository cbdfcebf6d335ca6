use super::constraints::arrival_steps;
use super::{ModelError, PlanningConfig, VarKey, VarKind, VariableIndex};
use crate::network::{LineKind, Network};
use crate::scenario::ScenarioSet;

/// Enumerates every column in kind, scenario, period, entity order and
/// attaches the simple box bounds of each family.
pub fn index_variables(
    net: &Network,
    scenarios: &ScenarioSet,
    cfg: &PlanningConfig,
) -> Result<VariableIndex, ModelError> {
    cfg.validate()?;
    net.check_horizon(cfg.horizon_periods)?;
    scenarios.validate(net)?;

    let periods = 1..=cfg.horizon_periods;
    let mut idx = VariableIndex::default();

    let existing: Vec<_> = net.lines.iter().filter(|l| l.kind == LineKind::Existing).collect();
    let candidates: Vec<_> = net.lines.iter().filter(|l| l.kind == LineKind::Candidate).collect();
    let connectable: Vec<_> = net.connectable_buses().collect();
    let root = net.root().map(|b| b.id.as_str());
    let steps = arrival_steps(net, cfg);

    for kind in VarKind::ALL {
        if kind == VarKind::Build {
            for l in &candidates {
                idx.push(VarKey::new(kind, None, None, &[&l.id]), 0.0, 1.0, true);
            }
            continue;
        }
        if kind == VarKind::Depth && !cfg.strict_radiality {
            continue;
        }
        for (pi, scen) in scenarios.scenarios.iter().enumerate() {
            match kind {
                VarKind::Dispatch => {
                    for mg in &net.mobile_gens {
                        for b in &connectable {
                            let reachable = steps[&(mg.id.clone(), b.id.clone())] <= cfg.horizon_periods;
                            let ub = if reachable { 1.0 } else { 0.0 };
                            idx.push(
                                VarKey::new(kind, Some(pi), None, &[&mg.id, &mg.home_depot, &b.id]),
                                0.0,
                                ub,
                                true,
                            );
                        }
                    }
                    continue;
                }
                VarKind::ArrivalTime => {
                    for mg in &net.mobile_gens {
                        for b in &connectable {
                            let s = match steps[&(mg.id.clone(), b.id.clone())] {
                                usize::MAX => 0.0,
                                s => s as f64,
                            };
                            idx.push(
                                VarKey::new(kind, Some(pi), None, &[&mg.id, &mg.home_depot, &b.id]),
                                0.0,
                                s,
                                false,
                            );
                        }
                    }
                    continue;
                }
                _ => {}
            }
            for t in periods.clone() {
                let key = |e: &[&str]| VarKey::new(kind, Some(pi), Some(t), e);
                match kind {
                    VarKind::FlowPExisting | VarKind::FlowQExisting => {
                        for l in &existing {
                            idx.push(key(&[&l.id]), -l.capacity, l.capacity, false);
                        }
                    }
                    VarKind::FlowPAdded | VarKind::FlowQAdded => {
                        for l in &candidates {
                            idx.push(key(&[&l.id]), -l.capacity, l.capacity, false);
                        }
                    }
                    VarKind::CurtailP => {
                        for b in &net.buses {
                            idx.push(key(&[&b.id]), 0.0, b.demand_p_at(t - 1), false);
                        }
                    }
                    VarKind::CurtailQ => {
                        for b in &net.buses {
                            let q = b.demand_q_at(t - 1);
                            idx.push(key(&[&b.id]), q.min(0.0), q.max(0.0), false);
                        }
                    }
                    VarKind::DgP => {
                        for d in &net.dgs {
                            idx.push(key(&[&d.bus]), d.p_min.min(0.0), d.p_max.max(0.0), false);
                        }
                    }
                    VarKind::DgQ => {
                        for d in &net.dgs {
                            idx.push(key(&[&d.bus]), d.q_min.min(0.0), d.q_max.max(0.0), false);
                        }
                    }
                    VarKind::MgP | VarKind::MgQ => {
                        let cap: f64 =
                            net.mobile_gens.iter().map(|m| if kind == VarKind::MgP { m.p_max } else { m.q_max }).sum();
                        for b in &connectable {
                            idx.push(key(&[&b.id]), 0.0, cap, false);
                        }
                    }
                    VarKind::Voltage => {
                        for b in &net.buses {
                            let fixed = cfg.substation_available && Some(b.id.as_str()) == root;
                            let (lo, hi) = if fixed { (1.0, 1.0) } else { (b.v_min, b.v_max) };
                            idx.push(key(&[&b.id]), lo, hi, false);
                        }
                    }
                    VarKind::Switch => {
                        for l in &net.lines {
                            let lo = if l.kind == LineKind::Existing && !l.switchable {
                                f64::from(scen.availability(&l.id))
                            } else {
                                0.0
                            };
                            let hi = if l.kind == LineKind::Existing && !l.switchable { lo } else { 1.0 };
                            idx.push(key(&[&l.id]), lo, hi, true);
                        }
                    }
                    VarKind::DgOn => {
                        for d in &net.dgs {
                            let (lo, hi) = if Some(d.bus.as_str()) == root {
                                let a = f64::from(u8::from(cfg.substation_available));
                                (a, a)
                            } else {
                                (0.0, 1.0)
                            };
                            idx.push(key(&[&d.bus]), lo, hi, true);
                        }
                    }
                    VarKind::Parent => {
                        for l in &net.lines {
                            let mut ends = [l.from_bus.as_str(), l.to_bus.as_str()];
                            ends.sort_unstable();
                            for child in ends {
                                idx.push(key(&[&l.id, child]), 0.0, 1.0, true);
                            }
                        }
                    }
                    VarKind::Arrive | VarKind::Connected => {
                        for mg in &net.mobile_gens {
                            for b in &connectable {
                                idx.push(key(&[&mg.id, &b.id]), 0.0, 1.0, true);
                            }
                        }
                    }
                    VarKind::Depth => {
                        let top = net.buses.len().saturating_sub(1) as f64;
                        for b in &net.buses {
                            idx.push(key(&[&b.id]), 0.0, top, false);
                        }
                    }
                    VarKind::Dispatch | VarKind::ArrivalTime | VarKind::Build => unreachable!(),
                }
            }
        }
    }
    Ok(idx)
}
