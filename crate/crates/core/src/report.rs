//! Restoration metrics derived from a solution: served-load trajectories,
//! mobile generator utilization, served energy and run comparisons.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::milp::{PlanningConfig, VarKey, VarKind};
use crate::network::Network;
use crate::scenario::ScenarioSet;
use crate::solver::Solution;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("solution has no value for `{0}`")]
    MissingValue(String),
    #[error("trajectories cover {a} and {b} periods")]
    HorizonMismatch { a: usize, b: usize },
    #[error("scenario index {0} is out of range")]
    NoScenario(usize),
    #[error("could not write report: {0}")]
    Write(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodPoint {
    pub t: usize,
    pub served_fraction: f64,
    pub critical_served_fraction: f64,
    pub served_kwh: f64,
    pub critical_served_kwh: f64,
    /// Attributed active output per mobile generator, kW.
    pub mg_output: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestorationTrajectory {
    pub mg_ids: Vec<String>,
    pub periods: Vec<PeriodPoint>,
}

impl RestorationTrajectory {
    pub fn horizon(&self) -> usize {
        self.periods.len()
    }

    pub fn total_served_kwh(&self) -> f64 {
        self.periods.iter().map(|p| p.served_kwh).sum()
    }
}

fn value(sol: &Solution, kind: VarKind, pi: usize, t: Option<usize>, e: &[&str]) -> Result<f64, ReportError> {
    let name = VarKey::new(kind, Some(pi), t, e).name();
    sol.value(&name).ok_or(ReportError::MissingValue(name))
}

/// Splits the mobile output at every connectable bus among the units
/// connected there, in proportion to their capacity. Returns kW per unit.
fn attributed_output(sol: &Solution, net: &Network, pi: usize, t: usize) -> Result<BTreeMap<String, f64>, ReportError> {
    let mut out: BTreeMap<String, f64> = net.mobile_gens.iter().map(|m| (m.id.clone(), 0.0)).collect();
    for b in net.connectable_buses() {
        let p = value(sol, VarKind::MgP, pi, Some(t), &[&b.id])?;
        let mut here = Vec::new();
        for mg in &net.mobile_gens {
            if value(sol, VarKind::Connected, pi, Some(t), &[&mg.id, &b.id])? > 0.5 {
                here.push(mg);
            }
        }
        let cap: f64 = here.iter().map(|m| m.p_max).sum();
        if cap > 0.0 {
            for mg in here {
                *out.get_mut(&mg.id).expect("known unit") += net.to_kw(p * mg.p_max / cap);
            }
        }
    }
    Ok(out)
}

/// Served-load fractions and mobile output of scenario `pi` of a solution.
pub fn trajectory(
    sol: &Solution,
    net: &Network,
    pi: usize,
    cfg: &PlanningConfig,
) -> Result<RestorationTrajectory, ReportError> {
    let mut periods = Vec::with_capacity(cfg.horizon_periods);
    for t in 1..=cfg.horizon_periods {
        let (mut demand, mut shed, mut crit_demand, mut crit_shed) = (0.0, 0.0, 0.0, 0.0);
        for b in &net.buses {
            let d = b.demand_p_at(t - 1);
            let lc = value(sol, VarKind::CurtailP, pi, Some(t), &[&b.id])?;
            demand += d;
            shed += lc;
            if b.critical {
                crit_demand += d;
                crit_shed += lc;
            }
        }
        let frac = |shed: f64, demand: f64| if demand > 0.0 { (1.0 - shed / demand).clamp(0.0, 1.0) } else { 1.0 };
        periods.push(PeriodPoint {
            t,
            served_fraction: frac(shed, demand),
            critical_served_fraction: frac(crit_shed, crit_demand),
            served_kwh: net.to_kw(demand - shed) * cfg.dt_hours(),
            critical_served_kwh: net.to_kw(crit_demand - crit_shed) * cfg.dt_hours(),
            mg_output: attributed_output(sol, net, pi, t)?,
        });
    }
    Ok(RestorationTrajectory { mg_ids: net.mobile_gens.iter().map(|m| m.id.clone()).collect(), periods })
}

/// Probability-weighted mean of the per-scenario trajectories.
pub fn expected_trajectory(
    sol: &Solution,
    net: &Network,
    scenarios: &ScenarioSet,
    cfg: &PlanningConfig,
) -> Result<RestorationTrajectory, ReportError> {
    let mut acc: Option<RestorationTrajectory> = None;
    for (pi, s) in scenarios.scenarios.iter().enumerate() {
        let tr = trajectory(sol, net, pi, cfg)?;
        let w = s.probability;
        match &mut acc {
            None => {
                let mut first = tr;
                for p in &mut first.periods {
                    p.served_fraction *= w;
                    p.critical_served_fraction *= w;
                    p.served_kwh *= w;
                    p.critical_served_kwh *= w;
                    p.mg_output.values_mut().for_each(|v| *v *= w);
                }
                acc = Some(first);
            }
            Some(a) => {
                for (p, q) in a.periods.iter_mut().zip(&tr.periods) {
                    p.served_fraction += w * q.served_fraction;
                    p.critical_served_fraction += w * q.critical_served_fraction;
                    p.served_kwh += w * q.served_kwh;
                    p.critical_served_kwh += w * q.critical_served_kwh;
                    for (k, v) in &q.mg_output {
                        *p.mg_output.get_mut(k).expect("same units") += w * v;
                    }
                }
            }
        }
    }
    acc.ok_or(ReportError::NoScenario(0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Utilization {
    /// Per unit; `None` for units never dispatched.
    pub per_unit: BTreeMap<String, Option<f64>>,
    /// Capacity-weighted mean over dispatched units.
    pub fleet: Option<f64>,
}

/// Average attributed output over the connected periods, divided by capacity.
pub fn utilization_rates(
    sol: &Solution,
    net: &Network,
    pi: usize,
    cfg: &PlanningConfig,
) -> Result<Utilization, ReportError> {
    let mut energy: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for t in 1..=cfg.horizon_periods {
        let out = attributed_output(sol, net, pi, t)?;
        for mg in &net.mobile_gens {
            let mut connected = false;
            for b in net.connectable_buses() {
                connected |= value(sol, VarKind::Connected, pi, Some(t), &[&mg.id, &b.id])? > 0.5;
            }
            if connected {
                let e = energy.entry(&mg.id).or_default();
                e.0 += out[&mg.id];
                e.1 += 1;
            }
        }
    }
    let mut per_unit = BTreeMap::new();
    let (mut num, mut den) = (0.0, 0.0);
    for mg in &net.mobile_gens {
        let cap_kw = net.to_kw(mg.p_max);
        let rate = energy.get(mg.id.as_str()).map(|&(sum, n)| sum / n as f64 / cap_kw);
        if let Some(r) = rate {
            num += r * cap_kw;
            den += cap_kw;
        }
        per_unit.insert(mg.id.clone(), rate);
    }
    Ok(Utilization { per_unit, fleet: (den > 0.0).then(|| num / den) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServedEnergy {
    /// Σ_π pr_π Σ_t Σ_m (P^D − P^LC)·Δt, kWh.
    pub total_kwh: f64,
    /// Same with each bus weighted by ω_m.
    pub weighted_kwh: f64,
    pub critical_kwh: f64,
}

pub fn served_energy(
    sol: &Solution,
    net: &Network,
    scenarios: &ScenarioSet,
    cfg: &PlanningConfig,
) -> Result<ServedEnergy, ReportError> {
    let mut e = ServedEnergy { total_kwh: 0.0, weighted_kwh: 0.0, critical_kwh: 0.0 };
    for (pi, s) in scenarios.scenarios.iter().enumerate() {
        for t in 1..=cfg.horizon_periods {
            for b in &net.buses {
                let lc = value(sol, VarKind::CurtailP, pi, Some(t), &[&b.id])?;
                let kwh = s.probability * net.to_kw(b.demand_p_at(t - 1) - lc) * cfg.dt_hours();
                e.total_kwh += kwh;
                e.weighted_kwh += b.weight * kwh;
                if b.critical {
                    e.critical_kwh += kwh;
                }
            }
        }
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodDelta {
    pub t: usize,
    pub served_delta_kwh: f64,
    pub critical_delta_kwh: f64,
    pub cumulative_served_delta_kwh: f64,
    pub cumulative_critical_delta_kwh: f64,
    /// Cumulative change relative to the baseline, percent; `None` while the baseline is zero.
    pub served_pct_change: Option<f64>,
    pub critical_pct_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub periods: Vec<PeriodDelta>,
}

impl ComparisonReport {
    pub fn total_served_delta_kwh(&self) -> f64 {
        self.periods.last().map_or(0.0, |p| p.cumulative_served_delta_kwh)
    }
}

/// `a` measured against the baseline `b`.
pub fn compare(a: &RestorationTrajectory, b: &RestorationTrajectory) -> Result<ComparisonReport, ReportError> {
    if a.horizon() != b.horizon() {
        return Err(ReportError::HorizonMismatch { a: a.horizon(), b: b.horizon() });
    }
    let pct = |delta: f64, base: f64| (base != 0.0).then(|| 100.0 * delta / base);
    let (mut cs, mut cc, mut bs, mut bc) = (0.0, 0.0, 0.0, 0.0);
    let periods = a
        .periods
        .iter()
        .zip(&b.periods)
        .map(|(p, q)| {
            let ds = p.served_kwh - q.served_kwh;
            let dc = p.critical_served_kwh - q.critical_served_kwh;
            cs += ds;
            cc += dc;
            bs += q.served_kwh;
            bc += q.critical_served_kwh;
            PeriodDelta {
                t: p.t,
                served_delta_kwh: ds,
                critical_delta_kwh: dc,
                cumulative_served_delta_kwh: cs,
                cumulative_critical_delta_kwh: cc,
                served_pct_change: pct(cs, bs),
                critical_pct_change: pct(cc, bc),
            }
        })
        .collect();
    Ok(ComparisonReport { periods })
}

/// Where and when one mobile generator was sent in a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchRow {
    pub mg: String,
    pub depot: String,
    /// `None` when the unit stays at its depot.
    pub bus: Option<String>,
    pub travel_minutes: Option<f64>,
    /// First period in which the unit is connected.
    pub arrival_period: Option<usize>,
    /// End of the arrival period, minutes after the event.
    pub arrival_minutes: Option<f64>,
}

/// One row per mobile generator of scenario `pi`, in network order.
pub fn dispatch_table(
    sol: &Solution,
    net: &Network,
    pi: usize,
    cfg: &PlanningConfig,
) -> Result<Vec<DispatchRow>, ReportError> {
    let mut rows = Vec::with_capacity(net.mobile_gens.len());
    for mg in &net.mobile_gens {
        let mut row = DispatchRow {
            mg: mg.id.clone(),
            depot: mg.home_depot.clone(),
            bus: None,
            travel_minutes: None,
            arrival_period: None,
            arrival_minutes: None,
        };
        for b in net.connectable_buses() {
            if value(sol, VarKind::Dispatch, pi, None, &[&mg.id, &mg.home_depot, &b.id])? <= 0.5 {
                continue;
            }
            row.bus = Some(b.id.clone());
            row.travel_minutes = net.depot(&mg.home_depot).and_then(|d| d.travel_minutes.get(&b.id).copied());
            for t in 1..=cfg.horizon_periods {
                if value(sol, VarKind::Arrive, pi, Some(t), &[&mg.id, &b.id])? > 0.5 {
                    row.arrival_period = Some(t);
                    row.arrival_minutes = Some(t as f64 * cfg.dt_minutes);
                    break;
                }
            }
            break;
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format `{other}` (expected csv or json)")),
        }
    }
}

pub enum Report<'a> {
    Trajectory(&'a RestorationTrajectory),
    Comparison(&'a ComparisonReport),
    Dispatch(&'a [DispatchRow]),
}

fn cell(x: Option<f64>) -> serde_json::Value {
    match x {
        Some(v) if v.is_finite() => serde_json::json!(v),
        _ => serde_json::Value::Null,
    }
}

fn table(report: &Report<'_>) -> (Vec<String>, Vec<Vec<serde_json::Value>>) {
    match report {
        Report::Trajectory(tr) => {
            let mut cols = vec!["t".to_string(), "served_fraction".into(), "critical_served_fraction".into()];
            cols.extend(tr.mg_ids.iter().cloned());
            let rows = tr
                .periods
                .iter()
                .map(|p| {
                    let mut r = vec![
                        serde_json::json!(p.t),
                        cell(Some(p.served_fraction)),
                        cell(Some(p.critical_served_fraction)),
                    ];
                    r.extend(tr.mg_ids.iter().map(|id| cell(p.mg_output.get(id).copied())));
                    r
                })
                .collect();
            (cols, rows)
        }
        Report::Comparison(c) => {
            let cols = [
                "t",
                "served_delta_kwh",
                "critical_delta_kwh",
                "cumulative_served_delta_kwh",
                "cumulative_critical_delta_kwh",
                "served_pct_change",
                "critical_pct_change",
            ]
            .map(String::from)
            .to_vec();
            let rows = c
                .periods
                .iter()
                .map(|p| {
                    vec![
                        serde_json::json!(p.t),
                        cell(Some(p.served_delta_kwh)),
                        cell(Some(p.critical_delta_kwh)),
                        cell(Some(p.cumulative_served_delta_kwh)),
                        cell(Some(p.cumulative_critical_delta_kwh)),
                        cell(p.served_pct_change),
                        cell(p.critical_pct_change),
                    ]
                })
                .collect();
            (cols, rows)
        }
        Report::Dispatch(d) => {
            let cols = ["mg", "depot", "bus", "travel_minutes", "arrival_period", "arrival_minutes"]
                .map(String::from)
                .to_vec();
            let text = |x: &Option<String>| x.as_ref().map_or(serde_json::Value::Null, |v| serde_json::json!(v));
            let rows = d
                .iter()
                .map(|r| {
                    vec![
                        serde_json::json!(r.mg),
                        serde_json::json!(r.depot),
                        text(&r.bus),
                        cell(r.travel_minutes),
                        r.arrival_period.map_or(serde_json::Value::Null, |t| serde_json::json!(t)),
                        cell(r.arrival_minutes),
                    ]
                })
                .collect();
            (cols, rows)
        }
    }
}

/// Table text with a fixed column order: `t` (or `mg` for dispatch tables),
/// then the metric columns, then one column per mobile generator for
/// trajectories. JSON mirrors the CSV as
/// `{"columns": [...], "rows": [[...], ...]}`.
pub fn emit_report(report: &Report<'_>, format: ReportFormat) -> Result<String, ReportError> {
    let (cols, rows) = table(report);
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&cols).map_err(|e| ReportError::Write(e.to_string()))?;
            for r in rows {
                let rec: Vec<String> = r
                    .iter()
                    .map(|v| match v {
                        serde_json::Value::Null => String::new(),
                        serde_json::Value::String(t) => t.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                w.write_record(&rec).map_err(|e| ReportError::Write(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| ReportError::Write(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| ReportError::Write(e.to_string()))
        }
        ReportFormat::Json => {
            let doc = serde_json::json!({ "columns": cols, "rows": rows });
            serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| ReportError::Write(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{build_model, MilpModel};
    use crate::network::parse_network;
    use crate::scenario::DamageScenario;
    use crate::solver::Status;

    fn fixture() -> (Network, MilpModel, PlanningConfig) {
        let net = parse_network(
            r#"{
                "buses": [
                    {"id": "1", "is_root": true},
                    {"id": "2", "demand_p": 100, "demand_q": 20, "max_mobile_gens": 2, "critical": true},
                    {"id": "3", "demand_p": 300, "demand_q": 60}
                ],
                "lines": [
                    {"id": "L12", "from_bus": "1", "to_bus": "2", "r": 0.01, "x": 0.01, "capacity": 1000, "length_ft": 100, "kind": "existing"},
                    {"id": "L23", "from_bus": "2", "to_bus": "3", "r": 0.01, "x": 0.01, "capacity": 1000, "length_ft": 100, "kind": "existing"}
                ],
                "mobile_gens": [
                    {"id": "MG1", "p_max": 200, "q_max": 100, "home_depot": "D"},
                    {"id": "MG2", "p_max": 300, "q_max": 100, "home_depot": "D"}
                ],
                "depots": [{"id": "D", "travel_minutes": {"2": 25}}]
            }"#,
            None,
        )
        .unwrap();
        let cfg = PlanningConfig { horizon_periods: 12, ..Default::default() };
        let model = build_model(&net, &ScenarioSet::single(&DamageScenario::intact("s", 1.0)), &cfg).unwrap();
        (net, model, cfg)
    }

    struct Point<'a> {
        model: &'a MilpModel,
        x: Vec<f64>,
    }

    impl Point<'_> {
        fn set(&mut self, kind: VarKind, t: Option<usize>, e: &[&str], v: f64) {
            let j = self.model.variables.id(&VarKey::new(kind, Some(0), t, e));
            self.x[j] = v;
        }

        fn solution(&self) -> Solution {
            Solution::from_columns(self.model, &self.x, Status::Optimal, 0.0, 0.0)
        }
    }

    fn zero(model: &MilpModel) -> Point<'_> {
        Point { model, x: vec![0.0; model.variables.len()] }
    }

    #[test]
    fn served_fraction_extremes() {
        let (net, model, cfg) = fixture();
        let mut p = zero(&model);
        for b in ["2", "3"] {
            p.set(VarKind::CurtailP, Some(1), &[b], net.bus(b).unwrap().demand_p);
        }
        let tr = trajectory(&p.solution(), &net, 0, &cfg).unwrap();
        assert_eq!(tr.periods[0].served_fraction, 0.0);
        assert_eq!(tr.periods[0].critical_served_fraction, 0.0);
        assert_eq!(tr.periods[1].served_fraction, 1.0);
        assert_eq!(tr.periods[1].critical_served_fraction, 1.0);
        // only the non-critical bus shed: critical fraction stays 1
        p.set(VarKind::CurtailP, Some(2), &["3"], net.to_pu(150.0));
        let tr = trajectory(&p.solution(), &net, 0, &cfg).unwrap();
        assert!((tr.periods[1].served_fraction - 250.0 / 400.0).abs() < 1e-12);
        assert_eq!(tr.periods[1].critical_served_fraction, 1.0);
    }

    #[test]
    fn zero_demand_counts_as_fully_served() {
        let (mut net, model, cfg) = fixture();
        for b in &mut net.buses {
            b.demand_p = 0.0;
        }
        let tr = trajectory(&zero(&model).solution(), &net, 0, &cfg).unwrap();
        assert!(tr.periods.iter().all(|p| p.served_fraction == 1.0 && p.critical_served_fraction == 1.0));
    }

    /// MG1 and MG2 both at bus 2 from step 5 on, sharing 250 kW.
    fn shared_bus<'a>(model: &'a MilpModel, net: &Network) -> Point<'a> {
        let mut p = zero(model);
        for mg in ["MG1", "MG2"] {
            p.set(VarKind::Dispatch, None, &[mg, "D", "2"], 1.0);
            p.set(VarKind::Arrive, Some(5), &[mg, "2"], 1.0);
            for t in 5..=12 {
                p.set(VarKind::Connected, Some(t), &[mg, "2"], 1.0);
            }
        }
        for t in 1..=12 {
            p.set(VarKind::MgP, Some(t), &["2"], if t >= 5 { net.to_pu(250.0) } else { 0.0 });
        }
        p
    }

    #[test]
    fn output_attributed_by_capacity_and_gated_by_arrival() {
        let (net, model, cfg) = fixture();
        let sol = shared_bus(&model, &net).solution();
        let tr = trajectory(&sol, &net, 0, &cfg).unwrap();
        for p in &tr.periods {
            if p.t < 5 {
                assert!(p.mg_output.values().all(|&v| v == 0.0));
            } else {
                assert!((p.mg_output["MG1"] - 100.0).abs() < 1e-9);
                assert!((p.mg_output["MG2"] - 150.0).abs() < 1e-9);
                assert!((p.mg_output.values().sum::<f64>() - 250.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dispatch_table_lists_bus_and_arrival() {
        let (net, model, cfg) = fixture();
        let mut p = shared_bus(&model, &net);
        p.set(VarKind::Dispatch, None, &["MG2", "D", "2"], 0.0);
        let rows = dispatch_table(&p.solution(), &net, 0, &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].bus.as_deref(), Some("2"));
        assert_eq!(rows[0].travel_minutes, Some(25.0));
        assert_eq!(rows[0].arrival_period, Some(5));
        assert_eq!(rows[0].arrival_minutes, Some(5.0 * cfg.dt_minutes));
        assert_eq!(rows[1].bus, None);
        let csv = emit_report(&Report::Dispatch(&rows), ReportFormat::Csv).unwrap();
        assert_eq!(csv.lines().next(), Some("mg,depot,bus,travel_minutes,arrival_period,arrival_minutes"));
        assert!(csv.lines().nth(2).unwrap().starts_with("MG2,D,,"), "{csv}");
    }

    #[test]
    fn utilization_over_connected_periods() {
        let (net, model, cfg) = fixture();
        let u = utilization_rates(&shared_bus(&model, &net).solution(), &net, 0, &cfg).unwrap();
        assert!((u.per_unit["MG1"].unwrap() - 0.5).abs() < 1e-12);
        assert!((u.per_unit["MG2"].unwrap() - 0.5).abs() < 1e-12);
        assert!((u.fleet.unwrap() - 0.5).abs() < 1e-12);

        // MG1 alone: 140 kW average on a 200 kW unit
        let mut p = zero(&model);
        p.set(VarKind::Dispatch, None, &["MG1", "D", "2"], 1.0);
        for t in 3..=12 {
            p.set(VarKind::Connected, Some(t), &["MG1", "2"], 1.0);
            p.set(VarKind::MgP, Some(t), &["2"], net.to_pu(if t % 2 == 0 { 200.0 } else { 80.0 }));
        }
        let u = utilization_rates(&p.solution(), &net, 0, &cfg).unwrap();
        assert!((u.per_unit["MG1"].unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(u.per_unit["MG2"], None);
        assert!((u.fleet.unwrap() - 0.7).abs() < 1e-12);

        for t in 3..=12 {
            p.set(VarKind::MgP, Some(t), &["2"], net.to_pu(200.0));
        }
        let u = utilization_rates(&p.solution(), &net, 0, &cfg).unwrap();
        assert!((u.per_unit["MG1"].unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fleet_rate_is_capacity_weighted() {
        let (net, model, cfg) = fixture();
        let mut p = shared_bus(&model, &net);
        // MG2 moves nowhere else, but give MG1 the bus alone after t = 9
        for t in 9..=12 {
            p.set(VarKind::Connected, Some(t), &["MG2", "2"], 0.0);
            p.set(VarKind::MgP, Some(t), &["2"], net.to_pu(200.0));
        }
        let u = utilization_rates(&p.solution(), &net, 0, &cfg).unwrap();
        let (r1, r2) = (u.per_unit["MG1"].unwrap(), u.per_unit["MG2"].unwrap());
        assert!((u.fleet.unwrap() - (200.0 * r1 + 300.0 * r2) / 500.0).abs() < 1e-12);
    }

    #[test]
    fn served_energy_sums_periods() {
        let (net, model, cfg) = fixture();
        let set = ScenarioSet::single(&DamageScenario::intact("s", 1.0));
        let mut p = zero(&model);
        let e = served_energy(&p.solution(), &net, &set, &cfg).unwrap();
        assert!((e.total_kwh - 400.0).abs() < 1e-9);
        assert!((e.critical_kwh - 100.0).abs() < 1e-9);
        assert!((e.weighted_kwh - (10.0 * 100.0 + 300.0)).abs() < 1e-9);
        // bus 3 shed throughout: bus 2 alone serves 100 kW for an hour
        for t in 1..=12 {
            p.set(VarKind::CurtailP, Some(t), &["3"], net.to_pu(300.0));
        }
        let e = served_energy(&p.solution(), &net, &set, &cfg).unwrap();
        assert!((e.total_kwh - 100.0).abs() < 1e-9);
        for t in 1..=12 {
            p.set(VarKind::CurtailP, Some(t), &["2"], net.to_pu(100.0));
        }
        assert_eq!(served_energy(&p.solution(), &net, &set, &cfg).unwrap().total_kwh, 0.0);
    }

    #[test]
    fn weighted_unserved_energy_matches_objective() {
        let (net, model, cfg) = fixture();
        let set = ScenarioSet::single(&DamageScenario::intact("s", 1.0));
        let mut p = zero(&model);
        for t in 1..=12 {
            p.set(VarKind::CurtailP, Some(t), &["3"], net.to_pu(10.0 * t as f64));
            p.set(VarKind::CurtailP, Some(t), &["2"], net.to_pu(3.0));
        }
        let sol = p.solution();
        let full: f64 = net.buses.iter().map(|b| b.weight * net.to_kw(b.demand_p) * cfg.dt_hours() * 12.0).sum();
        let unserved = full - served_energy(&sol, &net, &set, &cfg).unwrap().weighted_kwh;
        assert!((unserved - sol.objective).abs() <= 1e-6 * sol.objective.abs());
    }

    fn flat(fracs: &[f64], mgs: usize) -> RestorationTrajectory {
        let mg_ids: Vec<String> = (1..=mgs).map(|i| format!("MG{i}")).collect();
        RestorationTrajectory {
            periods: fracs
                .iter()
                .enumerate()
                .map(|(i, &f)| PeriodPoint {
                    t: i + 1,
                    served_fraction: f,
                    critical_served_fraction: f,
                    served_kwh: 10.0 * f,
                    critical_served_kwh: 2.0 * f,
                    mg_output: mg_ids.iter().map(|id| (id.clone(), 5.0 * i as f64)).collect(),
                })
                .collect(),
            mg_ids,
        }
    }

    #[test]
    fn comparing_equal_trajectories_gives_zero() {
        let a = flat(&[0.2, 0.5, 0.9], 1);
        let c = compare(&a, &a).unwrap();
        assert!(c.periods.iter().all(|p| p.served_delta_kwh == 0.0 && p.cumulative_critical_delta_kwh == 0.0));
        assert_eq!(c.periods[0].served_pct_change, Some(0.0));
    }

    #[test]
    fn dominating_trajectory_has_positive_cumulative_delta() {
        let a = flat(&[0.3, 0.6, 1.0], 1);
        let b = flat(&[0.2, 0.5, 0.9], 1);
        let c = compare(&a, &b).unwrap();
        assert!(c.periods.iter().all(|p| p.cumulative_served_delta_kwh > 0.0));
        let expected = 100.0 * 3.0 / 16.0;
        assert!((c.periods[2].served_pct_change.unwrap() - expected).abs() < 1e-9);
        assert!(matches!(compare(&a, &flat(&[0.1], 1)), Err(ReportError::HorizonMismatch { a: 3, b: 1 })));
    }

    #[test]
    fn csv_shape_and_determinism() {
        let tr = flat(&[0.5; 24], 5);
        let text = emit_report(&Report::Trajectory(&tr), ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 25);
        assert_eq!(lines[0], "t,served_fraction,critical_served_fraction,MG1,MG2,MG3,MG4,MG5");
        assert!(lines.iter().all(|l| l.split(',').count() == 8));
        assert_eq!(text, emit_report(&Report::Trajectory(&tr), ReportFormat::Csv).unwrap());
        let json = emit_report(&Report::Trajectory(&tr), ReportFormat::Json).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["rows"].as_array().unwrap().len(), 24);
        assert_eq!(doc["columns"].as_array().unwrap().len(), 8);
    }

    #[test]
    fn empty_horizon_is_header_only() {
        let tr = flat(&[], 2);
        let text = emit_report(&Report::Trajectory(&tr), ReportFormat::Csv).unwrap();
        assert_eq!(text, "t,served_fraction,critical_served_fraction,MG1,MG2\n");
        let c = compare(&tr, &tr).unwrap();
        let text = emit_report(&Report::Comparison(&c), ReportFormat::Csv).unwrap();
        assert_eq!(text.lines().count(), 1);
    }
}
