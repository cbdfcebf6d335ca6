use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use gridshield_core::exec::Execution;
use gridshield_core::milp::{
    build_model, build_restoration_model, compute_investment_cost, InvestmentPlan, MilpModel, PlanningConfig, VarKey,
    VarKind,
};
use gridshield_core::network::{parse_network, Network};
use gridshield_core::report::{
    compare, dispatch_table, emit_report, expected_trajectory, served_energy, trajectory, utilization_rates, Report,
    ReportFormat,
};
use gridshield_core::scenario::{monte_carlo, reduce_scenarios, FragilityCurve, ScenarioSet};
use gridshield_core::solver::{
    check_feasibility, default_backend, emit_model, parse_model, parse_solution, solve, write_solution, MilpBackend,
    ModelFormat, ProcessBackend, Solution, Status,
};
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::{CheckArgs, ConfigArgs, PlanArgs, ReportArgs, RestoreArgs, ScenariosArgs, SolverArgs};

pub const EXIT_INFEASIBLE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BACKEND: u8 = 3;

#[derive(Debug)]
pub enum Failure {
    Infeasible(String),
    Input(anyhow::Error),
    Backend(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Infeasible(_) => EXIT_INFEASIBLE,
            Failure::Input(_) => EXIT_INPUT,
            Failure::Backend(_) => EXIT_BACKEND,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Infeasible(m) => f.write_str(m),
            Failure::Input(e) | Failure::Backend(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

trait Classify<T> {
    fn input(self) -> CmdResult<T>;
    fn backend(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Input(e.into()))
    }

    fn backend(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Backend(e.into()))
    }
}

fn read(path: &Path) -> CmdResult<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).input()
}

fn out_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).input()
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn load_network(path: &Path, horizon: Option<usize>) -> CmdResult<Network> {
    parse_network(&read(path)?, horizon).with_context(|| format!("network {}", path.display())).input()
}

fn load_scenarios(path: &Path, net: &Network) -> CmdResult<ScenarioSet> {
    let set = ScenarioSet::from_json(&read(path)?).with_context(|| format!("scenarios {}", path.display())).input()?;
    set.validate(net).with_context(|| format!("scenarios {}", path.display())).input()?;
    Ok(set)
}

fn load_config(args: &ConfigArgs, m: &mut RunManifest) -> CmdResult<PlanningConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            m.input("config", p);
            PlanningConfig::from_json(&read(p)?).with_context(|| format!("config {}", p.display())).input()?
        }
        None => PlanningConfig::default(),
    };
    if let Some(b) = args.budget {
        cfg.budget = b;
    }
    if let Some(k) = args.max_underground {
        cfg.max_underground = Some(k);
    }
    if let Some(g) = args.gap {
        cfg.optimality_gap = g;
    }
    if let Some(h) = args.horizon {
        cfg.horizon_periods = h;
    }
    if let Some(t) = args.time_limit {
        cfg.time_limit_seconds = Some(t);
    }
    cfg.execution = execution(args.sequential);
    cfg.validate().input()?;
    m.config = Some(cfg.clone());
    Ok(cfg)
}

fn backend(args: &SolverArgs) -> CmdResult<Box<dyn MilpBackend>> {
    match args.solver_cmd.as_deref().map(str::trim) {
        Some(cmd) if !cmd.is_empty() => Ok(Box::new(ProcessBackend::new(cmd))),
        _ => default_backend().backend(),
    }
}

/// Dumps the model, solves it and writes the solution file. Solve time goes
/// to the manifest so the solution file stays reproducible.
fn solve_and_write(
    model: &MilpModel,
    cfg: &PlanningConfig,
    solver: &SolverArgs,
    dir: &Path,
    m: &mut RunManifest,
) -> CmdResult<Solution> {
    let dump = emit_model(model, solver.model_format).input()?;
    m.output("model", dir, &format!("model.{}", solver.model_format.extension()), &dump)?;
    let backend = backend(solver)?;
    m.backend = Some(backend.name().to_string());
    let mut sol = m.time("solve", || solve(model, backend.as_ref(), cfg)).backend()?;
    sol.solve_seconds = 0.0;
    m.status = Some(sol.status.to_string());
    m.output("solution", dir, "solution.sol", &write_solution(&sol))?;
    Ok(sol)
}

/// Finishes the manifest and turns a solution without incumbent into a failure.
fn require_incumbent(sol: &Solution, dir: &Path, m: RunManifest) -> CmdResult {
    m.finish(dir).input()?;
    match sol.status {
        Status::Infeasible => Err(Failure::Infeasible("model is infeasible".into())),
        _ if !sol.has_incumbent() => {
            Err(Failure::Backend(anyhow!("solver stopped ({}) without a feasible solution", sol.status)))
        }
        _ => Ok(()),
    }
}

pub fn scenarios(a: ScenariosArgs) -> CmdResult {
    let mut m = RunManifest::start("scenarios");
    m.input("network", &a.network);
    m.seed = Some(a.seed);
    let net = load_network(&a.network, None)?;
    let curve = FragilityCurve {
        underground_multiplier: a.underground_multiplier,
        ..FragilityCurve::logistic(a.intensity_50, a.steepness)
    };
    if !curve.is_valid() {
        return Err(Failure::Input(anyhow!("invalid fragility curve parameters")));
    }
    if !(a.intensity.is_finite() && a.intensity >= 0.0) {
        return Err(Failure::Input(anyhow!("intensity must be a finite non-negative number")));
    }
    let exec = execution(a.sequential);
    let all = m.time("sample", || monte_carlo(&net, &curve, a.intensity, a.count, a.seed, exec)).input()?;
    let kept = m.time("reduce", || reduce_scenarios(&all, a.keep, &net, a.metric.into())).input()?;
    out_dir(&a.out_dir)?;
    m.output("scenarios", &a.out_dir, "scenarios.json", &(kept.to_json() + "\n"))?;
    println!("{} of {} scenarios kept, seed {}", kept.len(), all.len(), a.seed);
    m.finish(&a.out_dir).input()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary<T: Serialize> {
    status: Status,
    objective: f64,
    gap: f64,
    #[serde(flatten)]
    extra: T,
}

pub fn plan(a: PlanArgs) -> CmdResult {
    let mut m = RunManifest::start("plan");
    m.input("network", &a.network);
    m.input("scenarios", &a.scenarios);
    let cfg = load_config(&a.config, &mut m)?;
    let net = load_network(&a.network, Some(cfg.horizon_periods))?;
    let set = load_scenarios(&a.scenarios, &net)?;
    m.seed = Some(set.seed);
    let model = m.time("build", || build_model(&net, &set, &cfg)).input()?;
    out_dir(&a.out_dir)?;
    let sol = solve_and_write(&model, &cfg, &a.solver, &a.out_dir, &mut m)?;
    if !sol.has_incumbent() {
        return require_incumbent(&sol, &a.out_dir, m);
    }

    let mut chosen = Vec::new();
    for l in net.candidate_lines() {
        let name = VarKey::new(VarKind::Build, None, None, &[&l.id]).name();
        if sol.value(&name).unwrap_or(0.0) > 0.5 {
            chosen.push(l);
        }
    }
    let mut plan = InvestmentPlan::new(chosen.iter().map(|l| l.id.clone()).collect());
    plan.total_length_ft = Some(chosen.iter().map(|l| l.length_ft).sum());
    plan.cost = Some(compute_investment_cost(chosen.iter().copied(), &cfg));
    plan.objective = Some(sol.objective);
    plan.gap = Some(sol.gap);
    m.output("plan", &a.out_dir, "plan.json", &json(&plan))?;

    let tr = expected_trajectory(&sol, &net, &set, &cfg).input()?;
    m.output(
        "trajectory",
        &a.out_dir,
        "trajectory.csv",
        &emit_report(&Report::Trajectory(&tr), ReportFormat::Csv).input()?,
    )?;
    let served = served_energy(&sol, &net, &set, &cfg).input()?;
    let summary = Summary { status: sol.status, objective: sol.objective, gap: sol.gap, extra: served };
    m.output("summary", &a.out_dir, "summary.json", &json(&summary))?;

    println!(
        "{}: build [{}], cost ${:.0}, objective {:.6}, gap {:.4}",
        sol.status,
        plan.lines.join(", "),
        plan.cost.unwrap_or(0.0),
        sol.objective,
        sol.gap
    );
    require_incumbent(&sol, &a.out_dir, m)
}

#[derive(Serialize)]
struct RestoreExtra {
    scenario: String,
    plan: Vec<String>,
    served: gridshield_core::report::ServedEnergy,
    utilization: gridshield_core::report::Utilization,
}

pub fn restore(a: RestoreArgs) -> CmdResult {
    let mut m = RunManifest::start("restore");
    m.input("network", &a.network);
    m.input("plan", &a.plan);
    m.input("scenarios", &a.scenarios);
    let cfg = load_config(&a.config, &mut m)?;
    let net = load_network(&a.network, Some(cfg.horizon_periods))?;
    let set = load_scenarios(&a.scenarios, &net)?;
    m.seed = Some(set.seed);
    let plan: InvestmentPlan =
        serde_json::from_str(&read(&a.plan)?).with_context(|| format!("plan {}", a.plan.display())).input()?;
    let Some(scenario) = set.scenarios.iter().find(|s| s.id == a.scenario) else {
        let ids: Vec<&str> = set.scenarios.iter().map(|s| s.id.as_str()).collect();
        return Err(Failure::Input(anyhow!(
            "no scenario `{}` in {} (have {})",
            a.scenario,
            a.scenarios.display(),
            ids.join(", ")
        )));
    };
    let model = m.time("build", || build_restoration_model(&net, scenario, &plan, &cfg)).input()?;
    out_dir(&a.out_dir)?;
    let single = ScenarioSet::single(scenario);
    m.output("scenario", &a.out_dir, "scenario.json", &(single.to_json() + "\n"))?;
    let sol = solve_and_write(&model, &cfg, &a.solver, &a.out_dir, &mut m)?;
    if !sol.has_incumbent() {
        return require_incumbent(&sol, &a.out_dir, m);
    }

    let tr = trajectory(&sol, &net, 0, &cfg).input()?;
    m.output(
        "trajectory",
        &a.out_dir,
        "trajectory.csv",
        &emit_report(&Report::Trajectory(&tr), ReportFormat::Csv).input()?,
    )?;
    let dispatch = dispatch_table(&sol, &net, 0, &cfg).input()?;
    m.output(
        "dispatch",
        &a.out_dir,
        "dispatch.csv",
        &emit_report(&Report::Dispatch(&dispatch), ReportFormat::Csv).input()?,
    )?;
    let extra = RestoreExtra {
        scenario: scenario.id.clone(),
        plan: plan.lines.clone(),
        served: served_energy(&sol, &net, &single, &cfg).input()?,
        utilization: utilization_rates(&sol, &net, 0, &cfg).input()?,
    };
    let summary = Summary { status: sol.status, objective: sol.objective, gap: sol.gap, extra };
    m.output("summary", &a.out_dir, "summary.json", &json(&summary))?;

    println!("{}: scenario {}, objective {:.6}", sol.status, scenario.id, sol.objective);
    for d in &dispatch {
        match (&d.bus, d.arrival_minutes) {
            (Some(bus), Some(min)) => println!("  {} -> bus {bus}, connected after {min} min", d.mg),
            (Some(bus), None) => println!("  {} -> bus {bus}, not connected within the horizon", d.mg),
            _ => println!("  {} stays at {}", d.mg, d.depot),
        }
    }
    require_incumbent(&sol, &a.out_dir, m)
}

/// Highest period index appearing in the solution.
fn solution_horizon(sol: &Solution) -> usize {
    sol.values.keys().filter_map(|k| VarKey::parse(k)?.period).max().unwrap_or(0) as usize
}

pub fn report(a: ReportArgs) -> CmdResult {
    let mut m = RunManifest::start("report");
    m.input("network", &a.network);
    m.input("scenarios", &a.scenarios);
    m.input("solution", &a.solution);
    let mut cfg = match &a.config {
        Some(p) => {
            m.input("config", p);
            PlanningConfig::from_json(&read(p)?).with_context(|| format!("config {}", p.display())).input()?
        }
        None => PlanningConfig::default(),
    };
    let sol =
        parse_solution(&read(&a.solution)?).with_context(|| format!("solution {}", a.solution.display())).input()?;
    if !sol.has_incumbent() {
        return Err(Failure::Input(anyhow!("{} holds no solution values ({})", a.solution.display(), sol.status)));
    }
    cfg.horizon_periods = solution_horizon(&sol);
    let net = load_network(&a.network, Some(cfg.horizon_periods))?;
    let set = load_scenarios(&a.scenarios, &net)?;
    m.seed = Some(set.seed);
    m.config = Some(cfg.clone());
    let ext = match a.format {
        ReportFormat::Csv => "csv",
        ReportFormat::Json => "json",
    };
    out_dir(&a.out_dir)?;

    let tr = expected_trajectory(&sol, &net, &set, &cfg).input()?;
    m.output(
        "trajectory",
        &a.out_dir,
        &format!("trajectory.{ext}"),
        &emit_report(&Report::Trajectory(&tr), a.format).input()?,
    )?;
    let served = served_energy(&sol, &net, &set, &cfg).input()?;
    let mut doc = serde_json::json!({ "solution": served });
    if let Some(bp) = &a.baseline {
        m.input("baseline", bp);
        let base = parse_solution(&read(bp)?).with_context(|| format!("baseline {}", bp.display())).input()?;
        let base_tr = expected_trajectory(&base, &net, &set, &cfg).input()?;
        let cmp = compare(&tr, &base_tr).input()?;
        m.output(
            "comparison",
            &a.out_dir,
            &format!("comparison.{ext}"),
            &emit_report(&Report::Comparison(&cmp), a.format).input()?,
        )?;
        doc["baseline"] = serde_json::to_value(served_energy(&base, &net, &set, &cfg).input()?).expect("serializable");
        doc["served_delta_kwh"] = serde_json::json!(cmp.total_served_delta_kwh());
        println!("served energy change against baseline: {:+.3} kWh", cmp.total_served_delta_kwh());
    }
    m.output("served", &a.out_dir, "served.json", &json(&doc))?;
    println!("expected served energy {:.3} kWh over {} periods", served.total_kwh, cfg.horizon_periods);
    m.finish(&a.out_dir).input()?;
    Ok(())
}

pub fn check(a: CheckArgs) -> CmdResult {
    let format = match a.format {
        Some(f) => f,
        None => match a.model.extension().and_then(|e| e.to_str()) {
            Some("lp") => ModelFormat::LpText,
            Some("mps") => ModelFormat::FreeMps,
            _ => return Err(Failure::Input(anyhow!("cannot tell the format of {}; pass --format", a.model.display()))),
        },
    };
    let model =
        parse_model(&read(&a.model)?, format).with_context(|| format!("model {}", a.model.display())).input()?;
    let sol =
        parse_solution(&read(&a.solution)?).with_context(|| format!("solution {}", a.solution.display())).input()?;
    let report = check_feasibility(&model, &sol, a.tol).input()?;
    if report.is_empty() {
        println!(
            "feasible: {} columns, {} rows, max violation {:e}",
            model.variables.len(),
            model.constraints.len(),
            report.max_violation
        );
        return Ok(());
    }
    for v in &report.violations {
        println!("{} ({}) violated by {:e}", v.row, v.tag.equation(), v.slack);
    }
    Err(Failure::Infeasible(format!("{} violations above tolerance {:e}", report.violations.len(), a.tol)))
}
