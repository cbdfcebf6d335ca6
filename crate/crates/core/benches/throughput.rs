use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gridshield_core::exec::Execution;
use gridshield_core::milp::{build_model, PlanningConfig};
use gridshield_core::network::{parse_network, Network};
use gridshield_core::scenario::{monte_carlo, reduce_scenarios, DamageScenario, FragilityCurve, ScenarioSet};
use gridshield_core::solver::{brute_force_oracle, HighsBackend};

const DESK: &str = include_str!("../data/desk13.json");

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn desk() -> Network {
    parse_network(DESK, Some(8)).unwrap()
}

fn sampling(c: &mut Criterion) {
    let net = desk();
    let curve = FragilityCurve::logistic(1.0, 4.0);
    let mut g = c.benchmark_group("monte_carlo_2000");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| monte_carlo(&net, &curve, 1.0, 2000, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn assembly(c: &mut Criterion) {
    let net = desk();
    let all = monte_carlo(&net, &FragilityCurve::logistic(1.0, 4.0), 1.0, 200, 7, Execution::Parallel).unwrap();
    let scen = reduce_scenarios(&all, 10, &net, Default::default()).unwrap();
    let mut g = c.benchmark_group("build_model_desk13_10x24");
    for (name, exec) in MODES {
        let cfg = PlanningConfig { horizon_periods: 24, execution: exec, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| build_model(&net, &scen, &cfg).unwrap()));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let net = parse_network(
        r#"{
      "buses": [{"id": "1", "is_root": true}, {"id": "2", "demand_p": 300, "demand_q": 100, "critical": true},
                {"id": "3", "demand_p": 200, "demand_q": 80}],
      "lines": [{"id": "L12", "from_bus": "1", "to_bus": "2", "r": 0.05, "x": 0.08, "capacity": 350, "length_ft": 300, "kind": "existing"},
                {"id": "L23", "from_bus": "2", "to_bus": "3", "r": 0.05, "x": 0.08, "capacity": 350, "length_ft": 300, "kind": "existing"},
                {"id": "L13", "from_bus": "1", "to_bus": "3", "r": 0.05, "x": 0.08, "capacity": 350, "length_ft": 300, "kind": "existing"}],
      "dgs": [{"bus": "1", "p_max": 450, "q_max": 300, "q_min": -300}]
    }"#,
        None,
    )
    .unwrap();
    let cfg = PlanningConfig { horizon_periods: 1, ..Default::default() };
    let model = build_model(&net, &ScenarioSet::single(&DamageScenario::intact("s", 1.0)), &cfg).unwrap();
    let backend = HighsBackend::default();
    let mut g = c.benchmark_group("oracle_triangle_9_binaries");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| brute_force_oracle(&model, &backend, 16, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sampling, assembly, oracle);
criterion_main!(benches);
