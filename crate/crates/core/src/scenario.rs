//! Line-damage scenarios: fragility-curve Monte Carlo sampling and
//! fast-forward scenario reduction.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_indexed, Execution};
use crate::network::{Line, LineKind, Network};

/// Tolerance on Σ probability = 1.
pub const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario file parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("scenario `{scenario}` damages `{line}`, which is not an existing overhead line")]
    UnknownLine { scenario: String, line: String },
    #[error("duplicate scenario id `{0}`")]
    DuplicateId(String),
    #[error("scenario probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),
    #[error("scenario `{0}` has a negative or non-finite probability")]
    BadProbability(String),
    #[error("reduction target {k} outside 1..={n}")]
    ReductionSize { k: usize, n: usize },
    #[error("sample count must be at least 1")]
    EmptySample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    #[default]
    Logistic,
}

/// Logistic fragility curve in a scalar hazard intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FragilityCurve {
    #[serde(default)]
    pub curve_kind: CurveKind,
    /// Intensity at which an overhead line fails with probability 0.5.
    pub intensity_50: f64,
    pub steepness: f64,
    /// Scales the failure probability of underground lines; 0 means they never fail.
    #[serde(default)]
    pub underground_multiplier: f64,
}

impl FragilityCurve {
    pub fn logistic(intensity_50: f64, steepness: f64) -> Self {
        FragilityCurve { curve_kind: CurveKind::Logistic, intensity_50, steepness, underground_multiplier: 0.0 }
    }

    pub fn is_valid(&self) -> bool {
        self.steepness > 0.0 && self.intensity_50.is_finite() && (0.0..=1.0).contains(&self.underground_multiplier)
    }
}

pub fn damage_probability(curve: &FragilityCurve, line: &Line, intensity: f64) -> f64 {
    let base = match curve.curve_kind {
        CurveKind::Logistic => 1.0 / (1.0 + (-curve.steepness * (intensity - curve.intensity_50)).exp()),
    };
    let scale = match line.kind {
        LineKind::Existing => 1.0,
        LineKind::Candidate => curve.underground_multiplier,
    };
    (scale * base).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DamageScenario {
    pub id: String,
    pub probability: f64,
    /// Existing overhead lines that are out of service. All others are intact.
    pub damaged: BTreeSet<String>,
}

impl DamageScenario {
    pub fn intact(id: impl Into<String>, probability: f64) -> Self {
        DamageScenario { id: id.into(), probability, damaged: BTreeSet::new() }
    }

    /// 1 if the line is intact in this scenario, 0 if damaged.
    pub fn availability(&self, line_id: &str) -> u8 {
        u8::from(!self.damaged.contains(line_id))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub seed: u64,
    pub scenarios: Vec<DamageScenario>,
}

impl ScenarioSet {
    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.scenarios.iter().map(|s| s.probability).sum()
    }

    /// A one-element set holding `scenario` with probability 1.
    pub fn single(scenario: &DamageScenario) -> Self {
        ScenarioSet { seed: 0, scenarios: vec![DamageScenario { probability: 1.0, ..scenario.clone() }] }
    }

    /// Checks ids, probabilities, and that damaged lines are existing lines of `net`.
    pub fn validate(&self, net: &Network) -> Result<(), ScenarioError> {
        let existing: BTreeSet<&str> = net.existing_lines().map(|l| l.id.as_str()).collect();
        let mut ids = BTreeSet::new();
        for s in &self.scenarios {
            if !ids.insert(s.id.as_str()) {
                return Err(ScenarioError::DuplicateId(s.id.clone()));
            }
            if !(s.probability.is_finite() && s.probability >= 0.0) {
                return Err(ScenarioError::BadProbability(s.id.clone()));
            }
            if let Some(l) = s.damaged.iter().find(|l| !existing.contains(l.as_str())) {
                return Err(ScenarioError::UnknownLine { scenario: s.id.clone(), line: l.clone() });
            }
        }
        let total = self.total_probability();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(ScenarioError::ProbabilitySum(total));
        }
        Ok(())
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            seed: self.seed,
            scenarios: self
                .scenarios
                .iter()
                .map(|s| ScenarioRecord {
                    id: s.id.clone(),
                    probability: s.probability,
                    damaged_lines: s.damaged.iter().cloned().collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scenario file serializes")
    }

    /// Parses a scenario file. Call [`ScenarioSet::validate`] against the
    /// network before use.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ScenarioFile = serde_path_to_error::deserialize(de)
            .map_err(|e| ScenarioError::Parse { path: e.path().to_string(), message: e.inner().to_string() })?;
        Ok(ScenarioSet {
            seed: file.seed,
            scenarios: file
                .scenarios
                .into_iter()
                .map(|r| DamageScenario {
                    id: r.id,
                    probability: r.probability,
                    damaged: r.damaged_lines.into_iter().collect(),
                })
                .collect(),
        })
    }
}

/// On-disk scenario file. Damaged lines are listed; everything else is intact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    pub scenarios: Vec<ScenarioRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRecord {
    pub id: String,
    pub probability: f64,
    #[serde(default)]
    pub damaged_lines: Vec<String>,
}

/// Draws one damage realisation: each existing overhead line fails
/// independently with its fragility probability. Candidate lines are
/// never damaged.
pub fn sample_scenario<R: Rng + ?Sized>(
    net: &Network,
    curve: &FragilityCurve,
    intensity: f64,
    rng: &mut R,
) -> DamageScenario {
    let damaged = net
        .existing_lines()
        .filter(|l| {
            let u: f64 = rng.gen();
            u < damage_probability(curve, l, intensity)
        })
        .map(|l| l.id.clone())
        .collect();
    DamageScenario { id: String::new(), probability: 1.0, damaged }
}

/// The RNG stream used for scenario `index` of a run seeded with `seed`.
pub fn scenario_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` equiprobable sampled scenarios. Scenario `i` uses its own
/// counter-derived stream, so parallel and sequential runs agree.
pub fn monte_carlo(
    net: &Network,
    curve: &FragilityCurve,
    intensity: f64,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<ScenarioSet, ScenarioError> {
    if n == 0 {
        return Err(ScenarioError::EmptySample);
    }
    let width = (n - 1).to_string().len();
    let p = 1.0 / n as f64;
    let scenarios = map_indexed(exec, n, |i| {
        let mut rng = scenario_stream(seed, i as u64);
        let mut s = sample_scenario(net, curve, intensity, &mut rng);
        s.id = format!("s{i:0width$}");
        s.probability = p;
        s
    });
    Ok(ScenarioSet { seed, scenarios })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    /// Σ length_ft over lines whose status differs.
    #[default]
    LengthWeighted,
    /// Number of lines whose status differs.
    Hamming,
}

/// Distance between two scenarios over the existing lines of `net`.
pub fn scenario_distance(
    a: &DamageScenario,
    b: &DamageScenario,
    net: &Network,
    metric: DistanceMetric,
) -> Result<f64, ScenarioError> {
    for s in [a, b] {
        if let Some(l) = s.damaged.iter().find(|l| net.line(l).is_none_or(|x| x.kind != LineKind::Existing)) {
            return Err(ScenarioError::UnknownLine { scenario: s.id.clone(), line: l.clone() });
        }
    }
    Ok(a.damaged
        .symmetric_difference(&b.damaged)
        .map(|id| match metric {
            DistanceMetric::LengthWeighted => net.line(id).map_or(0.0, |l| l.length_ft),
            DistanceMetric::Hamming => 1.0,
        })
        .sum())
}

/// Fast-forward selection of `k` scenarios with nearest-neighbour
/// probability redistribution. Output keeps the input order of the
/// selected scenarios; ties are broken by lowest input position.
pub fn reduce_scenarios(
    set: &ScenarioSet,
    k: usize,
    net: &Network,
    metric: DistanceMetric,
) -> Result<ScenarioSet, ScenarioError> {
    let n = set.len();
    if k == 0 || k > n {
        return Err(ScenarioError::ReductionSize { k, n });
    }
    let s = &set.scenarios;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = scenario_distance(&s[i], &s[j], net, metric)?;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    // `nearest[i * n + u]`: distance from i to the closest of (selected ∪ {u}).
    let mut nearest = dist.clone();
    let mut selected = vec![false; n];
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for u in (0..n).filter(|&u| !selected[u]) {
            let z: f64 =
                (0..n).filter(|&i| i != u && !selected[i]).map(|i| s[i].probability * nearest[i * n + u]).sum();
            if best.is_none_or(|(_, bz)| z < bz) {
                best = Some((u, z));
            }
        }
        let (pick, _) = best.expect("k <= n leaves a candidate");
        selected[pick] = true;
        for i in 0..n {
            let via_pick = nearest[i * n + pick];
            for u in 0..n {
                let cell = &mut nearest[i * n + u];
                if via_pick < *cell {
                    *cell = via_pick;
                }
            }
        }
    }

    let chosen: Vec<usize> = (0..n).filter(|&i| selected[i]).collect();
    let mut prob: Vec<f64> = chosen.iter().map(|&j| s[j].probability).collect();
    for i in (0..n).filter(|&i| !selected[i]) {
        let mut target = 0;
        for (c, &j) in chosen.iter().enumerate() {
            if dist[i * n + j] < dist[i * n + chosen[target]] {
                target = c;
            }
        }
        prob[target] += s[i].probability;
    }
    Ok(ScenarioSet {
        seed: set.seed,
        scenarios: chosen.iter().zip(prob).map(|(&j, p)| DamageScenario { probability: p, ..s[j].clone() }).collect(),
    })
}
