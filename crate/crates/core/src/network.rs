//! Distribution network planning instance: buses, overhead and candidate
//! underground lines, distributed generators, mobile generators and depots.
//!
//! Instance files carry kW / kVAr / kVA / feet. Everything stored on a
//! [`Network`] is per-unit on `base_mva`, except lengths (feet) and travel
//! times (minutes).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FEET_PER_MILE: f64 = 5280.0;

/// Default load weight of a bus flagged critical when the file omits `weight`.
pub const DEFAULT_CRITICAL_WEIGHT: f64 = 10.0;
pub const DEFAULT_WEIGHT: f64 = 1.0;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),
    #[error("unknown bus `{0}`")]
    UnknownBus(String),
    #[error("demand profile of bus `{bus}` has {len} periods, horizon is {horizon}")]
    HorizonMismatch { bus: String, len: usize, horizon: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    /// Existing overhead line (set L^E).
    Existing,
    /// Candidate underground line (set L^A).
    Candidate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    /// Static active demand (pu); scaled per period by `profile`.
    pub demand_p: f64,
    pub demand_q: f64,
    pub profile: Option<Vec<f64>>,
    pub weight: f64,
    pub critical: bool,
    pub v_min: f64,
    pub v_max: f64,
    pub max_mobile_gens: u32,
    pub is_root: bool,
}

impl Bus {
    fn multiplier(&self, t: usize) -> f64 {
        self.profile.as_ref().map_or(1.0, |p| p[t])
    }

    /// Active demand in period `t` (zero-based), per-unit.
    pub fn demand_p_at(&self, t: usize) -> f64 {
        self.demand_p * self.multiplier(t)
    }

    pub fn demand_q_at(&self, t: usize) -> f64 {
        self.demand_q * self.multiplier(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    pub r: f64,
    pub x: f64,
    /// Apparent-power limit, per-unit.
    pub capacity: f64,
    pub length_ft: f64,
    pub kind: LineKind,
    pub switchable: bool,
}

impl Line {
    pub fn length_miles(&self) -> f64 {
        line_length_miles(self.length_ft)
    }

    pub fn other_end(&self, bus: &str) -> Option<&str> {
        if self.from_bus == bus {
            Some(&self.to_bus)
        } else if self.to_bus == bus {
            Some(&self.from_bus)
        } else {
            None
        }
    }
}

pub fn line_length_miles(length_ft: f64) -> f64 {
    length_ft / FEET_PER_MILE
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgUnit {
    pub bus: String,
    pub p_max: f64,
    pub p_min: f64,
    pub q_max: f64,
    pub q_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobileGen {
    pub id: String,
    pub p_max: f64,
    pub q_max: f64,
    pub home_depot: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Depot {
    pub id: String,
    /// Travel plus setup time to each connectable bus, minutes.
    pub travel_minutes: BTreeMap<String, f64>,
}

/// A validated planning instance. Collections are kept sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base_mva: f64,
    pub nominal_voltage_pu: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub dgs: Vec<DgUnit>,
    pub mobile_gens: Vec<MobileGen>,
    pub depots: Vec<Depot>,
    bus_pos: HashMap<String, usize>,
}

/// Neighbor of a bus through a specific line.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor<'a> {
    pub bus: &'a str,
    pub line: &'a Line,
}

impl Network {
    /// Assemble a network from already per-unit components. Sorts every
    /// collection by id; does not validate.
    pub fn new(
        base_mva: f64,
        nominal_voltage_pu: f64,
        mut buses: Vec<Bus>,
        mut lines: Vec<Line>,
        mut dgs: Vec<DgUnit>,
        mut mobile_gens: Vec<MobileGen>,
        mut depots: Vec<Depot>,
    ) -> Self {
        buses.sort_by(|a, b| a.id.cmp(&b.id));
        lines.sort_by(|a, b| a.id.cmp(&b.id));
        dgs.sort_by(|a, b| a.bus.cmp(&b.bus));
        mobile_gens.sort_by(|a, b| a.id.cmp(&b.id));
        depots.sort_by(|a, b| a.id.cmp(&b.id));
        let bus_pos = buses.iter().enumerate().map(|(i, b)| (b.id.clone(), i)).collect();
        Network { base_mva, nominal_voltage_pu, buses, lines, dgs, mobile_gens, depots, bus_pos }
    }

    pub fn base_kva(&self) -> f64 {
        self.base_mva * 1000.0
    }

    pub fn to_pu(&self, kw: f64) -> f64 {
        kw / self.base_kva()
    }

    pub fn to_kw(&self, pu: f64) -> f64 {
        pu * self.base_kva()
    }

    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.bus_pos.get(id).map(|&i| &self.buses[i])
    }

    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.bus_pos.get(id).copied()
    }

    pub fn line(&self, id: &str) -> Option<&Line> {
        self.lines.iter().find(|l| l.id == id)
    }

    pub fn depot(&self, id: &str) -> Option<&Depot> {
        self.depots.iter().find(|d| d.id == id)
    }

    pub fn root(&self) -> Option<&Bus> {
        self.buses.iter().find(|b| b.is_root)
    }

    pub fn existing_lines(&self) -> impl Iterator<Item = &Line> {
        self.lines.iter().filter(|l| l.kind == LineKind::Existing)
    }

    pub fn candidate_lines(&self) -> impl Iterator<Item = &Line> {
        self.lines.iter().filter(|l| l.kind == LineKind::Candidate)
    }

    /// Buses that can host a mobile generator (β_m > 0).
    pub fn connectable_buses(&self) -> impl Iterator<Item = &Bus> {
        self.buses.iter().filter(|b| b.max_mobile_gens > 0)
    }

    /// Ψ_m: neighbors of `bus` through any line, existing or candidate.
    pub fn adjacency(&self, bus: &str) -> Result<Vec<Neighbor<'_>>, NetworkError> {
        if !self.bus_pos.contains_key(bus) {
            return Err(NetworkError::UnknownBus(bus.to_string()));
        }
        Ok(self.lines.iter().filter_map(|l| l.other_end(bus).map(|n| Neighbor { bus: n, line: l })).collect())
    }

    /// Every bus demand profile must cover exactly `horizon` periods.
    pub fn check_horizon(&self, horizon: usize) -> Result<(), NetworkError> {
        for b in &self.buses {
            if let Some(p) = &b.profile {
                if p.len() != horizon {
                    return Err(NetworkError::HorizonMismatch { bus: b.id.clone(), len: p.len(), horizon });
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// Canonical instance document (kW / kVAr / kVA / feet).
    pub fn to_document(&self) -> NetworkDoc {
        let kw = |pu: f64| canonical(self.to_kw(pu));
        NetworkDoc {
            base_mva: self.base_mva,
            nominal_voltage_pu: self.nominal_voltage_pu,
            buses: self
                .buses
                .iter()
                .map(|b| BusDoc {
                    id: b.id.clone(),
                    demand_p: kw(b.demand_p),
                    demand_q: kw(b.demand_q),
                    profile: b.profile.clone(),
                    weight: Some(b.weight),
                    critical: b.critical,
                    v_min: b.v_min,
                    v_max: b.v_max,
                    max_mobile_gens: b.max_mobile_gens,
                    is_root: b.is_root,
                })
                .collect(),
            lines: self
                .lines
                .iter()
                .map(|l| LineDoc {
                    id: l.id.clone(),
                    from_bus: l.from_bus.clone(),
                    to_bus: l.to_bus.clone(),
                    r: l.r,
                    x: l.x,
                    capacity: kw(l.capacity),
                    length_ft: l.length_ft,
                    kind: l.kind,
                    switchable: l.switchable,
                })
                .collect(),
            dgs: self
                .dgs
                .iter()
                .map(|d| DgDoc {
                    bus: d.bus.clone(),
                    p_max: kw(d.p_max),
                    p_min: kw(d.p_min),
                    q_max: kw(d.q_max),
                    q_min: kw(d.q_min),
                })
                .collect(),
            mobile_gens: self
                .mobile_gens
                .iter()
                .map(|m| MobileGenDoc {
                    id: m.id.clone(),
                    p_max: kw(m.p_max),
                    q_max: kw(m.q_max),
                    home_depot: m.home_depot.clone(),
                })
                .collect(),
            depots: self
                .depots
                .iter()
                .map(|d| DepotDoc { id: d.id.clone(), travel_minutes: d.travel_minutes.clone() })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network document serializes")
    }
}

/// Rounds a physical quantity to a 1e-9 grid so kW -> pu -> kW is stable.
fn canonical(v: f64) -> f64 {
    let r = (v * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

// ---------------------------------------------------------------------------
// Instance document

fn default_base_mva() -> f64 {
    1.0
}

fn default_nominal_voltage() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_v_min() -> f64 {
    0.95
}

fn default_v_max() -> f64 {
    1.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    #[serde(default = "default_base_mva")]
    pub base_mva: f64,
    #[serde(default = "default_nominal_voltage")]
    pub nominal_voltage_pu: f64,
    pub buses: Vec<BusDoc>,
    pub lines: Vec<LineDoc>,
    #[serde(default)]
    pub dgs: Vec<DgDoc>,
    #[serde(default)]
    pub mobile_gens: Vec<MobileGenDoc>,
    #[serde(default)]
    pub depots: Vec<DepotDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusDoc {
    pub id: String,
    /// kW
    #[serde(default)]
    pub demand_p: f64,
    /// kVAr
    #[serde(default)]
    pub demand_q: f64,
    /// Per-period demand multipliers; absent means constant demand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default)]
    pub critical: bool,
    #[serde(default = "default_v_min")]
    pub v_min: f64,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default)]
    pub max_mobile_gens: u32,
    #[serde(default)]
    pub is_root: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineDoc {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    pub r: f64,
    pub x: f64,
    /// kVA
    pub capacity: f64,
    pub length_ft: f64,
    pub kind: LineKind,
    #[serde(default = "default_true")]
    pub switchable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgDoc {
    pub bus: String,
    pub p_max: f64,
    #[serde(default)]
    pub p_min: f64,
    pub q_max: f64,
    pub q_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobileGenDoc {
    pub id: String,
    pub p_max: f64,
    pub q_max: f64,
    pub home_depot: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepotDoc {
    pub id: String,
    pub travel_minutes: BTreeMap<String, f64>,
}

impl NetworkDoc {
    /// Converts to per-unit and checks references. Does not run [`validate`].
    pub fn into_network(self) -> Result<Network, NetworkError> {
        let base_kva = self.base_mva * 1000.0;
        if !(base_kva.is_finite() && base_kva > 0.0) {
            return Err(NetworkError::Integrity(format!("base_mva must be positive, got {}", self.base_mva)));
        }
        let pu = |kw: f64| kw / base_kva;

        let bus_ids: BTreeSet<&str> = self.buses.iter().map(|b| b.id.as_str()).collect();
        let depot_ids: BTreeSet<&str> = self.depots.iter().map(|d| d.id.as_str()).collect();
        for l in &self.lines {
            for end in [&l.from_bus, &l.to_bus] {
                if !bus_ids.contains(end.as_str()) {
                    return Err(NetworkError::Integrity(format!("line `{}` references unknown bus `{}`", l.id, end)));
                }
            }
        }
        for d in &self.dgs {
            if !bus_ids.contains(d.bus.as_str()) {
                return Err(NetworkError::Integrity(format!("DG references unknown bus `{}`", d.bus)));
            }
        }
        for m in &self.mobile_gens {
            if !depot_ids.contains(m.home_depot.as_str()) {
                return Err(NetworkError::Integrity(format!(
                    "mobile generator `{}` references unknown depot `{}`",
                    m.id, m.home_depot
                )));
            }
        }
        for d in &self.depots {
            for bus in d.travel_minutes.keys() {
                if !bus_ids.contains(bus.as_str()) {
                    return Err(NetworkError::Integrity(format!(
                        "depot `{}` lists travel time to unknown bus `{}`",
                        d.id, bus
                    )));
                }
            }
        }

        let buses = self
            .buses
            .into_iter()
            .map(|b| Bus {
                weight: b.weight.unwrap_or(if b.critical { DEFAULT_CRITICAL_WEIGHT } else { DEFAULT_WEIGHT }),
                id: b.id,
                demand_p: pu(b.demand_p),
                demand_q: pu(b.demand_q),
                profile: b.profile,
                critical: b.critical,
                v_min: b.v_min,
                v_max: b.v_max,
                max_mobile_gens: b.max_mobile_gens,
                is_root: b.is_root,
            })
            .collect();
        let lines = self
            .lines
            .into_iter()
            .map(|l| Line {
                id: l.id,
                from_bus: l.from_bus,
                to_bus: l.to_bus,
                r: l.r,
                x: l.x,
                capacity: pu(l.capacity),
                length_ft: l.length_ft,
                kind: l.kind,
                switchable: l.switchable,
            })
            .collect();
        let dgs = self
            .dgs
            .into_iter()
            .map(|d| DgUnit {
                bus: d.bus,
                p_max: pu(d.p_max),
                p_min: pu(d.p_min),
                q_max: pu(d.q_max),
                q_min: pu(d.q_min),
            })
            .collect();
        let mobile_gens = self
            .mobile_gens
            .into_iter()
            .map(|m| MobileGen { id: m.id, p_max: pu(m.p_max), q_max: pu(m.q_max), home_depot: m.home_depot })
            .collect();
        let depots = self.depots.into_iter().map(|d| Depot { id: d.id, travel_minutes: d.travel_minutes }).collect();
        Ok(Network::new(self.base_mva, self.nominal_voltage_pu, buses, lines, dgs, mobile_gens, depots))
    }
}

/// Parse and validate an instance document. With `horizon`, every demand
/// profile must have exactly that many periods.
pub fn parse_network(text: &str, horizon: Option<usize>) -> Result<Network, NetworkError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: NetworkDoc = serde_path_to_error::deserialize(de)
        .map_err(|e| NetworkError::Parse { path: e.path().to_string(), message: e.inner().to_string() })?;
    let net = doc.into_network()?;
    let report = validate(&net);
    if !report.is_empty() {
        return Err(NetworkError::Validation(report));
    }
    if let Some(h) = horizon {
        net.check_horizon(h)?;
    }
    Ok(net)
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
    /// Offending entity ids (e.g. the buses of a disconnected island).
    pub items: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, rule: &'static str, message: String, items: Vec<String>) {
        self.violations.push(Violation { rule, message, items });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  [{}] {}", v.rule, v.message)?;
        }
        Ok(())
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Lists every invariant violation of `net`; empty means valid.
pub fn validate(net: &Network) -> ValidationReport {
    let mut rep = ValidationReport::default();

    let check_ids = |kind: &str, ids: Vec<&str>, rep: &mut ValidationReport| {
        let mut seen = BTreeSet::new();
        for id in ids {
            if !valid_id(id) {
                rep.push("id-charset", format!("{kind} id `{id}` must match [A-Za-z0-9_]+"), vec![id.to_string()]);
            }
            if !seen.insert(id) {
                rep.push("duplicate-id", format!("duplicate {kind} id `{id}`"), vec![id.to_string()]);
            }
        }
    };
    check_ids("bus", net.buses.iter().map(|b| b.id.as_str()).collect(), &mut rep);
    check_ids("line", net.lines.iter().map(|l| l.id.as_str()).collect(), &mut rep);
    check_ids("mobile generator", net.mobile_gens.iter().map(|m| m.id.as_str()).collect(), &mut rep);
    check_ids("depot", net.depots.iter().map(|d| d.id.as_str()).collect(), &mut rep);
    check_ids("DG bus", net.dgs.iter().map(|d| d.bus.as_str()).collect(), &mut rep);

    if !(net.nominal_voltage_pu > 0.0) {
        rep.push(
            "nominal-voltage",
            format!("nominal_voltage_pu must be positive, got {}", net.nominal_voltage_pu),
            vec![],
        );
    }

    let roots: Vec<String> = net.buses.iter().filter(|b| b.is_root).map(|b| b.id.clone()).collect();
    if roots.len() != 1 {
        rep.push("single-root", format!("exactly one root bus required, found {}", roots.len()), roots);
    }

    let mut profile_len = None;
    for b in &net.buses {
        if !(b.v_min < b.v_max) {
            rep.push(
                "voltage-bounds",
                format!("bus `{}`: v_min {} must be below v_max {}", b.id, b.v_min, b.v_max),
                vec![b.id.clone()],
            );
        }
        if b.is_root && !(b.v_min <= 1.0 && 1.0 <= b.v_max) {
            rep.push("root-voltage", format!("root bus `{}` bounds must contain 1.0 pu", b.id), vec![b.id.clone()]);
        }
        if !(b.weight >= 1.0) {
            rep.push("weight", format!("bus `{}`: weight {} must be >= 1", b.id, b.weight), vec![b.id.clone()]);
        }
        if b.demand_p < 0.0 {
            rep.push("demand", format!("bus `{}`: negative active demand", b.id), vec![b.id.clone()]);
        }
        if let Some(p) = &b.profile {
            if p.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                rep.push(
                    "profile",
                    format!("bus `{}`: profile multipliers must be finite and >= 0", b.id),
                    vec![b.id.clone()],
                );
            }
            match profile_len {
                None => profile_len = Some(p.len()),
                Some(n) if n != p.len() => rep.push(
                    "profile-length",
                    format!("bus `{}`: profile has {} periods, others have {}", b.id, p.len(), n),
                    vec![b.id.clone()],
                ),
                _ => {}
            }
        }
    }

    for l in &net.lines {
        if l.from_bus == l.to_bus {
            rep.push(
                "self-loop",
                format!("line `{}` connects bus `{}` to itself", l.id, l.from_bus),
                vec![l.id.clone()],
            );
        }
        if !(l.r >= 0.0 && l.x >= 0.0) {
            rep.push("impedance", format!("line `{}`: r and x must be >= 0", l.id), vec![l.id.clone()]);
        }
        if !(l.capacity > 0.0) {
            rep.push("capacity", format!("line `{}`: capacity must be > 0", l.id), vec![l.id.clone()]);
        }
        if !(l.length_ft > 0.0) {
            rep.push("length", format!("line `{}`: length_ft must be > 0", l.id), vec![l.id.clone()]);
        }
        if l.kind == LineKind::Candidate && !l.switchable {
            rep.push("candidate-switch", format!("candidate line `{}` must be switchable", l.id), vec![l.id.clone()]);
        }
    }
    let mut pairs = BTreeSet::new();
    for l in &net.lines {
        let key = if l.from_bus < l.to_bus { (&l.from_bus, &l.to_bus) } else { (&l.to_bus, &l.from_bus) };
        if !pairs.insert(key) {
            rep.push(
                "parallel-line",
                format!("line `{}` duplicates bus pair {}-{}", l.id, key.0, key.1),
                vec![l.id.clone()],
            );
        }
    }

    for d in &net.dgs {
        if !(d.p_min <= d.p_max) || !(d.q_min <= d.q_max) || d.p_min < 0.0 {
            rep.push(
                "dg-bounds",
                format!("DG at bus `{}`: need 0 <= p_min <= p_max and q_min <= q_max", d.bus),
                vec![d.bus.clone()],
            );
        }
    }
    for m in &net.mobile_gens {
        if !(m.p_max > 0.0 && m.q_max >= 0.0) {
            rep.push(
                "mg-bounds",
                format!("mobile generator `{}`: need p_max > 0 and q_max >= 0", m.id),
                vec![m.id.clone()],
            );
        }
    }
    for d in &net.depots {
        for (bus, t) in &d.travel_minutes {
            if !(t.is_finite() && *t >= 0.0) {
                rep.push(
                    "travel-time",
                    format!("depot `{}`: travel time to `{}` must be >= 0", d.id, bus),
                    vec![d.id.clone()],
                );
            }
        }
        for b in net.connectable_buses() {
            if !d.travel_minutes.contains_key(&b.id) {
                rep.push(
                    "travel-coverage",
                    format!("depot `{}` has no travel time to connectable bus `{}`", d.id, b.id),
                    vec![d.id.clone(), b.id.clone()],
                );
            }
        }
    }

    for island in islands(net) {
        rep.push(
            "connectivity",
            format!("buses not connected to the root by existing lines: {}", island.join(", ")),
            island,
        );
    }
    rep
}

/// Components of the existing-line graph that do not contain the root
/// (or all but the first component when there is no unique root).
fn islands(net: &Network) -> Vec<Vec<String>> {
    let n = net.buses.len();
    if n == 0 {
        return vec![];
    }
    let mut uf = UnionFind::new(n);
    for l in net.existing_lines() {
        if let (Some(a), Some(b)) = (net.bus_index(&l.from_bus), net.bus_index(&l.to_bus)) {
            uf.union(a, b);
        }
    }
    let anchor = net.buses.iter().position(|b| b.is_root).unwrap_or(0);
    let main = uf.find(anchor);
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, b) in net.buses.iter().enumerate() {
        let r = uf.find(i);
        if r != main {
            groups.entry(r).or_default().push(b.id.clone());
        }
    }
    groups.into_values().collect()
}

/// Plain union-find with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_bus() -> &'static str {
        r#"{
            "buses": [
                {"id": "1", "is_root": true},
                {"id": "2", "demand_p": 100, "demand_q": 50},
                {"id": "3", "demand_p": 80, "demand_q": 20, "critical": true}
            ],
            "lines": [
                {"id": "L12", "from_bus": "1", "to_bus": "2", "r": 0.01, "x": 0.02, "capacity": 1000, "length_ft": 700, "kind": "existing"},
                {"id": "L23", "from_bus": "2", "to_bus": "3", "r": 0.01, "x": 0.02, "capacity": 1000, "length_ft": 500, "kind": "existing"}
            ]
        }"#
    }

    #[test]
    fn parses_three_bus_document() {
        let net = parse_network(three_bus(), None).unwrap();
        assert_eq!(net.buses.len(), 3);
        assert_eq!(net.existing_lines().count(), 2);
        assert_eq!(net.candidate_lines().count(), 0);
        let b2 = net.bus("2").unwrap();
        assert!((b2.demand_p - 0.1).abs() < 1e-15);
        assert_eq!(net.bus("3").unwrap().weight, DEFAULT_CRITICAL_WEIGHT);
        assert_eq!(net.bus("2").unwrap().weight, DEFAULT_WEIGHT);
    }

    #[test]
    fn dangling_bus_reference_is_integrity_error() {
        let text = three_bus().replace(r#""to_bus": "3""#, r#""to_bus": "99""#);
        match parse_network(&text, None) {
            Err(NetworkError::Integrity(msg)) => assert!(msg.contains("99")),
            other => panic!("expected integrity error, got {other:?}"),
        }
    }

    #[test]
    fn schema_violation_names_path() {
        let text = three_bus().replace(
            r#""r": 0.01, "x": 0.02, "capacity": 1000, "length_ft": 500"#,
            r#""r": "a", "x": 0.02, "capacity": 1000, "length_ft": 500"#,
        );
        match parse_network(&text, None) {
            Err(NetworkError::Parse { path, .. }) => assert_eq!(path, "lines[1].r"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn profile_length_checked_against_horizon() {
        let profile = |n: usize| format!("[{}]", vec!["1.0"; n].join(","));
        let text = three_bus().replace(r#""demand_q": 50"#, &format!(r#""demand_q": 50, "profile": {}"#, profile(24)));
        assert!(parse_network(&text, Some(24)).is_ok());
        let text = three_bus().replace(r#""demand_q": 50"#, &format!(r#""demand_q": 50, "profile": {}"#, profile(23)));
        assert!(matches!(parse_network(&text, Some(24)), Err(NetworkError::HorizonMismatch { len: 23, .. })));
    }

    #[test]
    fn two_roots_reported_once() {
        let mut net = parse_network(three_bus(), None).unwrap();
        net.buses[1].is_root = true;
        let rep = validate(&net);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].rule, "single-root");
    }

    #[test]
    fn disconnected_island_named() {
        let text = three_bus().replace(
            r#""to_bus": "3", "r": 0.01, "x": 0.02, "capacity": 1000, "length_ft": 500, "kind": "existing""#,
            r#""to_bus": "3", "r": 0.01, "x": 0.02, "capacity": 1000, "length_ft": 500, "kind": "candidate""#,
        );
        let doc: NetworkDoc = serde_json::from_str(&text).unwrap();
        let net = doc.into_network().unwrap();
        let rep = validate(&net);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].rule, "connectivity");
        assert_eq!(rep.violations[0].items, vec!["3".to_string()]);
    }

    #[test]
    fn valid_network_has_empty_report() {
        let net = parse_network(three_bus(), None).unwrap();
        assert!(validate(&net).is_empty());
    }

    #[test]
    fn adjacency_on_path_and_isolated_bus() {
        let net = parse_network(three_bus(), None).unwrap();
        let mut n: Vec<&str> = net.adjacency("2").unwrap().iter().map(|x| x.bus).collect();
        n.sort();
        assert_eq!(n, vec!["1", "3"]);
        assert!(matches!(net.adjacency("7"), Err(NetworkError::UnknownBus(_))));

        let mut isolated = net.clone();
        isolated.lines.retain(|l| l.id != "L23");
        assert!(isolated.adjacency("3").unwrap().is_empty());
    }

    #[test]
    fn adjacency_reports_line_kinds() {
        let text = three_bus().replace(
            r#""kind": "existing"}
            ]"#,
            r#""kind": "existing"},
                {"id": "C13", "from_bus": "1", "to_bus": "3", "r": 0.01, "x": 0.01, "capacity": 500, "length_ft": 300, "kind": "candidate"}
            ]"#,
        );
        let net = parse_network(&text, None).unwrap();
        let mut kinds: Vec<(String, LineKind)> =
            net.adjacency("3").unwrap().iter().map(|n| (n.bus.to_string(), n.line.kind)).collect();
        kinds.sort();
        assert_eq!(kinds, vec![("1".into(), LineKind::Candidate), ("2".into(), LineKind::Existing)]);
    }

    #[test]
    fn adjacency_is_symmetric() {
        let net = parse_network(three_bus(), None).unwrap();
        for b in &net.buses {
            for nb in net.adjacency(&b.id).unwrap() {
                assert!(net.adjacency(nb.bus).unwrap().iter().any(|x| x.bus == b.id));
                assert_ne!(nb.bus, b.id);
            }
        }
    }

    #[test]
    fn miles_from_feet() {
        assert!((line_length_miles(700.0) - 0.132_575_757_575_757_6).abs() < 1e-15);
        assert_eq!(line_length_miles(5280.0), 1.0);
        assert!((line_length_miles(4100.0) - 0.776_515_151_515_151_5).abs() < 1e-15);
    }

    #[test]
    fn canonical_document_round_trips() {
        let net = parse_network(three_bus(), None).unwrap();
        let once = net.to_json();
        let again = parse_network(&once, None).unwrap().to_json();
        assert_eq!(once, again);
    }
}
