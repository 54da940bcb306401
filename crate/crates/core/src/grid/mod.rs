//! Grid topology, day scenarios, and their validation.
//!
//! A [`Grid`] is the static side: buses, lines, generators, renewable farms,
//! import points, non-datacenter loads, and datacenter sites, plus penalty
//! prices and angle limits shared by every dispatch. A [`DayScenario`] is the
//! time-varying side: one day of hourly demand and availability profiles,
//! aligned by index with the grid's entities. A [`ScenarioSet`] bundles the
//! scenarios with a train/eval split.
//!
//! Entity ids live in one namespace across all entity classes so that
//! profile files can address any entity by id alone.

mod io;
mod synth;

pub use io::{load_grid, load_scenarios, save_grid, save_scenarios};
pub use synth::{synth_grid, SynthOptions};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_HORIZON: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fuel {
    Nuclear,
    Coal,
    Gas,
    Wind,
    Solar,
    Other,
    Import,
}

impl Fuel {
    pub const ALL: [Fuel; 7] = [
        Fuel::Nuclear,
        Fuel::Coal,
        Fuel::Gas,
        Fuel::Wind,
        Fuel::Solar,
        Fuel::Other,
        Fuel::Import,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Fuel::Nuclear => "nuclear",
            Fuel::Coal => "coal",
            Fuel::Gas => "gas",
            Fuel::Wind => "wind",
            Fuel::Solar => "solar",
            Fuel::Other => "other",
            Fuel::Import => "import",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub from: usize,
    pub to: usize,
    /// MW of flow per radian of angle difference.
    pub susceptance: f64,
    /// Thermal limit, MW, applied symmetrically.
    pub flow_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: String,
    pub bus: usize,
    pub fuel: Fuel,
    /// $/MWh marginal cost.
    pub cost: f64,
    pub p_max: f64,
    /// MW/h the unit can move between consecutive hours.
    pub ramp_up: f64,
    pub ramp_down: f64,
}

/// Import interconnection; availability comes from the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportPoint {
    pub id: String,
    pub bus: usize,
}

/// Wind, solar, or other renewable site; availability from the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Farm {
    pub id: String,
    pub bus: usize,
}

/// Aggregate non-datacenter demand at one bus.
#[derive(Debug, Clone, PartialEq)]
pub struct NdLoad {
    pub id: String,
    pub bus: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Datacenter {
    pub id: String,
    pub bus: usize,
    /// Nameplate grid draw, MW.
    pub power_max: f64,
    pub util_min: f64,
    pub util_avg: f64,
    pub util_max: f64,
}

impl Datacenter {
    /// Steady grid draw the site presents when it does not shift load.
    pub fn power_avg(&self) -> f64 {
        self.util_avg * self.power_max
    }

    pub fn power_min(&self) -> f64 {
        self.util_min * self.power_max
    }

    pub fn power_cap(&self) -> f64 {
        self.util_max * self.power_max
    }
}

/// Penalty prices, $/MWh, for serving failures and spilled availability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    pub nd_shed: f64,
    pub dc_shed: f64,
    pub import_curtail: f64,
    pub wind_curtail: f64,
    pub solar_curtail: f64,
    pub other_curtail: f64,
}

impl Default for Penalties {
    fn default() -> Self {
        Self {
            nd_shed: 1000.0,
            dc_shed: 1000.0,
            import_curtail: 500.0,
            wind_curtail: 100.0,
            solar_curtail: 100.0,
            other_curtail: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub horizon: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub penalties: Penalties,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub imports: Vec<ImportPoint>,
    pub wind_farms: Vec<Farm>,
    pub solar_farms: Vec<Farm>,
    pub other_renewables: Vec<Farm>,
    pub nd_loads: Vec<NdLoad>,
    pub datacenters: Vec<Datacenter>,
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid has no buses")]
    NoBuses,
    #[error("horizon must be at least 1")]
    BadHorizon,
    #[error("angle bounds must satisfy theta_min <= 0 <= theta_max")]
    BadThetaRange,
    #[error("duplicate entity id '{0}'")]
    DuplicateId(String),
    #[error("{entity} references bus #{bus}, but the grid has {n_buses} buses")]
    BusOutOfRange {
        entity: String,
        bus: usize,
        n_buses: usize,
    },
    #[error("unknown bus id '{bus}' referenced by '{entity}'")]
    UnknownBus { entity: String, bus: String },
    #[error("line '{0}' connects a bus to itself")]
    SelfLoop(String),
    #[error("{entity}: {field} must be positive and finite")]
    NonPositive {
        entity: String,
        field: &'static str,
    },
    #[error("{entity}: {field} must be nonnegative and finite")]
    Negative {
        entity: String,
        field: &'static str,
    },
    #[error("datacenter '{0}' utilization bounds must satisfy 0 <= min <= avg <= max <= 1")]
    UtilOrder(String),
    #[error("bus '{0}' is not connected to the rest of the grid")]
    Disconnected(String),
    #[error("cannot place {dcs} datacenters on {buses} buses")]
    TooManyDatacenters { dcs: usize, buses: usize },
    #[error("scenario '{scenario}': profile for '{entity}' has {got} hours, expected {expected}")]
    ProfileLength {
        scenario: String,
        entity: String,
        expected: usize,
        got: usize,
    },
    #[error("scenario '{scenario}': '{entity}' hour {hour} is negative or non-finite")]
    BadProfileValue {
        scenario: String,
        entity: String,
        hour: usize,
    },
    #[error("scenario '{scenario}' is missing a profile for '{entity}'")]
    MissingProfile { scenario: String, entity: String },
    #[error("scenario '{scenario}' references unknown entity '{entity}'")]
    UnknownEntity { scenario: String, entity: String },
    #[error("scenario '{0}' must have a positive weight")]
    BadWeight(String),
    #[error("duplicate scenario id '{0}'")]
    DuplicateScenario(String),
    #[error("train/eval split is not a partition of the scenarios: {0}")]
    BadSplit(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Which profile table a scenario entity id belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileClass {
    Demand,
    Import,
    Wind,
    Solar,
    Other,
}

impl Grid {
    /// Map from entity id to its profile table and index, for resolving
    /// profile files. Covers exactly the entities that carry profiles.
    pub fn profile_index(&self) -> BTreeMap<&str, (ProfileClass, usize)> {
        let mut map = BTreeMap::new();
        for (i, e) in self.nd_loads.iter().enumerate() {
            map.insert(e.id.as_str(), (ProfileClass::Demand, i));
        }
        for (i, e) in self.imports.iter().enumerate() {
            map.insert(e.id.as_str(), (ProfileClass::Import, i));
        }
        for (i, e) in self.wind_farms.iter().enumerate() {
            map.insert(e.id.as_str(), (ProfileClass::Wind, i));
        }
        for (i, e) in self.solar_farms.iter().enumerate() {
            map.insert(e.id.as_str(), (ProfileClass::Solar, i));
        }
        for (i, e) in self.other_renewables.iter().enumerate() {
            map.insert(e.id.as_str(), (ProfileClass::Other, i));
        }
        map
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.buses.is_empty() {
            return Err(GridError::NoBuses);
        }
        if self.horizon == 0 {
            return Err(GridError::BadHorizon);
        }
        if !(self.theta_min <= 0.0 && 0.0 <= self.theta_max) {
            return Err(GridError::BadThetaRange);
        }
        for (field, v) in [
            ("nd_shed", self.penalties.nd_shed),
            ("dc_shed", self.penalties.dc_shed),
            ("import_curtail", self.penalties.import_curtail),
            ("wind_curtail", self.penalties.wind_curtail),
            ("solar_curtail", self.penalties.solar_curtail),
            ("other_curtail", self.penalties.other_curtail),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(GridError::Negative {
                    entity: "penalties".into(),
                    field,
                });
            }
        }

        let mut seen = std::collections::BTreeSet::new();
        let mut check_id = |id: &str| -> Result<(), GridError> {
            if !seen.insert(id.to_string()) {
                return Err(GridError::DuplicateId(id.to_string()));
            }
            Ok(())
        };
        for b in &self.buses {
            check_id(&b.id)?;
        }

        let nb = self.buses.len();
        let bus_ok = |entity: &str, bus: usize| -> Result<(), GridError> {
            if bus >= nb {
                Err(GridError::BusOutOfRange {
                    entity: entity.to_string(),
                    bus,
                    n_buses: nb,
                })
            } else {
                Ok(())
            }
        };

        for l in &self.lines {
            check_id(&l.id)?;
            bus_ok(&l.id, l.from)?;
            bus_ok(&l.id, l.to)?;
            if l.from == l.to {
                return Err(GridError::SelfLoop(l.id.clone()));
            }
            for (field, v) in [("susceptance", l.susceptance), ("flow_max", l.flow_max)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(GridError::NonPositive {
                        entity: l.id.clone(),
                        field,
                    });
                }
            }
        }
        for g in &self.generators {
            check_id(&g.id)?;
            bus_ok(&g.id, g.bus)?;
            for (field, v) in [
                ("cost", g.cost),
                ("p_max", g.p_max),
                ("ramp_up", g.ramp_up),
                ("ramp_down", g.ramp_down),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(GridError::Negative {
                        entity: g.id.clone(),
                        field,
                    });
                }
            }
        }
        for e in &self.imports {
            check_id(&e.id)?;
            bus_ok(&e.id, e.bus)?;
        }
        for f in self
            .wind_farms
            .iter()
            .chain(&self.solar_farms)
            .chain(&self.other_renewables)
        {
            check_id(&f.id)?;
            bus_ok(&f.id, f.bus)?;
        }
        for d in &self.nd_loads {
            check_id(&d.id)?;
            bus_ok(&d.id, d.bus)?;
        }
        for dc in &self.datacenters {
            check_id(&dc.id)?;
            bus_ok(&dc.id, dc.bus)?;
            if !(dc.power_max.is_finite() && dc.power_max > 0.0) {
                return Err(GridError::NonPositive {
                    entity: dc.id.clone(),
                    field: "power_max",
                });
            }
            let u = [dc.util_min, dc.util_avg, dc.util_max];
            if !(u.iter().all(|x| x.is_finite())
                && 0.0 <= dc.util_min
                && dc.util_min <= dc.util_avg
                && dc.util_avg <= dc.util_max
                && dc.util_max <= 1.0)
            {
                return Err(GridError::UtilOrder(dc.id.clone()));
            }
        }

        // Connectivity: every bus reachable over lines.
        if nb > 1 {
            let mut adj = vec![Vec::new(); nb];
            for l in &self.lines {
                adj[l.from].push(l.to);
                adj[l.to].push(l.from);
            }
            let mut seen = vec![false; nb];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(b) = stack.pop() {
                for &n in &adj[b] {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
            if let Some(b) = seen.iter().position(|s| !s) {
                return Err(GridError::Disconnected(self.buses[b].id.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Fall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayKind {
    Weekday,
    Weekend,
}

impl DayKind {
    /// Scenario weight when averaging over a representative week: five
    /// weekdays to two weekend days.
    pub fn default_weight(self) -> f64 {
        match self {
            DayKind::Weekday => 5.0,
            DayKind::Weekend => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DayType {
    pub season: Season,
    pub kind: DayKind,
}

impl DayType {
    pub const ALL: [DayType; 8] = {
        let mut all = [DayType {
            season: Season::Winter,
            kind: DayKind::Weekday,
        }; 8];
        let seasons = [Season::Winter, Season::Spring, Season::Summer, Season::Fall];
        let kinds = [DayKind::Weekday, DayKind::Weekend];
        let mut i = 0;
        while i < 8 {
            all[i] = DayType {
                season: seasons[i / 2],
                kind: kinds[i % 2],
            };
            i += 1;
        }
        all
    };
}

impl fmt::Display for DayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let season = match self.season {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Fall => "fall",
        };
        let kind = match self.kind {
            DayKind::Weekday => "weekday",
            DayKind::Weekend => "weekend",
        };
        write!(f, "{season}-{kind}")
    }
}

impl std::str::FromStr for DayType {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, GridError> {
        let (season, kind) = s
            .split_once('-')
            .ok_or_else(|| GridError::Parse(format!("bad day type '{s}'")))?;
        let season = match season {
            "winter" => Season::Winter,
            "spring" => Season::Spring,
            "summer" => Season::Summer,
            "fall" => Season::Fall,
            _ => return Err(GridError::Parse(format!("bad season '{season}'"))),
        };
        let kind = match kind {
            "weekday" => DayKind::Weekday,
            "weekend" => DayKind::Weekend,
            _ => return Err(GridError::Parse(format!("bad day kind '{kind}'"))),
        };
        Ok(DayType { season, kind })
    }
}

/// One day of hourly profiles, index-aligned with the grid's entity lists.
/// All values are MW averages over the hour.
#[derive(Debug, Clone, PartialEq)]
pub struct DayScenario {
    pub id: String,
    pub day_type: DayType,
    pub weight: f64,
    /// `[nd_load][hour]` demand.
    pub demand: Vec<Vec<f64>>,
    /// `[import][hour]` availability.
    pub import_avail: Vec<Vec<f64>>,
    /// `[wind_farm][hour]` availability.
    pub wind: Vec<Vec<f64>>,
    /// `[solar_farm][hour]` availability.
    pub solar: Vec<Vec<f64>>,
    /// `[other_renewable][hour]` availability.
    pub other: Vec<Vec<f64>>,
}

impl DayScenario {
    pub fn validate(&self, grid: &Grid) -> Result<(), GridError> {
        if !(self.weight.is_finite() && self.weight > 0.0) {
            return Err(GridError::BadWeight(self.id.clone()));
        }
        let classes: [(&[Vec<f64>], &dyn Fn(usize) -> String); 5] = [
            (&self.demand, &|i| grid.nd_loads[i].id.clone()),
            (&self.import_avail, &|i| grid.imports[i].id.clone()),
            (&self.wind, &|i| grid.wind_farms[i].id.clone()),
            (&self.solar, &|i| grid.solar_farms[i].id.clone()),
            (&self.other, &|i| grid.other_renewables[i].id.clone()),
        ];
        let counts = [
            grid.nd_loads.len(),
            grid.imports.len(),
            grid.wind_farms.len(),
            grid.solar_farms.len(),
            grid.other_renewables.len(),
        ];
        for ((profiles, id_of), count) in classes.iter().zip(counts) {
            if profiles.len() != count {
                return Err(GridError::BadSplit(format!(
                    "scenario '{}' has {} profiles where the grid has {} entities",
                    self.id,
                    profiles.len(),
                    count
                )));
            }
            for (i, series) in profiles.iter().enumerate() {
                if series.len() != grid.horizon {
                    return Err(GridError::ProfileLength {
                        scenario: self.id.clone(),
                        entity: id_of(i),
                        expected: grid.horizon,
                        got: series.len(),
                    });
                }
                for (t, &v) in series.iter().enumerate() {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(GridError::BadProfileValue {
                            scenario: self.id.clone(),
                            entity: id_of(i),
                            hour: t + 1,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Scenarios plus a train/eval partition by index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub scenarios: Vec<DayScenario>,
    pub train: Vec<usize>,
    pub eval: Vec<usize>,
}

impl ScenarioSet {
    /// Splits scenarios into train and eval, spreading eval days evenly
    /// through the list (Bresenham stride) so both splits see the same mix
    /// of day types. `train_frac` of the days, rounded, at least one and at
    /// most all-but-one when there are two or more scenarios.
    pub fn with_split(scenarios: Vec<DayScenario>, train_frac: f64) -> Self {
        let n = scenarios.len();
        let n_train = ((train_frac * n as f64).round() as usize)
            .clamp(1, n.saturating_sub(1).max(1))
            .min(n);
        let n_eval = n - n_train;
        let mut train = Vec::with_capacity(n_train);
        let mut eval = Vec::with_capacity(n_eval);
        let mut acc = 0usize;
        for i in 0..n {
            acc += n_eval;
            if acc >= n {
                acc -= n;
                eval.push(i);
            } else {
                train.push(i);
            }
        }
        ScenarioSet {
            scenarios,
            train,
            eval,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), GridError> {
        let mut ids = std::collections::BTreeSet::new();
        for s in &self.scenarios {
            s.validate(grid)?;
            if !ids.insert(s.id.clone()) {
                return Err(GridError::DuplicateScenario(s.id.clone()));
            }
        }
        let n = self.scenarios.len();
        let mut seen = vec![0u8; n];
        for &i in self.train.iter().chain(&self.eval) {
            if i >= n {
                return Err(GridError::BadSplit(format!("index {i} out of range")));
            }
            seen[i] += 1;
        }
        if self.train.is_empty() && n > 0 {
            return Err(GridError::BadSplit("train split is empty".into()));
        }
        if let Some(i) = seen.iter().position(|&c| c != 1) {
            return Err(GridError::BadSplit(format!(
                "scenario '{}' appears {} times across the splits",
                self.scenarios[i].id, seen[i]
            )));
        }
        Ok(())
    }

    pub fn train_days(&self) -> impl Iterator<Item = &DayScenario> {
        self.train.iter().map(|&i| &self.scenarios[i])
    }

    pub fn eval_days(&self) -> impl Iterator<Item = &DayScenario> {
        self.eval.iter().map(|&i| &self.scenarios[i])
    }
}

/// Weighted mean of `value` over scenarios, weights taken from the days.
pub fn weighted_mean<'a, I, F>(days: I, mut value: F) -> f64
where
    I: IntoIterator<Item = &'a DayScenario>,
    F: FnMut(&'a DayScenario) -> f64,
{
    let mut num = 0.0;
    let mut den = 0.0;
    for d in days {
        num += d.weight * value(d);
        den += d.weight;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_grid() -> Grid {
        Grid {
            horizon: 2,
            theta_min: -0.6,
            theta_max: 0.6,
            penalties: Penalties::default(),
            buses: vec![Bus { id: "b0".into() }, Bus { id: "b1".into() }],
            lines: vec![Line {
                id: "l0".into(),
                from: 0,
                to: 1,
                susceptance: 1000.0,
                flow_max: 100.0,
            }],
            generators: vec![Generator {
                id: "g0".into(),
                bus: 0,
                fuel: Fuel::Gas,
                cost: 22.0,
                p_max: 200.0,
                ramp_up: 200.0,
                ramp_down: 200.0,
            }],
            imports: vec![],
            wind_farms: vec![],
            solar_farms: vec![],
            other_renewables: vec![],
            nd_loads: vec![NdLoad {
                id: "d0".into(),
                bus: 1,
            }],
            datacenters: vec![Datacenter {
                id: "dc0".into(),
                bus: 1,
                power_max: 50.0,
                util_min: 0.4,
                util_avg: 0.7,
                util_max: 1.0,
            }],
        }
    }

    fn tiny_scenario() -> DayScenario {
        DayScenario {
            id: "s0".into(),
            day_type: DayType {
                season: Season::Winter,
                kind: DayKind::Weekday,
            },
            weight: 5.0,
            demand: vec![vec![80.0, 90.0]],
            import_avail: vec![],
            wind: vec![],
            solar: vec![],
            other: vec![],
        }
    }

    #[test]
    fn valid_grid_passes() {
        tiny_grid().validate().unwrap();
        tiny_scenario().validate(&tiny_grid()).unwrap();
    }

    #[test]
    fn util_ordering_is_enforced() {
        let mut g = tiny_grid();
        g.datacenters[0].util_avg = 0.2;
        match g.validate() {
            Err(GridError::UtilOrder(id)) => assert_eq!(id, "dc0"),
            other => panic!("expected UtilOrder, got {other:?}"),
        }
    }

    #[test]
    fn disconnected_bus_is_rejected() {
        let mut g = tiny_grid();
        g.buses.push(Bus { id: "b2".into() });
        match g.validate() {
            Err(GridError::Disconnected(id)) => assert_eq!(id, "b2"),
            other => panic!("expected Disconnected, got {other:?}"),
        }
    }

    #[test]
    fn ids_are_one_namespace() {
        let mut g = tiny_grid();
        g.generators.push(Generator {
            id: "d0".into(),
            bus: 0,
            fuel: Fuel::Coal,
            cost: 31.0,
            p_max: 10.0,
            ramp_up: 10.0,
            ramp_down: 10.0,
        });
        match g.validate() {
            Err(GridError::DuplicateId(id)) => assert_eq!(id, "d0"),
            other => panic!("expected DuplicateId, got {other:?}"),
        }
    }

    #[test]
    fn negative_profile_is_named() {
        let mut s = tiny_scenario();
        s.demand[0][1] = -1.0;
        match s.validate(&tiny_grid()) {
            Err(GridError::BadProfileValue { entity, hour, .. }) => {
                assert_eq!(entity, "d0");
                assert_eq!(hour, 2);
            }
            other => panic!("expected BadProfileValue, got {other:?}"),
        }
    }

    #[test]
    fn split_spreads_eval_days() {
        let days: Vec<DayScenario> = (0..8)
            .map(|i| DayScenario {
                id: format!("s{i}"),
                ..tiny_scenario()
            })
            .collect();
        let set = ScenarioSet::with_split(days, 0.8);
        assert_eq!(set.train.len(), 6);
        assert_eq!(set.eval, vec![3, 7]);
        set.validate(&tiny_grid()).unwrap();
    }

    #[test]
    fn single_scenario_trains() {
        let set = ScenarioSet::with_split(vec![tiny_scenario()], 0.8);
        assert_eq!(set.train, vec![0]);
        assert!(set.eval.is_empty());
        set.validate(&tiny_grid()).unwrap();
    }

    #[test]
    fn day_type_round_trips() {
        for dt in DayType::ALL {
            let s = dt.to_string();
            assert_eq!(s.parse::<DayType>().unwrap(), dt);
        }
        assert!("monsoon-weekday".parse::<DayType>().is_err());
    }
}
