//! File formats: `grid.json` for the static grid, `profiles.csv` for hourly
//! scenario profiles, `scenarios.csv` for scenario metadata and the
//! train/eval split. Schemas are documented in `docs/formats.md`; loading
//! validates everything and saving writes deterministic bytes so fixed
//! inputs round-trip exactly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    Bus, Datacenter, DayScenario, Farm, Fuel, Grid, GridError, ImportPoint, Line, NdLoad,
    Penalties, ProfileClass, ScenarioSet,
};

#[derive(Serialize, Deserialize)]
struct GridFile {
    horizon: usize,
    theta_min: f64,
    theta_max: f64,
    penalties: Penalties,
    buses: Vec<BusFile>,
    lines: Vec<LineFile>,
    generators: Vec<GenFile>,
    #[serde(default)]
    imports: Vec<SiteFile>,
    #[serde(default)]
    wind_farms: Vec<SiteFile>,
    #[serde(default)]
    solar_farms: Vec<SiteFile>,
    #[serde(default)]
    other_renewables: Vec<SiteFile>,
    #[serde(default)]
    nd_loads: Vec<SiteFile>,
    #[serde(default)]
    datacenters: Vec<DcFile>,
}

#[derive(Serialize, Deserialize)]
struct BusFile {
    id: String,
}

#[derive(Serialize, Deserialize)]
struct LineFile {
    id: String,
    from: String,
    to: String,
    susceptance: f64,
    flow_max: f64,
}

#[derive(Serialize, Deserialize)]
struct GenFile {
    id: String,
    bus: String,
    fuel: Fuel,
    cost: f64,
    p_max: f64,
    ramp_up: f64,
    ramp_down: f64,
}

#[derive(Serialize, Deserialize)]
struct SiteFile {
    id: String,
    bus: String,
}

#[derive(Serialize, Deserialize)]
struct DcFile {
    id: String,
    bus: String,
    power_max: f64,
    util_min: f64,
    util_avg: f64,
    util_max: f64,
}

fn bus_index(ids: &BTreeMap<&str, usize>, entity: &str, bus: &str) -> Result<usize, GridError> {
    ids.get(bus).copied().ok_or_else(|| GridError::UnknownBus {
        entity: entity.to_string(),
        bus: bus.to_string(),
    })
}

/// Reads and validates a grid from JSON.
pub fn load_grid(path: impl AsRef<Path>) -> Result<Grid, GridError> {
    let text = std::fs::read_to_string(path)?;
    let file: GridFile = serde_json::from_str(&text)?;
    let bus_ids: BTreeMap<&str, usize> = file
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.as_str(), i))
        .collect();
    let grid = Grid {
        horizon: file.horizon,
        theta_min: file.theta_min,
        theta_max: file.theta_max,
        penalties: file.penalties,
        buses: file.buses.iter().map(|b| Bus { id: b.id.clone() }).collect(),
        lines: file
            .lines
            .iter()
            .map(|l| {
                Ok(Line {
                    id: l.id.clone(),
                    from: bus_index(&bus_ids, &l.id, &l.from)?,
                    to: bus_index(&bus_ids, &l.id, &l.to)?,
                    susceptance: l.susceptance,
                    flow_max: l.flow_max,
                })
            })
            .collect::<Result<_, GridError>>()?,
        generators: file
            .generators
            .iter()
            .map(|g| {
                Ok(Generator {
                    id: g.id.clone(),
                    bus: bus_index(&bus_ids, &g.id, &g.bus)?,
                    fuel: g.fuel,
                    cost: g.cost,
                    p_max: g.p_max,
                    ramp_up: g.ramp_up,
                    ramp_down: g.ramp_down,
                })
            })
            .collect::<Result<_, GridError>>()?,
        imports: file
            .imports
            .iter()
            .map(|s| {
                Ok(ImportPoint {
                    id: s.id.clone(),
                    bus: bus_index(&bus_ids, &s.id, &s.bus)?,
                })
            })
            .collect::<Result<_, GridError>>()?,
        wind_farms: sites_to_farms(&file.wind_farms, &bus_ids)?,
        solar_farms: sites_to_farms(&file.solar_farms, &bus_ids)?,
        other_renewables: sites_to_farms(&file.other_renewables, &bus_ids)?,
        nd_loads: file
            .nd_loads
            .iter()
            .map(|s| {
                Ok(NdLoad {
                    id: s.id.clone(),
                    bus: bus_index(&bus_ids, &s.id, &s.bus)?,
                })
            })
            .collect::<Result<_, GridError>>()?,
        datacenters: file
            .datacenters
            .iter()
            .map(|d| {
                Ok(Datacenter {
                    id: d.id.clone(),
                    bus: bus_index(&bus_ids, &d.id, &d.bus)?,
                    power_max: d.power_max,
                    util_min: d.util_min,
                    util_avg: d.util_avg,
                    util_max: d.util_max,
                })
            })
            .collect::<Result<_, GridError>>()?,
    };
    grid.validate()?;
    Ok(grid)
}

use super::Generator;

fn sites_to_farms(
    sites: &[SiteFile],
    bus_ids: &BTreeMap<&str, usize>,
) -> Result<Vec<Farm>, GridError> {
    sites
        .iter()
        .map(|s| {
            Ok(Farm {
                id: s.id.clone(),
                bus: bus_index(bus_ids, &s.id, &s.bus)?,
            })
        })
        .collect()
}

/// Writes a grid as pretty-printed JSON with a trailing newline.
pub fn save_grid(grid: &Grid, path: impl AsRef<Path>) -> Result<(), GridError> {
    grid.validate()?;
    let bus = |i: usize| grid.buses[i].id.clone();
    let file = GridFile {
        horizon: grid.horizon,
        theta_min: grid.theta_min,
        theta_max: grid.theta_max,
        penalties: grid.penalties.clone(),
        buses: grid.buses.iter().map(|b| BusFile { id: b.id.clone() }).collect(),
        lines: grid
            .lines
            .iter()
            .map(|l| LineFile {
                id: l.id.clone(),
                from: bus(l.from),
                to: bus(l.to),
                susceptance: l.susceptance,
                flow_max: l.flow_max,
            })
            .collect(),
        generators: grid
            .generators
            .iter()
            .map(|g| GenFile {
                id: g.id.clone(),
                bus: bus(g.bus),
                fuel: g.fuel,
                cost: g.cost,
                p_max: g.p_max,
                ramp_up: g.ramp_up,
                ramp_down: g.ramp_down,
            })
            .collect(),
        imports: grid
            .imports
            .iter()
            .map(|s| SiteFile {
                id: s.id.clone(),
                bus: bus(s.bus),
            })
            .collect(),
        wind_farms: farms_to_sites(&grid.wind_farms, &bus),
        solar_farms: farms_to_sites(&grid.solar_farms, &bus),
        other_renewables: farms_to_sites(&grid.other_renewables, &bus),
        nd_loads: grid
            .nd_loads
            .iter()
            .map(|s| SiteFile {
                id: s.id.clone(),
                bus: bus(s.bus),
            })
            .collect(),
        datacenters: grid
            .datacenters
            .iter()
            .map(|d| DcFile {
                id: d.id.clone(),
                bus: bus(d.bus),
                power_max: d.power_max,
                util_min: d.util_min,
                util_avg: d.util_avg,
                util_max: d.util_max,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn farms_to_sites(farms: &[Farm], bus: &dyn Fn(usize) -> String) -> Vec<SiteFile> {
    farms
        .iter()
        .map(|f| SiteFile {
            id: f.id.clone(),
            bus: bus(f.bus),
        })
        .collect()
}

/// Reads scenarios from `profiles.csv` (scenario_id, entity_id, hour, value;
/// hour is 1-based) and `scenarios.csv` (scenario_id, day_type, weight,
/// split), validating against the grid. Scenario order follows the metadata
/// file.
pub fn load_scenarios(
    profiles_path: impl AsRef<Path>,
    scenarios_path: impl AsRef<Path>,
    grid: &Grid,
) -> Result<ScenarioSet, GridError> {
    let index = grid.profile_index();
    let t = grid.horizon;

    #[derive(Deserialize)]
    struct MetaRow {
        scenario_id: String,
        day_type: String,
        weight: f64,
        split: String,
    }

    let mut scenarios = Vec::new();
    let mut order: BTreeMap<String, usize> = BTreeMap::new();
    let mut train = Vec::new();
    let mut eval = Vec::new();
    let mut reader = csv::Reader::from_path(scenarios_path.as_ref())?;
    for row in reader.deserialize() {
        let row: MetaRow = row?;
        let i = scenarios.len();
        if order.insert(row.scenario_id.clone(), i).is_some() {
            return Err(GridError::DuplicateScenario(row.scenario_id));
        }
        match row.split.as_str() {
            "train" => train.push(i),
            "eval" => eval.push(i),
            other => {
                return Err(GridError::Parse(format!(
                    "scenario '{}': split must be train or eval, got '{other}'",
                    row.scenario_id
                )))
            }
        }
        scenarios.push(DayScenario {
            id: row.scenario_id,
            day_type: row.day_type.parse()?,
            weight: row.weight,
            demand: vec![vec![0.0; t]; grid.nd_loads.len()],
            import_avail: vec![vec![0.0; t]; grid.imports.len()],
            wind: vec![vec![0.0; t]; grid.wind_farms.len()],
            solar: vec![vec![0.0; t]; grid.solar_farms.len()],
            other: vec![vec![0.0; t]; grid.other_renewables.len()],
        });
    }

    #[derive(Deserialize)]
    struct ProfileRow {
        scenario_id: String,
        entity_id: String,
        hour: usize,
        value: f64,
    }

    // Track coverage so missing profiles are reported by name.
    let mut covered: Vec<std::collections::BTreeSet<String>> =
        vec![Default::default(); scenarios.len()];
    let mut reader = csv::Reader::from_path(profiles_path.as_ref())?;
    for row in reader.deserialize() {
        let row: ProfileRow = row?;
        let Some(&si) = order.get(&row.scenario_id) else {
            return Err(GridError::Parse(format!(
                "profiles reference scenario '{}' absent from scenarios.csv",
                row.scenario_id
            )));
        };
        let Some(&(class, ei)) = index.get(row.entity_id.as_str()) else {
            return Err(GridError::UnknownEntity {
                scenario: row.scenario_id,
                entity: row.entity_id,
            });
        };
        if row.hour == 0 || row.hour > t {
            return Err(GridError::Parse(format!(
                "scenario '{}', entity '{}': hour {} outside 1..={t}",
                row.scenario_id, row.entity_id, row.hour
            )));
        }
        let s = &mut scenarios[si];
        let table = match class {
            ProfileClass::Demand => &mut s.demand,
            ProfileClass::Import => &mut s.import_avail,
            ProfileClass::Wind => &mut s.wind,
            ProfileClass::Solar => &mut s.solar,
            ProfileClass::Other => &mut s.other,
        };
        table[ei][row.hour - 1] = row.value;
        covered[si].insert(row.entity_id);
    }

    for (si, s) in scenarios.iter().enumerate() {
        for id in index.keys() {
            if !covered[si].contains(*id) {
                return Err(GridError::MissingProfile {
                    scenario: s.id.clone(),
                    entity: (*id).to_string(),
                });
            }
        }
    }

    let set = ScenarioSet {
        scenarios,
        train,
        eval,
    };
    set.validate(grid)?;
    Ok(set)
}

/// Writes `profiles.csv` and `scenarios.csv` for the set. Rows are ordered
/// by scenario, then entity class, then entity, then hour.
pub fn save_scenarios(
    set: &ScenarioSet,
    grid: &Grid,
    profiles_path: impl AsRef<Path>,
    scenarios_path: impl AsRef<Path>,
) -> Result<(), GridError> {
    set.validate(grid)?;
    let mut meta = csv::Writer::from_path(scenarios_path.as_ref())?;
    meta.write_record(["scenario_id", "day_type", "weight", "split"])?;
    for (i, s) in set.scenarios.iter().enumerate() {
        let split = if set.train.contains(&i) { "train" } else { "eval" };
        meta.write_record([
            s.id.as_str(),
            &s.day_type.to_string(),
            &s.weight.to_string(),
            split,
        ])?;
    }
    meta.flush()?;

    let mut w = csv::Writer::from_path(profiles_path.as_ref())?;
    w.write_record(["scenario_id", "entity_id", "hour", "value"])?;
    for s in &set.scenarios {
        let ids = |farms: &'_ [Farm]| -> Vec<String> {
            farms.iter().map(|f| f.id.clone()).collect()
        };
        let tables: [(&[Vec<f64>], Vec<String>); 5] = [
            (
                &s.demand,
                grid.nd_loads.iter().map(|e| e.id.clone()).collect(),
            ),
            (
                &s.import_avail,
                grid.imports.iter().map(|e| e.id.clone()).collect(),
            ),
            (&s.wind, ids(&grid.wind_farms)),
            (&s.solar, ids(&grid.solar_farms)),
            (&s.other, ids(&grid.other_renewables)),
        ];
        for (table, entity_ids) in tables {
            for (ei, series) in table.iter().enumerate() {
                for (t, v) in series.iter().enumerate() {
                    w.write_record([
                        s.id.as_str(),
                        entity_ids[ei].as_str(),
                        &(t + 1).to_string(),
                        &v.to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}
