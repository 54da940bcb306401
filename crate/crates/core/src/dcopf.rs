//! DC optimal power flow over one day.
//!
//! The dispatch LP minimizes generation cost plus penalty prices for unserved
//! load and spilled availability, subject to nodal balance, linearized line
//! flows (`flow = B * (theta_from - theta_to)`), line and angle limits,
//! generator capacity and hour-to-hour ramps. Shedding and curtailment
//! variables make the model feasible for any input, so a solve only fails on
//! malformed input or solver breakdown. Hour-1 generator output is
//! unconstrained by ramps (no overnight initial condition is configured).
//!
//! Nodal prices fall out as the sensitivity duals of the balance rows: a bus
//! forced into shedding prices at the shed penalty, a bus spilling renewable
//! availability prices at minus the curtailment penalty.
//!
//! Bus 0's angle is pinned to zero as the reference; flows and prices do not
//! depend on the choice.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{DayScenario, Fuel, Grid, GridError};
use crate::lp::{ConId, LpError, LpModel, Relation, SolveLp, VarId};

#[derive(Debug, Error)]
pub enum DcopfError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("dc loads: {0}")]
    BadLoads(String),
}

/// kg CO2 per MWh by fuel. Defaults are lifecycle-free grid operating rates:
/// coal 1001, gas 429, everything else zero (imports count as zero unless
/// configured otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmissionRates {
    pub nuclear: f64,
    pub coal: f64,
    pub gas: f64,
    pub wind: f64,
    pub solar: f64,
    pub other: f64,
    pub import: f64,
}

impl Default for EmissionRates {
    fn default() -> Self {
        Self {
            nuclear: 0.0,
            coal: 1001.0,
            gas: 429.0,
            wind: 0.0,
            solar: 0.0,
            other: 0.0,
            import: 0.0,
        }
    }
}

impl EmissionRates {
    pub fn rate(&self, fuel: Fuel) -> f64 {
        match fuel {
            Fuel::Nuclear => self.nuclear,
            Fuel::Coal => self.coal,
            Fuel::Gas => self.gas,
            Fuel::Wind => self.wind,
            Fuel::Solar => self.solar,
            Fuel::Other => self.other,
            Fuel::Import => self.import,
        }
    }
}

/// How datacenter load enters the model.
pub enum DcLoadMode<'a> {
    /// Known MW per `[datacenter][hour]`.
    Fixed(&'a [Vec<f64>]),
    /// Decision variables bounded by each site's utilization band.
    Variable,
}

/// Handles into a dispatch block appended to some model: variable ids per
/// entity and hour, and the balance rows whose duals are the nodal prices.
pub struct DispatchHandles {
    pub gen: Vec<Vec<VarId>>,
    pub flow: Vec<Vec<VarId>>,
    pub theta: Vec<Vec<VarId>>,
    pub shed_nd: Vec<Vec<VarId>>,
    pub shed_dc: Vec<Vec<VarId>>,
    pub cur_import: Vec<Vec<VarId>>,
    pub cur_wind: Vec<Vec<VarId>>,
    pub cur_solar: Vec<Vec<VarId>>,
    pub cur_other: Vec<Vec<VarId>>,
    pub dc_load: DcLoadHandles,
    /// `[bus][hour]` balance rows.
    pub balance: Vec<Vec<ConId>>,
}

pub enum DcLoadHandles {
    Fixed(Vec<Vec<f64>>),
    Variable(Vec<Vec<VarId>>),
}

impl DispatchHandles {
    /// Load variable ids; panics if the block was built with fixed loads.
    pub fn load_vars(&self) -> &[Vec<VarId>] {
        match &self.dc_load {
            DcLoadHandles::Variable(v) => v,
            DcLoadHandles::Fixed(_) => unreachable!("dispatch block has fixed dc loads"),
        }
    }
}

fn check_loads(grid: &Grid, dc_loads: &[Vec<f64>]) -> Result<(), DcopfError> {
    if dc_loads.len() != grid.datacenters.len() {
        return Err(DcopfError::BadLoads(format!(
            "{} load series for {} datacenters",
            dc_loads.len(),
            grid.datacenters.len()
        )));
    }
    for (dc, series) in grid.datacenters.iter().zip(dc_loads) {
        if series.len() != grid.horizon {
            return Err(DcopfError::BadLoads(format!(
                "'{}' has {} hours, expected {}",
                dc.id,
                series.len(),
                grid.horizon
            )));
        }
        if let Some(t) = series.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(DcopfError::BadLoads(format!(
                "'{}' hour {} is negative or non-finite",
                dc.id,
                t + 1
            )));
        }
    }
    Ok(())
}

/// Steady baseline: every datacenter at its average draw all day.
pub fn fixed_dc_loads(grid: &Grid) -> Vec<Vec<f64>> {
    grid.datacenters
        .iter()
        .map(|d| vec![d.power_avg(); grid.horizon])
        .collect()
}

/// Appends one day's dispatch block to `model`. `tag` prefixes row and
/// variable names (multi-day models pass "d3." style tags), `cost_weight`
/// scales this day's objective contribution.
pub(crate) fn append_dispatch(
    model: &mut LpModel,
    grid: &Grid,
    scenario: &DayScenario,
    mode: DcLoadMode,
    tag: &str,
    cost_weight: f64,
) -> Result<DispatchHandles, DcopfError> {
    scenario.validate(grid)?;
    let t_len = grid.horizon;
    let hours = 0..t_len;
    let pen = &grid.penalties;

    let gen: Vec<Vec<VarId>> = grid
        .generators
        .iter()
        .map(|g| {
            hours
                .clone()
                .map(|t| {
                    model.add_var(
                        format!("{tag}gen[{},{}]", g.id, t + 1),
                        0.0,
                        g.p_max,
                        cost_weight * g.cost,
                    )
                })
                .collect()
        })
        .collect();
    let flow: Vec<Vec<VarId>> = grid
        .lines
        .iter()
        .map(|l| {
            hours
                .clone()
                .map(|t| {
                    model.add_var(
                        format!("{tag}flow[{},{}]", l.id, t + 1),
                        -l.flow_max,
                        l.flow_max,
                        0.0,
                    )
                })
                .collect()
        })
        .collect();
    let theta: Vec<Vec<VarId>> = grid
        .buses
        .iter()
        .enumerate()
        .map(|(b, bus)| {
            hours
                .clone()
                .map(|t| {
                    let (lo, hi) = if b == 0 {
                        (0.0, 0.0)
                    } else {
                        (grid.theta_min, grid.theta_max)
                    };
                    model.add_var(format!("{tag}theta[{},{}]", bus.id, t + 1), lo, hi, 0.0)
                })
                .collect()
        })
        .collect();
    let shed_nd: Vec<Vec<VarId>> = grid
        .nd_loads
        .iter()
        .enumerate()
        .map(|(i, d)| {
            hours
                .clone()
                .map(|t| {
                    model.add_var(
                        format!("{tag}shed[{},{}]", d.id, t + 1),
                        0.0,
                        scenario.demand[i][t],
                        cost_weight * pen.nd_shed,
                    )
                })
                .collect()
        })
        .collect();
    let curtail = |model: &mut LpModel,
                   ids: Vec<(String, &Vec<f64>)>,
                   penalty: f64|
     -> Vec<Vec<VarId>> {
        ids.into_iter()
            .map(|(id, avail)| {
                hours
                    .clone()
                    .map(|t| {
                        model.add_var(
                            format!("{tag}curtail[{},{}]", id, t + 1),
                            0.0,
                            avail[t],
                            cost_weight * penalty,
                        )
                    })
                    .collect()
            })
            .collect()
    };
    let cur_import = curtail(
        model,
        grid.imports
            .iter()
            .zip(&scenario.import_avail)
            .map(|(e, a)| (e.id.clone(), a))
            .collect(),
        pen.import_curtail,
    );
    let cur_wind = curtail(
        model,
        grid.wind_farms
            .iter()
            .zip(&scenario.wind)
            .map(|(e, a)| (e.id.clone(), a))
            .collect(),
        pen.wind_curtail,
    );
    let cur_solar = curtail(
        model,
        grid.solar_farms
            .iter()
            .zip(&scenario.solar)
            .map(|(e, a)| (e.id.clone(), a))
            .collect(),
        pen.solar_curtail,
    );
    let cur_other = curtail(
        model,
        grid.other_renewables
            .iter()
            .zip(&scenario.other)
            .map(|(e, a)| (e.id.clone(), a))
            .collect(),
        pen.other_curtail,
    );

    let (dc_load, load_upper): (DcLoadHandles, Vec<Vec<Option<VarId>>>) = match mode {
        DcLoadMode::Fixed(loads) => {
            check_loads(grid, loads)?;
            (
                DcLoadHandles::Fixed(loads.to_vec()),
                vec![vec![None; t_len]; grid.datacenters.len()],
            )
        }
        DcLoadMode::Variable => {
            let vars: Vec<Vec<VarId>> = grid
                .datacenters
                .iter()
                .map(|d| {
                    hours
                        .clone()
                        .map(|t| {
                            model.add_var(
                                format!("{tag}dcload[{},{}]", d.id, t + 1),
                                d.power_min(),
                                d.power_cap(),
                                0.0,
                            )
                        })
                        .collect()
                })
                .collect();
            let uppers = vars.iter().map(|row| row.iter().map(|&v| Some(v)).collect()).collect();
            (DcLoadHandles::Variable(vars), uppers)
        }
    };
    let shed_dc: Vec<Vec<VarId>> = grid
        .datacenters
        .iter()
        .enumerate()
        .map(|(k, d)| {
            hours
                .clone()
                .map(|t| {
                    let hi = match &dc_load {
                        DcLoadHandles::Fixed(loads) => loads[k][t],
                        DcLoadHandles::Variable(_) => f64::INFINITY,
                    };
                    model.add_var(
                        format!("{tag}shed[{},{}]", d.id, t + 1),
                        0.0,
                        hi,
                        cost_weight * pen.dc_shed,
                    )
                })
                .collect()
        })
        .collect();
    // With variable loads the shed ceiling is the load itself.
    for (k, d) in grid.datacenters.iter().enumerate() {
        for t in 0..t_len {
            if let Some(load_var) = load_upper[k][t] {
                model.add_con(
                    format!("{tag}shedcap[{},{}]", d.id, t + 1),
                    [(shed_dc[k][t], 1.0), (load_var, -1.0)],
                    Relation::Le,
                    0.0,
                );
            }
        }
    }

    // flow = susceptance * (theta_from - theta_to)
    for (l, line) in grid.lines.iter().enumerate() {
        for t in 0..t_len {
            model.add_con(
                format!("{tag}flowdef[{},{}]", line.id, t + 1),
                [
                    (flow[l][t], 1.0),
                    (theta[line.from][t], -line.susceptance),
                    (theta[line.to][t], line.susceptance),
                ],
                Relation::Eq,
                0.0,
            );
        }
    }

    // Ramp rows only where the limit can bind.
    for (g, gn) in grid.generators.iter().enumerate() {
        for t in 1..t_len {
            if gn.ramp_up < gn.p_max {
                model.add_con(
                    format!("{tag}rampup[{},{}]", gn.id, t + 1),
                    [(gen[g][t], 1.0), (gen[g][t - 1], -1.0)],
                    Relation::Le,
                    gn.ramp_up,
                );
            }
            if gn.ramp_down < gn.p_max {
                model.add_con(
                    format!("{tag}rampdown[{},{}]", gn.id, t + 1),
                    [(gen[g][t], -1.0), (gen[g][t - 1], 1.0)],
                    Relation::Le,
                    gn.ramp_down,
                );
            }
        }
    }

    // Nodal balance. Variables on the left, scenario constants on the right:
    // inflow - outflow + generation - curtailments + shedding - variable dc
    // load  =  demand + fixed dc load - availability.
    let mut balance = Vec::with_capacity(grid.buses.len());
    for (b, bus) in grid.buses.iter().enumerate() {
        let mut rows = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let mut terms: Vec<(VarId, f64)> = Vec::new();
            let mut rhs = 0.0;
            for (l, line) in grid.lines.iter().enumerate() {
                if line.to == b {
                    terms.push((flow[l][t], 1.0));
                } else if line.from == b {
                    terms.push((flow[l][t], -1.0));
                }
            }
            for (g, gn) in grid.generators.iter().enumerate() {
                if gn.bus == b {
                    terms.push((gen[g][t], 1.0));
                }
            }
            let mut class = |entities: &[usize], cur: &[Vec<VarId>], avail: &[Vec<f64>]| {
                for (i, &ebus) in entities.iter().enumerate() {
                    if ebus == b {
                        terms.push((cur[i][t], -1.0));
                        rhs -= avail[i][t];
                    }
                }
            };
            class(
                &grid.imports.iter().map(|e| e.bus).collect::<Vec<_>>(),
                &cur_import,
                &scenario.import_avail,
            );
            class(
                &grid.wind_farms.iter().map(|e| e.bus).collect::<Vec<_>>(),
                &cur_wind,
                &scenario.wind,
            );
            class(
                &grid.solar_farms.iter().map(|e| e.bus).collect::<Vec<_>>(),
                &cur_solar,
                &scenario.solar,
            );
            class(
                &grid
                    .other_renewables
                    .iter()
                    .map(|e| e.bus)
                    .collect::<Vec<_>>(),
                &cur_other,
                &scenario.other,
            );
            for (i, d) in grid.nd_loads.iter().enumerate() {
                if d.bus == b {
                    terms.push((shed_nd[i][t], 1.0));
                    rhs += scenario.demand[i][t];
                }
            }
            for (k, d) in grid.datacenters.iter().enumerate() {
                if d.bus == b {
                    terms.push((shed_dc[k][t], 1.0));
                    match &dc_load {
                        DcLoadHandles::Fixed(loads) => rhs += loads[k][t],
                        DcLoadHandles::Variable(vars) => terms.push((vars[k][t], -1.0)),
                    }
                }
            }
            rows.push(model.add_con(
                format!("{tag}balance[{},{}]", bus.id, t + 1),
                terms,
                Relation::Eq,
                rhs,
            ));
        }
        balance.push(rows);
    }

    Ok(DispatchHandles {
        gen,
        flow,
        theta,
        shed_nd,
        shed_dc,
        cur_import,
        cur_wind,
        cur_solar,
        cur_other,
        dc_load,
        balance,
    })
}

/// Builds the one-day dispatch LP for known datacenter loads.
pub fn formulate_dcopf(
    grid: &Grid,
    scenario: &DayScenario,
    dc_loads: &[Vec<f64>],
) -> Result<(LpModel, DispatchHandles), DcopfError> {
    grid.validate()?;
    let mut model = LpModel::new();
    let handles = append_dispatch(
        &mut model,
        grid,
        scenario,
        DcLoadMode::Fixed(dc_loads),
        "",
        1.0,
    )?;
    Ok((model, handles))
}

/// Full dispatch for one day: hourly setpoints, flows, prices, and cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchResult {
    pub dispatch_cost: f64,
    /// `[generator][hour]` MW.
    pub gen: Vec<Vec<f64>>,
    /// `[line][hour]` MW, positive from -> to.
    pub flow: Vec<Vec<f64>>,
    /// `[bus][hour]` radians.
    pub theta: Vec<Vec<f64>>,
    /// `[bus][hour]` $/MWh nodal price.
    pub lmp: Vec<Vec<f64>>,
    /// `[nd_load][hour]` MW unserved.
    pub shed_nd: Vec<Vec<f64>>,
    /// `[datacenter][hour]` MW unserved.
    pub shed_dc: Vec<Vec<f64>>,
    pub cur_import: Vec<Vec<f64>>,
    pub cur_wind: Vec<Vec<f64>>,
    pub cur_solar: Vec<Vec<f64>>,
    pub cur_other: Vec<Vec<f64>>,
    pub served_import: Vec<Vec<f64>>,
    pub served_wind: Vec<Vec<f64>>,
    pub served_solar: Vec<Vec<f64>>,
    pub served_other: Vec<Vec<f64>>,
    /// `[datacenter][hour]` MW drawn from the grid.
    pub dc_load: Vec<Vec<f64>>,
    /// Total served load per hour, MW.
    pub served_load: Vec<f64>,
}

pub(crate) fn extract_dispatch(
    grid: &Grid,
    scenario: &DayScenario,
    handles: &DispatchHandles,
    sol: &crate::lp::LpSolution,
    dispatch_cost: f64,
) -> DispatchResult {
    let t_len = grid.horizon;
    let grab = |vars: &Vec<Vec<VarId>>| -> Vec<Vec<f64>> {
        vars.iter()
            .map(|row| row.iter().map(|&v| sol.value(v)).collect())
            .collect()
    };
    let gen = grab(&handles.gen);
    let flow = grab(&handles.flow);
    let theta = grab(&handles.theta);
    let shed_nd = grab(&handles.shed_nd);
    let shed_dc = grab(&handles.shed_dc);
    let cur_import = grab(&handles.cur_import);
    let cur_wind = grab(&handles.cur_wind);
    let cur_solar = grab(&handles.cur_solar);
    let cur_other = grab(&handles.cur_other);
    let dc_load: Vec<Vec<f64>> = match &handles.dc_load {
        DcLoadHandles::Fixed(loads) => loads.clone(),
        DcLoadHandles::Variable(vars) => grab(vars),
    };
    let served = |avail: &[Vec<f64>], cur: &[Vec<f64>]| -> Vec<Vec<f64>> {
        avail
            .iter()
            .zip(cur)
            .map(|(a, c)| a.iter().zip(c).map(|(a, c)| a - c).collect())
            .collect()
    };
    let served_import = served(&scenario.import_avail, &cur_import);
    let served_wind = served(&scenario.wind, &cur_wind);
    let served_solar = served(&scenario.solar, &cur_solar);
    let served_other = served(&scenario.other, &cur_other);
    let lmp: Vec<Vec<f64>> = handles
        .balance
        .iter()
        .map(|rows| rows.iter().map(|&c| sol.dual(c)).collect())
        .collect();
    let served_load: Vec<f64> = (0..t_len)
        .map(|t| {
            let nd: f64 = scenario
                .demand
                .iter()
                .zip(&shed_nd)
                .map(|(d, s)| d[t] - s[t])
                .sum();
            let dc: f64 = dc_load
                .iter()
                .zip(&shed_dc)
                .map(|(l, s)| l[t] - s[t])
                .sum();
            nd + dc
        })
        .collect();
    DispatchResult {
        dispatch_cost,
        gen,
        flow,
        theta,
        lmp,
        shed_nd,
        shed_dc,
        cur_import,
        cur_wind,
        cur_solar,
        cur_other,
        served_import,
        served_wind,
        served_solar,
        served_other,
        dc_load,
        served_load,
    }
}

/// Solves the day at the given datacenter loads and extracts everything.
pub fn solve_dispatch(
    grid: &Grid,
    scenario: &DayScenario,
    dc_loads: &[Vec<f64>],
    solver: &dyn SolveLp,
) -> Result<DispatchResult, DcopfError> {
    let (model, handles) = formulate_dcopf(grid, scenario, dc_loads)?;
    let sol = solver
        .solve(&model)?
        .expect_optimal(&format!("dispatch of scenario '{}'", scenario.id))?;
    Ok(extract_dispatch(
        grid,
        scenario,
        &handles,
        &sol,
        sol.objective(),
    ))
}

impl DispatchResult {
    /// Hourly MWh by fuel: thermal units by their fuel, renewable and import
    /// classes by served availability.
    pub fn gen_by_fuel(&self, grid: &Grid) -> BTreeMap<Fuel, Vec<f64>> {
        let t_len = self.served_load.len();
        let mut out: BTreeMap<Fuel, Vec<f64>> =
            Fuel::ALL.iter().map(|&f| (f, vec![0.0; t_len])).collect();
        for (g, gn) in grid.generators.iter().enumerate() {
            let acc = out.get_mut(&gn.fuel).unwrap();
            for t in 0..t_len {
                acc[t] += self.gen[g][t];
            }
        }
        let mut class = |fuel: Fuel, served: &Vec<Vec<f64>>| {
            let acc = out.get_mut(&fuel).unwrap();
            for row in served {
                for t in 0..t_len {
                    acc[t] += row[t];
                }
            }
        };
        class(Fuel::Import, &self.served_import);
        class(Fuel::Wind, &self.served_wind);
        class(Fuel::Solar, &self.served_solar);
        class(Fuel::Other, &self.served_other);
        out
    }

    /// CSV rows (entity, hour, quantity, value) for every hourly series.
    pub fn write_csv<W: std::io::Write>(&self, grid: &Grid, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["entity", "hour", "quantity", "value"])?;
        let mut dump = |ids: Vec<&str>, quantity: &str, table: &[Vec<f64>]| -> Result<(), csv::Error> {
            for (i, series) in table.iter().enumerate() {
                for (t, v) in series.iter().enumerate() {
                    w.write_record([ids[i], &(t + 1).to_string(), quantity, &v.to_string()])?;
                }
            }
            Ok(())
        };
        let gen_ids: Vec<&str> = grid.generators.iter().map(|g| g.id.as_str()).collect();
        let line_ids: Vec<&str> = grid.lines.iter().map(|l| l.id.as_str()).collect();
        let bus_ids: Vec<&str> = grid.buses.iter().map(|b| b.id.as_str()).collect();
        let nd_ids: Vec<&str> = grid.nd_loads.iter().map(|d| d.id.as_str()).collect();
        let dc_ids: Vec<&str> = grid.datacenters.iter().map(|d| d.id.as_str()).collect();
        let imp_ids: Vec<&str> = grid.imports.iter().map(|e| e.id.as_str()).collect();
        let wind_ids: Vec<&str> = grid.wind_farms.iter().map(|f| f.id.as_str()).collect();
        let solar_ids: Vec<&str> = grid.solar_farms.iter().map(|f| f.id.as_str()).collect();
        let other_ids: Vec<&str> = grid.other_renewables.iter().map(|f| f.id.as_str()).collect();
        dump(gen_ids, "generation_mw", &self.gen)?;
        dump(line_ids, "flow_mw", &self.flow)?;
        dump(bus_ids.clone(), "theta_rad", &self.theta)?;
        dump(bus_ids, "lmp_usd_per_mwh", &self.lmp)?;
        dump(nd_ids, "shed_mw", &self.shed_nd)?;
        dump(dc_ids.clone(), "shed_mw", &self.shed_dc)?;
        dump(dc_ids, "dc_load_mw", &self.dc_load)?;
        dump(imp_ids, "curtailed_mw", &self.cur_import)?;
        dump(wind_ids, "curtailed_mw", &self.cur_wind)?;
        dump(solar_ids, "curtailed_mw", &self.cur_solar)?;
        dump(other_ids, "curtailed_mw", &self.cur_other)?;
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// JSON summary: cost, emissions, and energy totals.
    pub fn summary(&self, grid: &Grid, rates: &EmissionRates) -> serde_json::Value {
        let by_fuel = self.gen_by_fuel(grid);
        let totals: BTreeMap<&str, f64> = by_fuel
            .iter()
            .map(|(f, series)| (f.as_str(), series.iter().sum()))
            .collect();
        serde_json::json!({
            "dispatch_cost_usd": self.dispatch_cost,
            "carbon_kg": grid_carbon(grid, self, rates),
            "served_mwh": self.served_load.iter().sum::<f64>(),
            "shed_mwh": self.shed_nd.iter().flatten().sum::<f64>()
                + self.shed_dc.iter().flatten().sum::<f64>(),
            "curtailed_mwh": self.cur_import.iter().flatten().sum::<f64>()
                + self.cur_wind.iter().flatten().sum::<f64>()
                + self.cur_solar.iter().flatten().sum::<f64>()
                + self.cur_other.iter().flatten().sum::<f64>(),
            "generation_mwh": totals,
        })
    }
}

/// Total operating emissions of the day, kg CO2.
pub fn grid_carbon(grid: &Grid, result: &DispatchResult, rates: &EmissionRates) -> f64 {
    result
        .gen_by_fuel(grid)
        .iter()
        .map(|(&f, series)| rates.rate(f) * series.iter().sum::<f64>())
        .sum()
}

/// Hourly emissions per served MWh, kg/MWh; zero where nothing is served.
pub fn average_carbon_intensity(
    grid: &Grid,
    result: &DispatchResult,
    rates: &EmissionRates,
) -> Vec<f64> {
    let by_fuel = result.gen_by_fuel(grid);
    (0..result.served_load.len())
        .map(|t| {
            let served = result.served_load[t];
            if served <= 1e-9 {
                return 0.0;
            }
            let em: f64 = by_fuel
                .iter()
                .map(|(&f, series)| rates.rate(f) * series[t])
                .sum();
            em / served
        })
        .collect()
}
