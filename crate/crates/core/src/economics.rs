//! Scoring a simulated day in dollars and kilograms: datacenter power cost
//! at nodal prices, two ways of attributing grid carbon to sites, battery
//! total cost of ownership, benefit–cost ratios, and the cost of buying the
//! same decarbonization with added renewable capacity instead.
//!
//! Carbon attribution comes in two flavors. The *mix* view charges each site
//! the hourly average carbon intensity times its draw, before and after
//! reshaping — intuitive, but sites share credit for changes they did not
//! cause. The *usage* view takes the day's total emissions change between
//! the steady and reshaped dispatches and splits it in proportion to each
//! site's decoupling energy (deficit plus surplus), so only sites that moved
//! get credit; it conserves the total by construction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dcopf::{
    average_carbon_intensity, fixed_dc_loads, grid_carbon, solve_dispatch, DcopfError,
    EmissionRates,
};
use crate::decoupling::decoupling_profile;
use crate::grid::{DayScenario, Grid, weighted_mean};
use crate::lp::SolveLp;
use crate::management::DayOutcome;

#[derive(Debug, Error)]
pub enum EconomicsError {
    #[error("battery: {0}")]
    BadBattery(String),
    #[error("cost of ownership is zero; the ratio is undefined")]
    ZeroTco,
    #[error("outcomes describe different days ('{0}' vs '{1}')")]
    ScenarioMismatch(String, String),
    #[error(
        "target reduction {target_kg} kg/day unreachable: {best_kg} kg/day short even at {max_scale}x renewables"
    )]
    Unachievable {
        target_kg: f64,
        best_kg: f64,
        max_scale: f64,
    },
    #[error("bisection stalled between scales {lo} and {hi} after {iters} iterations")]
    NonConvergent { lo: f64, hi: f64, iters: usize },
    #[error("config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Dcopf(#[from] DcopfError),
}

/// Energy bill for one draw series at its bus's hourly prices.
///
/// Both series must cover the same hours.
pub fn dc_power_cost(load: &[f64], lmp: &[f64]) -> f64 {
    assert_eq!(
        load.len(),
        lmp.len(),
        "load spans {} hours but prices span {}",
        load.len(),
        lmp.len()
    );
    load.iter().zip(lmp).map(|(l, p)| l * p).sum()
}

/// Per-site carbon under the mix view: intensity-times-draw before and
/// after reshaping, and the difference.
#[derive(Debug, Clone, PartialEq)]
pub struct MixCarbon {
    /// kg attributed to each site in the steady-draw dispatch.
    pub fixed_kg: Vec<f64>,
    /// kg attributed to each site in the reshaped dispatch.
    pub flex_kg: Vec<f64>,
    /// `fixed - flex` per site; positive is a reduction.
    pub reduction_kg: Vec<f64>,
}

fn check_same_day(fixed: &DayOutcome, flex: &DayOutcome) -> Result<(), EconomicsError> {
    if fixed.scenario_id != flex.scenario_id {
        return Err(EconomicsError::ScenarioMismatch(
            fixed.scenario_id.clone(),
            flex.scenario_id.clone(),
        ));
    }
    Ok(())
}

/// Attributes carbon by the hourly grid mix: each site is charged the
/// average carbon intensity times its draw, separately under the steady and
/// reshaped dispatches.
pub fn allocate_carbon_gm(
    grid: &Grid,
    fixed: &DayOutcome,
    flex: &DayOutcome,
    rates: &EmissionRates,
) -> Result<MixCarbon, EconomicsError> {
    check_same_day(fixed, flex)?;
    let charge = |outcome: &DayOutcome| -> Vec<f64> {
        let aci = average_carbon_intensity(grid, &outcome.dispatch, rates);
        outcome
            .dc_load
            .iter()
            .map(|series| dc_power_cost(series, &aci))
            .collect()
    };
    let fixed_kg = charge(fixed);
    let flex_kg = charge(flex);
    let reduction_kg = fixed_kg
        .iter()
        .zip(&flex_kg)
        .map(|(a, b)| a - b)
        .collect();
    Ok(MixCarbon {
        fixed_kg,
        flex_kg,
        reduction_kg,
    })
}

/// Usage-proportional split of the day's emissions change.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageCarbon {
    /// kg of the total change allocated to each site; positive is a
    /// reduction. Sums exactly to `delta_kg`.
    pub reduction_kg: Vec<f64>,
    /// Total emissions change, steady minus reshaped (kg).
    pub delta_kg: f64,
    /// True when a material change had to be split equally because no site
    /// used any decoupling energy; callers should surface a warning. Sub-ppm
    /// changes (solver noise on pinned draws) stay silent.
    pub degenerate_split: bool,
}

/// Splits the emissions change between the steady and reshaped dispatches
/// across sites in proportion to their decoupling energy (deficit plus
/// surplus). With a nonzero change but no decoupling energy anywhere the
/// split falls back to equal shares and says so.
pub fn allocate_carbon_act(
    grid: &Grid,
    fixed: &DayOutcome,
    flex: &DayOutcome,
    rates: &EmissionRates,
) -> Result<UsageCarbon, EconomicsError> {
    check_same_day(fixed, flex)?;
    let fixed_total = grid_carbon(grid, &fixed.dispatch, rates);
    let delta_kg = fixed_total - grid_carbon(grid, &flex.dispatch, rates);
    let usage: Vec<f64> = grid
        .datacenters
        .iter()
        .zip(&flex.dc_load)
        .map(|(dc, series)| {
            let p = decoupling_profile(series, dc.power_avg());
            p.deficit + p.surplus
        })
        .collect();
    let total: f64 = usage.iter().sum();
    let n = grid.datacenters.len();
    let degenerate = total <= 1e-9 && n > 0;
    let mut reduction_kg: Vec<f64> = if degenerate {
        vec![delta_kg / n as f64; n]
    } else {
        usage.iter().map(|u| delta_kg * u / total).collect()
    };
    if n > 0 {
        // Absorb rounding so the shares sum back to the exact total.
        let head: f64 = reduction_kg[..n - 1].iter().sum();
        reduction_kg[n - 1] = delta_kg - head;
    }
    let material = delta_kg.abs() > 1e-6 * fixed_total.abs().max(1.0);
    Ok(UsageCarbon {
        reduction_kg,
        delta_kg,
        degenerate_split: degenerate && material,
    })
}

/// A battery installation sized for one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec {
    pub power_max_mw: f64,
    pub energy_cap_mwh: f64,
    /// Usable fraction of the energy capacity per cycle.
    pub depth_of_discharge: f64,
    pub round_trip_efficiency: f64,
    /// $ per MW of power conversion hardware.
    pub unit_capex_pc: f64,
    /// $ per MWh of storage.
    pub unit_capex_ec: f64,
    pub depreciation_years: f64,
}

impl BatterySpec {
    /// Hours of storage at full power.
    pub fn duration_h(&self) -> f64 {
        self.energy_cap_mwh / self.power_max_mw
    }

    pub fn validate(&self) -> Result<(), EconomicsError> {
        let bad = |msg: String| Err(EconomicsError::BadBattery(msg));
        if !(self.power_max_mw > 0.0 && self.power_max_mw.is_finite()) {
            return bad(format!("power must be positive, got {} MW", self.power_max_mw));
        }
        if !(self.energy_cap_mwh > 0.0 && self.energy_cap_mwh.is_finite()) {
            return bad(format!(
                "energy capacity must be positive, got {} MWh",
                self.energy_cap_mwh
            ));
        }
        if !(self.depth_of_discharge > 0.0 && self.depth_of_discharge <= 1.0) {
            return bad(format!(
                "depth of discharge must be in (0, 1], got {}",
                self.depth_of_discharge
            ));
        }
        if !(self.round_trip_efficiency > 0.0 && self.round_trip_efficiency <= 1.0) {
            return bad(format!(
                "round-trip efficiency must be in (0, 1], got {}",
                self.round_trip_efficiency
            ));
        }
        if !(self.depreciation_years > 0.0 && self.depreciation_years.is_finite()) {
            return bad(format!(
                "depreciation period must be positive, got {} years",
                self.depreciation_years
            ));
        }
        Ok(())
    }
}

/// Yearly cost of owning and running a battery: straight-line depreciation
/// of the hardware, maintenance at 1.5% of system capex plus 1% per daily
/// cycle, and the cost of round-trip losses.
pub fn bes_tco(
    spec: &BatterySpec,
    cycles_per_day: f64,
    loss_cost_per_year: f64,
) -> Result<f64, EconomicsError> {
    spec.validate()?;
    if !(cycles_per_day >= 0.0 && cycles_per_day.is_finite()) {
        return Err(EconomicsError::BadBattery(format!(
            "cycle count must be nonnegative, got {cycles_per_day}"
        )));
    }
    let capex = spec.power_max_mw * spec.unit_capex_pc + spec.energy_cap_mwh * spec.unit_capex_ec;
    let unit_capex_sys = spec.unit_capex_pc + spec.unit_capex_ec * spec.duration_h();
    let depreciation = capex / spec.depreciation_years;
    let maintenance = spec.power_max_mw * unit_capex_sys * (0.01 * cycles_per_day + 0.015);
    Ok(depreciation + maintenance + loss_cost_per_year)
}

/// Average cycles per day: mean daily discharged energy over the usable
/// capacity (energy capacity times depth of discharge).
pub fn cycle_count(daily_discharge_mwh: &[f64], spec: &BatterySpec) -> Result<f64, EconomicsError> {
    spec.validate()?;
    if daily_discharge_mwh.is_empty() {
        return Ok(0.0);
    }
    let mean = daily_discharge_mwh.iter().sum::<f64>() / daily_discharge_mwh.len() as f64;
    Ok(mean / (spec.energy_cap_mwh * spec.depth_of_discharge))
}

/// Yearly cost of round-trip losses: the extra energy drawn to deliver each
/// discharged MWh, priced at a representative rate.
pub fn annual_loss_cost(
    mean_daily_discharge_mwh: f64,
    spec: &BatterySpec,
    mean_price_per_mwh: f64,
) -> Result<f64, EconomicsError> {
    spec.validate()?;
    let loss = mean_daily_discharge_mwh * (1.0 / spec.round_trip_efficiency - 1.0);
    Ok(loss * 365.0 * mean_price_per_mwh)
}

/// Benefit–cost ratio of a site's decoupling: yearly power-cost savings
/// plus the value of its carbon reduction, over the battery's yearly cost.
pub fn benefit_cost(
    annual_savings: f64,
    annual_carbon_reduction_kg: f64,
    carbon_price_per_tonne: f64,
    tco_per_year: f64,
) -> Result<f64, EconomicsError> {
    if tco_per_year == 0.0 {
        return Err(EconomicsError::ZeroTco);
    }
    Ok((annual_savings + annual_carbon_reduction_kg / 1000.0 * carbon_price_per_tonne) / tco_per_year)
}

/// Everything the scoring layer needs from a config file; defaults cover
/// every field, so an empty document is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EconomicsConfig {
    /// $ per metric ton of CO2.
    pub carbon_price_per_tonne: f64,
    /// Levelized cost of added wind energy, $/MWh.
    pub lcoe_wind: f64,
    /// Levelized cost of added solar energy, $/MWh.
    pub lcoe_solar: f64,
    pub rates: EmissionRates,
    pub battery: BatteryCosts,
}

/// Cost constants shared by every battery installation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryCosts {
    pub unit_capex_pc_per_mw: f64,
    pub unit_capex_ec_per_mwh: f64,
    pub depreciation_years: f64,
    pub depth_of_discharge: f64,
    pub round_trip_efficiency: f64,
}

impl Default for BatteryCosts {
    fn default() -> Self {
        Self {
            unit_capex_pc_per_mw: 0.36e6,
            unit_capex_ec_per_mwh: 0.39e6,
            depreciation_years: 15.0,
            depth_of_discharge: 0.8,
            round_trip_efficiency: 0.85,
        }
    }
}

impl Default for EconomicsConfig {
    fn default() -> Self {
        Self {
            carbon_price_per_tonne: 280.0,
            lcoe_wind: 50.0,
            lcoe_solar: 60.0,
            rates: EmissionRates::default(),
            battery: BatteryCosts::default(),
        }
    }
}

impl EconomicsConfig {
    pub fn from_toml(text: &str) -> Result<Self, EconomicsError> {
        toml::from_str(text).map_err(|e| EconomicsError::BadConfig(e.to_string()))
    }

    /// Battery sized to a site's deficit allocation: power covers the
    /// deepest hourly draw reduction, energy holds the daily deficit at the
    /// configured depth of discharge.
    pub fn battery_for(&self, power_deficit_mw: f64, energy_cap_mwh: f64) -> BatterySpec {
        BatterySpec {
            power_max_mw: power_deficit_mw,
            energy_cap_mwh: energy_cap_mwh / self.battery.depth_of_discharge,
            depth_of_discharge: self.battery.depth_of_discharge,
            round_trip_efficiency: self.battery.round_trip_efficiency,
            unit_capex_pc: self.battery.unit_capex_pc_per_mw,
            unit_capex_ec: self.battery.unit_capex_ec_per_mwh,
            depreciation_years: self.battery.depreciation_years,
        }
    }
}

/// What buying the same decarbonization with more renewables would cost.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewableEquivalent {
    /// Scaling applied to every wind and solar availability profile.
    pub scale: f64,
    /// Weighted mean daily reduction achieved at that scale, kg.
    pub reduction_kg: f64,
    /// Yearly levelized cost of the added renewable energy, $.
    pub annual_cost: f64,
}

/// Weighted mean daily emissions with wind and solar availability scaled.
fn carbon_at_scale(
    grid: &Grid,
    days: &[DayScenario],
    scale: f64,
    rates: &EmissionRates,
    solver: &dyn SolveLp,
) -> Result<f64, EconomicsError> {
    let loads = fixed_dc_loads(grid);
    let mut scored = Vec::with_capacity(days.len());
    for day in days {
        let mut scaled = day.clone();
        for series in scaled.wind.iter_mut().chain(scaled.solar.iter_mut()) {
            for v in series.iter_mut() {
                *v *= scale;
            }
        }
        let result = solve_dispatch(grid, &scaled, &loads, solver)?;
        scored.push(grid_carbon(grid, &result, rates));
    }
    let mut kg = scored.into_iter();
    Ok(weighted_mean(days, move |_| kg.next().unwrap()))
}

/// Finds, by bisection on a common scaling of wind and solar availability,
/// the added renewable energy that cuts the steady-draw fleet's weighted
/// daily emissions by `target_reduction_kg`, and prices the added energy at
/// the configured levelized costs, annualized over 365 days. Scaling is
/// searched in `[1, 10]`; a target beyond what 10x achieves is reported as
/// unreachable (curtailment eventually absorbs everything).
pub fn renewable_equivalent_cost(
    grid: &Grid,
    days: &[DayScenario],
    target_reduction_kg: f64,
    cfg: &EconomicsConfig,
    solver: &dyn SolveLp,
) -> Result<RenewableEquivalent, EconomicsError> {
    const MAX_SCALE: f64 = 10.0;
    const MAX_ITERS: usize = 100;
    if !(target_reduction_kg >= 0.0) {
        return Err(EconomicsError::BadConfig(format!(
            "target reduction must be nonnegative, got {target_reduction_kg}"
        )));
    }
    let added_cost = |scale: f64| -> f64 {
        let daily = weighted_mean(days.iter(), |d| {
            let wind: f64 = d.wind.iter().flatten().sum();
            let solar: f64 = d.solar.iter().flatten().sum();
            (scale - 1.0) * (wind * cfg.lcoe_wind + solar * cfg.lcoe_solar)
        });
        daily * 365.0
    };
    let base = carbon_at_scale(grid, days, 1.0, &cfg.rates, solver)?;
    if target_reduction_kg == 0.0 {
        return Ok(RenewableEquivalent {
            scale: 1.0,
            reduction_kg: 0.0,
            annual_cost: 0.0,
        });
    }
    let best = base - carbon_at_scale(grid, days, MAX_SCALE, &cfg.rates, solver)?;
    if best < target_reduction_kg {
        return Err(EconomicsError::Unachievable {
            target_kg: target_reduction_kg,
            best_kg: best,
            max_scale: MAX_SCALE,
        });
    }
    let (mut lo, mut hi) = (1.0_f64, MAX_SCALE);
    for _ in 0..MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let reduction = base - carbon_at_scale(grid, days, mid, &cfg.rates, solver)?;
        if (reduction - target_reduction_kg).abs() <= 1e-6 * (1.0 + target_reduction_kg)
            || hi - lo <= 1e-9 * hi
        {
            return Ok(RenewableEquivalent {
                scale: mid,
                reduction_kg: reduction,
                annual_cost: added_cost(mid),
            });
        }
        if reduction < target_reduction_kg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(EconomicsError::NonConvergent {
        lo,
        hi,
        iters: MAX_ITERS,
    })
}
