//! Decoupling energy: how far a datacenter's grid draw may sink below its
//! steady average, and how a system-wide energy budget for that freedom is
//! split across sites.
//!
//! A site that draws less than average for a while banks the difference
//! (its *deficit* energy) and must pay it back within the day: the running
//! sum of (draw - average) stays nonpositive hour by hour and returns to
//! zero by the last hour, so the computing load is untouched while the grid
//! sees a reshaped profile. The daily deficit a site may run is capped by
//! its share of the budget.
//!
//! Two splitting rules are provided: static shares (equal, or proportional
//! to average load) and an optimized split that picks the caps minimizing
//! weighted dispatch cost across a set of training days, solved as one LP
//! with the caps shared by every day.

use thiserror::Error;

use crate::dcopf::{append_dispatch, DcLoadMode, DcopfError, DispatchHandles};
use crate::grid::{Datacenter, DayScenario, Grid};
use crate::lp::{LpError, LpModel, Relation, SolveLp, VarId};

#[derive(Debug, Error)]
pub enum DecouplingError {
    #[error("grid has no datacenters")]
    NoDatacenters,
    #[error("no days to evaluate")]
    NoDays,
    #[error("budget: {0}")]
    BadBudget(String),
    #[error(transparent)]
    Dcopf(#[from] DcopfError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Hourly deviation of a draw profile from a steady average, with the
/// deficit (energy drawn late) and surplus (energy drawn early) totals.
#[derive(Debug, Clone, PartialEq)]
pub struct DecouplingProfile {
    /// `load[t] - avg` per hour, MW.
    pub hourly: Vec<f64>,
    /// Total energy below average, MWh.
    pub deficit: f64,
    /// Total energy above average, MWh.
    pub surplus: f64,
    /// `surplus - deficit`, MWh; zero when the day balances.
    pub net: f64,
}

pub fn decoupling_profile(load: &[f64], avg: f64) -> DecouplingProfile {
    let hourly: Vec<f64> = load.iter().map(|l| l - avg).collect();
    let deficit = hourly.iter().filter(|d| **d < 0.0).map(|d| -d).sum();
    let surplus = hourly.iter().filter(|d| **d > 0.0).sum();
    DecouplingProfile {
        hourly,
        deficit,
        surplus,
        net: surplus - deficit,
    }
}

/// Deepest hourly draw reduction a site can sustain: average draw minus the
/// utilization floor.
pub fn max_power_deficit(dc: &Datacenter) -> f64 {
    dc.power_avg() - dc.power_min()
}

fn check_budget(total: f64) -> Result<(), DecouplingError> {
    if !total.is_finite() || total < 0.0 {
        return Err(DecouplingError::BadBudget(format!(
            "total must be finite and nonnegative, got {total}"
        )));
    }
    Ok(())
}

/// Tops the share list up so the caps sum back to `total` despite rounding.
fn absorb_remainder(mut caps: Vec<f64>, total: f64) -> Vec<f64> {
    let n = caps.len();
    let head: f64 = caps[..n - 1].iter().sum();
    caps[n - 1] = total - head;
    caps
}

/// Equal share of the budget for every site.
pub fn distribute_even(total: f64, grid: &Grid) -> Result<Vec<f64>, DecouplingError> {
    check_budget(total)?;
    let n = grid.datacenters.len();
    if n == 0 {
        return Err(DecouplingError::NoDatacenters);
    }
    Ok(absorb_remainder(vec![total / n as f64; n], total))
}

/// Budget split in proportion to each site's average draw.
pub fn distribute_proportional(total: f64, grid: &Grid) -> Result<Vec<f64>, DecouplingError> {
    check_budget(total)?;
    let n = grid.datacenters.len();
    if n == 0 {
        return Err(DecouplingError::NoDatacenters);
    }
    let base: f64 = grid.datacenters.iter().map(|d| d.power_avg()).sum();
    if base <= 0.0 {
        return Err(DecouplingError::BadBudget(
            "proportional shares undefined: every site averages zero load".into(),
        ));
    }
    let caps = grid
        .datacenters
        .iter()
        .map(|d| total * d.power_avg() / base)
        .collect();
    Ok(absorb_remainder(caps, total))
}

/// How the daily deficit of each site is capped in a flexible-day block.
pub(crate) enum CapsRef<'a> {
    Fixed(&'a [f64]),
    Vars(&'a [VarId]),
    Unbounded,
}

/// Adds the decoupling rules for given `[datacenter][hour]` draw variables:
/// running draw at or below the cumulative average hour by hour, settled
/// exactly by day's end, and daily deficit within the cap. The deficit slack
/// variables stay internal; recompute usage from the draws.
pub(crate) fn append_flex_rows(
    model: &mut LpModel,
    grid: &Grid,
    loads: &[Vec<VarId>],
    caps: &CapsRef,
    tag: &str,
) {
    let t_len = grid.horizon;
    for (k, dc) in grid.datacenters.iter().enumerate() {
        let avg = dc.power_avg();
        for t in 0..t_len {
            let terms: Vec<(VarId, f64)> = (0..=t).map(|tau| (loads[k][tau], 1.0)).collect();
            let rel = if t + 1 == t_len {
                Relation::Eq
            } else {
                Relation::Le
            };
            model.add_con(
                format!("{tag}net[{},{}]", dc.id, t + 1),
                terms,
                rel,
                (t + 1) as f64 * avg,
            );
        }
        let def: Vec<VarId> = (0..t_len)
            .map(|t| {
                model.add_var(
                    format!("{tag}deficit[{},{}]", dc.id, t + 1),
                    0.0,
                    f64::INFINITY,
                    0.0,
                )
            })
            .collect();
        for t in 0..t_len {
            model.add_con(
                format!("{tag}deffloor[{},{}]", dc.id, t + 1),
                [(loads[k][t], 1.0), (def[t], 1.0)],
                Relation::Ge,
                avg,
            );
        }
        let mut terms: Vec<(VarId, f64)> = def.iter().map(|&v| (v, 1.0)).collect();
        match caps {
            CapsRef::Fixed(c) => {
                model.add_con(format!("{tag}cap[{}]", dc.id), terms, Relation::Le, c[k]);
            }
            CapsRef::Vars(c) => {
                terms.push((c[k], -1.0));
                model.add_con(format!("{tag}cap[{}]", dc.id), terms, Relation::Le, 0.0);
            }
            CapsRef::Unbounded => {}
        }
    }
}

/// Appends one day with variable datacenter draws: utilization bounds come
/// from the dispatch block, decoupling rules from [`append_flex_rows`].
pub(crate) fn append_flex_day(
    model: &mut LpModel,
    grid: &Grid,
    day: &DayScenario,
    caps: &CapsRef,
    tag: &str,
    cost_weight: f64,
) -> Result<DispatchHandles, DcopfError> {
    let dispatch = append_dispatch(model, grid, day, DcLoadMode::Variable, tag, cost_weight)?;
    let loads = dispatch.load_vars().to_vec();
    append_flex_rows(model, grid, &loads, caps, tag);
    Ok(dispatch)
}

fn check_world<'a>(
    grid: &Grid,
    days: &'a [DayScenario],
) -> Result<f64, DecouplingError> {
    grid.validate().map_err(DcopfError::from)?;
    if grid.datacenters.is_empty() {
        return Err(DecouplingError::NoDatacenters);
    }
    if days.is_empty() {
        return Err(DecouplingError::NoDays);
    }
    Ok(days.iter().map(|d| d.weight).sum())
}

/// Budget split chosen by optimization, with the weighted dispatch cost the
/// training days achieve under it.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedDistribution {
    pub caps: Vec<f64>,
    pub weighted_cost: f64,
}

/// Picks deficit caps summing to at most `total` that minimize the
/// weight-averaged dispatch cost over `days`, letting every day reshape its
/// datacenter draws under the shared caps.
pub fn distribute_optimized(
    total: f64,
    grid: &Grid,
    days: &[DayScenario],
    solver: &dyn SolveLp,
) -> Result<OptimizedDistribution, DecouplingError> {
    check_budget(total)?;
    let wsum = check_world(grid, days)?;
    let mut model = LpModel::new();
    let caps: Vec<VarId> = grid
        .datacenters
        .iter()
        .map(|d| model.add_var(format!("cap[{}]", d.id), 0.0, total, 0.0))
        .collect();
    model.add_con(
        "budget",
        caps.iter().map(|&c| (c, 1.0)).collect::<Vec<_>>(),
        Relation::Le,
        total,
    );
    for (i, day) in days.iter().enumerate() {
        append_flex_day(
            &mut model,
            grid,
            day,
            &CapsRef::Vars(&caps),
            &format!("d{}.", i + 1),
            day.weight / wsum,
        )?;
    }
    let sol = model
        .validate()
        .and_then(|()| solver.solve(&model))?
        .expect_optimal("budget distribution")
        .map_err(DcopfError::from)?;
    // Snap interior-point dust to zero so a zero budget yields exact zeros.
    let floor = 1e-9 * total.max(1.0);
    Ok(OptimizedDistribution {
        caps: caps
            .iter()
            .map(|&c| {
                let v = sol.value(c);
                if v <= floor {
                    0.0
                } else {
                    v
                }
            })
            .collect(),
        weighted_cost: sol.objective(),
    })
}

/// Weight-averaged dispatch cost over `days` when each site's daily deficit
/// is capped by the given fixed allocation.
pub fn weighted_cost_with_caps(
    caps: &[f64],
    grid: &Grid,
    days: &[DayScenario],
    solver: &dyn SolveLp,
) -> Result<f64, DecouplingError> {
    let wsum = check_world(grid, days)?;
    if caps.len() != grid.datacenters.len() {
        return Err(DecouplingError::BadBudget(format!(
            "{} caps for {} datacenters",
            caps.len(),
            grid.datacenters.len()
        )));
    }
    if let Some(c) = caps.iter().find(|c| !c.is_finite() || **c < 0.0) {
        return Err(DecouplingError::BadBudget(format!(
            "caps must be finite and nonnegative, got {c}"
        )));
    }
    let mut acc = 0.0;
    for day in days {
        let mut model = LpModel::new();
        append_flex_day(&mut model, grid, day, &CapsRef::Fixed(caps), "", 1.0)?;
        let sol = solver
            .solve(&model)?
            .expect_optimal(&format!("capped dispatch of '{}'", day.id))
            .map_err(DcopfError::from)?;
        acc += day.weight / wsum * sol.objective();
    }
    Ok(acc)
}

/// Deficit energy the fleet would use with no budget at all: the worst
/// training day's total deficit when every day reshapes freely. Budgets are
/// quoted as fractions of this.
pub fn unconstrained_need(
    grid: &Grid,
    days: &[DayScenario],
    solver: &dyn SolveLp,
) -> Result<f64, DecouplingError> {
    check_world(grid, days)?;
    let mut worst: f64 = 0.0;
    for day in days {
        let mut model = LpModel::new();
        let fh = append_flex_day(&mut model, grid, day, &CapsRef::Unbounded, "", 1.0)?;
        let sol = solver
            .solve(&model)?
            .expect_optimal(&format!("free dispatch of '{}'", day.id))
            .map_err(DcopfError::from)?;
        let day_total: f64 = grid
            .datacenters
            .iter()
            .enumerate()
            .map(|(k, dc)| {
                let load: Vec<f64> = fh.load_vars()[k]
                    .iter()
                    .map(|&v| sol.value(v))
                    .collect();
                decoupling_profile(&load, dc.power_avg()).deficit
            })
            .sum();
        worst = worst.max(day_total);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{
        Bus, DayKind, DayType, Fuel, Generator, Grid, NdLoad, Penalties, Season, SynthOptions,
    };
    use crate::lp::default_solver;

    #[test]
    fn profile_splits_deficit_and_surplus() {
        let mut load = vec![320.0; 12];
        load.extend(vec![800.0; 12]);
        let p = decoupling_profile(&load, 560.0);
        assert_eq!(p.deficit, 2880.0);
        assert_eq!(p.surplus, 2880.0);
        assert_eq!(p.net, 0.0);
        assert_eq!(p.hourly[0], -240.0);
        assert_eq!(p.hourly[23], 240.0);

        let p = decoupling_profile(&[500.0, 700.0], 560.0);
        assert_eq!(p.deficit, 60.0);
        assert_eq!(p.surplus, 140.0);
        assert_eq!(p.net, 80.0);
    }

    fn dc(id: &str, power_max: f64, util_min: f64, util_avg: f64) -> Datacenter {
        Datacenter {
            id: id.into(),
            bus: 0,
            power_max,
            util_min,
            util_avg,
            util_max: 1.0,
        }
    }

    #[test]
    fn max_power_deficit_uses_the_utilization_floor() {
        assert_eq!(max_power_deficit(&dc("a", 800.0, 0.4, 0.7)), 240.0);
        assert_eq!(max_power_deficit(&dc("b", 800.0, 0.7, 0.7)), 0.0);
        assert_eq!(max_power_deficit(&dc("c", 1000.0, 0.2, 0.7)), 500.0);
    }

    fn world(n_dcs: usize) -> Grid {
        Grid {
            horizon: 2,
            theta_min: -0.6,
            theta_max: 0.6,
            penalties: Penalties::default(),
            buses: vec![Bus { id: "b0".into() }],
            lines: vec![],
            generators: vec![
                Generator {
                    id: "base".into(),
                    bus: 0,
                    fuel: Fuel::Gas,
                    cost: 10.0,
                    p_max: 200.0,
                    ramp_up: 200.0,
                    ramp_down: 200.0,
                },
                Generator {
                    id: "mid".into(),
                    bus: 0,
                    fuel: Fuel::Gas,
                    cost: 50.0,
                    p_max: 100.0,
                    ramp_up: 100.0,
                    ramp_down: 100.0,
                },
                Generator {
                    id: "peak".into(),
                    bus: 0,
                    fuel: Fuel::Gas,
                    cost: 200.0,
                    p_max: 1000.0,
                    ramp_up: 1000.0,
                    ramp_down: 1000.0,
                },
            ],
            imports: vec![],
            wind_farms: vec![],
            solar_farms: vec![],
            other_renewables: vec![],
            nd_loads: vec![NdLoad {
                id: "town".into(),
                bus: 0,
            }],
            datacenters: (0..n_dcs)
                .map(|k| dc(&format!("dc{k}"), 100.0, 0.4, 0.7))
                .collect(),
        }
    }

    fn evening_peak(demand: Vec<Vec<f64>>) -> DayScenario {
        DayScenario {
            id: "day".into(),
            day_type: DayType {
                season: Season::Winter,
                kind: DayKind::Weekday,
            },
            weight: 5.0,
            demand,
            import_avail: vec![],
            wind: vec![],
            solar: vec![],
            other: vec![],
        }
    }

    #[test]
    fn even_split_covers_total_exactly() {
        let mut g = world(3);
        let caps = distribute_even(1000.0, &g).unwrap();
        assert_eq!(caps.len(), 3);
        assert!((caps[0] - 1000.0 / 3.0).abs() < 1e-12);
        let sum: f64 = caps.iter().sum();
        assert!((sum - 1000.0).abs() <= 4.0 * f64::EPSILON * 1000.0);

        g.datacenters.clear();
        assert!(matches!(
            distribute_even(1.0, &g),
            Err(DecouplingError::NoDatacenters)
        ));
        assert!(matches!(
            distribute_even(-1.0, &world(1)),
            Err(DecouplingError::BadBudget(_))
        ));
    }

    #[test]
    fn proportional_split_follows_average_load() {
        let mut g = world(2);
        g.datacenters[0] = dc("small", 100.0, 0.4, 0.7); // avg 70
        g.datacenters[1] = dc("big", 300.0, 0.4, 0.7); // avg 210
        let caps = distribute_proportional(1000.0, &g).unwrap();
        assert!((caps[0] - 250.0).abs() < 1e-9);
        assert!((caps[1] - 750.0).abs() < 1e-9);

        g.datacenters[0].util_avg = 0.0;
        g.datacenters[0].util_min = 0.0;
        g.datacenters[1].util_avg = 0.0;
        g.datacenters[1].util_min = 0.0;
        assert!(matches!(
            distribute_proportional(1.0, &g),
            Err(DecouplingError::BadBudget(_))
        ));
    }

    // The two-hour world has a 260 MW evening-out: demand [260, 40] against
    // two 70 MW-average sites. Each site may sink to 40 MW in hour 1 and
    // repay in hour 2, so a deficit of d shifts d MWh from hour 1 (peaker at
    // 200 $/MWh on the margin) into hour 2 (base at 10, mid at 50 beyond
    // 20 MWh of headroom). Net saving stays positive to the 30 MWh per-site
    // physical limit.

    #[test]
    fn optimized_split_matches_hand_optimum() {
        let g = world(2);
        let day = evening_peak(vec![vec![260.0, 40.0]]);
        let r = distribute_optimized(40.0, &g, std::slice::from_ref(&day), &default_solver())
            .unwrap();
        // 40 MWh shifted: hour 1 costs 2000+5000+12000, hour 2 costs 3000.
        assert!((r.weighted_cost - 22_000.0).abs() < 1e-4);
        let sum: f64 = r.caps.iter().sum();
        assert!(sum <= 40.0 + 1e-6);
        assert!(r.caps.iter().all(|c| *c >= 0.0));

        // Same day evaluated at fixed even caps agrees with the joint model.
        let even = distribute_even(40.0, &g).unwrap();
        let cost = weighted_cost_with_caps(&even, &g, std::slice::from_ref(&day), &default_solver())
            .unwrap();
        assert!((cost - 22_000.0).abs() < 1e-4);
    }

    #[test]
    fn optimized_split_beats_even_on_an_asymmetric_world() {
        let mut g = world(2);
        // Site 1 runs flat out at its average: no room to shift.
        g.datacenters[1].util_min = 0.7;
        let day = evening_peak(vec![vec![260.0, 40.0]]);
        let solver = default_solver();
        let opt =
            distribute_optimized(40.0, &g, std::slice::from_ref(&day), &solver).unwrap();
        // All useful cap flows to site 0, which saturates at 30 MWh.
        assert!((opt.weighted_cost - 23_500.0).abs() < 1e-4);
        let even = distribute_even(40.0, &g).unwrap();
        let even_cost =
            weighted_cost_with_caps(&even, &g, std::slice::from_ref(&day), &solver).unwrap();
        assert!((even_cost - 25_000.0).abs() < 1e-4);
        assert!(opt.weighted_cost < even_cost - 1000.0);
    }

    #[test]
    fn need_is_the_worst_training_day() {
        let g = world(2);
        let solver = default_solver();
        let peak = evening_peak(vec![vec![260.0, 40.0]]);
        let mut flat = evening_peak(vec![vec![100.0, 100.0]]);
        flat.id = "flat".into();
        let need = unconstrained_need(&g, &[flat, peak], &solver).unwrap();
        // Both sites saturate their 30 MWh physical deficit on the peak day.
        assert!((need - 60.0).abs() < 1e-6);

        // Full budget reproduces the unconstrained optimum.
        let day = evening_peak(vec![vec![260.0, 40.0]]);
        let r = distribute_optimized(need, &g, std::slice::from_ref(&day), &solver).unwrap();
        assert!((r.weighted_cost - 19_000.0).abs() < 1e-4);
    }

    #[test]
    fn optimized_dominates_even_and_budget_relaxation_helps() {
        let (grid, set) = crate::grid::synth_grid(&SynthOptions {
            n_buses: 4,
            n_dcs: 2,
            wind_pct: 25.0,
            solar_pct: 20.0,
            seed: 7,
            ..Default::default()
        })
        .unwrap();
        let days: Vec<DayScenario> = set.train_days().cloned().collect();
        let solver = default_solver();
        let need = unconstrained_need(&grid, &days, &solver).unwrap();
        assert!(need > 0.0);

        let budget = 0.5 * need;
        let opt = distribute_optimized(budget, &grid, &days, &solver).unwrap();
        let even = distribute_even(budget, &grid).unwrap();
        let even_cost = weighted_cost_with_caps(&even, &grid, &days, &solver).unwrap();
        let tol = 1e-6 * (1.0 + even_cost.abs());
        assert!(
            opt.weighted_cost <= even_cost + tol,
            "optimized {} should not exceed even {}",
            opt.weighted_cost,
            even_cost
        );

        let tight = distribute_optimized(0.25 * need, &grid, &days, &solver).unwrap();
        let loose = distribute_optimized(0.75 * need, &grid, &days, &solver).unwrap();
        let tol = 1e-6 * (1.0 + tight.weighted_cost.abs());
        assert!(tight.weighted_cost + tol >= loose.weighted_cost);
    }

    #[test]
    fn empty_worlds_are_rejected() {
        let g = world(1);
        let solver = default_solver();
        assert!(matches!(
            distribute_optimized(10.0, &g, &[], &solver),
            Err(DecouplingError::NoDays)
        ));
        let day = evening_peak(vec![vec![100.0, 100.0]]);
        assert!(matches!(
            weighted_cost_with_caps(&[1.0, 2.0], &g, std::slice::from_ref(&day), &solver),
            Err(DecouplingError::BadBudget(_))
        ));
        assert!(matches!(
            weighted_cost_with_caps(&[-1.0], &g, std::slice::from_ref(&day), &solver),
            Err(DecouplingError::BadBudget(_))
        ));
    }
}
