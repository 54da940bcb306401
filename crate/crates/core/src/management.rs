//! Who decides how datacenter draws are reshaped within their caps.
//!
//! Three arrangements, in increasing order of grid involvement:
//!
//! * **PlanShare** — each site plans alone against the day-ahead nodal
//!   prices from a steady-draw dispatch, then every plan executes as
//!   submitted. Sites are price takers, so they all chase the same cheap
//!   hours and can overshoot: the realized dispatch may cost more than the
//!   prices promised.
//! * **PS-GridScale** — sites submit the same plans, but the operator picks
//!   a per-site scale factor in `[0, 1]` inside the dispatch optimization,
//!   blending each plan toward the steady draw until the aggregate is safe.
//! * **GridCtrl** — the operator schedules the draws directly as dispatch
//!   variables, subject only to each site's utilization band, daily balance,
//!   and deficit cap.
//!
//! Every arrangement keeps each site's running draw at or below its
//! cumulative average (never ahead, settled by day's end) and its daily
//! deficit within the allocated cap, so realized dispatch costs nest:
//! GridCtrl <= PS-GridScale <= PlanShare.
//!
//! [`simulate_day`] runs the common three-step day: dispatch the steady
//! draws for planning prices, let the arrangement fix the draws, then
//! dispatch those draws for the realized outcome.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dcopf::{fixed_dc_loads, solve_dispatch, DcopfError, DispatchResult};
use crate::decoupling::{append_flex_day, append_flex_rows, decoupling_profile, CapsRef};
use crate::grid::{DayScenario, Grid};
use crate::lp::{LpError, LpModel, Relation, SolveLp, VarId};

#[derive(Debug, Error)]
pub enum ManagementError {
    #[error("caps: {0}")]
    BadCaps(String),
    #[error("prices: {0}")]
    BadPrices(String),
    #[error("plans: {0}")]
    BadPlans(String),
    #[error(transparent)]
    Dcopf(#[from] DcopfError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Draw-management arrangement for a simulated day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Approach {
    /// Steady draws; no decoupling at all.
    Fixed,
    PlanShare,
    PsGridScale,
    GridCtrl,
}

impl Approach {
    pub const ALL: [Approach; 4] = [
        Approach::Fixed,
        Approach::PlanShare,
        Approach::PsGridScale,
        Approach::GridCtrl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Approach::Fixed => "fixed",
            Approach::PlanShare => "plan-share",
            Approach::PsGridScale => "ps-gridscale",
            Approach::GridCtrl => "grid-ctrl",
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Approach {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Approach::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown approach '{s}' (try fixed, plan-share, ps-gridscale, grid-ctrl)"))
    }
}

/// Knobs for the per-site planning LP.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanShareOptions {
    /// Largest hour-to-hour draw change a site will plan, as a fraction of
    /// its peak power.
    pub step_frac: f64,
    /// Tiny objective weight on total deviation from the steady draw; keeps
    /// plans constant when prices give no reason to move.
    pub deviation_penalty: f64,
}

impl Default for PlanShareOptions {
    fn default() -> Self {
        Self {
            step_frac: 0.25,
            deviation_penalty: 1e-6,
        }
    }
}

fn check_caps(grid: &Grid, caps: &[f64]) -> Result<(), ManagementError> {
    if caps.len() != grid.datacenters.len() {
        return Err(ManagementError::BadCaps(format!(
            "{} caps for {} datacenters",
            caps.len(),
            grid.datacenters.len()
        )));
    }
    if let Some(c) = caps.iter().find(|c| !c.is_finite() || **c < 0.0) {
        return Err(ManagementError::BadCaps(format!(
            "caps must be finite and nonnegative, got {c}"
        )));
    }
    Ok(())
}

/// Each site's cost-minimizing draw plan against fixed nodal prices.
///
/// `prices` is `[bus][hour]` in $/MWh; each site reads the series at its own
/// bus and solves independently: minimize price-weighted energy plus a
/// whisper of deviation penalty, subject to the utilization band, the
/// running-balance rule, the deficit cap, and the hour-to-hour step limit.
pub fn plan_share_proposals(
    grid: &Grid,
    prices: &[Vec<f64>],
    caps: &[f64],
    opts: &PlanShareOptions,
    solver: &dyn SolveLp,
) -> Result<Vec<Vec<f64>>, ManagementError> {
    check_caps(grid, caps)?;
    let t_len = grid.horizon;
    if prices.len() != grid.buses.len()
        || prices
            .iter()
            .any(|p| p.len() != t_len || p.iter().any(|v| !v.is_finite()))
    {
        return Err(ManagementError::BadPrices(format!(
            "need a finite series of {} hours for each of {} buses",
            t_len,
            grid.buses.len()
        )));
    }
    if !(opts.step_frac > 0.0 && opts.step_frac.is_finite()) {
        return Err(ManagementError::BadPlans(format!(
            "step fraction must be positive and finite, got {}",
            opts.step_frac
        )));
    }
    let mut plans = Vec::with_capacity(grid.datacenters.len());
    for (k, dc) in grid.datacenters.iter().enumerate() {
        let avg = dc.power_avg();
        let step = opts.step_frac * dc.power_max;
        let series = &prices[dc.bus];
        let mut m = LpModel::new();
        let load: Vec<VarId> = (0..t_len)
            .map(|t| {
                m.add_var(
                    format!("load[{}]", t + 1),
                    dc.power_min(),
                    dc.power_cap(),
                    series[t],
                )
            })
            .collect();
        let dev: Vec<VarId> = (0..t_len)
            .map(|t| {
                m.add_var(
                    format!("dev[{}]", t + 1),
                    0.0,
                    f64::INFINITY,
                    opts.deviation_penalty,
                )
            })
            .collect();
        for t in 0..t_len {
            m.add_con(
                format!("devhi[{}]", t + 1),
                [(dev[t], 1.0), (load[t], -1.0)],
                Relation::Ge,
                -avg,
            );
            m.add_con(
                format!("devlo[{}]", t + 1),
                [(dev[t], 1.0), (load[t], 1.0)],
                Relation::Ge,
                avg,
            );
            let run: Vec<(VarId, f64)> = (0..=t).map(|tau| (load[tau], 1.0)).collect();
            let rel = if t + 1 == t_len {
                Relation::Eq
            } else {
                Relation::Le
            };
            m.add_con(format!("net[{}]", t + 1), run, rel, (t + 1) as f64 * avg);
        }
        let def: Vec<VarId> = (0..t_len)
            .map(|t| m.add_var(format!("deficit[{}]", t + 1), 0.0, f64::INFINITY, 0.0))
            .collect();
        for t in 0..t_len {
            m.add_con(
                format!("deffloor[{}]", t + 1),
                [(load[t], 1.0), (def[t], 1.0)],
                Relation::Ge,
                avg,
            );
        }
        m.add_con(
            "cap",
            def.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(),
            Relation::Le,
            caps[k],
        );
        for t in 1..t_len {
            m.add_con(
                format!("stepup[{}]", t + 1),
                [(load[t], 1.0), (load[t - 1], -1.0)],
                Relation::Le,
                step,
            );
            m.add_con(
                format!("stepdown[{}]", t + 1),
                [(load[t], -1.0), (load[t - 1], 1.0)],
                Relation::Le,
                step,
            );
        }
        let sol = solver
            .solve(&m)?
            .expect_optimal(&format!("draw plan for '{}'", dc.id))
            .map_err(DcopfError::from)?;
        plans.push(load.iter().map(|&v| sol.value(v)).collect());
    }
    Ok(plans)
}

fn check_plans(grid: &Grid, caps: &[f64], plans: &[Vec<f64>]) -> Result<(), ManagementError> {
    if plans.len() != grid.datacenters.len() {
        return Err(ManagementError::BadPlans(format!(
            "{} plans for {} datacenters",
            plans.len(),
            grid.datacenters.len()
        )));
    }
    for (k, dc) in grid.datacenters.iter().enumerate() {
        let plan = &plans[k];
        let tol = 1e-6 * (1.0 + dc.power_max);
        if plan.len() != grid.horizon {
            return Err(ManagementError::BadPlans(format!(
                "'{}' plans {} hours, expected {}",
                dc.id,
                plan.len(),
                grid.horizon
            )));
        }
        if plan
            .iter()
            .any(|v| !v.is_finite() || *v < dc.power_min() - tol || *v > dc.power_cap() + tol)
        {
            return Err(ManagementError::BadPlans(format!(
                "'{}' leaves its utilization band",
                dc.id
            )));
        }
        let mut run = 0.0;
        for v in plan {
            run += v - dc.power_avg();
            if run > tol {
                return Err(ManagementError::BadPlans(format!(
                    "'{}' draws ahead of its average",
                    dc.id
                )));
            }
        }
        if run.abs() > tol {
            return Err(ManagementError::BadPlans(format!(
                "'{}' ends the day {run} MWh out of balance",
                dc.id
            )));
        }
        if decoupling_profile(plan, dc.power_avg()).deficit > caps[k] + tol {
            return Err(ManagementError::BadPlans(format!(
                "'{}' exceeds its {} MWh deficit cap",
                dc.id, caps[k]
            )));
        }
    }
    Ok(())
}

/// Operator-scaled execution of submitted plans: one scale factor per site
/// and hour in `[0, 1]` blends that hour's planned deviation toward the
/// steady draw, chosen inside the dispatch LP to minimize realized cost.
/// Hour-wise scaling could otherwise push a site's running draw ahead of
/// its average, so the running-balance and cap rows are imposed again on the
/// blended draws. Returns the realized draws and the `[site][hour]` factors.
pub fn ps_gridscale(
    grid: &Grid,
    day: &DayScenario,
    plans: &[Vec<f64>],
    caps: &[f64],
    solver: &dyn SolveLp,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), ManagementError> {
    grid.validate().map_err(DcopfError::from)?;
    check_caps(grid, caps)?;
    check_plans(grid, caps, plans)?;
    let mut model = LpModel::new();
    let handles = crate::dcopf::append_dispatch(
        &mut model,
        grid,
        day,
        crate::dcopf::DcLoadMode::Variable,
        "",
        1.0,
    )?;
    let loads = handles.load_vars().to_vec();
    let alphas: Vec<Vec<VarId>> = grid
        .datacenters
        .iter()
        .map(|dc| {
            (0..grid.horizon)
                .map(|t| model.add_var(format!("scale[{},{}]", dc.id, t + 1), 0.0, 1.0, 0.0))
                .collect()
        })
        .collect();
    for (k, dc) in grid.datacenters.iter().enumerate() {
        let avg = dc.power_avg();
        for t in 0..grid.horizon {
            // load = avg + alpha * (plan - avg)
            model.add_con(
                format!("blend[{},{}]", dc.id, t + 1),
                [(loads[k][t], 1.0), (alphas[k][t], avg - plans[k][t])],
                Relation::Eq,
                avg,
            );
        }
    }
    append_flex_rows(&mut model, grid, &loads, &CapsRef::Fixed(caps), "");
    let sol = solver
        .solve(&model)?
        .expect_optimal(&format!("scaled execution of '{}'", day.id))
        .map_err(DcopfError::from)?;
    let realized = loads
        .iter()
        .map(|row| row.iter().map(|&v| sol.value(v)).collect())
        .collect();
    let scale = alphas
        .iter()
        .map(|row| row.iter().map(|&a| sol.value(a).clamp(0.0, 1.0)).collect())
        .collect();
    Ok((realized, scale))
}

/// Operator-scheduled draws: the dispatch LP owns the datacenter loads,
/// bounded by each site's band, balance rule, and deficit cap.
pub fn grid_ctrl(
    grid: &Grid,
    day: &DayScenario,
    caps: &[f64],
    solver: &dyn SolveLp,
) -> Result<Vec<Vec<f64>>, ManagementError> {
    grid.validate().map_err(DcopfError::from)?;
    check_caps(grid, caps)?;
    let mut model = LpModel::new();
    let handles = append_flex_day(&mut model, grid, day, &CapsRef::Fixed(caps), "", 1.0)?;
    let sol = solver
        .solve(&model)?
        .expect_optimal(&format!("scheduled dispatch of '{}'", day.id))
        .map_err(DcopfError::from)?;
    Ok(handles
        .load_vars()
        .iter()
        .map(|row| row.iter().map(|&v| sol.value(v)).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    pub approach: Approach,
    pub plan: PlanShareOptions,
}

impl SimulateOptions {
    pub fn new(approach: Approach) -> Self {
        Self {
            approach,
            plan: PlanShareOptions::default(),
        }
    }
}

/// One simulated day under an arrangement.
#[derive(Debug, Clone, PartialEq)]
pub struct DayOutcome {
    pub scenario_id: String,
    pub weight: f64,
    pub approach: Approach,
    /// Dispatch with every site at its steady draw; also the source of the
    /// planning prices.
    pub baseline: DispatchResult,
    /// Dispatch at the finalized draws.
    pub dispatch: DispatchResult,
    /// Finalized `[datacenter][hour]` grid draws.
    pub dc_load: Vec<Vec<f64>>,
    /// PS-GridScale only: the applied `[site][hour]` scale factors.
    pub alphas: Option<Vec<Vec<f64>>>,
}

/// Runs the three-step day: steady-draw dispatch for prices, arrangement
/// fixes the draws, dispatch of the finalized draws.
pub fn simulate_day(
    grid: &Grid,
    day: &DayScenario,
    caps: &[f64],
    opts: &SimulateOptions,
    solver: &dyn SolveLp,
) -> Result<DayOutcome, ManagementError> {
    check_caps(grid, caps)?;
    let steady = fixed_dc_loads(grid);
    let baseline = solve_dispatch(grid, day, &steady, solver)?;
    let mut alphas = None;
    let dc_load = match opts.approach {
        Approach::Fixed => steady,
        Approach::PlanShare => {
            plan_share_proposals(grid, &baseline.lmp, caps, &opts.plan, solver)?
        }
        Approach::PsGridScale => {
            let plans = plan_share_proposals(grid, &baseline.lmp, caps, &opts.plan, solver)?;
            let (loads, scale) = ps_gridscale(grid, day, &plans, caps, solver)?;
            alphas = Some(scale);
            loads
        }
        Approach::GridCtrl => grid_ctrl(grid, day, caps, solver)?,
    };
    let dispatch = solve_dispatch(grid, day, &dc_load, solver)?;
    Ok(DayOutcome {
        scenario_id: day.id.clone(),
        weight: day.weight,
        approach: opts.approach,
        baseline,
        dispatch,
        dc_load,
        alphas,
    })
}
