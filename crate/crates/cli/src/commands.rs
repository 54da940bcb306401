//! The three commands: split the decoupling budget across sites, simulate
//! the evaluation days under each management arrangement, and aggregate the
//! results into report tables.
//!
//! Every output is a tidy CSV (one observation per row) written atomically
//! and sorted on its key columns, so identical inputs produce byte-identical
//! files regardless of thread count.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use rayon::prelude::*;

use dcflex_core::decoupling::{
    decoupling_profile, distribute_even, distribute_optimized, max_power_deficit,
    unconstrained_need, weighted_cost_with_caps, DecouplingError,
};
use dcflex_core::dcopf::grid_carbon;
use dcflex_core::economics::{
    allocate_carbon_act, allocate_carbon_gm, annual_loss_cost, bes_tco, benefit_cost, cycle_count,
    dc_power_cost, EconomicsConfig,
};
use dcflex_core::grid::DayScenario;
use dcflex_core::lp::default_solver;
use dcflex_core::management::{simulate_day, Approach, SimulateOptions};

use crate::config::{Experiment, Method};
use crate::{config_err, runtime_err, Failure};

/// Shortest stable decimal form; `-0` is normalized to `0`.
fn fmt_f(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v}")
}

/// Writes a CSV through a temp file and rename, so a crash never leaves a
/// half-written table behind.
fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let tmp = path.with_extension("csv.tmp");
    let io = |e: csv::Error| runtime_err(anyhow!(e).context(format!("writing {}", path.display())));
    let mut w = csv::Writer::from_path(&tmp).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| runtime_err(anyhow!(e).context(format!("writing {}", path.display()))))?;
    drop(w);
    fs::rename(&tmp, path)
        .with_context(|| format!("finalizing {}", path.display()))
        .map_err(runtime_err)?;
    Ok(())
}

fn decoupling_failure(e: DecouplingError) -> Failure {
    match e {
        DecouplingError::NoDatacenters | DecouplingError::NoDays | DecouplingError::BadBudget(_) => {
            config_err(anyhow!(e))
        }
        other => runtime_err(anyhow!(other)),
    }
}

/// Per-site energy caps for every (budget, method) cell of the sweep.
pub struct CapsTable {
    /// Budget normalization base: the worst training day's total deficit
    /// when every site shifts freely.
    pub need: f64,
    pub entries: Vec<(f64, Method, Vec<f64>)>,
}

pub fn compute_caps(exp: &Experiment) -> Result<CapsTable, Failure> {
    let solver = default_solver();
    let train: Vec<DayScenario> = exp.days.train_days().cloned().collect();
    let need = unconstrained_need(&exp.grid, &train, &solver).map_err(decoupling_failure)?;
    let mut entries = Vec::new();
    for &b in &exp.budgets {
        for &m in &exp.methods {
            let total = b * need;
            let caps = match m {
                Method::Even => distribute_even(total, &exp.grid),
                Method::Opt => distribute_optimized(total, &exp.grid, &train, &solver)
                    .map(|o| o.caps),
            }
            .map_err(decoupling_failure)?;
            entries.push((b, m, caps));
        }
    }
    Ok(CapsTable { need, entries })
}

fn write_allocations(exp: &Experiment, table: &CapsTable) -> Result<(), Failure> {
    let mut rows: Vec<(f64, String, String, Vec<String>)> = Vec::new();
    for (b, m, caps) in &table.entries {
        for (dc, cap) in exp.grid.datacenters.iter().zip(caps) {
            rows.push((
                *b,
                m.to_string(),
                dc.id.clone(),
                vec![
                    fmt_f(*b),
                    m.to_string(),
                    dc.id.clone(),
                    fmt_f(max_power_deficit(dc)),
                    fmt_f(*cap),
                ],
            ));
        }
    }
    rows.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    rows.dedup_by(|a, b| (a.0, &a.1, &a.2) == (b.0, &b.1, &b.2));
    let rows: Vec<Vec<String>> = rows.into_iter().map(|r| r.3).collect();
    write_csv(
        &exp.out_dir.join("allocations.csv"),
        &["budget", "method", "dc", "power_cap_mw", "energy_cap_mwh"],
        &rows,
    )
}

/// Splits each budget across sites with every requested method and writes
/// the allocation tables, logging each cell's weighted training-day cost.
pub fn cmd_distribute(exp: &Experiment) -> Result<(), Failure> {
    fs::create_dir_all(&exp.out_dir)
        .with_context(|| format!("creating {}", exp.out_dir.display()))
        .map_err(runtime_err)?;
    let table = compute_caps(exp)?;
    let solver = default_solver();
    let train: Vec<DayScenario> = exp.days.train_days().cloned().collect();
    let mut costs: Vec<(f64, String, f64)> = Vec::new();
    for (b, m, caps) in &table.entries {
        let rows: Vec<Vec<String>> = exp
            .grid
            .datacenters
            .iter()
            .zip(caps)
            .map(|(dc, cap)| vec![dc.id.clone(), fmt_f(max_power_deficit(dc)), fmt_f(*cap)])
            .collect();
        write_csv(
            &exp.out_dir.join(format!("allocation_{m}_{}.csv", fmt_f(*b))),
            &["dc", "power_cap_mw", "energy_cap_mwh"],
            &rows,
        )?;
        let cost = weighted_cost_with_caps(caps, &exp.grid, &train, &solver)
            .map_err(decoupling_failure)?;
        println!(
            "budget {} {}: weighted train cost {}",
            fmt_f(*b),
            m,
            fmt_f(cost)
        );
        costs.push((*b, m.to_string(), cost));
    }
    costs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    costs.dedup_by(|a, b| (a.0, &a.1) == (b.0, &b.1));
    let rows: Vec<Vec<String>> = costs
        .iter()
        .map(|(b, m, c)| vec![fmt_f(*b), m.clone(), fmt_f(*c)])
        .collect();
    write_csv(
        &exp.out_dir.join("distribution_costs.csv"),
        &["budget", "method", "weighted_train_cost"],
        &rows,
    )?;
    write_allocations(exp, &table)?;
    println!(
        "wrote {} allocation tables to {} (need {} MWh)",
        table.entries.len(),
        exp.out_dir.display(),
        fmt_f(table.need)
    );
    Ok(())
}

struct OutcomeRow {
    budget: f64,
    method: Method,
    approach: Approach,
    scenario: String,
    weight: f64,
    metric: &'static str,
    value: f64,
}

struct DcRow {
    budget: f64,
    method: Method,
    approach: Approach,
    scenario: String,
    weight: f64,
    dc: String,
    metric: &'static str,
    value: f64,
}

struct LoadRow {
    budget: f64,
    method: Method,
    approach: Approach,
    scenario: String,
    dc: String,
    hour: usize,
    load: f64,
}

#[derive(Default)]
struct ScenarioRows {
    outcomes: Vec<OutcomeRow>,
    dc_metrics: Vec<DcRow>,
    loads: Vec<LoadRow>,
    warnings: Vec<String>,
}

fn sum2(series: &[Vec<f64>]) -> f64 {
    series.iter().flatten().sum()
}

fn simulate_scenario(
    exp: &Experiment,
    table: &CapsTable,
    approaches: &[Approach],
    day: &DayScenario,
) -> Result<ScenarioRows, Failure> {
    let solver = default_solver();
    let in_day = |e: dcflex_core::management::ManagementError| {
        runtime_err(anyhow!(e).context(format!("scenario {}", day.id)))
    };
    let zeros = vec![0.0; exp.grid.datacenters.len()];
    let fixed = simulate_day(
        &exp.grid,
        day,
        &zeros,
        &SimulateOptions::new(Approach::Fixed),
        &solver,
    )
    .map_err(in_day)?;

    let mut rows = ScenarioRows::default();
    for (b, m, caps) in &table.entries {
        for &approach in approaches {
            let outcome;
            let outcome = if approach == Approach::Fixed {
                &fixed
            } else {
                outcome = simulate_day(
                    &exp.grid,
                    day,
                    caps,
                    &SimulateOptions::new(approach),
                    &solver,
                )
                .map_err(in_day)?;
                &outcome
            };
            let mut push = |metric, value| {
                rows.outcomes.push(OutcomeRow {
                    budget: *b,
                    method: *m,
                    approach,
                    scenario: day.id.clone(),
                    weight: day.weight,
                    metric,
                    value,
                });
            };
            push("dispatch_cost", outcome.dispatch.dispatch_cost);
            push(
                "grid_carbon_kg",
                grid_carbon(&exp.grid, &outcome.dispatch, &exp.economics.rates),
            );
            push(
                "shed_mwh",
                sum2(&outcome.dispatch.shed_nd) + sum2(&outcome.dispatch.shed_dc),
            );
            push(
                "curtailed_mwh",
                sum2(&outcome.dispatch.cur_import)
                    + sum2(&outcome.dispatch.cur_wind)
                    + sum2(&outcome.dispatch.cur_solar)
                    + sum2(&outcome.dispatch.cur_other),
            );

            let carbon = if approach == Approach::Fixed {
                None
            } else {
                let gm = allocate_carbon_gm(&exp.grid, &fixed, outcome, &exp.economics.rates)
                    .map_err(|e| runtime_err(anyhow!(e).context(format!("scenario {}", day.id))))?;
                let act = allocate_carbon_act(&exp.grid, &fixed, outcome, &exp.economics.rates)
                    .map_err(|e| runtime_err(anyhow!(e).context(format!("scenario {}", day.id))))?;
                if act.degenerate_split {
                    rows.warnings.push(format!(
                        "scenario {}: emissions changed with no decoupling usage; \
                         split equally across sites (budget {}, method {m}, approach {approach})",
                        day.id,
                        fmt_f(*b)
                    ));
                }
                Some((gm, act))
            };

            for (k, dc) in exp.grid.datacenters.iter().enumerate() {
                let load = &outcome.dc_load[k];
                let profile = decoupling_profile(load, dc.power_avg());
                let mut push = |metric, value| {
                    rows.dc_metrics.push(DcRow {
                        budget: *b,
                        method: *m,
                        approach,
                        scenario: day.id.clone(),
                        weight: day.weight,
                        dc: dc.id.clone(),
                        metric,
                        value,
                    });
                };
                push(
                    "power_cost",
                    dc_power_cost(load, &outcome.dispatch.lmp[dc.bus]),
                );
                push("energy_mwh", load.iter().sum());
                push("deficit_mwh", profile.deficit);
                push("surplus_mwh", profile.surplus);
                if let Some((gm, act)) = &carbon {
                    push("gm_reduction_kg", gm.reduction_kg[k]);
                    push("act_reduction_kg", act.reduction_kg[k]);
                }
                if let Some(alphas) = &outcome.alphas {
                    push(
                        "min_scale",
                        alphas[k].iter().copied().fold(f64::INFINITY, f64::min),
                    );
                }
                for (t, l) in load.iter().enumerate() {
                    rows.loads.push(LoadRow {
                        budget: *b,
                        method: *m,
                        approach,
                        scenario: day.id.clone(),
                        dc: dc.id.clone(),
                        hour: t + 1,
                        load: *l,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Simulates every evaluation day under each (budget, method, approach)
/// cell — the steady baseline always included — and writes the outcome,
/// per-site, and load-trace tables.
pub fn cmd_simulate(exp: &Experiment, jobs: Option<usize>) -> Result<(), Failure> {
    fs::create_dir_all(&exp.out_dir)
        .with_context(|| format!("creating {}", exp.out_dir.display()))
        .map_err(runtime_err)?;
    let table = compute_caps(exp)?;
    write_allocations(exp, &table)?;
    let econ_text = toml::to_string_pretty(&exp.economics)
        .context("serializing economics config")
        .map_err(runtime_err)?;
    let econ_path = exp.out_dir.join("economics.toml");
    fs::write(&econ_path, econ_text)
        .with_context(|| format!("writing {}", econ_path.display()))
        .map_err(runtime_err)?;

    let mut approaches = vec![Approach::Fixed];
    for a in &exp.approaches {
        if !approaches.contains(a) {
            approaches.push(*a);
        }
    }

    let eval: Vec<DayScenario> = exp.days.eval_days().cloned().collect();
    if eval.is_empty() {
        return Err(config_err(anyhow!(
            "the train/eval split leaves no evaluation days"
        )));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("building thread pool")
        .map_err(runtime_err)?;
    let per_day: Vec<ScenarioRows> = pool.install(|| {
        eval.par_iter()
            .map(|day| simulate_scenario(exp, &table, &approaches, day))
            .collect::<Result<Vec<_>, Failure>>()
    })?;

    let mut outcomes = Vec::new();
    let mut dc_metrics = Vec::new();
    let mut loads = Vec::new();
    let mut warnings = Vec::new();
    for mut rows in per_day {
        outcomes.append(&mut rows.outcomes);
        dc_metrics.append(&mut rows.dc_metrics);
        loads.append(&mut rows.loads);
        warnings.append(&mut rows.warnings);
    }
    outcomes.sort_by(|a, b| {
        a.budget
            .total_cmp(&b.budget)
            .then_with(|| a.method.cmp(&b.method))
            .then_with(|| a.approach.as_str().cmp(b.approach.as_str()))
            .then_with(|| a.scenario.cmp(&b.scenario))
            .then_with(|| a.metric.cmp(b.metric))
    });
    dc_metrics.sort_by(|a, b| {
        a.budget
            .total_cmp(&b.budget)
            .then_with(|| a.method.cmp(&b.method))
            .then_with(|| a.approach.as_str().cmp(b.approach.as_str()))
            .then_with(|| a.scenario.cmp(&b.scenario))
            .then_with(|| a.dc.cmp(&b.dc))
            .then_with(|| a.metric.cmp(b.metric))
    });
    loads.sort_by(|a, b| {
        a.budget
            .total_cmp(&b.budget)
            .then_with(|| a.method.cmp(&b.method))
            .then_with(|| a.approach.as_str().cmp(b.approach.as_str()))
            .then_with(|| a.scenario.cmp(&b.scenario))
            .then_with(|| a.dc.cmp(&b.dc))
            .then_with(|| a.hour.cmp(&b.hour))
    });
    warnings.sort();
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    write_csv(
        &exp.out_dir.join("outcomes.csv"),
        &[
            "budget", "method", "approach", "scenario", "weight", "metric", "value",
        ],
        &outcomes
            .iter()
            .map(|r| {
                vec![
                    fmt_f(r.budget),
                    r.method.to_string(),
                    r.approach.to_string(),
                    r.scenario.clone(),
                    fmt_f(r.weight),
                    r.metric.to_string(),
                    fmt_f(r.value),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    write_csv(
        &exp.out_dir.join("dc_metrics.csv"),
        &[
            "budget", "method", "approach", "scenario", "weight", "dc", "metric", "value",
        ],
        &dc_metrics
            .iter()
            .map(|r| {
                vec![
                    fmt_f(r.budget),
                    r.method.to_string(),
                    r.approach.to_string(),
                    r.scenario.clone(),
                    fmt_f(r.weight),
                    r.dc.clone(),
                    r.metric.to_string(),
                    fmt_f(r.value),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    write_csv(
        &exp.out_dir.join("loads.csv"),
        &[
            "budget", "method", "approach", "scenario", "dc", "hour", "load_mw",
        ],
        &loads
            .iter()
            .map(|r| {
                vec![
                    fmt_f(r.budget),
                    r.method.to_string(),
                    r.approach.to_string(),
                    r.scenario.clone(),
                    r.dc.clone(),
                    r.hour.to_string(),
                    fmt_f(r.load),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    println!(
        "simulated {} days x {} budget/method cells x {} approaches -> {}",
        eval.len(),
        table.entries.len(),
        approaches.len(),
        exp.out_dir.display()
    );
    Ok(())
}

#[derive(Debug, serde::Deserialize)]
struct OutcomeRec {
    budget: f64,
    method: String,
    approach: String,
    weight: f64,
    metric: String,
    value: f64,
}

#[derive(Debug, serde::Deserialize)]
struct DcRec {
    budget: f64,
    method: String,
    approach: String,
    weight: f64,
    dc: String,
    metric: String,
    value: f64,
}

#[derive(Debug, serde::Deserialize)]
struct AllocRec {
    budget: f64,
    method: String,
    dc: String,
    power_cap_mw: f64,
    energy_cap_mwh: f64,
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, Failure> {
    if !path.exists() {
        return Err(config_err(anyhow!(
            "{} does not exist; run simulate first",
            path.display()
        )));
    }
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(runtime_err)?;
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("reading {}", path.display()))
        .map_err(config_err)
}

/// Mean of `(weight, value)` observations; scenario weights make weekdays
/// count for more than weekend days.
fn weighted_mean_rows(rows: &[(f64, f64)]) -> f64 {
    let den: f64 = rows.iter().map(|(w, _)| w).sum();
    if den <= 0.0 {
        return 0.0;
    }
    rows.iter().map(|(w, v)| w * v).sum::<f64>() / den
}

type GroupKey = (u64, String, String, String);

fn budget_bits(b: f64) -> u64 {
    // Budgets are nonnegative, so the bit pattern orders like the value.
    b.to_bits()
}

/// Aggregates simulate outputs into grid-level and per-site report tables.
pub fn cmd_report(out_dir: &Path) -> Result<(), Failure> {
    let econ = match fs::read_to_string(out_dir.join("economics.toml")) {
        Ok(text) => EconomicsConfig::from_toml(&text)
            .with_context(|| format!("{}", out_dir.join("economics.toml").display()))
            .map_err(config_err)?,
        Err(_) => EconomicsConfig::default(),
    };
    let outcomes: Vec<OutcomeRec> = read_rows(&out_dir.join("outcomes.csv"))?;
    if outcomes.is_empty() {
        return Err(config_err(anyhow!(
            "{} has no rows",
            out_dir.join("outcomes.csv").display()
        )));
    }
    let dc_rows: Vec<DcRec> = read_rows(&out_dir.join("dc_metrics.csv"))?;
    let allocs: Vec<AllocRec> = read_rows(&out_dir.join("allocations.csv"))?;

    // (budget, method, approach, metric) -> weighted mean over scenarios.
    let mut grid_groups: BTreeMap<GroupKey, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &outcomes {
        grid_groups
            .entry((
                budget_bits(r.budget),
                r.method.clone(),
                r.approach.clone(),
                r.metric.clone(),
            ))
            .or_default()
            .push((r.weight, r.value));
    }
    let grid_means: BTreeMap<GroupKey, f64> = grid_groups
        .into_iter()
        .map(|(k, rows)| (k, weighted_mean_rows(&rows)))
        .collect();

    let mut grid_report: Vec<Vec<String>> = Vec::new();
    for ((bits, method, approach, metric), mean) in &grid_means {
        let budget = f64::from_bits(*bits);
        grid_report.push(vec![
            fmt_f(budget),
            method.clone(),
            approach.clone(),
            metric.clone(),
            fmt_f(*mean),
        ]);
        if approach != "fixed" {
            let vs_fixed = |m: &str| {
                grid_means
                    .get(&(*bits, method.clone(), "fixed".into(), m.into()))
                    .copied()
            };
            let derived = match metric.as_str() {
                "dispatch_cost" => vs_fixed("dispatch_cost").map(|f| ("cost_saving_vs_fixed", f - mean)),
                "grid_carbon_kg" => {
                    vs_fixed("grid_carbon_kg").map(|f| ("carbon_cut_vs_fixed_kg", f - mean))
                }
                _ => None,
            };
            if let Some((name, value)) = derived {
                grid_report.push(vec![
                    fmt_f(budget),
                    method.clone(),
                    approach.clone(),
                    name.to_string(),
                    fmt_f(value),
                ]);
            }
        }
    }
    grid_report.sort();
    write_csv(
        out_dir.join("report_grid.csv").as_path(),
        &["budget", "method", "approach", "metric", "value"],
        &grid_report,
    )?;

    // (budget, method, approach, dc, metric) -> weighted mean.
    let mut dc_groups: BTreeMap<(GroupKey, String), Vec<(f64, f64)>> = BTreeMap::new();
    for r in &dc_rows {
        dc_groups
            .entry((
                (
                    budget_bits(r.budget),
                    r.method.clone(),
                    r.approach.clone(),
                    r.dc.clone(),
                ),
                r.metric.clone(),
            ))
            .or_default()
            .push((r.weight, r.value));
    }
    let dc_means: BTreeMap<(GroupKey, String), f64> = dc_groups
        .into_iter()
        .map(|(k, rows)| (k, weighted_mean_rows(&rows)))
        .collect();
    let caps: BTreeMap<(u64, String, String), (f64, f64)> = allocs
        .iter()
        .map(|a| {
            (
                (budget_bits(a.budget), a.method.clone(), a.dc.clone()),
                (a.power_cap_mw, a.energy_cap_mwh),
            )
        })
        .collect();

    // Collect the distinct non-fixed cells.
    let cells: Vec<(u64, String, String, String)> = {
        let mut seen = std::collections::BTreeSet::new();
        for ((bits, method, approach, dc), _) in dc_means.keys().map(|(k, m)| (k.clone(), m)) {
            if approach != "fixed" {
                seen.insert((bits, method, approach, dc));
            }
        }
        seen.into_iter().collect()
    };

    let mut dc_report: Vec<Vec<String>> = Vec::new();
    for (bits, method, approach, dc) in cells {
        let budget = f64::from_bits(bits);
        let mean = |approach: &str, metric: &str| {
            dc_means
                .get(&(
                    (bits, method.clone(), approach.to_string(), dc.clone()),
                    metric.to_string(),
                ))
                .copied()
        };
        let mut push = |metric: &str, value: f64| {
            dc_report.push(vec![
                fmt_f(budget),
                method.clone(),
                approach.clone(),
                dc.clone(),
                metric.to_string(),
                fmt_f(value),
            ]);
        };
        let saving = match (mean("fixed", "power_cost"), mean(&approach, "power_cost")) {
            (Some(fixed), Some(flex)) => {
                let s = 365.0 * (fixed - flex);
                push("annual_power_cost_saving", s);
                Some(s)
            }
            _ => None,
        };
        if let Some(gm) = mean(&approach, "gm_reduction_kg") {
            push("annual_gm_reduction_kg", 365.0 * gm);
        }
        let act = mean(&approach, "act_reduction_kg");
        if let Some(act) = act {
            push("annual_act_reduction_kg", 365.0 * act);
        }
        let deficit = mean(&approach, "deficit_mwh").unwrap_or(0.0);
        push("mean_daily_deficit_mwh", deficit);

        let (power_cap, energy_cap) = match caps.get(&(bits, method.clone(), dc.clone())) {
            Some(&(p, e)) => (p, e),
            None => continue,
        };
        if energy_cap <= 1e-9 || power_cap <= 0.0 {
            continue;
        }
        let battery = econ.battery_for(power_cap, energy_cap);
        let mean_price = match (mean(&approach, "power_cost"), mean(&approach, "energy_mwh")) {
            (Some(cost), Some(energy)) if energy > 0.0 => cost / energy,
            _ => 0.0,
        };
        let econ_err = |e: dcflex_core::economics::EconomicsError| {
            runtime_err(anyhow!(e).context(format!("site {dc}")))
        };
        let cycles = cycle_count(&[deficit], &battery).map_err(econ_err)?;
        let loss = annual_loss_cost(deficit, &battery, mean_price).map_err(econ_err)?;
        let tco = bes_tco(&battery, cycles, loss).map_err(econ_err)?;
        push("battery_tco", tco);
        if let (Some(saving), Some(act)) = (saving, act) {
            let ratio = benefit_cost(saving, 365.0 * act, econ.carbon_price_per_tonne, tco)
                .map_err(econ_err)?;
            push("benefit_cost", ratio);
        }
    }
    dc_report.sort();
    write_csv(
        out_dir.join("report_dc.csv").as_path(),
        &["budget", "method", "approach", "dc", "metric", "value"],
        &dc_report,
    )?;
    println!(
        "wrote report_grid.csv ({} rows) and report_dc.csv ({} rows) in {}",
        grid_report.len(),
        dc_report.len(),
        out_dir.display()
    );
    Ok(())
}

/// Generates a synthetic world and saves it in the file formats the other
/// commands read back.
pub fn cmd_synth(opts: &dcflex_core::grid::SynthOptions, out_dir: &Path) -> Result<(), Failure> {
    let (grid, days) = dcflex_core::grid::synth_grid(opts)
        .context("synthesizing grid")
        .map_err(config_err)?;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(runtime_err)?;
    let grid_path = out_dir.join("grid.json");
    dcflex_core::grid::save_grid(&grid, &grid_path)
        .with_context(|| format!("writing {}", grid_path.display()))
        .map_err(runtime_err)?;
    dcflex_core::grid::save_scenarios(
        &days,
        &grid,
        out_dir.join("profiles.csv"),
        out_dir.join("scenarios.csv"),
    )
    .with_context(|| format!("writing scenarios in {}", out_dir.display()))
    .map_err(runtime_err)?;
    println!(
        "wrote grid.json, profiles.csv, scenarios.csv to {} ({} buses, {} sites, {} days)",
        out_dir.display(),
        grid.buses.len(),
        grid.datacenters.len(),
        days.scenarios.len()
    );
    Ok(())
}
