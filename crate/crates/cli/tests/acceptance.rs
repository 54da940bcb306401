//! Acceptance gate: ten checks covering the dispatch oracles, the
//! flexibility guarantees, the budget-distribution and cost-ordering
//! properties, the carbon and battery arithmetic, and CLI determinism.
//! Each test prints one PASS line with its measured numbers; a failure
//! panics with the offending values.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use dcflex_core::decoupling::{decoupling_profile, distribute_even, distribute_optimized, unconstrained_need, weighted_cost_with_caps};
use dcflex_core::dcopf::{fixed_dc_loads, grid_carbon, solve_dispatch, EmissionRates};
use dcflex_core::economics::{allocate_carbon_act, allocate_carbon_gm, bes_tco, BatterySpec};
use dcflex_core::grid::{
    synth_grid, Bus, Datacenter, DayKind, DayScenario, DayType, Fuel, Generator, Grid, Line,
    NdLoad, Penalties, Season, SynthOptions,
};
use dcflex_core::lp::default_solver;
use dcflex_core::management::{
    plan_share_proposals, simulate_day, Approach, PlanShareOptions, SimulateOptions,
};

fn bare_grid(horizon: usize) -> Grid {
    Grid {
        horizon,
        theta_min: -0.6,
        theta_max: 0.6,
        penalties: Penalties::default(),
        buses: vec![],
        lines: vec![],
        generators: vec![],
        imports: vec![],
        wind_farms: vec![],
        solar_farms: vec![],
        other_renewables: vec![],
        nd_loads: vec![],
        datacenters: vec![],
    }
}

fn day(grid: &Grid, demand: Vec<Vec<f64>>) -> DayScenario {
    DayScenario {
        id: "day".into(),
        day_type: DayType {
            season: Season::Winter,
            kind: DayKind::Weekday,
        },
        weight: 5.0,
        demand,
        import_avail: vec![],
        wind: vec![vec![0.0; grid.horizon]; grid.wind_farms.len()],
        solar: vec![],
        other: vec![],
    }
}

fn gen(id: &str, bus: usize, cost: f64, p_max: f64) -> Generator {
    Generator {
        id: id.into(),
        bus,
        fuel: Fuel::Gas,
        cost,
        p_max,
        ramp_up: p_max,
        ramp_down: p_max,
    }
}

fn dc(id: &str, bus: usize, power_max: f64) -> Datacenter {
    Datacenter {
        id: id.into(),
        bus,
        power_max,
        util_min: 0.4,
        util_avg: 0.7,
        util_max: 1.0,
    }
}

/// Weight-averaged realized dispatch cost of one approach over days.
fn weighted_eval_cost(
    grid: &Grid,
    days: &[DayScenario],
    caps: &[f64],
    approach: Approach,
) -> f64 {
    let solver = default_solver();
    let mut num = 0.0;
    let mut den = 0.0;
    for d in days {
        let outcome =
            simulate_day(grid, d, caps, &SimulateOptions::new(approach), &solver).unwrap();
        num += d.weight * outcome.dispatch.dispatch_cost;
        den += d.weight;
    }
    num / den
}

fn weighted_eval_carbon(grid: &Grid, days: &[DayScenario], caps: &[f64], approach: Approach) -> f64 {
    let solver = default_solver();
    let rates = EmissionRates::default();
    let mut num = 0.0;
    let mut den = 0.0;
    for d in days {
        let outcome =
            simulate_day(grid, d, caps, &SimulateOptions::new(approach), &solver).unwrap();
        num += d.weight * grid_carbon(grid, &outcome.dispatch, &rates);
        den += d.weight;
    }
    num / den
}

#[test]
fn criterion_01_congested_two_bus_oracle() {
    let mut grid = bare_grid(1);
    grid.buses = vec![Bus { id: "b0".into() }, Bus { id: "b1".into() }];
    grid.lines = vec![Line {
        id: "l01".into(),
        from: 0,
        to: 1,
        susceptance: 1000.0,
        flow_max: 30.0,
    }];
    grid.generators = vec![gen("cheap", 0, 10.0, 1000.0), gen("pricey", 1, 50.0, 1000.0)];
    grid.nd_loads = vec![NdLoad {
        id: "town".into(),
        bus: 1,
    }];
    let scenario = day(&grid, vec![vec![50.0]]);
    let started = Instant::now();
    let result = solve_dispatch(&grid, &scenario, &fixed_dc_loads(&grid), &default_solver()).unwrap();
    let elapsed = started.elapsed();
    let flow = result.flow[0][0];
    let (lmp0, lmp1) = (result.lmp[0][0], result.lmp[1][0]);
    assert!((flow - 30.0).abs() <= 1e-4, "flow {flow}");
    assert!((lmp0 - 10.0).abs() <= 1e-4, "sending-end price {lmp0}");
    assert!((lmp1 - 50.0).abs() <= 1e-4, "receiving-end price {lmp1}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 01 PASS: flow {flow} MW, prices {lmp0}/{lmp1} $/MWh in {:.1} ms",
        elapsed.as_secs_f64() * 1e3
    );
}

#[test]
fn criterion_02_shedding_prices_at_the_penalty() {
    let mut grid = bare_grid(1);
    grid.buses = vec![Bus { id: "b0".into() }];
    grid.generators = vec![gen("small", 0, 20.0, 30.0)];
    grid.nd_loads = vec![NdLoad {
        id: "town".into(),
        bus: 0,
    }];
    let scenario = day(&grid, vec![vec![100.0]]);
    let result = solve_dispatch(&grid, &scenario, &fixed_dc_loads(&grid), &default_solver()).unwrap();
    let lmp = result.lmp[0][0];
    let shed = result.shed_nd[0][0];
    assert!((lmp - 1000.0).abs() <= 1e-3, "shed-bus price {lmp}");
    assert!((shed - 70.0).abs() <= 1e-6, "shed {shed}");
    println!("criterion 02 PASS: shed bus priced at {lmp} $/MWh with {shed} MW unserved");
}

#[test]
fn criterion_03_finalized_draws_always_respect_the_flexibility_rules() {
    let solver = default_solver();
    let mut days_checked = 0usize;
    let mut worst_band: f64 = 0.0;
    let mut worst_net: f64 = 0.0;
    let mut worst_cap: f64 = 0.0;
    for seed in 1..=13u64 {
        let opts = SynthOptions {
            n_buses: 3,
            n_dcs: 2,
            horizon: 6,
            seed,
            ..SynthOptions::default()
        };
        let (grid, set) = synth_grid(&opts).unwrap();
        let need = unconstrained_need(&grid, &set.scenarios, &solver).unwrap();
        let caps = distribute_even(0.4 * need, &grid).unwrap();
        for scenario in &set.scenarios {
            days_checked += 1;
            for approach in Approach::ALL {
                let outcome = simulate_day(
                    &grid,
                    scenario,
                    &caps,
                    &SimulateOptions::new(approach),
                    &solver,
                )
                .unwrap();
                for (k, site) in grid.datacenters.iter().enumerate() {
                    let mut running = 0.0;
                    for &l in &outcome.dc_load[k] {
                        worst_band = worst_band
                            .max(site.power_min() - l)
                            .max(l - site.power_cap());
                        running += l - site.power_avg();
                        worst_net = worst_net.max(running);
                    }
                    worst_net = worst_net.max(running.abs());
                    let profile = decoupling_profile(&outcome.dc_load[k], site.power_avg());
                    worst_cap = worst_cap.max(profile.deficit - caps[k]);
                }
            }
        }
    }
    assert!(days_checked >= 100, "only {days_checked} days exercised");
    assert!(worst_band <= 1e-6, "band violation {worst_band} MW");
    assert!(worst_net <= 1e-6, "net-energy violation {worst_net} MWh");
    assert!(worst_cap <= 1e-6, "cap violation {worst_cap} MWh");
    println!(
        "criterion 03 PASS: {days_checked} days x 4 approaches, worst band/net/cap violations \
         {worst_band:.2e}/{worst_net:.2e}/{worst_cap:.2e}"
    );
}

#[test]
fn criterion_04_wider_control_never_costs_more() {
    let solver = default_solver();
    let opts = SynthOptions {
        n_buses: 3,
        n_dcs: 2,
        horizon: 8,
        seed: 42,
        ..SynthOptions::default()
    };
    let (grid, set) = synth_grid(&opts).unwrap();
    let need = unconstrained_need(&grid, &set.scenarios, &solver).unwrap();
    let mut pairs = 0usize;
    for budget in [0.0, 0.3, 0.6, 1.0] {
        let caps = distribute_even(budget * need, &grid).unwrap();
        for scenario in &set.scenarios {
            pairs += 1;
            let run = |a: Approach| {
                simulate_day(&grid, scenario, &caps, &SimulateOptions::new(a), &solver).unwrap()
            };
            let plan_share = run(Approach::PlanShare);
            let scaled = run(Approach::PsGridScale);
            let direct = run(Approach::GridCtrl);
            let scale = plan_share.dispatch.dispatch_cost.abs().max(1.0);
            assert!(
                direct.dispatch.dispatch_cost
                    <= scaled.dispatch.dispatch_cost + 1e-5 * scale,
                "budget {budget}, {}: direct control lost to scaling",
                scenario.id
            );
            assert!(
                scaled.dispatch.dispatch_cost
                    <= plan_share.dispatch.dispatch_cost + 1e-5 * scale,
                "budget {budget}, {}: scaling lost to raw plans",
                scenario.id
            );

            // Hour-wise, scaling only ever shrinks a plan's deviation.
            let plans = plan_share_proposals(
                &grid,
                &scaled.baseline.lmp,
                &caps,
                &PlanShareOptions::default(),
                &solver,
            )
            .unwrap();
            for (k, site) in grid.datacenters.iter().enumerate() {
                let tol = 1e-9 * (1.0 + site.power_max);
                for t in 0..grid.horizon {
                    let planned = (plans[k][t] - site.power_avg()).abs();
                    let realized = (scaled.dc_load[k][t] - site.power_avg()).abs();
                    assert!(
                        realized <= planned + tol,
                        "budget {budget}, {}, site {k}, hour {}: deviation grew",
                        scenario.id,
                        t + 1
                    );
                }
            }
        }
    }
    println!(
        "criterion 04 PASS: cost ordering and hour-wise deviation shrinkage on {pairs} \
         (scenario, budget) pairs"
    );
}

#[test]
fn criterion_05_optimized_split_dominates_and_budget_helps() {
    let started = Instant::now();
    let solver = default_solver();
    let (grid, set) = synth_grid(&SynthOptions::default()).unwrap();
    let train: Vec<DayScenario> = set.train_days().cloned().collect();
    let eval: Vec<DayScenario> = set.eval_days().cloned().collect();
    let need = unconstrained_need(&grid, &train, &solver).unwrap();
    let budgets: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let mut grid_ctrl_costs = Vec::new();
    for &b in &budgets {
        let even = distribute_even(b * need, &grid).unwrap();
        let even_cost = weighted_cost_with_caps(&even, &grid, &train, &solver).unwrap();
        let opt = distribute_optimized(b * need, &grid, &train, &solver).unwrap();
        assert!(
            opt.weighted_cost <= even_cost * (1.0 + 1e-9) + 1e-9,
            "budget {b}: optimized split cost {} vs even {even_cost}",
            opt.weighted_cost
        );
        grid_ctrl_costs.push(weighted_eval_cost(&grid, &eval, &even, Approach::GridCtrl));
    }
    for w in grid_ctrl_costs.windows(2) {
        assert!(
            w[1] <= w[0] * (1.0 + 1e-5),
            "more budget raised the cost: {} -> {}",
            w[0],
            w[1]
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!(
        "criterion 05 PASS: optimized <= even at 10 budgets and direct-control cost monotone \
         ({:.1} s)",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_06_solar_world_shows_payoff_and_diminishing_returns() {
    let solver = default_solver();
    let opts = SynthOptions {
        wind_pct: 10.0,
        solar_pct: 50.0,
        ..SynthOptions::default()
    };
    let (grid, set) = synth_grid(&opts).unwrap();
    let train: Vec<DayScenario> = set.train_days().cloned().collect();
    let eval: Vec<DayScenario> = set.eval_days().cloned().collect();
    let need = unconstrained_need(&grid, &train, &solver).unwrap();
    let cost_at = |b: f64| {
        let caps = distribute_even(b * need, &grid).unwrap();
        weighted_eval_cost(&grid, &eval, &caps, Approach::GridCtrl)
    };
    let fixed_caps = vec![0.0; grid.datacenters.len()];
    let fixed_cost = weighted_eval_cost(&grid, &eval, &fixed_caps, Approach::Fixed);
    let fixed_carbon = weighted_eval_carbon(&grid, &eval, &fixed_caps, Approach::Fixed);
    let full = distribute_even(need, &grid).unwrap();
    let full_cost = weighted_eval_cost(&grid, &eval, &full, Approach::GridCtrl);
    let full_carbon = weighted_eval_carbon(&grid, &eval, &full, Approach::GridCtrl);
    assert!(
        full_cost < fixed_cost,
        "full-budget control did not cut cost: {full_cost} vs {fixed_cost}"
    );
    assert!(
        full_carbon < fixed_carbon,
        "full-budget control did not cut carbon: {full_carbon} vs {fixed_carbon}"
    );
    let early = cost_at(0.0) - cost_at(0.3);
    let late = cost_at(0.7) - full_cost;
    assert!(
        late < early,
        "no diminishing returns: first 30% bought {early}, last 30% bought {late}"
    );
    println!(
        "criterion 06 PASS: cost {fixed_cost:.0} -> {full_cost:.0}, carbon {fixed_carbon:.0} -> \
         {full_carbon:.0} kg, marginal benefit {early:.0} -> {late:.0}"
    );
}

#[test]
fn criterion_07_price_takers_overshift_and_scaling_recovers() {
    // Three buses on ample lines share a stepped stack: 200 MW at $10, 100 MW
    // at $30, and a 40 MW peaker at $90. Town demand [190, 150] plus two
    // 100 MW sites leaves hour 1 expensive and hour 2 cheap, so both
    // price-taking sites dive to minimum draw in hour 1 and pile into hour 2
    // — overshooting the 340 MW stack and forcing shed. Scale factors pull
    // the synchronized plans back; direct control never overshoots.
    let mut grid = bare_grid(2);
    grid.buses = (0..3)
        .map(|i| Bus {
            id: format!("b{i}"),
        })
        .collect();
    grid.lines = vec![
        Line {
            id: "l01".into(),
            from: 0,
            to: 1,
            susceptance: 1000.0,
            flow_max: 500.0,
        },
        Line {
            id: "l12".into(),
            from: 1,
            to: 2,
            susceptance: 1000.0,
            flow_max: 500.0,
        },
    ];
    grid.generators = vec![
        gen("base", 0, 10.0, 200.0),
        gen("mid", 0, 30.0, 100.0),
        gen("peak", 1, 90.0, 40.0),
    ];
    grid.nd_loads = vec![NdLoad {
        id: "town".into(),
        bus: 0,
    }];
    grid.datacenters = vec![dc("dc1", 1, 100.0), dc("dc2", 2, 100.0)];
    let scenario = day(&grid, vec![vec![190.0, 150.0]]);
    let caps = [1000.0, 1000.0];
    let solver = default_solver();
    let wide_open = |approach| SimulateOptions {
        approach,
        plan: PlanShareOptions {
            step_frac: 1.0,
            ..PlanShareOptions::default()
        },
    };
    let plan_share =
        simulate_day(&grid, &scenario, &caps, &wide_open(Approach::PlanShare), &solver).unwrap();
    let scaled =
        simulate_day(&grid, &scenario, &caps, &wide_open(Approach::PsGridScale), &solver).unwrap();
    let margin = plan_share.dispatch.dispatch_cost - scaled.dispatch.dispatch_cost;
    assert!(
        margin > 1e-6 * scaled.dispatch.dispatch_cost.abs().max(1.0),
        "no strict overshift penalty: plans cost {}, scaled cost {}",
        plan_share.dispatch.dispatch_cost,
        scaled.dispatch.dispatch_cost
    );
    let min_alpha = scaled
        .alphas
        .as_ref()
        .expect("scaling must report its factors")
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    assert!(min_alpha < 1.0 - 1e-9, "no scale factor engaged: min {min_alpha}");
    println!(
        "criterion 07 PASS: raw plans cost {:.0}, scaled {:.0} (margin {margin:.0}), min scale \
         factor {min_alpha:.3}",
        plan_share.dispatch.dispatch_cost, scaled.dispatch.dispatch_cost
    );
}

#[test]
fn criterion_08_usage_attribution_conserves_the_carbon_change() {
    let solver = default_solver();
    let rates = EmissionRates::default();
    let opts = SynthOptions {
        n_buses: 3,
        n_dcs: 2,
        horizon: 8,
        seed: 6,
        ..SynthOptions::default()
    };
    let (grid, set) = synth_grid(&opts).unwrap();
    let need = unconstrained_need(&grid, &set.scenarios, &solver).unwrap();
    let mut days_checked = 0usize;
    let mut worst_rel: f64 = 0.0;
    for budget in [0.5, 1.0] {
        let caps = distribute_even(budget * need, &grid).unwrap();
        for scenario in &set.scenarios {
            days_checked += 1;
            let fixed = simulate_day(
                &grid,
                scenario,
                &caps,
                &SimulateOptions::new(Approach::Fixed),
                &solver,
            )
            .unwrap();
            for approach in [Approach::PlanShare, Approach::PsGridScale, Approach::GridCtrl] {
                let flex =
                    simulate_day(&grid, scenario, &caps, &SimulateOptions::new(approach), &solver)
                        .unwrap();
                let act = allocate_carbon_act(&grid, &fixed, &flex, &rates).unwrap();
                let sum: f64 = act.reduction_kg.iter().sum();
                let rel = (sum - act.delta_kg).abs() / act.delta_kg.abs().max(1.0);
                worst_rel = worst_rel.max(rel);
                assert!(
                    rel <= 1e-9,
                    "{}: shares sum to {sum}, change was {}",
                    scenario.id,
                    act.delta_kg
                );
            }
            let gm = allocate_carbon_gm(&grid, &fixed, &fixed, &rates).unwrap();
            assert!(
                gm.reduction_kg.iter().all(|r| *r == 0.0),
                "identical dispatches must show zero mix-view reduction"
            );
        }
    }
    println!(
        "criterion 08 PASS: usage shares conserve the carbon change on {days_checked} days \
         (worst rel err {worst_rel:.2e}); mix view zero on identical dispatches"
    );
}

#[test]
fn criterion_09_battery_ownership_cost_matches_the_worked_example() {
    let spec = BatterySpec {
        power_max_mw: 240.0,
        energy_cap_mwh: 960.0,
        depth_of_discharge: 0.8,
        round_trip_efficiency: 0.85,
        unit_capex_pc: 0.36e6,
        unit_capex_ec: 0.39e6,
        depreciation_years: 15.0,
    };
    let tco = bes_tco(&spec, 1.0, 0.0).unwrap();
    let rel = (tco - 42.24e6).abs() / 42.24e6;
    assert!(rel <= 1e-9, "yearly cost {tco}, expected 42.24e6 (rel err {rel:.2e})");
    println!("criterion 09 PASS: 240 MW / 960 MWh at one cycle/day costs {tco} $/yr");
}

#[test]
fn criterion_10_repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &Path, jobs: &str| {
        let config = dir.path().join("exp.toml");
        std::fs::write(
            &config,
            format!(
                "out_dir = \"{}\"\nbudgets = [0.0, 0.5]\nmethods = [\"even\", \"opt\"]\n\n\
                 [grid.synth]\nn_buses = 4\nn_dcs = 2\nhorizon = 12\nseed = 3\n",
                out.display()
            ),
        )
        .unwrap();
        let output = Command::new(env!("CARGO_BIN_EXE_dcflex"))
            .args(["simulate", config.to_str().unwrap(), "--jobs", jobs])
            .output()
            .unwrap();
        assert_eq!(
            output.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&a, "4");
    run(&b, "1");
    let mut compared = BTreeMap::new();
    for name in [
        "outcomes.csv",
        "dc_metrics.csv",
        "loads.csv",
        "allocations.csv",
        "economics.toml",
    ] {
        let left = std::fs::read(a.join(name)).unwrap();
        let right = std::fs::read(b.join(name)).unwrap();
        assert_eq!(left, right, "{name} differs between identical runs");
        compared.insert(name, left.len());
    }
    println!(
        "criterion 10 PASS: {} output files byte-identical across reruns and thread counts \
         ({} bytes total)",
        compared.len(),
        compared.values().sum::<usize>()
    );
}
