//! Seeded synthetic grids for experiments and tests.
//!
//! Everything is drawn from a ChaCha stream seeded by the caller, so a seed
//! pins the grid and every profile bit-for-bit. Shape constants below are
//! chosen to look like a mid-size regional system:
//!
//! * demand: ~100 MW average per bus (scaled per bus by 0.7-1.3), a morning
//!   and an evening bump, seasonal multipliers (winter 1.12, summer 1.06,
//!   spring 0.94, fall 1.0), flatter weekends, 3% hourly noise;
//! * datacenters: sized so their steady draw is ~35% of total average load,
//!   utilization band 0.4 / 0.7 / 1.0;
//! * thermal fleet: nuclear / coal / gas at 28% / 32% / 55% of peak with
//!   costs 6 / 31 / 22 $/MWh and ramps 20% / 30% / 100% of capacity per hour;
//! * one import point with flat availability worth 10% of average demand;
//! * wind: AR(1) series (mean by season, persistence 0.8) per farm; solar: a
//!   seasonal daylight sine arc, exactly zero outside the daylight window;
//!   both scaled so that available energy hits the requested percentage of
//!   total demand energy across the weighted scenario set;
//! * topology: random spanning tree plus ~30% extra lines, susceptance
//!   800-1200 MW/rad, line limits 35-60% of system peak scaled by 1/sqrt(n).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{
    Bus, Datacenter, DayKind, DayScenario, DayType, Farm, Fuel, Generator, Grid, GridError,
    ImportPoint, Line, NdLoad, Penalties, ScenarioSet, Season, DEFAULT_HORIZON,
};

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub n_buses: usize,
    pub n_dcs: usize,
    /// Requested wind share of demand energy, percent of availability.
    pub wind_pct: f64,
    /// Requested solar share, percent.
    pub solar_pct: f64,
    pub seed: u64,
    pub horizon: usize,
    /// Scenarios generated per (season, weekday/weekend) combination.
    pub variants_per_day_type: usize,
    pub train_frac: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            n_buses: 10,
            n_dcs: 3,
            wind_pct: 30.0,
            solar_pct: 30.0,
            seed: 1,
            horizon: DEFAULT_HORIZON,
            variants_per_day_type: 1,
            train_frac: 0.8,
        }
    }
}

struct Shape;

impl Shape {
    fn season_mult(season: Season) -> f64 {
        match season {
            Season::Winter => 1.12,
            Season::Spring => 0.94,
            Season::Summer => 1.06,
            Season::Fall => 1.0,
        }
    }

    /// Raw double-bump demand template at clock hour `h` (0..24).
    fn demand_raw(h: f64, kind: DayKind) -> f64 {
        let bump = |c: f64, w: f64| (-0.5 * ((h - c) / w).powi(2)).exp();
        match kind {
            DayKind::Weekday => 0.72 + 0.18 * bump(8.5, 2.2) + 0.30 * bump(19.0, 2.8),
            DayKind::Weekend => 0.74 + 0.10 * bump(9.5, 2.5) + 0.22 * bump(19.5, 3.0),
        }
    }

    fn daylight(season: Season) -> (f64, f64) {
        match season {
            Season::Winter => (8.0, 17.0),
            Season::Spring => (7.0, 19.0),
            Season::Summer => (5.5, 20.5),
            Season::Fall => (7.0, 18.5),
        }
    }

    fn wind_mean(season: Season) -> f64 {
        match season {
            Season::Winter => 0.50,
            Season::Spring => 0.45,
            Season::Summer => 0.35,
            Season::Fall => 0.45,
        }
    }
}

/// Builds a connected grid and one weighted scenario per day type (times
/// `variants_per_day_type`), deterministic in the seed.
pub fn synth_grid(opts: &SynthOptions) -> Result<(Grid, ScenarioSet), GridError> {
    if opts.n_buses == 0 {
        return Err(GridError::NoBuses);
    }
    if opts.n_dcs > opts.n_buses {
        return Err(GridError::TooManyDatacenters {
            dcs: opts.n_dcs,
            buses: opts.n_buses,
        });
    }
    if opts.horizon == 0 {
        return Err(GridError::BadHorizon);
    }
    for (field, v) in [("wind_pct", opts.wind_pct), ("solar_pct", opts.solar_pct)] {
        if !(v.is_finite() && (0.0..=95.0).contains(&v)) {
            return Err(GridError::Parse(format!(
                "{field} must be within 0..=95, got {v}"
            )));
        }
    }
    if opts.variants_per_day_type == 0 {
        return Err(GridError::Parse("variants_per_day_type must be >= 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.n_buses;
    let t_len = opts.horizon;
    let clock = |t: usize| (t as f64 + 0.5) * 24.0 / t_len as f64;

    let buses: Vec<Bus> = (0..n)
        .map(|i| Bus {
            id: format!("b{i}"),
        })
        .collect();
    let bus_scale: Vec<f64> = (0..n).map(|_| 100.0 * rng.gen_range(0.7..1.3)).collect();
    let total_base: f64 = bus_scale.iter().sum();

    // Datacenter fleet: steady draw ~35% of total average system load.
    let mut dc_buses: Vec<usize> = (0..n).collect();
    dc_buses.shuffle(&mut rng);
    dc_buses.truncate(opts.n_dcs);
    dc_buses.sort_unstable();
    let dc_share = 0.35;
    let dc_avg_each = dc_share / (1.0 - dc_share) * total_base / opts.n_dcs.max(1) as f64;
    let datacenters: Vec<Datacenter> = dc_buses
        .iter()
        .enumerate()
        .map(|(k, &bus)| Datacenter {
            id: format!("dc{k}"),
            bus,
            power_max: dc_avg_each / 0.7,
            util_min: 0.4,
            util_avg: 0.7,
            util_max: 1.0,
        })
        .collect();
    let dc_avg_total: f64 = datacenters.iter().map(|d| d.power_avg()).sum();

    // Demand profiles first; generation is sized off the realized peak.
    let nd_loads: Vec<NdLoad> = (0..n)
        .map(|i| NdLoad {
            id: format!("d{i}"),
            bus: i,
        })
        .collect();

    let n_wind = if opts.wind_pct > 0.0 { (n / 5).max(1) } else { 0 };
    let n_solar = if opts.solar_pct > 0.0 { (n / 5).max(1) } else { 0 };
    let wind_farms: Vec<Farm> = (0..n_wind)
        .map(|k| Farm {
            id: format!("w{k}"),
            bus: rng.gen_range(0..n),
        })
        .collect();
    let solar_farms: Vec<Farm> = (0..n_solar)
        .map(|k| Farm {
            id: format!("s{k}"),
            bus: rng.gen_range(0..n),
        })
        .collect();
    let import_bus = rng.gen_range(0..n);

    let mut scenarios = Vec::new();
    for day_type in DayType::ALL {
        let (rise, set) = Shape::daylight(day_type.season);
        let mean_raw = (0..t_len)
            .map(|t| Shape::demand_raw(clock(t), day_type.kind))
            .sum::<f64>()
            / t_len as f64;
        for variant in 0..opts.variants_per_day_type {
            let id = if opts.variants_per_day_type == 1 {
                day_type.to_string()
            } else {
                format!("{day_type}-{variant}")
            };
            let demand: Vec<Vec<f64>> = (0..n)
                .map(|b| {
                    (0..t_len)
                        .map(|t| {
                            let shape = Shape::demand_raw(clock(t), day_type.kind) / mean_raw
                                * Shape::season_mult(day_type.season);
                            bus_scale[b] * shape * (1.0 + 0.03 * rng.gen_range(-1.0..1.0))
                        })
                        .collect()
                })
                .collect();
            let import_avail = vec![vec![0.10 * total_base; t_len]];
            let wind: Vec<Vec<f64>> = (0..n_wind)
                .map(|_| {
                    let mu = Shape::wind_mean(day_type.season);
                    let mut v = mu + 0.15 * rng.gen_range(-1.0..1.0);
                    (0..t_len)
                        .map(|_| {
                            v = mu + 0.8 * (v - mu) + 0.15 * rng.gen_range(-1.0..1.0);
                            v = v.clamp(0.02, 1.0);
                            v
                        })
                        .collect()
                })
                .collect();
            let solar: Vec<Vec<f64>> = (0..n_solar)
                .map(|_| {
                    let cloud = rng.gen_range(0.7..1.0);
                    (0..t_len)
                        .map(|t| {
                            let h = clock(t);
                            if h <= rise || h >= set {
                                0.0
                            } else {
                                let x = (h - rise) / (set - rise);
                                cloud * (std::f64::consts::PI * x).sin().powf(1.3)
                            }
                        })
                        .collect()
                })
                .collect();
            scenarios.push(DayScenario {
                id,
                day_type,
                weight: day_type.kind.default_weight(),
                demand,
                import_avail,
                wind,
                solar,
                other: vec![],
            });
        }
    }

    // Scale renewable availability so its weighted energy hits the requested
    // share of weighted demand energy (demand includes steady DC draw).
    let wsum: f64 = scenarios.iter().map(|s| s.weight).sum();
    let e_dem: f64 = scenarios
        .iter()
        .map(|s| {
            s.weight
                * (s.demand.iter().flatten().sum::<f64>() + dc_avg_total * t_len as f64)
        })
        .sum::<f64>()
        / wsum;
    for (pct, pick) in [
        (opts.wind_pct, 0usize),
        (opts.solar_pct, 1usize),
    ] {
        let raw: f64 = scenarios
            .iter()
            .map(|s| {
                let table = if pick == 0 { &s.wind } else { &s.solar };
                s.weight * table.iter().flatten().sum::<f64>()
            })
            .sum::<f64>()
            / wsum;
        if raw > 0.0 {
            let k = pct / 100.0 * e_dem / raw;
            for s in &mut scenarios {
                let table = if pick == 0 { &mut s.wind } else { &mut s.solar };
                for series in table.iter_mut() {
                    for v in series.iter_mut() {
                        *v *= k;
                    }
                }
            }
        }
    }

    // Size the thermal fleet off the realized demand peak plus full
    // datacenter draw; 15% reserve over that even with renewables becalmed.
    let peak: f64 = scenarios
        .iter()
        .map(|s| {
            (0..t_len)
                .map(|t| s.demand.iter().map(|d| d[t]).sum::<f64>())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
        + datacenters.iter().map(|d| d.power_max).sum::<f64>();
    let mut generators = Vec::new();
    let mut gid = 0;
    let mut add_units = |fuel: Fuel,
                         cost: f64,
                         total_cap: f64,
                         ramp_frac: f64,
                         count: usize,
                         rng: &mut ChaCha8Rng,
                         out: &mut Vec<Generator>| {
        for _ in 0..count {
            let cap = total_cap / count as f64;
            out.push(Generator {
                id: format!("g{gid}"),
                bus: rng.gen_range(0..n),
                fuel,
                cost,
                p_max: cap,
                ramp_up: ramp_frac * cap,
                ramp_down: ramp_frac * cap,
            });
            gid += 1;
        }
    };
    add_units(Fuel::Nuclear, 6.0, 0.28 * peak, 0.2, 1, &mut rng, &mut generators);
    add_units(
        Fuel::Coal,
        31.0,
        0.32 * peak,
        0.3,
        (n / 4).max(1),
        &mut rng,
        &mut generators,
    );
    add_units(
        Fuel::Gas,
        22.0,
        0.55 * peak,
        1.0,
        (n / 3).max(1),
        &mut rng,
        &mut generators,
    );

    // Spanning tree keeps it connected; extra chords give flow choices.
    let mut lines = Vec::new();
    let mut have = std::collections::BTreeSet::new();
    let mut lid = 0;
    let mut add_line = |a: usize, b: usize, rng: &mut ChaCha8Rng, lines: &mut Vec<Line>| {
        let key = (a.min(b), a.max(b));
        if a == b || !have.insert(key) {
            return;
        }
        lines.push(Line {
            id: format!("l{lid}"),
            from: a,
            to: b,
            susceptance: rng.gen_range(800.0..1200.0),
            flow_max: rng.gen_range(0.35..0.60) * peak / (n as f64).sqrt(),
        });
        lid += 1;
    };
    for k in 1..n {
        let parent = rng.gen_range(0..k);
        add_line(parent, k, &mut rng, &mut lines);
    }
    let extras = (3 * n + 9) / 10;
    for _ in 0..extras {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        add_line(a, b, &mut rng, &mut lines);
    }

    let grid = Grid {
        horizon: t_len,
        theta_min: -0.6,
        theta_max: 0.6,
        penalties: Penalties::default(),
        buses,
        lines,
        generators,
        imports: vec![ImportPoint {
            id: "i0".into(),
            bus: import_bus,
        }],
        wind_farms,
        solar_farms,
        other_renewables: vec![],
        nd_loads,
        datacenters,
    };
    grid.validate()?;
    let set = ScenarioSet::with_split(scenarios, opts.train_frac);
    set.validate(&grid)?;
    Ok((grid, set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::weighted_mean;

    #[test]
    fn same_seed_same_world() {
        let opts = SynthOptions {
            n_buses: 6,
            n_dcs: 2,
            seed: 42,
            ..Default::default()
        };
        let (g1, s1) = synth_grid(&opts).unwrap();
        let (g2, s2) = synth_grid(&opts).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(s1, s2);
        let (g3, _) = synth_grid(&SynthOptions { seed: 43, ..opts }).unwrap();
        assert_ne!(g1, g3);
    }

    #[test]
    fn renewable_share_hits_request() {
        let opts = SynthOptions {
            n_buses: 10,
            n_dcs: 3,
            wind_pct: 25.0,
            solar_pct: 35.0,
            seed: 7,
            ..Default::default()
        };
        let (grid, set) = synth_grid(&opts).unwrap();
        let dc_avg: f64 = grid.datacenters.iter().map(|d| d.power_avg()).sum();
        let e_dem = weighted_mean(set.scenarios.iter(), |s| {
            s.demand.iter().flatten().sum::<f64>() + dc_avg * grid.horizon as f64
        });
        let e_wind = weighted_mean(set.scenarios.iter(), |s| {
            s.wind.iter().flatten().sum::<f64>()
        });
        let e_solar = weighted_mean(set.scenarios.iter(), |s| {
            s.solar.iter().flatten().sum::<f64>()
        });
        assert!((e_wind / e_dem * 100.0 - 25.0).abs() < 5.0);
        assert!((e_solar / e_dem * 100.0 - 35.0).abs() < 5.0);
    }

    #[test]
    fn solar_is_dark_at_night() {
        let (_, set) = synth_grid(&SynthOptions {
            solar_pct: 40.0,
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        for s in &set.scenarios {
            for farm in &s.solar {
                // Hours 1..=5 and 22..=24 are outside every season's window.
                for &t in &[0usize, 1, 2, 3, 4, 21, 22, 23] {
                    assert_eq!(farm[t], 0.0, "scenario {} hour {}", s.id, t + 1);
                }
                assert!(farm.iter().any(|&v| v > 0.0));
            }
        }
    }

    #[test]
    fn weights_follow_day_kind() {
        let (_, set) = synth_grid(&SynthOptions::default()).unwrap();
        assert_eq!(set.scenarios.len(), 8);
        for s in &set.scenarios {
            let expect = match s.day_type.kind {
                DayKind::Weekday => 5.0,
                DayKind::Weekend => 2.0,
            };
            assert_eq!(s.weight, expect);
        }
    }

    #[test]
    fn too_many_datacenters_is_an_error() {
        let r = synth_grid(&SynthOptions {
            n_buses: 2,
            n_dcs: 3,
            ..Default::default()
        });
        assert!(matches!(r, Err(GridError::TooManyDatacenters { .. })));
    }

    #[test]
    fn datacenters_sit_on_distinct_buses() {
        let (g, _) = synth_grid(&SynthOptions {
            n_buses: 5,
            n_dcs: 5,
            seed: 9,
            ..Default::default()
        })
        .unwrap();
        let mut buses: Vec<usize> = g.datacenters.iter().map(|d| d.bus).collect();
        buses.dedup();
        assert_eq!(buses.len(), 5);
    }
}
