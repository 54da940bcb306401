//! Experiment description: a TOML file, flag overrides on top, and the
//! loading/validation that turns both into a ready-to-run [`Experiment`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, Context};
use serde::Deserialize;

use dcflex_core::economics::EconomicsConfig;
use dcflex_core::grid::{load_grid, load_scenarios, synth_grid, Grid, ScenarioSet, SynthOptions};
use dcflex_core::management::Approach;

use crate::{config_err, Failure};

/// How a decoupling-energy budget is split across sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    /// Equal share per site.
    Even,
    /// Stochastic-LP split minimizing weighted training-day dispatch cost.
    Opt,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Even => "even",
            Method::Opt => "opt",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even" => Ok(Method::Even),
            "opt" => Ok(Method::Opt),
            other => Err(format!(
                "unknown distribution method '{other}' (expected even or opt)"
            )),
        }
    }
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub grid: Option<PathBuf>,
    pub seed: Option<u64>,
    pub budgets: Option<Vec<f64>>,
    pub methods: Option<Vec<String>>,
    pub approaches: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub train_frac: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    out_dir: Option<PathBuf>,
    train_frac: Option<f64>,
    budgets: Option<Vec<f64>>,
    methods: Option<Vec<String>>,
    approaches: Option<Vec<String>>,
    economics: Option<PathBuf>,
    grid: Option<RawGrid>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    file: Option<PathBuf>,
    profiles: Option<PathBuf>,
    scenarios: Option<PathBuf>,
    synth: Option<RawSynth>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSynth {
    n_buses: usize,
    n_dcs: usize,
    wind_pct: f64,
    solar_pct: f64,
    seed: u64,
    horizon: usize,
    variants_per_day_type: usize,
}

impl Default for RawSynth {
    fn default() -> Self {
        let o = SynthOptions::default();
        Self {
            n_buses: o.n_buses,
            n_dcs: o.n_dcs,
            wind_pct: o.wind_pct,
            solar_pct: o.solar_pct,
            seed: o.seed,
            horizon: o.horizon,
            variants_per_day_type: o.variants_per_day_type,
        }
    }
}

/// A fully loaded experiment: the world, the sweep axes, and where results
/// go.
#[derive(Debug)]
pub struct Experiment {
    pub grid: Grid,
    pub days: ScenarioSet,
    /// Budget fractions of the fleet's unconstrained decoupling need.
    pub budgets: Vec<f64>,
    pub methods: Vec<Method>,
    /// Draw-management arrangements to simulate; the steady baseline is
    /// always simulated alongside.
    pub approaches: Vec<Approach>,
    pub economics: EconomicsConfig,
    pub out_dir: PathBuf,
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn parse_list<T: FromStr<Err = String>>(items: &[String]) -> Result<Vec<T>, Failure> {
    items
        .iter()
        .map(|s| s.parse::<T>().map_err(|e| config_err(anyhow!(e))))
        .collect()
}

impl Experiment {
    /// Reads the config file (when given), applies flag overrides, loads or
    /// synthesizes the grid, and validates the sweep axes.
    pub fn load(config_path: Option<&Path>, flags: &Overrides) -> Result<Experiment, Failure> {
        let raw: RawConfig = match config_path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config file {}", p.display()))
                    .map_err(config_err)?;
                toml::from_str(&text)
                    .with_context(|| format!("config file {}", p.display()))
                    .map_err(config_err)?
            }
            None => RawConfig::default(),
        };
        let base = config_path.and_then(|p| p.parent());

        let train_frac = flags.train_frac.or(raw.train_frac).unwrap_or(0.8);
        if !(train_frac > 0.0 && train_frac < 1.0) {
            return Err(config_err(anyhow!(
                "train fraction must be in (0, 1), got {train_frac}"
            )));
        }

        let budgets = flags
            .budgets
            .clone()
            .or(raw.budgets)
            .unwrap_or_else(|| vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        if budgets.is_empty() {
            return Err(config_err(anyhow!("budget list is empty")));
        }
        for b in &budgets {
            if !(*b >= 0.0 && *b <= 1.0) {
                return Err(config_err(anyhow!(
                    "budget fractions must be in [0, 1], got {b}"
                )));
            }
        }

        let methods: Vec<Method> = match (&flags.methods, &raw.methods) {
            (Some(m), _) => parse_list(m)?,
            (None, Some(m)) => parse_list(m)?,
            (None, None) => vec![Method::Even],
        };
        if methods.is_empty() {
            return Err(config_err(anyhow!("method list is empty")));
        }

        let approaches: Vec<Approach> = match (&flags.approaches, &raw.approaches) {
            (Some(a), _) => parse_list(a)?,
            (None, Some(a)) => parse_list(a)?,
            (None, None) => vec![Approach::PlanShare, Approach::PsGridScale, Approach::GridCtrl],
        };
        if approaches.is_empty() {
            return Err(config_err(anyhow!("at least one approach must be selected")));
        }

        let economics = match raw.economics.as_deref() {
            Some(p) => {
                let p = resolve(base, p);
                let text = std::fs::read_to_string(&p)
                    .with_context(|| format!("cannot read economics config {}", p.display()))
                    .map_err(config_err)?;
                EconomicsConfig::from_toml(&text)
                    .with_context(|| format!("economics config {}", p.display()))
                    .map_err(config_err)?
            }
            None => EconomicsConfig::default(),
        };

        let out_dir = flags
            .out
            .clone()
            .or_else(|| raw.out_dir.as_ref().map(|p| resolve(base, p)))
            .unwrap_or_else(|| PathBuf::from("out"));

        let rawg = raw.grid.unwrap_or_default();
        let (grid, days) = match (&flags.grid, &rawg.file, &rawg.synth) {
            (None, Some(_), Some(_)) => {
                return Err(config_err(anyhow!(
                    "config sets both grid.file and grid.synth; pick one"
                )));
            }
            (Some(path), _, _) => load_world(path, &rawg, base, train_frac, flags.train_frac.is_some())?,
            (None, Some(path), None) => {
                let path = resolve(base, path);
                load_world(&path, &rawg, base, train_frac, flags.train_frac.is_some())?
            }
            (None, None, synth) => {
                let s = synth.clone().unwrap_or_default();
                let opts = SynthOptions {
                    n_buses: s.n_buses,
                    n_dcs: s.n_dcs,
                    wind_pct: s.wind_pct,
                    solar_pct: s.solar_pct,
                    seed: flags.seed.unwrap_or(s.seed),
                    horizon: s.horizon,
                    variants_per_day_type: s.variants_per_day_type,
                    train_frac,
                };
                synth_grid(&opts)
                    .context("synthesizing grid")
                    .map_err(config_err)?
            }
        };

        Ok(Experiment {
            grid,
            days,
            budgets,
            methods,
            approaches,
            economics,
            out_dir,
        })
    }
}

/// Loads a grid file plus its scenario CSVs (explicit paths from the config
/// or `profiles.csv`/`scenarios.csv` next to the grid). An explicit
/// `--train-frac` re-splits; otherwise the split column in the file wins.
fn load_world(
    grid_path: &Path,
    rawg: &RawGrid,
    base: Option<&Path>,
    train_frac: f64,
    resplit: bool,
) -> Result<(Grid, ScenarioSet), Failure> {
    if !grid_path.exists() {
        return Err(config_err(anyhow!(
            "grid file {} does not exist",
            grid_path.display()
        )));
    }
    let grid = load_grid(grid_path)
        .with_context(|| format!("grid file {}", grid_path.display()))
        .map_err(config_err)?;
    let sibling = |name: &str| grid_path.parent().unwrap_or(Path::new(".")).join(name);
    let profiles = rawg
        .profiles
        .as_ref()
        .map(|p| resolve(base, p))
        .unwrap_or_else(|| sibling("profiles.csv"));
    let scenarios = rawg
        .scenarios
        .as_ref()
        .map(|p| resolve(base, p))
        .unwrap_or_else(|| sibling("scenarios.csv"));
    for p in [&profiles, &scenarios] {
        if !p.exists() {
            return Err(config_err(anyhow!(
                "scenario file {} does not exist",
                p.display()
            )));
        }
    }
    let mut set = load_scenarios(&profiles, &scenarios, &grid)
        .with_context(|| format!("scenarios {} / {}", profiles.display(), scenarios.display()))
        .map_err(config_err)?;
    if resplit {
        set = ScenarioSet::with_split(set.scenarios, train_frac);
    }
    Ok((grid, set))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methods_round_trip() {
        for m in [Method::Even, Method::Opt] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("quadratic".parse::<Method>().is_err());
    }

    #[test]
    fn defaults_need_no_config_file() {
        let exp = Experiment::load(None, &Overrides::default()).unwrap();
        assert_eq!(exp.budgets, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(exp.methods, vec![Method::Even]);
        assert_eq!(exp.approaches.len(), 3);
        assert_eq!(exp.out_dir, PathBuf::from("out"));
        assert!(!exp.grid.datacenters.is_empty());
        assert!(exp.days.train.len() > exp.days.eval.len());
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("exp.toml");
        std::fs::write(
            &cfg,
            "budgets = [0.5]\nmethods = [\"even\"]\n[grid.synth]\nn_buses = 4\nn_dcs = 2\nseed = 9\n",
        )
        .unwrap();
        let flags = Overrides {
            budgets: Some(vec![0.0, 1.0]),
            methods: Some(vec!["opt".into()]),
            approaches: Some(vec!["grid-ctrl".into()]),
            ..Overrides::default()
        };
        let exp = Experiment::load(Some(&cfg), &flags).unwrap();
        assert_eq!(exp.budgets, vec![0.0, 1.0]);
        assert_eq!(exp.methods, vec![Method::Opt]);
        assert_eq!(exp.approaches, vec![Approach::GridCtrl]);
        assert_eq!(exp.grid.buses.len(), 4);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let bad_budget = Overrides {
            budgets: Some(vec![1.5]),
            ..Overrides::default()
        };
        assert!(matches!(
            Experiment::load(None, &bad_budget),
            Err(Failure::Config(_))
        ));
        let bad_frac = Overrides {
            train_frac: Some(1.0),
            ..Overrides::default()
        };
        assert!(matches!(
            Experiment::load(None, &bad_frac),
            Err(Failure::Config(_))
        ));
        let bad_method = Overrides {
            methods: Some(vec!["best".into()]),
            ..Overrides::default()
        };
        assert!(matches!(
            Experiment::load(None, &bad_method),
            Err(Failure::Config(_))
        ));
    }

    #[test]
    fn missing_grid_file_names_the_path() {
        let flags = Overrides {
            grid: Some(PathBuf::from("/nowhere/grid.json")),
            ..Overrides::default()
        };
        match Experiment::load(None, &flags) {
            Err(Failure::Config(e)) => assert!(e.to_string().contains("/nowhere/grid.json")),
            other => panic!("expected config failure, got {other:?}"),
        }
    }
}
