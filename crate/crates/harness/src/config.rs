//! Experiment configuration files.
//!
//! A configuration file is flat TOML: one `key = value` line per setting,
//! `#` comments, and no tables. Every key is optional and overrides the
//! chosen preset. Unknown keys are rejected.
//!
//! | key | type | meaning |
//! |-----|------|---------|
//! | `preset` | string | `paper-sim` (default) or `bare` (no speed limit) |
//! | `arena_min`, `arena_max` | `[x, y, z]` | arena corners, m |
//! | `goals` | `[[x, y, z], ...]` | goals, presented in order |
//! | `detection_radius` | float | goal detection range, m |
//! | `crash_radius` | float | contact distance, m |
//! | `safety_distance` | float | field / avoidance range S, m |
//! | `max_ticks` | integer | tick limit per run |
//! | `swarm_size` | integer | particles in a single run |
//! | `algorithm` | string | `pso`, `pso-ca`, `ffpso-lin` or `ffpso-grav` |
//! | `omega`, `theta1`, `theta2`, `theta3` | float | update weights |
//! | `exponent` | float | gravitational decay exponent p |
//! | `magnitude_cap` | float | gravitational saturation, m/tick |
//! | `ca_speed` | float | avoidance escape speed, m/tick |
//! | `ca_resume` | string | `frozen` or `recompute` |
//! | `seed` | integer | seed of a single run |
//! | `max_speed` | float or `"none"` | speed limit, m/tick |
//! | `init_speed` | float | upper bound of initial speed, m/tick |
//! | `particle_radius` | float | body radius, m |
//! | `random_mode` | string | `per_dimension` or `scalar` |
//! | `algorithms` | `[string, ...]` | sweep: algorithms to compare |
//! | `swarm_sizes` | `[integer, ...]` | sweep: swarm sizes |
//! | `runs_per_cell` | integer | sweep: runs per (algorithm, size) |
//! | `base_seed` | integer | sweep: seed all run seeds derive from |

use std::fs;
use std::path::Path;
use std::str::FromStr;

use ffpso::avoidance::CaResume;
use ffpso::sim::{AlgorithmSpec, RandomMode, WorldConfig};
use ffpso::{ConfigError, Vec3};
use serde::Deserialize;

use crate::error::{HarnessError, Result};
use crate::sweep::SweepSpec;

/// Named starting points for a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    /// The simulated-arena experiment with its speed limit.
    #[default]
    PaperSim,
    /// Same arena and weights, no speed limit.
    Bare,
}

impl Preset {
    pub fn world(self) -> WorldConfig {
        match self {
            Preset::PaperSim => WorldConfig::paper_sim(),
            Preset::Bare => WorldConfig::default(),
        }
    }

    pub fn sweep(self) -> SweepSpec {
        SweepSpec::reproduction(self.world())
    }
}

impl FromStr for Preset {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "paper-sim" => Ok(Preset::PaperSim),
            "bare" => Ok(Preset::Bare),
            other => Err(ConfigError::invalid(
                "preset",
                format!("unknown preset `{other}`, expected `paper-sim` or `bare`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum SpeedLimit {
    Value(f64),
    Keyword(String),
}

/// Raw contents of a configuration file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    preset: Option<String>,
    arena_min: Option<[f64; 3]>,
    arena_max: Option<[f64; 3]>,
    goals: Option<Vec<[f64; 3]>>,
    detection_radius: Option<f64>,
    crash_radius: Option<f64>,
    safety_distance: Option<f64>,
    max_ticks: Option<u64>,
    swarm_size: Option<usize>,
    algorithm: Option<String>,
    omega: Option<f64>,
    theta1: Option<f64>,
    theta2: Option<f64>,
    theta3: Option<f64>,
    exponent: Option<f64>,
    magnitude_cap: Option<f64>,
    ca_speed: Option<f64>,
    ca_resume: Option<String>,
    seed: Option<u64>,
    max_speed: Option<SpeedLimit>,
    init_speed: Option<f64>,
    particle_radius: Option<f64>,
    random_mode: Option<String>,
    algorithms: Option<Vec<String>>,
    swarm_sizes: Option<Vec<usize>>,
    runs_per_cell: Option<u64>,
    base_seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text).map_err(|message| HarnessError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn preset(&self) -> Result<Option<Preset>, ConfigError> {
        self.preset.as_deref().map(str::parse).transpose()
    }

    /// Applies algorithm-specific overrides to a parsed algorithm name.
    pub fn algorithm_spec(&self, name: &str) -> Result<AlgorithmSpec, ConfigError> {
        let mut alg: AlgorithmSpec = name.parse()?;
        match &mut alg {
            AlgorithmSpec::PsoCa { speed, resume } => {
                if let Some(s) = self.ca_speed {
                    *speed = s;
                }
                if let Some(r) = &self.ca_resume {
                    *resume = parse_resume(r)?;
                }
            }
            AlgorithmSpec::FfpsoGrav {
                exponent,
                magnitude_cap,
            } => {
                if let Some(p) = self.exponent {
                    *exponent = p;
                }
                if let Some(c) = self.magnitude_cap {
                    *magnitude_cap = c;
                }
            }
            AlgorithmSpec::Pso | AlgorithmSpec::FfpsoLin => {}
        }
        Ok(alg)
    }

    /// Overlays the file onto `base`. The result is not validated.
    pub fn apply_world(&self, mut c: WorldConfig) -> Result<WorldConfig, ConfigError> {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { c.$field = v; })*
            };
        }
        set!(
            detection_radius,
            crash_radius,
            safety_distance,
            max_ticks,
            swarm_size,
            seed,
            init_speed,
            particle_radius
        );
        if let Some(v) = self.arena_min {
            c.arena_min = v.into();
        }
        if let Some(v) = self.arena_max {
            c.arena_max = v.into();
        }
        if let Some(goals) = &self.goals {
            c.goals = goals.iter().map(|&g| Vec3::from(g)).collect();
        }
        if let Some(v) = self.omega {
            c.hyper.omega = v;
        }
        if let Some(v) = self.theta1 {
            c.hyper.theta1 = v;
        }
        if let Some(v) = self.theta2 {
            c.hyper.theta2 = v;
        }
        if let Some(v) = self.theta3 {
            c.hyper.theta3 = v;
        }
        c.algorithm = match &self.algorithm {
            Some(name) => self.algorithm_spec(name)?,
            None => self.algorithm_spec(&c.algorithm.label().to_ascii_lowercase())?,
        };
        match &self.max_speed {
            None => {}
            Some(SpeedLimit::Value(v)) => c.max_speed = Some(*v),
            Some(SpeedLimit::Keyword(k)) if k == "none" => c.max_speed = None,
            Some(SpeedLimit::Keyword(k)) => {
                return Err(ConfigError::invalid(
                    "max_speed",
                    format!("expected a number or \"none\", got \"{k}\""),
                ))
            }
        }
        if let Some(m) = &self.random_mode {
            c.random_mode = match m.as_str() {
                "per_dimension" => RandomMode::PerDimension,
                "scalar" => RandomMode::Scalar,
                other => {
                    return Err(ConfigError::invalid(
                        "random_mode",
                        format!("expected `per_dimension` or `scalar`, got `{other}`"),
                    ))
                }
            };
        }
        Ok(c)
    }

    /// Overlays the sweep keys onto `base`, with `world` as the cell template.
    pub fn apply_sweep(
        &self,
        mut spec: SweepSpec,
        world: WorldConfig,
    ) -> Result<SweepSpec, ConfigError> {
        if let Some(names) = &self.algorithms {
            spec.algorithms = names
                .iter()
                .map(|n| self.algorithm_spec(n))
                .collect::<Result<_, _>>()?;
        } else {
            spec.algorithms = spec
                .algorithms
                .iter()
                .map(|a| self.algorithm_spec(&a.label().to_ascii_lowercase()))
                .collect::<Result<_, _>>()?;
        }
        if let Some(sizes) = &self.swarm_sizes {
            spec.swarm_sizes = sizes.clone();
        }
        if let Some(n) = self.runs_per_cell {
            spec.runs_per_cell = n;
        }
        spec.base_seed = self.base_seed.unwrap_or(world.seed);
        spec.base_config = world;
        Ok(spec)
    }
}

fn parse_resume(s: &str) -> Result<CaResume, ConfigError> {
    match s {
        "frozen" => Ok(CaResume::Frozen),
        "recompute" => Ok(CaResume::Recompute),
        other => Err(ConfigError::invalid(
            "ca_resume",
            format!("expected `frozen` or `recompute`, got `{other}`"),
        )),
    }
}

/// A fully resolved experiment setup.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub world: WorldConfig,
    pub sweep: SweepSpec,
}

/// Resolves the preset, file and command-line seed into a setup.
///
/// The preset comes from `preset_override`, else the file, else
/// `paper-sim`. A `seed` override replaces both the run seed and the sweep
/// base seed.
pub fn resolve(
    file: Option<&ConfigFile>,
    preset_override: Option<Preset>,
    seed: Option<u64>,
) -> Result<Setup, ConfigError> {
    let empty = ConfigFile::default();
    let file = file.unwrap_or(&empty);
    let preset = match preset_override {
        Some(p) => p,
        None => file.preset()?.unwrap_or_default(),
    };
    let mut world = file.apply_world(preset.world())?;
    if let Some(s) = seed {
        world.seed = s;
    }
    let mut sweep = file.apply_sweep(preset.sweep(), world.clone())?;
    if let Some(s) = seed {
        sweep.base_seed = s;
    }
    Ok(Setup { world, sweep })
}
