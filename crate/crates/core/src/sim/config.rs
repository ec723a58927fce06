use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::avoidance::{AvoidanceParams, CaResume, DEFAULT_AVOID_SPEED};
use crate::error::ConfigError;
use crate::field::{FieldKind, FieldSpec, DEFAULT_EXPONENT, DEFAULT_MAGNITUDE_CAP};
use crate::swarm::Hyperparameters;
use crate::vec3::Vec3;

/// Speed limit of the simulated-arena preset, m/tick.
pub const PAPER_SIM_MAX_SPEED: f64 = 0.12;

/// Which motion rule drives the swarm, with the parameters only that rule reads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AlgorithmSpec {
    Pso,
    PsoCa { speed: f64, resume: CaResume },
    FfpsoLin,
    FfpsoGrav { exponent: f64, magnitude_cap: f64 },
}

impl AlgorithmSpec {
    pub const ALL_NAMES: [&'static str; 4] = ["pso", "pso-ca", "ffpso-lin", "ffpso-grav"];

    pub fn pso_ca() -> Self {
        AlgorithmSpec::PsoCa {
            speed: DEFAULT_AVOID_SPEED,
            resume: CaResume::Frozen,
        }
    }

    pub fn ffpso_grav() -> Self {
        AlgorithmSpec::FfpsoGrav {
            exponent: DEFAULT_EXPONENT,
            magnitude_cap: DEFAULT_MAGNITUDE_CAP,
        }
    }

    /// The four algorithms compared in the crash and convergence experiments.
    pub fn all() -> Vec<AlgorithmSpec> {
        vec![
            AlgorithmSpec::Pso,
            AlgorithmSpec::pso_ca(),
            AlgorithmSpec::FfpsoLin,
            AlgorithmSpec::ffpso_grav(),
        ]
    }

    /// Upper-case display label, e.g. `FFPSO-GRAV`.
    pub fn label(&self) -> &'static str {
        match self {
            AlgorithmSpec::Pso => "PSO",
            AlgorithmSpec::PsoCa { .. } => "PSO-CA",
            AlgorithmSpec::FfpsoLin => "FFPSO-LIN",
            AlgorithmSpec::FfpsoGrav { .. } => "FFPSO-GRAV",
        }
    }

    /// Field used by the force-field variants; `None` for the others.
    pub fn field(&self, safety_distance: f64) -> Option<FieldSpec> {
        match *self {
            AlgorithmSpec::FfpsoLin => Some(FieldSpec::linear(safety_distance)),
            AlgorithmSpec::FfpsoGrav {
                exponent,
                magnitude_cap,
            } => Some(FieldSpec {
                kind: FieldKind::Gravitational,
                safety_distance,
                exponent,
                magnitude_cap,
            }),
            _ => None,
        }
    }

    pub fn avoidance(&self, safety_distance: f64) -> Option<AvoidanceParams> {
        match *self {
            AlgorithmSpec::PsoCa { speed, resume } => Some(AvoidanceParams {
                safety_distance,
                speed,
                resume,
            }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            AlgorithmSpec::PsoCa { speed, .. } if !(speed.is_finite() && speed > 0.0) => Err(
                ConfigError::invalid("ca_speed", format!("must be finite and > 0, got {speed}")),
            ),
            AlgorithmSpec::FfpsoGrav { .. } => self.field(1.0).map_or(Ok(()), |f| f.validate()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AlgorithmSpec {
    type Err = ConfigError;

    /// Accepts the names in [`AlgorithmSpec::ALL_NAMES`], case-insensitively,
    /// and fills in default parameters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "pso" => Ok(AlgorithmSpec::Pso),
            "pso-ca" => Ok(AlgorithmSpec::pso_ca()),
            "ffpso-lin" => Ok(AlgorithmSpec::FfpsoLin),
            "ffpso-grav" => Ok(AlgorithmSpec::ffpso_grav()),
            other => Err(ConfigError::invalid(
                "algorithm",
                format!(
                    "unknown algorithm `{other}`, expected one of {}",
                    AlgorithmSpec::ALL_NAMES.join(", ")
                ),
            )),
        }
    }
}

/// How the cognitive and social random coefficients are drawn each tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomMode {
    /// An independent draw for every component.
    #[default]
    PerDimension,
    /// One draw shared by all three components.
    Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub arena_min: Vec3,
    pub arena_max: Vec3,
    /// Presented one at a time, in order.
    pub goals: Vec<Vec3>,
    /// A goal counts as found once a particle is this close to it.
    pub detection_radius: f64,
    /// Pairs closer than this are in contact.
    pub crash_radius: f64,
    pub safety_distance: f64,
    pub max_ticks: u64,
    pub swarm_size: usize,
    pub algorithm: AlgorithmSpec,
    pub hyper: Hyperparameters,
    pub seed: u64,
    /// Optional speed limit applied after the velocity update, m/tick.
    pub max_speed: Option<f64>,
    /// Upper bound of the initial speed, m/tick.
    pub init_speed: f64,
    /// Body radius of every particle, m.
    pub particle_radius: f64,
    pub random_mode: RandomMode,
    /// Keep every position and velocity of the run in the result.
    pub record_trajectory: bool,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            arena_min: Vec3::ZERO,
            arena_max: Vec3::new(10.0, 10.0, 5.0),
            goals: vec![Vec3::new(3.0, 5.0, 2.5), Vec3::new(7.0, 5.0, 2.5)],
            detection_radius: 0.2,
            crash_radius: 0.1,
            safety_distance: 0.4,
            max_ticks: 1200,
            swarm_size: 5,
            algorithm: AlgorithmSpec::FfpsoLin,
            hyper: Hyperparameters::default(),
            seed: 0,
            max_speed: None,
            init_speed: 0.1,
            particle_radius: 0.0,
            random_mode: RandomMode::PerDimension,
            record_trajectory: false,
        }
    }
}

impl WorldConfig {
    /// The simulated arena experiment: 10 m x 10 m x 5 m, goals at
    /// (3, 5, 2.5) then (7, 5, 2.5), all weights 1, S = 0.4 m, 1,200 ticks,
    /// with a 0.12 m/tick (1.2 m/s) speed limit.
    pub fn paper_sim() -> Self {
        Self {
            max_speed: Some(PAPER_SIM_MAX_SPEED),
            ..Self::default()
        }
    }

    pub fn with_algorithm(mut self, algorithm: AlgorithmSpec) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_swarm_size(mut self, swarm_size: usize) -> Self {
        self.swarm_size = swarm_size;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn field(&self) -> Option<FieldSpec> {
        self.algorithm.field(self.safety_distance)
    }

    pub fn avoidance(&self) -> Option<AvoidanceParams> {
        self.algorithm.avoidance(self.safety_distance)
    }

    /// Checks every invariant and reports the first one violated.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.arena_min.is_finite() && self.arena_max.is_finite()) {
            return Err(ConfigError::invalid("arena", "bounds must be finite"));
        }
        if !self.arena_min.all_lt(self.arena_max) {
            return Err(ConfigError::invalid(
                "arena_min",
                format!(
                    "must be below arena_max in every component ({:?} vs {:?})",
                    self.arena_min.to_array(),
                    self.arena_max.to_array()
                ),
            ));
        }
        if self.goals.is_empty() {
            return Err(ConfigError::invalid(
                "goals",
                "at least one goal is required",
            ));
        }
        for (i, g) in self.goals.iter().enumerate() {
            if !(g.is_finite() && g.within(self.arena_min, self.arena_max)) {
                return Err(ConfigError::invalid(
                    "goals",
                    format!("goal {i} at {:?} lies outside the arena", g.to_array()),
                ));
            }
        }
        positive("detection_radius", self.detection_radius)?;
        positive("crash_radius", self.crash_radius)?;
        positive("safety_distance", self.safety_distance)?;
        if self.crash_radius >= self.safety_distance {
            return Err(ConfigError::invalid(
                "crash_radius",
                format!(
                    "must be smaller than safety_distance ({} >= {})",
                    self.crash_radius, self.safety_distance
                ),
            ));
        }
        if self.max_ticks < 1 {
            return Err(ConfigError::invalid("max_ticks", "must be at least 1"));
        }
        if self.swarm_size < 2 {
            return Err(ConfigError::invalid(
                "swarm_size",
                format!("must be at least 2, got {}", self.swarm_size),
            ));
        }
        self.hyper.validate()?;
        self.algorithm.validate()?;
        if let Some(limit) = self.max_speed {
            positive("max_speed", limit)?;
        }
        positive("init_speed", self.init_speed)?;
        if !(self.particle_radius.is_finite() && self.particle_radius >= 0.0) {
            return Err(ConfigError::invalid(
                "particle_radius",
                format!("must be finite and >= 0, got {}", self.particle_radius),
            ));
        }
        Ok(())
    }
}

fn positive(field: &str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            field,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}
