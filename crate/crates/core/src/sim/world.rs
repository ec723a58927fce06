use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::avoidance::{ca_step, CaMode};
use crate::error::ConfigError;
use crate::field::{ff_total, ffpso_velocity};
use crate::sim::config::{RandomMode, WorldConfig};
use crate::sim::crash::CrashTracker;
use crate::swarm::{apply_velocity, fitness, pso_velocity, ParticleState, SwarmState};
use crate::vec3::Vec3;

/// Random coefficients consumed by one particle in one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub r1: Vec3,
    pub r2: Vec3,
}

impl Draw {
    pub const fn constant(r: f64) -> Self {
        Self {
            r1: Vec3::splat(r),
            r2: Vec3::splat(r),
        }
    }
}

/// One line of a trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub tick: u64,
    pub particle: usize,
    pub position: Vec3,
    pub velocity: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Tick at which each goal was found, `None` if it never was.
    pub ticks_to_goal: Vec<Option<u64>>,
    pub total_crash_episodes: u64,
    /// Pair-ticks spent in contact.
    pub overlap_ticks: u64,
    pub both_goals_found: bool,
    /// Tick at which the run stopped.
    pub ticks_run: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectoryRow>>,
}

impl RunResult {
    /// Ticks until the last goal was found, or `max_ticks` when any goal was
    /// missed.
    pub fn ticks_to_all_goals(&self, max_ticks: u64) -> u64 {
        if self.both_goals_found {
            self.ticks_to_goal
                .last()
                .copied()
                .flatten()
                .unwrap_or(max_ticks)
        } else {
            max_ticks
        }
    }
}

/// The per-particle generator: the run seed selects the key and the particle
/// index selects the stream.
pub fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn sample_particle(rng: &mut ChaCha8Rng, config: &WorldConfig) -> (Vec3, Vec3) {
    let (lo, hi) = (config.arena_min, config.arena_max);
    let position = Vec3::new(
        rng.random_range(lo.x..=hi.x),
        rng.random_range(lo.y..=hi.y),
        rng.random_range(lo.z..=hi.z),
    );
    // Uniform direction on the sphere: z uniform on [-1, 1], azimuth uniform.
    let z: f64 = rng.random_range(-1.0..=1.0);
    let azimuth: f64 = rng.random_range(0.0..TAU);
    let planar = (1.0 - z * z).max(0.0).sqrt();
    let direction = Vec3::new(planar * azimuth.cos(), planar * azimuth.sin(), z);
    // 1 - [0, 1) gives (0, 1].
    let speed = config.init_speed * (1.0 - rng.random::<f64>());
    (position, direction * speed)
}

fn draw(rng: &mut ChaCha8Rng, mode: RandomMode) -> Draw {
    match mode {
        RandomMode::PerDimension => {
            let mut v = || Vec3::new(rng.random(), rng.random(), rng.random());
            let r1 = v();
            let r2 = v();
            Draw { r1, r2 }
        }
        RandomMode::Scalar => {
            let r1 = Vec3::splat(rng.random());
            let r2 = Vec3::splat(rng.random());
            Draw { r1, r2 }
        }
    }
}

fn initial_state(config: &WorldConfig) -> (SwarmState, Vec<ChaCha8Rng>) {
    let goal = config.goals[0];
    let mut rngs: Vec<ChaCha8Rng> = (0..config.swarm_size)
        .map(|i| particle_rng(config.seed, i))
        .collect();
    let particles = rngs
        .iter_mut()
        .map(|rng| {
            let (x, v) = sample_particle(rng, config);
            ParticleState::new(x, v, config.particle_radius, |p| fitness(p, goal))
        })
        .collect();
    (SwarmState::new(particles, |p| fitness(p, goal)), rngs)
}

/// Places the swarm at random for the first goal. The result depends only
/// on the config, seed included.
pub fn init_run(config: &WorldConfig) -> Result<SwarmState, ConfigError> {
    config.validate()?;
    Ok(initial_state(config).0)
}

/// True when some particle is within `detection_radius` of `goal`.
pub fn check_goal(swarm: &SwarmState, goal: Vec3, detection_radius: f64) -> bool {
    swarm
        .positions()
        .any(|x| x.distance(goal) <= detection_radius)
}

/// Clamps `x` into the arena, zeroing each velocity component that pushed
/// it through a face.
pub fn confine(mut x: Vec3, mut v: Vec3, lo: Vec3, hi: Vec3) -> (Vec3, Vec3) {
    fn axis(x: &mut f64, v: &mut f64, lo: f64, hi: f64) {
        if *x < lo {
            *x = lo;
            *v = 0.0;
        } else if *x > hi {
            *x = hi;
            *v = 0.0;
        }
    }
    axis(&mut x.x, &mut v.x, lo.x, hi.x);
    axis(&mut x.y, &mut v.y, lo.y, hi.y);
    axis(&mut x.z, &mut v.z, lo.z, hi.z);
    (x, v)
}

/// Computes every particle's next position and velocity from one snapshot.
///
/// All particles read the same pre-step state, so the result does not
/// depend on the order particles are visited in.
pub fn advance(
    snapshot: &SwarmState,
    modes: &[CaMode],
    config: &WorldConfig,
    draws: &[Draw],
) -> (Vec<ParticleState>, Vec<CaMode>) {
    let field = config.field();
    let avoidance = config.avoidance();
    let g = snapshot.global_best_position;
    let mut next_modes = modes.to_vec();

    let particles = snapshot
        .particles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let Draw { r1, r2 } = draws[i];
            let mut v = match (&field, &avoidance) {
                (Some(spec), _) => {
                    let ff = ff_total(i, &snapshot.particles, spec);
                    ffpso_velocity(p, g, &config.hyper, r1, r2, ff)
                }
                (None, Some(params)) => {
                    let search = pso_velocity(p, g, &config.hyper, r1, r2);
                    let (v, mode) = ca_step(i, snapshot, modes, params, search);
                    next_modes[i] = mode;
                    v
                }
                (None, None) => pso_velocity(p, g, &config.hyper, r1, r2),
            };
            if let Some(limit) = config.max_speed {
                v = v.clamp_norm(limit);
            }
            let (x, v) = confine(
                apply_velocity(p.position, v),
                v,
                config.arena_min,
                config.arena_max,
            );
            ParticleState {
                position: x,
                velocity: v,
                ..*p
            }
        })
        .collect();
    (particles, next_modes)
}

/// A single run in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: WorldConfig,
    swarm: SwarmState,
    modes: Vec<CaMode>,
    tracker: CrashTracker,
    rngs: Vec<ChaCha8Rng>,
    goal_index: usize,
    ticks_to_goal: Vec<Option<u64>>,
    trajectory: Option<Vec<TrajectoryRow>>,
}

impl Simulation {
    pub fn new(config: WorldConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let (swarm, rngs) = initial_state(&config);
        Ok(Self::assemble(config, swarm, rngs))
    }

    /// Starts from an explicit swarm instead of a random placement. The
    /// swarm's bests are re-seeded for the first goal.
    pub fn from_swarm(config: WorldConfig, mut swarm: SwarmState) -> Result<Self, ConfigError> {
        let config = WorldConfig {
            swarm_size: swarm.len(),
            ..config
        };
        config.validate()?;
        swarm.reset_bests(config.goals[0]);
        let rngs = (0..swarm.len())
            .map(|i| particle_rng(config.seed, i))
            .collect();
        Ok(Self::assemble(config, swarm, rngs))
    }

    fn assemble(config: WorldConfig, swarm: SwarmState, rngs: Vec<ChaCha8Rng>) -> Self {
        let mut tracker = CrashTracker::new(config.crash_radius);
        tracker.prime(&swarm.positions().collect::<Vec<_>>());
        let mut sim = Self {
            modes: vec![CaMode::Searching; swarm.len()],
            ticks_to_goal: vec![None; config.goals.len()],
            trajectory: config.record_trajectory.then(Vec::new),
            goal_index: 0,
            tracker,
            rngs,
            swarm,
            config,
        };
        sim.record();
        sim
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn swarm(&self) -> &SwarmState {
        &self.swarm
    }

    pub fn modes(&self) -> &[CaMode] {
        &self.modes
    }

    pub fn tracker(&self) -> &CrashTracker {
        &self.tracker
    }

    /// The goal currently being searched for, `None` once all are found.
    pub fn active_goal(&self) -> Option<Vec3> {
        self.config.goals.get(self.goal_index).copied()
    }

    pub fn is_finished(&self) -> bool {
        self.active_goal().is_none() || self.swarm.tick >= self.config.max_ticks
    }

    /// Draws this tick's coefficients from each particle's stream and steps.
    pub fn step(&mut self) {
        let mode = self.config.random_mode;
        let draws: Vec<Draw> = self.rngs.iter_mut().map(|rng| draw(rng, mode)).collect();
        self.step_with(&draws);
    }

    /// Steps with caller-supplied coefficients, one per particle.
    pub fn step_with(&mut self, draws: &[Draw]) {
        assert_eq!(draws.len(), self.swarm.len(), "one draw per particle");
        let (particles, modes) = advance(&self.swarm, &self.modes, &self.config, draws);
        self.swarm.particles = particles;
        self.modes = modes;
        self.swarm.tick += 1;
        if let Some(goal) = self.active_goal() {
            self.swarm.update_bests(goal);
        }
        let positions: Vec<Vec3> = self.swarm.positions().collect();
        self.tracker.update(&positions);
        self.record();
    }

    /// Registers every goal detected at the current tick. A newly presented
    /// goal resets all bests.
    pub fn detect_goals(&mut self) {
        while let Some(goal) = self.active_goal() {
            if !check_goal(&self.swarm, goal, self.config.detection_radius) {
                break;
            }
            self.ticks_to_goal[self.goal_index] = Some(self.swarm.tick);
            self.goal_index += 1;
            if let Some(next) = self.active_goal() {
                self.swarm.reset_bests(next);
            }
        }
    }

    /// Runs the sequential-goal protocol to completion.
    pub fn run_to_end(mut self) -> RunResult {
        loop {
            self.detect_goals();
            if self.is_finished() {
                break;
            }
            self.step();
        }
        self.into_result()
    }

    pub fn into_result(self) -> RunResult {
        RunResult {
            both_goals_found: self.ticks_to_goal.iter().all(Option::is_some),
            ticks_to_goal: self.ticks_to_goal,
            total_crash_episodes: self.tracker.episodes(),
            overlap_ticks: self.tracker.overlap_ticks(),
            ticks_run: self.swarm.tick,
            trajectory: self.trajectory,
        }
    }

    fn record(&mut self) {
        if let Some(rows) = &mut self.trajectory {
            let tick = self.swarm.tick;
            rows.extend(
                self.swarm
                    .particles
                    .iter()
                    .enumerate()
                    .map(|(i, p)| TrajectoryRow {
                        tick,
                        particle: i,
                        position: p.position,
                        velocity: p.velocity,
                    }),
            );
        }
    }
}

/// Runs one complete experiment.
pub fn run(config: &WorldConfig) -> Result<RunResult, ConfigError> {
    Ok(Simulation::new(config.clone())?.run_to_end())
}
