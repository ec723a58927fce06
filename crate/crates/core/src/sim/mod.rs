//! The kinematic world: arena, random placement, stepping, contact counting
//! and the sequential-goal protocol.

mod config;
mod crash;
mod world;

pub use config::{AlgorithmSpec, RandomMode, WorldConfig, PAPER_SIM_MAX_SPEED};
pub use crash::CrashTracker;
pub use world::{
    advance, check_goal, confine, init_run, particle_rng, run, Draw, RunResult, Simulation,
    TrajectoryRow,
};
