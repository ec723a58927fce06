//! Particle swarm goal search with inter-agent force fields.
//!
//! The crate provides the plain particle swarm update, two repulsive
//! force-field variants (linear and inverse-power), a suspend-and-repel
//! collision-avoidance baseline, and a deterministic kinematic world that
//! runs any of them against a sequence of goals in a bounded 3-D arena.
//!
//! ```
//! use ffpso::sim::{run, AlgorithmSpec, WorldConfig};
//!
//! let config = WorldConfig::paper_sim()
//!     .with_algorithm(AlgorithmSpec::ffpso_grav())
//!     .with_swarm_size(6)
//!     .with_seed(42);
//! let result = run(&config).unwrap();
//! assert_eq!(result.ticks_to_goal.len(), 2);
//! ```

pub mod avoidance;
pub mod error;
pub mod field;
pub mod sim;
pub mod swarm;
pub mod vec3;

pub use error::ConfigError;
pub use vec3::Vec3;
