//! Suspend-and-repel collision avoidance layered on plain particle swarm motion.
//!
//! A particle that comes within the safety distance of its nearest neighbour
//! stops searching and flies straight away from that neighbour at a fixed
//! speed. Once the pair is clear it picks up its search again.

use serde::{Deserialize, Serialize};

use crate::swarm::{unit_separation, SwarmState};
use crate::vec3::Vec3;

/// Default escape speed in m/tick.
pub const DEFAULT_AVOID_SPEED: f64 = 0.5;

/// What velocity a particle takes when it leaves the avoiding state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaResume {
    /// The velocity it had just before avoidance started.
    #[default]
    Frozen,
    /// A freshly computed swarm velocity.
    Recompute,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum CaMode {
    #[default]
    Searching,
    Avoiding {
        partner: usize,
        /// Velocity held at the moment avoidance began.
        frozen: Vec3,
    },
}

impl CaMode {
    pub fn partner(&self) -> Option<usize> {
        match *self {
            CaMode::Searching => None,
            CaMode::Avoiding { partner, .. } => Some(partner),
        }
    }

    pub fn is_avoiding(&self) -> bool {
        matches!(self, CaMode::Avoiding { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceParams {
    /// Trigger distance in meters.
    pub safety_distance: f64,
    /// Escape speed in m/tick.
    pub speed: f64,
    pub resume: CaResume,
}

/// Nearest other particle within `range` of particle `i`. Lower indices win
/// ties.
pub fn nearest_within(i: usize, swarm: &SwarmState, range: f64) -> Option<(usize, f64)> {
    let xi = swarm.particles[i].position;
    swarm
        .particles
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(k, pk)| (k, xi.distance(pk.position)))
        .filter(|&(_, d)| d <= range)
        .fold(None, |best: Option<(usize, f64)>, cand| match best {
            Some((_, bd)) if bd <= cand.1 => best,
            _ => Some(cand),
        })
}

/// One tick of the avoidance state machine for particle `i`.
///
/// `swarm` is the pre-step snapshot and `modes` the pre-step modes.
/// `search_velocity` is the plain swarm velocity the particle would take if
/// it were searching this tick. Returns the velocity to apply and the
/// particle's next mode.
pub fn ca_step(
    i: usize,
    swarm: &SwarmState,
    modes: &[CaMode],
    params: &AvoidanceParams,
    search_velocity: Vec3,
) -> (Vec3, CaMode) {
    let xi = swarm.particles[i].position;
    let escape = |k: usize| unit_separation(xi, swarm.particles[k].position, i, k) * params.speed;

    match modes[i] {
        CaMode::Avoiding { partner, frozen } => {
            let d = xi.distance(swarm.particles[partner].position);
            if d <= params.safety_distance {
                return (escape(partner), CaMode::Avoiding { partner, frozen });
            }
            // The partner is clear; hand over to the next threat, if any,
            // before resuming the search.
            if let Some((next, _)) = nearest_within(i, swarm, params.safety_distance) {
                return (
                    escape(next),
                    CaMode::Avoiding {
                        partner: next,
                        frozen,
                    },
                );
            }
            let v = match params.resume {
                CaResume::Frozen => frozen,
                CaResume::Recompute => search_velocity,
            };
            (v, CaMode::Searching)
        }
        CaMode::Searching => match nearest_within(i, swarm, params.safety_distance) {
            None => (search_velocity, CaMode::Searching),
            Some((k, _)) => (
                escape(k),
                CaMode::Avoiding {
                    partner: k,
                    frozen: swarm.particles[i].velocity,
                },
            ),
        },
    }
}
