//! Repulsive inter-particle force fields and the force-field velocity update.
//!
//! A field is a pairwise kernel: a scalar strength that depends only on the
//! separation distance, applied along the unit vector pointing away from the
//! neighbour. Beyond the safety distance every kernel is exactly zero.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::swarm::{pso_velocity, unit_separation, Hyperparameters, ParticleState};
use crate::vec3::Vec3;

/// Default saturation of the gravitational kernel, in m/tick.
pub const DEFAULT_MAGNITUDE_CAP: f64 = 1e3;

/// Default decay exponent of the gravitational kernel.
pub const DEFAULT_EXPONENT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Strength `S - d`, falling linearly to zero at the safety distance.
    Linear,
    /// Strength `1 / (d - D)^p`, saturated at the magnitude cap.
    Gravitational,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    /// Range in meters beyond which the field has no effect.
    pub safety_distance: f64,
    /// Decay exponent; only read by the gravitational kernel.
    pub exponent: f64,
    /// Upper bound on one gravitational term, in m/tick.
    pub magnitude_cap: f64,
}

impl FieldSpec {
    pub fn linear(safety_distance: f64) -> Self {
        Self {
            kind: FieldKind::Linear,
            safety_distance,
            exponent: DEFAULT_EXPONENT,
            magnitude_cap: DEFAULT_MAGNITUDE_CAP,
        }
    }

    pub fn gravitational(safety_distance: f64, exponent: f64) -> Self {
        Self {
            kind: FieldKind::Gravitational,
            safety_distance,
            exponent,
            magnitude_cap: DEFAULT_MAGNITUDE_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.safety_distance.is_finite() && self.safety_distance > 0.0) {
            return Err(ConfigError::invalid(
                "safety_distance",
                format!("must be finite and > 0, got {}", self.safety_distance),
            ));
        }
        if !(self.exponent.is_finite() && self.exponent > 0.0) {
            return Err(ConfigError::invalid(
                "exponent",
                format!("must be finite and > 0, got {}", self.exponent),
            ));
        }
        if !(self.magnitude_cap.is_finite() && self.magnitude_cap > 0.0) {
            return Err(ConfigError::invalid(
                "magnitude_cap",
                format!("must be finite and > 0, got {}", self.magnitude_cap),
            ));
        }
        Ok(())
    }

    /// Scalar strength of the kernel at separation `distance` for a pair
    /// whose radii sum to `contact_distance`.
    pub fn strength(&self, distance: f64, contact_distance: f64) -> f64 {
        match self.kind {
            FieldKind::Linear => linear_strength(distance, self.safety_distance),
            FieldKind::Gravitational => grav_strength(
                distance,
                contact_distance,
                self.safety_distance,
                self.exponent,
                self.magnitude_cap,
            ),
        }
    }

    /// Contribution of particle `k` to the field felt by particle `i`.
    pub fn kernel(&self, i: usize, pi: &ParticleState, k: usize, pk: &ParticleState) -> Vec3 {
        let distance = pi.position.distance(pk.position);
        if distance > self.safety_distance {
            return Vec3::ZERO;
        }
        let strength = self.strength(distance, pi.radius + pk.radius);
        unit_separation(pi.position, pk.position, i, k) * strength
    }
}

/// `S - d` inside the safety distance, zero outside.
pub fn linear_strength(distance: f64, safety_distance: f64) -> f64 {
    if distance <= safety_distance {
        safety_distance - distance
    } else {
        0.0
    }
}

/// `min(1 / (d - D)^p, cap)` inside the safety distance, zero outside.
/// At or below the contact distance the strength is exactly `cap`.
///
/// The kernel keeps its value `1 / (S - D)^p` right up to `S` and then drops
/// to zero, so it is discontinuous there.
pub fn grav_strength(
    distance: f64,
    contact_distance: f64,
    safety_distance: f64,
    exponent: f64,
    cap: f64,
) -> f64 {
    if distance > safety_distance {
        return 0.0;
    }
    let gap = distance - contact_distance;
    if gap <= 0.0 {
        return cap;
    }
    gap.powf(-exponent).min(cap)
}

/// Linear field exerted on a particle at `xi` by one at `xk`.
pub fn ff_linear(xi: Vec3, xk: Vec3, safety_distance: f64) -> Vec3 {
    let distance = xi.distance(xk);
    let strength = linear_strength(distance, safety_distance);
    if strength == 0.0 {
        return Vec3::ZERO;
    }
    unit_separation(xi, xk, 0, 1) * strength
}

/// Gravitational field exerted on a particle at `xi` (radius `ri`) by one
/// at `xk` (radius `rk`).
pub fn ff_grav(
    xi: Vec3,
    xk: Vec3,
    ri: f64,
    rk: f64,
    safety_distance: f64,
    exponent: f64,
    cap: f64,
) -> Vec3 {
    let distance = xi.distance(xk);
    let strength = grav_strength(distance, ri + rk, safety_distance, exponent, cap);
    if strength == 0.0 {
        return Vec3::ZERO;
    }
    unit_separation(xi, xk, 0, 1) * strength
}

/// Sum of the fields of every other particle acting on particle `i`,
/// accumulated in index order.
pub fn ff_total(i: usize, particles: &[ParticleState], spec: &FieldSpec) -> Vec3 {
    let pi = &particles[i];
    particles
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .fold(Vec3::ZERO, |acc, (k, pk)| acc + spec.kernel(i, pi, k, pk))
}

/// The particle swarm velocity with an added, weighted force-field term.
pub fn ffpso_velocity(
    state: &ParticleState,
    global_best: Vec3,
    h: &Hyperparameters,
    r1: Vec3,
    r2: Vec3,
    ff: Vec3,
) -> Vec3 {
    pso_velocity(state, global_best, h, r1, r2) + ff * h.theta3
}
