//! Particle state and the basic particle swarm update rules.
//!
//! Everything here is a pure function of its inputs. Random coefficients are
//! supplied by the caller so that one tick of the swarm is reproducible from
//! the draws alone.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::vec3::Vec3;

/// Separations shorter than this are treated as coincident.
pub const COINCIDENCE_EPS: f64 = 1e-9;

/// Weights of the velocity update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Inertia weight applied to the previous velocity.
    pub omega: f64,
    /// Cognitive weight, attraction to the personal best.
    pub theta1: f64,
    /// Social weight, attraction to the global best.
    pub theta2: f64,
    /// Force-field weight.
    pub theta3: f64,
}

impl Hyperparameters {
    pub const fn new(omega: f64, theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self {
            omega,
            theta1,
            theta2,
            theta3,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("omega", self.omega),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("theta3", self.theta3),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(ConfigError::invalid(
                    name,
                    format!("must be finite and >= 0, got {value}"),
                ));
            }
        }
        Ok(())
    }
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self::new(1.0, 1.0, 1.0, 1.0)
    }
}

/// One agent of the swarm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub best_position: Vec3,
    pub best_fitness: f64,
    /// Body radius in meters; two radii sum to the contact distance of the
    /// gravitational field.
    pub radius: f64,
}

impl ParticleState {
    /// A particle whose personal best is seeded at its starting position.
    pub fn new(position: Vec3, velocity: Vec3, radius: f64, fitness: impl Fn(Vec3) -> f64) -> Self {
        Self {
            position,
            velocity,
            best_position: position,
            best_fitness: fitness(position),
            radius,
        }
    }
}

/// The whole swarm with its centrally shared global best.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    pub particles: Vec<ParticleState>,
    pub global_best_position: Vec3,
    pub global_best_fitness: f64,
    pub tick: u64,
}

impl SwarmState {
    /// Builds a swarm at tick 0 and seeds every best from the current positions.
    ///
    /// # Panics
    /// If `particles` is empty.
    pub fn new(particles: Vec<ParticleState>, fitness: impl Fn(Vec3) -> f64) -> Self {
        assert!(!particles.is_empty(), "a swarm needs at least one particle");
        let mut swarm = Self {
            global_best_position: particles[0].position,
            global_best_fitness: f64::NEG_INFINITY,
            particles,
            tick: 0,
        };
        swarm.reset_bests_with(fitness);
        swarm
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.particles.iter().map(|p| p.position)
    }

    /// Discards all remembered bests and re-seeds them at the current
    /// positions under a new fitness landscape.
    pub fn reset_bests_with(&mut self, fitness: impl Fn(Vec3) -> f64) {
        for p in &mut self.particles {
            p.best_position = p.position;
            p.best_fitness = fitness(p.position);
        }
        self.global_best_fitness = f64::NEG_INFINITY;
        self.refresh_global_best();
    }

    pub fn reset_bests(&mut self, goal: Vec3) {
        self.reset_bests_with(|x| fitness(x, goal));
    }

    /// Replaces each personal best the current position strictly improves
    /// on, then refreshes the global best. Incumbents win ties.
    pub fn update_bests_with(&mut self, fitness: impl Fn(Vec3) -> f64) {
        for p in &mut self.particles {
            let f = fitness(p.position);
            if f > p.best_fitness {
                p.best_fitness = f;
                p.best_position = p.position;
            }
        }
        self.refresh_global_best();
    }

    pub fn update_bests(&mut self, goal: Vec3) {
        self.update_bests_with(|x| fitness(x, goal));
    }

    fn refresh_global_best(&mut self) {
        for p in &self.particles {
            if p.best_fitness > self.global_best_fitness {
                self.global_best_fitness = p.best_fitness;
                self.global_best_position = p.best_position;
            }
        }
    }
}

/// Negative distance to the goal; the maximum, zero, is attained at the goal.
pub fn fitness(x: Vec3, goal: Vec3) -> f64 {
    -(goal - x).norm()
}

/// Inertia plus cognitive and social attraction. `r1` and `r2` hold the
/// per-component random coefficients in `[0, 1]`.
pub fn pso_velocity(
    state: &ParticleState,
    global_best: Vec3,
    h: &Hyperparameters,
    r1: Vec3,
    r2: Vec3,
) -> Vec3 {
    let cognitive = r1.hadamard(state.best_position - state.position) * h.theta1;
    let social = r2.hadamard(global_best - state.position) * h.theta2;
    state.velocity * h.omega + cognitive + social
}

/// Moves a position by one tick of velocity.
pub fn apply_velocity(x: Vec3, v_next: Vec3) -> Vec3 {
    x + v_next
}

/// Unit vector pointing from `xk` to `xi`.
///
/// When the two positions coincide a fixed direction is derived from the
/// index pair instead. The fallback for `(k, i)` is the negation of the one
/// for `(i, k)`, so pairwise kernels stay antisymmetric even on overlap.
pub fn unit_separation(xi: Vec3, xk: Vec3, i: usize, k: usize) -> Vec3 {
    let r = xi - xk;
    let d = r.norm();
    if d < COINCIDENCE_EPS {
        fallback_direction(i, k)
    } else {
        r * (1.0 / d)
    }
}

fn fallback_direction(i: usize, k: usize) -> Vec3 {
    let (lo, hi, sign) = if i <= k { (i, k, 1.0) } else { (k, i, -1.0) };
    let mut state = ((lo as u64) << 32) ^ (hi as u64) ^ 0x5EED_F1E1_D000_0000;
    let mut component = || {
        state = splitmix64(state);
        // Top 53 bits mapped onto [-1, 1).
        (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    };
    let v = Vec3::new(component(), component(), component());
    let n = v.norm();
    let dir = if n > 1e-6 {
        v * (1.0 / n)
    } else {
        Vec3::new(1.0, 0.0, 0.0)
    };
    dir * sign
}

/// The splitmix64 output function, a bijection on `u64`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-9;

    fn close(a: Vec3, b: Vec3) -> bool {
        (a - b).norm() < EPS
    }

    fn particle(pos: Vec3, vel: Vec3, best: Vec3) -> ParticleState {
        ParticleState {
            position: pos,
            velocity: vel,
            best_position: best,
            best_fitness: 0.0,
            radius: 0.0,
        }
    }

    #[test]
    fn unit_separation_examples() {
        let u = unit_separation(Vec3::new(2.0, 0.0, 0.0), Vec3::ZERO, 0, 1);
        assert!(close(u, Vec3::new(1.0, 0.0, 0.0)));

        let u = unit_separation(Vec3::ZERO, Vec3::new(1.0, 1.0, 0.0), 0, 1);
        let h = 1.0 / 2f64.sqrt();
        assert!(close(u, Vec3::new(-h, -h, 0.0)));

        let p = Vec3::splat(5.0);
        let u = unit_separation(p, p, 3, 7);
        assert!((u.norm() - 1.0).abs() < EPS);
        assert!(u.is_finite());
        assert_eq!(u, unit_separation(p, p, 3, 7));
        assert!(close(unit_separation(p, p, 7, 3), -u));
    }

    #[test]
    fn fallback_differs_between_pairs() {
        assert_ne!(fallback_direction(0, 1), fallback_direction(0, 2));
        assert_ne!(fallback_direction(0, 1), fallback_direction(1, 2));
    }

    #[test]
    fn fitness_examples() {
        let g1 = Vec3::new(3.0, 5.0, 2.5);
        let g2 = Vec3::new(7.0, 5.0, 2.5);
        assert_eq!(fitness(g1, g1), 0.0);
        assert_eq!(fitness(Vec3::new(3.0, 1.0, 2.5), g1), -4.0);
        assert_eq!(fitness(g1, g2), -4.0);
    }

    #[test]
    fn pso_velocity_pure_inertia() {
        let h = Hyperparameters::new(1.0, 0.0, 0.0, 0.0);
        let s = particle(
            Vec3::splat(1.0),
            Vec3::new(0.3, -0.1, 0.0),
            Vec3::splat(9.0),
        );
        let v = pso_velocity(
            &s,
            Vec3::splat(-4.0),
            &h,
            Vec3::splat(0.7),
            Vec3::splat(0.2),
        );
        assert!(close(v, Vec3::new(0.3, -0.1, 0.0)));
    }

    #[test]
    fn pso_velocity_attraction_vanishes_at_best() {
        let x = Vec3::new(1.0, 2.0, 3.0);
        let h = Hyperparameters::new(0.5, 1.7, 0.9, 0.0);
        let s = particle(x, Vec3::new(2.0, 0.0, 0.0), x);
        let v = pso_velocity(&s, x, &h, Vec3::splat(0.3), Vec3::splat(0.8));
        assert!(close(v, Vec3::new(1.0, 0.0, 0.0)));
    }

    #[test]
    fn pso_velocity_hand_evaluated() {
        let h = Hyperparameters::new(1.0, 1.0, 1.0, 0.0);
        let s = particle(Vec3::ZERO, Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0));
        let v = pso_velocity(
            &s,
            Vec3::new(0.0, 2.0, 0.0),
            &h,
            Vec3::splat(1.0),
            Vec3::splat(1.0),
        );
        assert!(close(v, Vec3::new(1.0, 2.0, 0.0)));
    }

    #[test]
    fn apply_velocity_examples() {
        let x = apply_velocity(Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.1, -0.2, 0.0));
        assert!(close(x, Vec3::new(1.1, 1.8, 3.0)));
        assert_eq!(
            apply_velocity(Vec3::splat(4.0), Vec3::ZERO),
            Vec3::splat(4.0)
        );
        let v = Vec3::splat(1.0);
        assert!(close(
            apply_velocity(apply_velocity(Vec3::ZERO, v), v),
            Vec3::splat(2.0)
        ));
    }

    fn swarm_at(positions: &[Vec3], goal: Vec3) -> SwarmState {
        let particles = positions
            .iter()
            .map(|&p| ParticleState::new(p, Vec3::ZERO, 0.0, |x| fitness(x, goal)))
            .collect();
        SwarmState::new(particles, |x| fitness(x, goal))
    }

    #[test]
    fn update_bests_particle_at_goal() {
        let goal = Vec3::new(3.0, 5.0, 2.5);
        let mut swarm = swarm_at(&[Vec3::ZERO, Vec3::splat(1.0)], goal);
        swarm.particles[1].position = goal;
        swarm.update_bests(goal);
        assert_eq!(swarm.particles[1].best_position, goal);
        assert_eq!(swarm.particles[1].best_fitness, 0.0);
        assert_eq!(swarm.global_best_fitness, 0.0);
        assert_eq!(swarm.global_best_position, goal);
    }

    #[test]
    fn update_bests_no_improvement_is_noop() {
        let goal = Vec3::ZERO;
        let mut swarm = swarm_at(&[Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 3.0, 0.0)], goal);
        let before = swarm.clone();
        swarm.particles[0].position = Vec3::new(2.0, 0.0, 0.0);
        swarm.update_bests(goal);
        assert_eq!(
            swarm.particles[0].best_position,
            before.particles[0].best_position
        );
        assert_eq!(swarm.global_best_position, before.global_best_position);
        assert_eq!(swarm.global_best_fitness, before.global_best_fitness);
    }

    #[test]
    fn update_bests_picks_highest_fitness() {
        let goal = Vec3::ZERO;
        let swarm = swarm_at(&[Vec3::new(5.0, 0.0, 0.0), Vec3::new(0.0, -2.0, 0.0)], goal);
        assert_eq!(swarm.global_best_fitness, -2.0);
        assert_eq!(swarm.global_best_position, Vec3::new(0.0, -2.0, 0.0));
    }

    #[test]
    fn ties_keep_incumbent() {
        let goal = Vec3::ZERO;
        let mut swarm = swarm_at(&[Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0)], goal);
        assert_eq!(swarm.global_best_position, Vec3::new(2.0, 0.0, 0.0));
        swarm.particles[1].position = Vec3::new(0.0, 0.0, 2.0);
        swarm.update_bests(goal);
        assert_eq!(swarm.particles[1].best_position, Vec3::new(0.0, 2.0, 0.0));
        assert_eq!(swarm.global_best_position, Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn hyperparameters_reject_negative_and_nan() {
        assert!(Hyperparameters::default().validate().is_ok());
        assert!(Hyperparameters::new(-0.1, 1.0, 1.0, 1.0)
            .validate()
            .is_err());
        assert!(Hyperparameters::new(1.0, f64::NAN, 1.0, 1.0)
            .validate()
            .is_err());
        assert!(Hyperparameters::new(1.0, 1.0, 1.0, f64::INFINITY)
            .validate()
            .is_err());
    }
}
