//! Randomised invariants of the kernels, the avoidance rule and the
//! simulation loop.

use ffpso::avoidance::CaMode;
use ffpso::field::{grav_strength, linear_strength, FieldSpec};
use ffpso::sim::{run, AlgorithmSpec, CrashTracker, Draw, RandomMode, Simulation, WorldConfig};
use ffpso::swarm::{
    fitness, pso_velocity, unit_separation, Hyperparameters, ParticleState, SwarmState,
};
use ffpso::Vec3;
use proptest::prelude::*;

const CASES: u32 = 1000;

fn vec3(lo: f64, hi: f64) -> impl Strategy<Value = Vec3> {
    (lo..hi, lo..hi, lo..hi).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

/// A point inside the default arena.
fn arena_point() -> impl Strategy<Value = Vec3> {
    (0.0..10.0, 0.0..10.0, 0.0..5.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn field_spec() -> impl Strategy<Value = FieldSpec> {
    prop_oneof![
        (0.05..5.0f64).prop_map(FieldSpec::linear),
        (0.05..5.0f64, 0.5..3.0f64).prop_map(|(s, p)| FieldSpec::gravitational(s, p)),
    ]
}

fn at(x: Vec3, radius: f64) -> ParticleState {
    ParticleState::new(x, Vec3::ZERO, radius, |_| 0.0)
}

fn swarm_of(points: &[(Vec3, Vec3)], goal: Vec3) -> SwarmState {
    let particles = points
        .iter()
        .map(|&(x, v)| ParticleState::new(x, v, 0.0, |p| fitness(p, goal)))
        .collect();
    SwarmState::new(particles, |p| fitness(p, goal))
}

fn ca_world() -> WorldConfig {
    WorldConfig::paper_sim().with_algorithm(AlgorithmSpec::pso_ca())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn field_is_antisymmetric(spec in field_spec(), a in vec3(0.0, 3.0), b in vec3(0.0, 3.0), r in 0.0..0.05f64) {
        let (pa, pb) = (at(a, r), at(b, r));
        let ab = spec.kernel(0, &pa, 1, &pb);
        let ba = spec.kernel(1, &pb, 0, &pa);
        prop_assert!((ab + ba).norm() <= 1e-12 * (1.0 + ab.norm()), "{ab:?} vs {ba:?}");
    }

    #[test]
    fn coincident_field_is_antisymmetric(spec in field_spec(), a in vec3(0.0, 3.0), i in 0usize..50, k in 0usize..50) {
        prop_assume!(i != k);
        let p = at(a, 0.0);
        let ik = spec.kernel(i, &p, k, &p);
        let ki = spec.kernel(k, &p, i, &p);
        prop_assert_eq!(ik, -ki);
    }

    #[test]
    fn linear_kernel_is_continuous_at_range(s in 0.01..10.0f64) {
        let inside = linear_strength(s - 1e-6, s);
        let outside = linear_strength(s + 1e-6, s);
        prop_assert!((inside - outside).abs() < 1e-5);
        prop_assert_eq!(linear_strength(s, s), 0.0);
    }

    #[test]
    fn linear_strength_strictly_decreases(s in 0.01..10.0f64, u in 0.0..1.0f64, w in 0.0..1.0f64) {
        let (lo, hi) = if u < w { (u, w) } else { (w, u) };
        prop_assume!(lo > 0.0 && hi - lo > 1e-9 && hi < 1.0);
        prop_assert!(linear_strength(lo * s, s) > linear_strength(hi * s, s));
    }

    #[test]
    fn gravitational_strength_strictly_decreases_below_cap(
        s in 0.1..10.0f64,
        contact in 0.0..0.05f64,
        p in 0.5..3.0f64,
        u in 0.0..1.0f64,
        w in 0.0..1.0f64,
    ) {
        let cap = 1e3;
        let (lo, hi) = if u < w { (u, w) } else { (w, u) };
        let span = s - contact;
        let (d1, d2) = (contact + lo * span, contact + hi * span);
        prop_assume!(d1 > contact && d2 - d1 > 1e-6 * span && d2 < s);
        let (g1, g2) = (grav_strength(d1, contact, s, p, cap), grav_strength(d2, contact, s, p, cap));
        prop_assert!(g1 >= g2);
        if g1 < cap {
            prop_assert!(g1 > g2, "d1={d1} d2={d2} g1={g1} g2={g2}");
        }
    }

    #[test]
    fn field_pushes_away(spec in field_spec(), a in vec3(0.0, 3.0), b in vec3(0.0, 3.0), i in 0usize..8, k in 0usize..8) {
        prop_assume!(i != k);
        let f = spec.kernel(i, &at(a, 0.0), k, &at(b, 0.0));
        prop_assert!(f.dot(unit_separation(a, b, i, k)) >= 0.0);
        prop_assert!(f.is_finite());
    }

    #[test]
    fn unit_separation_has_unit_norm(a in vec3(-50.0, 50.0), b in vec3(-50.0, 50.0), i in 0usize..100, k in 0usize..100) {
        prop_assert!((unit_separation(a, b, i, k).norm() - 1.0).abs() < 1e-9);
        prop_assert!((unit_separation(a, a, i, k).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fitness_is_symmetric(a in vec3(-50.0, 50.0), b in vec3(-50.0, 50.0)) {
        prop_assert_eq!(fitness(a, b), fitness(b, a));
        prop_assert!(fitness(a, b) <= 0.0);
    }

    #[test]
    fn update_bests_is_idempotent_and_monotone(
        start in prop::collection::vec((arena_point(), vec3(-0.1, 0.1)), 2..8),
        moves in prop::collection::vec(prop::collection::vec(vec3(-1.0, 1.0), 8), 1..6),
        goal in arena_point(),
    ) {
        let mut s = swarm_of(&start, goal);
        for step in &moves {
            let before = s.global_best_fitness;
            for (p, &d) in s.particles.iter_mut().zip(step) {
                p.position += d;
            }
            s.update_bests(goal);
            prop_assert!(s.global_best_fitness >= before);
            let once = s.clone();
            s.update_bests(goal);
            prop_assert_eq!(&s, &once);
        }
    }

    #[test]
    fn inertia_only_velocity_is_linear(
        v in vec3(-2.0, 2.0),
        c in -3.0..3.0f64,
        omega in 0.0..2.0f64,
        x in arena_point(),
        pb in arena_point(),
        g in arena_point(),
        r1 in vec3(0.0, 1.0),
        r2 in vec3(0.0, 1.0),
    ) {
        let h = Hyperparameters::new(omega, 0.0, 0.0, 0.0);
        let mut p = ParticleState::new(x, v, 0.0, |_| 0.0);
        p.best_position = pb;
        let base = pso_velocity(&p, g, &h, r1, r2);
        p.velocity = v * c;
        let scaled = pso_velocity(&p, g, &h, r1, r2);
        prop_assert!((scaled - v * (c * omega)).norm() < 1e-12);
        prop_assert!((scaled - base * c).norm() < 1e-12);
    }

    #[test]
    fn tracker_counts_entries(
        steps in prop::collection::vec(prop::collection::vec(vec3(0.0, 0.5), 3), 1..40),
        radius in 0.05..0.3f64,
    ) {
        let mut t = CrashTracker::new(radius);
        t.prime(&steps[0]);
        let touching = |ps: &[Vec3], i: usize, k: usize| ps[i].distance(ps[k]) < radius;
        let pairs = [(0, 1), (0, 2), (1, 2)];
        let mut episodes = 0;
        let mut overlap = 0;
        for w in steps.windows(2) {
            t.update(&w[1]);
            for &(i, k) in &pairs {
                let now = touching(&w[1], i, k);
                if now && !touching(&w[0], i, k) {
                    episodes += 1;
                }
                overlap += u64::from(now);
            }
        }
        prop_assert_eq!(t.episodes(), episodes);
        prop_assert_eq!(t.overlap_ticks(), overlap);
    }

    #[test]
    fn sustained_contact_is_one_episode(n in 1usize..200, gap in 0.0..0.099f64, radius in 0.1..0.2f64) {
        let apart = [Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)];
        let close = [Vec3::ZERO, Vec3::new(gap, 0.0, 0.0)];
        let mut t = CrashTracker::new(radius);
        t.prime(&apart);
        for _ in 0..n {
            t.update(&close);
        }
        t.update(&apart);
        prop_assert_eq!(t.episodes(), 1);
        prop_assert_eq!(t.overlap_ticks(), n as u64);
    }

    #[test]
    fn ca_pair_separates_monotonically(
        a in arena_point(),
        offset in vec3(-0.23, 0.23),
        va in vec3(-0.1, 0.1),
        vb in vec3(-0.1, 0.1),
    ) {
        let b = a + offset;
        prop_assume!(b.within(Vec3::ZERO, Vec3::new(10.0, 10.0, 5.0)));
        let c = ca_world();
        let goal = c.goals[0];
        let mut sim = Simulation::from_swarm(c, swarm_of(&[(a, va), (b, vb)], goal)).unwrap();
        let mut d = a.distance(b);
        for _ in 0..20 {
            let before = sim.swarm().clone();
            sim.step();
            let modes = sim.modes();
            if !(modes[0].is_avoiding() && modes[1].is_avoiding()) {
                break;
            }
            // Escape velocities lie along the pre-step separation.
            let sep = unit_separation(before.particles[0].position, before.particles[1].position, 0, 1);
            let v0 = sim.swarm().particles[0].velocity;
            prop_assert!(v0.dot(sep) >= 0.0);
            let now = sim.swarm().particles[0].position.distance(sim.swarm().particles[1].position);
            prop_assert!(now >= d - 1e-12, "{d} -> {now}");
            d = now;
        }
    }

    #[test]
    fn two_particle_avoidance_never_crashes(
        a in arena_point(),
        b in arena_point(),
        va in vec3(-0.1, 0.1),
        vb in vec3(-0.1, 0.1),
        seed in any::<u64>(),
        max_speed in 0.01..0.14f64,
    ) {
        let c = WorldConfig { max_speed: Some(max_speed), max_ticks: 300, ..ca_world().with_seed(seed) };
        prop_assume!(2.0 * max_speed < c.safety_distance - c.crash_radius);
        let goal = c.goals[0];
        let mut sim = Simulation::from_swarm(c, swarm_of(&[(a, va), (b, vb)], goal)).unwrap();
        while !sim.is_finished() {
            sim.detect_goals();
            if sim.is_finished() {
                break;
            }
            sim.step();
        }
        prop_assert_eq!(sim.tracker().episodes(), 0);
    }
}

fn random_world() -> impl Strategy<Value = WorldConfig> {
    let algorithm = prop_oneof![
        Just(AlgorithmSpec::Pso),
        Just(AlgorithmSpec::pso_ca()),
        Just(AlgorithmSpec::FfpsoLin),
        Just(AlgorithmSpec::ffpso_grav()),
    ];
    (
        algorithm,
        2usize..8,
        any::<u64>(),
        prop::option::of(0.02..3.0f64),
        0.0..1.0f64,
        (0.0..1.2f64, 0.0..2.5f64, 0.0..2.5f64, 0.0..2.0f64),
        prop_oneof![Just(RandomMode::PerDimension), Just(RandomMode::Scalar)],
    )
        .prop_map(
            |(algorithm, swarm_size, seed, max_speed, init_speed, (w, t1, t2, t3), random_mode)| {
                WorldConfig {
                    algorithm,
                    swarm_size,
                    seed,
                    max_speed,
                    init_speed,
                    hyper: Hyperparameters::new(w, t1, t2, t3),
                    random_mode,
                    max_ticks: 40,
                    record_trajectory: true,
                    ..WorldConfig::paper_sim()
                }
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn particles_stay_in_the_arena(c in random_world()) {
        let r = run(&c).unwrap();
        for row in r.trajectory.as_deref().unwrap() {
            prop_assert!(row.position.within(c.arena_min, c.arena_max), "{row:?}");
            prop_assert!(row.velocity.is_finite());
        }
    }

    #[test]
    fn runs_are_deterministic(c in random_world()) {
        prop_assert_eq!(run(&c).unwrap(), run(&c).unwrap());
    }

    #[test]
    fn unweighted_field_reduces_to_pso(c in random_world(), grav in any::<bool>()) {
        let h = Hyperparameters { theta3: 0.0, ..c.hyper };
        let pso = WorldConfig { algorithm: AlgorithmSpec::Pso, hyper: h, ..c.clone() };
        let field = if grav { AlgorithmSpec::ffpso_grav() } else { AlgorithmSpec::FfpsoLin };
        let ff = WorldConfig { algorithm: field, ..pso.clone() };
        prop_assert_eq!(run(&pso).unwrap(), run(&ff).unwrap());
    }

    #[test]
    fn relabelling_particles_permutes_the_step(
        points in prop::collection::vec((arena_point(), vec3(-0.1, 0.1)), 2..7),
        shift in 1usize..6,
        alg in prop_oneof![Just(AlgorithmSpec::Pso), Just(AlgorithmSpec::FfpsoLin), Just(AlgorithmSpec::ffpso_grav())],
        dense in any::<bool>(),
    ) {
        // Dense swarms put most pairs inside the field range.
        let points: Vec<(Vec3, Vec3)> = if dense {
            points.iter().map(|&(x, v)| (Vec3::new(5.0, 5.0, 2.5) + (x - Vec3::new(5.0, 5.0, 2.5)) * 0.05, v)).collect()
        } else {
            points
        };
        let n = points.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let permuted: Vec<(Vec3, Vec3)> = perm.iter().map(|&j| points[j]).collect();
        let c = WorldConfig { max_speed: None, ..WorldConfig::paper_sim().with_algorithm(alg) };
        let goal = c.goals[0];
        let mut a = Simulation::from_swarm(c.clone(), swarm_of(&points, goal)).unwrap();
        let mut b = Simulation::from_swarm(c, swarm_of(&permuted, goal)).unwrap();
        a.step_with(&vec![Draw::constant(0.5); n]);
        b.step_with(&vec![Draw::constant(0.5); n]);
        for (slot, &j) in perm.iter().enumerate() {
            let (pa, pb) = (a.swarm().particles[j], b.swarm().particles[slot]);
            let tol = 1e-9 * (1.0 + pa.velocity.norm());
            prop_assert!((pa.position - pb.position).norm() <= tol, "{:?} vs {:?}", pa.position, pb.position);
            prop_assert!((pa.velocity - pb.velocity).norm() <= tol);
        }
    }
}

#[test]
fn avoiding_modes_always_name_another_particle() {
    for seed in 0..40 {
        let c = ca_world().with_swarm_size(8).with_seed(seed);
        let mut sim = Simulation::new(c).unwrap();
        for _ in 0..150 {
            sim.step();
            for (i, m) in sim.modes().iter().enumerate() {
                if let CaMode::Avoiding { partner, .. } = m {
                    assert_ne!(*partner, i);
                    assert!(*partner < sim.swarm().len());
                }
            }
        }
    }
}
