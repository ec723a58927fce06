use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::vec3::Vec3;

/// Counts contact episodes between particle pairs.
///
/// A pair is in contact while its separation is below the crash radius. An
/// episode is counted when a pair goes from not touching to touching, so a
/// pair that stays in contact for many ticks counts once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashTracker {
    crash_radius: f64,
    overlapping: BTreeSet<(usize, usize)>,
    episodes: u64,
    overlap_ticks: u64,
}

impl CrashTracker {
    pub fn new(crash_radius: f64) -> Self {
        Self {
            crash_radius,
            overlapping: BTreeSet::new(),
            episodes: 0,
            overlap_ticks: 0,
        }
    }

    /// Marks the pairs already in contact at placement without counting them.
    pub fn prime(&mut self, positions: &[Vec3]) {
        self.overlapping = touching_pairs(positions, self.crash_radius).collect();
    }

    /// Folds in the positions after one tick.
    pub fn update(&mut self, positions: &[Vec3]) {
        let now: BTreeSet<(usize, usize)> = touching_pairs(positions, self.crash_radius).collect();
        self.episodes += now.difference(&self.overlapping).count() as u64;
        self.overlap_ticks += now.len() as u64;
        self.overlapping = now;
    }

    /// Number of contact episodes so far.
    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    /// Sum over ticks of the number of pairs in contact.
    pub fn overlap_ticks(&self) -> u64 {
        self.overlap_ticks
    }

    pub fn overlapping(&self) -> &BTreeSet<(usize, usize)> {
        &self.overlapping
    }
}

fn touching_pairs(positions: &[Vec3], radius: f64) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..positions.len()).flat_map(move |i| {
        ((i + 1)..positions.len())
            .filter(move |&k| positions[i].distance(positions[k]) < radius)
            .map(move |k| (i, k))
    })
}
