//! Batches of independent runs over an (algorithm, swarm size) grid.

use std::collections::HashSet;

use ffpso::sim::{run, AlgorithmSpec, RunResult, WorldConfig};
use ffpso::swarm::splitmix64;
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::stats::{CellStats, SweepStats};

/// Runs per cell in the shipped reproduction preset.
pub const DEFAULT_RUNS_PER_CELL: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub algorithms: Vec<AlgorithmSpec>,
    pub swarm_sizes: Vec<usize>,
    pub runs_per_cell: u64,
    /// Template for every run; algorithm, swarm size and seed are replaced
    /// per run.
    pub base_config: WorldConfig,
    pub base_seed: u64,
}

impl SweepSpec {
    /// All four algorithms, swarm sizes 2 to 10, 100 runs per cell.
    pub fn reproduction(base_config: WorldConfig) -> Self {
        Self {
            algorithms: AlgorithmSpec::all(),
            swarm_sizes: (2..=10).collect(),
            runs_per_cell: DEFAULT_RUNS_PER_CELL,
            base_seed: base_config.seed,
            base_config,
        }
    }

    /// The config of one cell, with the seed of run `run_index`.
    pub fn run_config(
        &self,
        algorithm_index: usize,
        swarm_size: usize,
        run_index: u64,
    ) -> WorldConfig {
        WorldConfig {
            algorithm: self.algorithms[algorithm_index],
            swarm_size,
            seed: run_seed(self.base_seed, algorithm_index, swarm_size, run_index),
            record_trajectory: false,
            ..self.base_config.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(HarnessError::Sweep("no algorithms given".into()));
        }
        if self.swarm_sizes.is_empty() {
            return Err(HarnessError::Sweep("no swarm sizes given".into()));
        }
        if self.runs_per_cell < 1 {
            return Err(HarnessError::Sweep(
                "runs_per_cell must be at least 1".into(),
            ));
        }
        if self.algorithms.len() > MAX_ALGORITHMS {
            return Err(HarnessError::Sweep(format!(
                "at most {MAX_ALGORITHMS} algorithms"
            )));
        }
        if self.runs_per_cell > MAX_RUNS {
            return Err(HarnessError::Sweep(format!(
                "at most {MAX_RUNS} runs per cell"
            )));
        }
        for (ai, alg) in self.algorithms.iter().enumerate() {
            for &size in &self.swarm_sizes {
                if size > MAX_SWARM_SIZE {
                    return Err(HarnessError::Sweep(format!(
                        "swarm size {size} exceeds {MAX_SWARM_SIZE}"
                    )));
                }
                self.run_config(ai, size, 0)
                    .validate()
                    .map_err(|source| HarnessError::Cell {
                        algorithm: alg.label().to_string(),
                        swarm_size: size,
                        source,
                    })?;
            }
        }
        let seeds = self.seeds().count();
        let distinct: HashSet<u64> = self.seeds().collect();
        if distinct.len() != seeds {
            return Err(HarnessError::Sweep(format!(
                "{} of {seeds} run seeds collide",
                seeds - distinct.len()
            )));
        }
        Ok(())
    }

    /// Every per-run seed in grid order.
    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        self.grid()
            .map(|(ai, size, run)| run_seed(self.base_seed, ai, size, run))
    }

    /// `(algorithm index, swarm size, run index)` in algorithm-major,
    /// size-minor, run-innermost order.
    fn grid(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (0..self.algorithms.len()).flat_map(move |ai| {
            self.swarm_sizes
                .iter()
                .flat_map(move |&size| (0..self.runs_per_cell).map(move |run| (ai, size, run)))
        })
    }
}

const MAX_ALGORITHMS: usize = 1 << 16;
const MAX_SWARM_SIZE: usize = (1 << 16) - 1;
const MAX_RUNS: u64 = 1 << 32;

/// Seed of one run: the base seed offset by the packed grid coordinates
/// (16 bits algorithm, 16 bits size, 32 bits run) and passed through the
/// splitmix64 finalizer. For a fixed base seed this is injective over the
/// grid, since the packing is injective and splitmix64 is a bijection.
pub fn run_seed(base_seed: u64, algorithm_index: usize, swarm_size: usize, run_index: u64) -> u64 {
    let packed = ((algorithm_index as u64) << 48) | ((swarm_size as u64) << 32) | run_index;
    splitmix64(base_seed.wrapping_add(packed))
}

/// Executes every run of the sweep on up to `parallelism` threads and
/// aggregates per cell. The statistics do not depend on `parallelism`.
pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<SweepStats> {
    spec.validate()?;
    if parallelism < 1 {
        return Err(HarnessError::Usage("parallelism must be at least 1".into()));
    }
    let jobs: Vec<(usize, usize, u64)> = spec.grid().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| HarnessError::Sweep(format!("thread pool: {e}")))?;
    // Indexed collect keeps grid order whatever the scheduling.
    let results: Vec<RunResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(ai, size, r)| run(&spec.run_config(ai, size, r)).expect("validated above"))
            .collect()
    });

    let per_cell = spec.runs_per_cell as usize;
    let max_ticks = spec.base_config.max_ticks;
    let mut chunks = results.chunks(per_cell);
    let mut cells = Vec::with_capacity(spec.algorithms.len() * spec.swarm_sizes.len());
    for alg in &spec.algorithms {
        for &size in &spec.swarm_sizes {
            let chunk = chunks.next().expect("one chunk per cell");
            cells.push(CellStats::from_runs(alg.label(), size, chunk, max_ticks));
        }
    }
    Ok(SweepStats { cells })
}
