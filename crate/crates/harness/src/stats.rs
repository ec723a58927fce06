//! Per-cell summary statistics and their CSV form.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use ffpso::sim::RunResult;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Column order of the stats CSV.
pub const STATS_HEADER: [&str; 8] = [
    "algorithm",
    "swarm_size",
    "runs",
    "mean_crashes",
    "sd_crashes",
    "mean_ticks",
    "sd_ticks",
    "success_rate",
];

/// Summary of every run in one (algorithm, swarm size) cell.
///
/// A run that misses a goal contributes `max_ticks` to the tick statistics.
/// Standard deviations are sample deviations, zero for a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub algorithm: String,
    pub swarm_size: usize,
    pub runs: u64,
    pub mean_crashes: f64,
    pub sd_crashes: f64,
    pub mean_ticks: f64,
    pub sd_ticks: f64,
    pub success_rate: f64,
}

impl CellStats {
    pub fn from_runs(
        algorithm: &str,
        swarm_size: usize,
        runs: &[RunResult],
        max_ticks: u64,
    ) -> Self {
        let crashes: Vec<f64> = runs.iter().map(|r| r.total_crash_episodes as f64).collect();
        let ticks: Vec<f64> = runs
            .iter()
            .map(|r| r.ticks_to_all_goals(max_ticks) as f64)
            .collect();
        let found = runs.iter().filter(|r| r.both_goals_found).count();
        let (mean_crashes, sd_crashes) = mean_sd(&crashes);
        let (mean_ticks, sd_ticks) = mean_sd(&ticks);
        Self {
            algorithm: algorithm.to_string(),
            swarm_size,
            runs: runs.len() as u64,
            mean_crashes,
            sd_crashes,
            mean_ticks,
            sd_ticks,
            success_rate: if runs.is_empty() {
                0.0
            } else {
                found as f64 / runs.len() as f64
            },
        }
    }
}

/// Arithmetic mean and sample standard deviation, summed in slice order.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    /// Algorithm-major, size-minor.
    pub cells: Vec<CellStats>,
}

impl SweepStats {
    pub fn cell(&self, algorithm: &str, swarm_size: usize) -> Option<&CellStats> {
        self.cells
            .iter()
            .find(|c| c.algorithm == algorithm && c.swarm_size == swarm_size)
    }

    /// Cells of one algorithm in size order as written.
    pub fn series<'a>(&'a self, algorithm: &'a str) -> impl Iterator<Item = &'a CellStats> + 'a {
        self.cells.iter().filter(move |c| c.algorithm == algorithm)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        // Written explicitly so the header is present even with no cells.
        w.write_record(STATS_HEADER)?;
        for cell in &self.cells {
            w.write_record([
                cell.algorithm.clone(),
                cell.swarm_size.to_string(),
                cell.runs.to_string(),
                cell.mean_crashes.to_string(),
                cell.sd_crashes.to_string(),
                cell.mean_ticks.to_string(),
                cell.sd_ticks.to_string(),
                cell.success_rate.to_string(),
            ])?;
        }
        w.flush()
    }

    pub fn read_csv<R: io::Read>(input: R) -> std::result::Result<Self, csv::Error> {
        let mut r = csv::Reader::from_reader(input);
        let cells = r.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(Self { cells })
    }
}

/// Writes `stats` as CSV to `path`.
pub fn write_stats_csv(stats: &SweepStats, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    stats.write_csv(file).map_err(|e| HarnessError::io(path, e))
}

pub fn read_stats_csv(path: &Path) -> Result<SweepStats> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    SweepStats::read_csv(file).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
