//! Field strength curves and trajectory dumps.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use ffpso::field::FieldSpec;
use ffpso::sim::TrajectoryRow;

use crate::error::{HarnessError, Result};

pub const TRAJECTORY_HEADER: [&str; 8] = ["tick", "particle", "x", "y", "z", "vx", "vy", "vz"];

/// `(distance, strength)` at `samples` evenly spaced distances in
/// `[d_min, d_max]`, for two point particles.
pub fn sample_field_curve(
    spec: &FieldSpec,
    d_min: f64,
    d_max: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    if !(d_min.is_finite() && d_max.is_finite() && 0.0 < d_min && d_min < d_max) {
        return Err(HarnessError::Usage(format!(
            "distance range must satisfy 0 < d_min < d_max, got [{d_min}, {d_max}]"
        )));
    }
    if samples < 2 {
        return Err(HarnessError::Usage(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let step = (d_max - d_min) / (samples - 1) as f64;
    Ok((0..samples)
        .map(|i| {
            let d = if i == samples - 1 {
                d_max
            } else {
                d_min + step * i as f64
            };
            (d, spec.strength(d, 0.0))
        })
        .collect())
}

pub fn write_field_curve<W: Write>(points: &[(f64, f64)], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["distance", "magnitude"])?;
    for (d, m) in points {
        w.write_record([d.to_string(), m.to_string()])?;
    }
    w.flush()
}

/// Samples the kernel and writes `distance,magnitude` CSV to `path`.
pub fn field_curve(
    spec: &FieldSpec,
    d_min: f64,
    d_max: f64,
    samples: usize,
    path: &Path,
) -> Result<()> {
    let points = sample_field_curve(spec, d_min, d_max, samples)?;
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_field_curve(&points, file).map_err(|e| HarnessError::io(path, e))
}

pub fn write_trajectory<W: Write>(rows: &[TrajectoryRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in rows {
        let (x, v) = (r.position, r.velocity);
        w.write_record([
            r.tick.to_string(),
            r.particle.to_string(),
            format!("{:.6}", x.x),
            format!("{:.6}", x.y),
            format!("{:.6}", x.z),
            format!("{:.6}", v.x),
            format!("{:.6}", v.y),
            format!("{:.6}", v.z),
        ])?;
    }
    w.flush()
}

pub fn write_trajectory_csv(rows: &[TrajectoryRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_trajectory(rows, io::BufWriter::new(file)).map_err(|e| HarnessError::io(path, e))
}
