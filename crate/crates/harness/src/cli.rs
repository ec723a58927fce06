use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ffpso::field::{FieldKind, FieldSpec, DEFAULT_MAGNITUDE_CAP};
use ffpso::sim::Simulation;

use crate::config::{resolve, ConfigFile, Preset, Setup};
use crate::error::{HarnessError, Result};
use crate::output::{field_curve, sample_field_curve, write_field_curve, write_trajectory_csv};
use crate::stats::write_stats_csv;
use crate::sweep::run_sweep;

#[derive(Debug, Parser)]
#[command(
    name = "ffpso",
    version,
    about = "Swarm goal-search simulator and experiment runner"
)]
struct Cli {
    /// Flat TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed of a single run, or base seed of a sweep.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Starting configuration: `paper-sim` or `bare`.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and print its result as JSON.
    Run(RunArgs),
    /// Run every (algorithm, swarm size) cell and write the statistics CSV.
    Sweep(SweepArgs),
    /// Sample a force-field kernel as `distance,magnitude` CSV.
    FieldCurve(CurveArgs),
    /// Check the configuration and exit.
    Validate,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    swarm_size: Option<usize>,
    /// Write every particle's position and velocity per tick to this CSV.
    #[arg(long, value_name = "PATH")]
    dump_trajectory: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Override runs per cell.
    #[arg(long)]
    runs: Option<u64>,
    /// Stats CSV destination; standard output when absent.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CurveKind {
    Linear,
    Gravitational,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long, value_enum)]
    kind: CurveKind,
    #[arg(long, default_value_t = 5.0)]
    safety_distance: f64,
    #[arg(long, default_value_t = 1.5)]
    exponent: f64,
    #[arg(long, default_value_t = DEFAULT_MAGNITUDE_CAP)]
    magnitude_cap: f64,
    #[arg(long, default_value_t = 0.1)]
    d_min: f64,
    #[arg(long, default_value_t = 6.0)]
    d_max: f64,
    #[arg(long, default_value_t = 60)]
    samples: usize,
    /// CSV destination; standard output when absent.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

/// Parses `argv`, runs the command and returns the process exit code.
///
/// 0 on success, 1 for usage and validation errors, 2 for I/O errors.
pub fn cli_main<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.exit_code() == 1 {
                let _ = writeln!(stderr, "run `ffpso --help` for usage");
            }
            e.exit_code()
        }
    }
}

fn load_setup(cli: &Cli) -> Result<(Setup, ConfigFile)> {
    let file = match cli.config.as_deref() {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let preset = cli
        .preset
        .as_deref()
        .map(str::parse::<Preset>)
        .transpose()?;
    let setup = resolve(Some(&file), preset, cli.seed)?;
    Ok((setup, file))
}

fn stdout_error(e: std::io::Error) -> HarnessError {
    HarnessError::io("<stdout>", e)
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Run(args) => {
            let (setup, file) = load_setup(&cli)?;
            let mut world = setup.world;
            if let Some(name) = &args.algorithm {
                world.algorithm = file.algorithm_spec(name)?;
            }
            if let Some(n) = args.swarm_size {
                world.swarm_size = n;
            }
            world.record_trajectory = args.dump_trajectory.is_some();
            let mut result = Simulation::new(world)?.run_to_end();
            if let (Some(path), Some(rows)) = (&args.dump_trajectory, result.trajectory.take()) {
                write_trajectory_csv(&rows, path)?;
            }
            let json = serde_json::to_string_pretty(&result).expect("result serializes");
            writeln!(stdout, "{json}").map_err(stdout_error)
        }
        Command::Sweep(args) => {
            let mut spec = load_setup(&cli)?.0.sweep;
            if let Some(runs) = args.runs {
                spec.runs_per_cell = runs;
            }
            let stats = run_sweep(&spec, args.parallelism)?;
            match &args.output {
                Some(path) => write_stats_csv(&stats, path),
                None => stats.write_csv(&mut *stdout).map_err(stdout_error),
            }
        }
        Command::FieldCurve(args) => {
            let spec = FieldSpec {
                kind: match args.kind {
                    CurveKind::Linear => FieldKind::Linear,
                    CurveKind::Gravitational => FieldKind::Gravitational,
                },
                safety_distance: args.safety_distance,
                exponent: args.exponent,
                magnitude_cap: args.magnitude_cap,
            };
            match &args.output {
                Some(path) => field_curve(&spec, args.d_min, args.d_max, args.samples, path),
                None => {
                    let points = sample_field_curve(&spec, args.d_min, args.d_max, args.samples)?;
                    write_field_curve(&points, &mut *stdout).map_err(stdout_error)
                }
            }
        }
        Command::Validate => {
            let (setup, _) = load_setup(&cli)?;
            setup.world.validate()?;
            setup.sweep.validate()?;
            writeln!(stdout, "ok").map_err(stdout_error)
        }
    }
}
