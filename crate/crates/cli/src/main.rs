//! Command-line front door: generate, check, plot, compare and the
//! standalone two-link IK solver.
//!
//! Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 step
//! infeasible (the partial trajectory is still written).

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use swarmgait::anthro::segment_lengths;
use swarmgait::gaitgen::{compare_channel_sets, generate_gait, GaitError, GaitTrajectory};
use swarmgait::gaitio::{
    emit_plot, export_trajectory, import_markers, import_trajectory, load_config, RunConfig,
};
use swarmgait::kinematics::{two_link_ik, Point3};
use swarmgait::stability::{is_statically_stable, FitnessMode};

#[derive(Parser)]
#[command(
    name = "swarmgait",
    version,
    about = "Biped gait generation by hierarchical multi-swarm PSO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigFlags {
    /// Walker body height in meters.
    #[arg(long)]
    height: Option<f64>,
    /// Walker total mass in kilograms.
    #[arg(long)]
    mass: Option<f64>,
    /// JSON config file; explicit flags win over its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a gait and write it as a trajectory CSV.
    Generate {
        #[command(flatten)]
        common: ConfigFlags,
        /// Number of half-steps to walk.
        #[arg(long)]
        steps: Option<usize>,
        /// Master RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Posture fitness distance: l1 or euclid.
        #[arg(long, value_name = "l1|euclid")]
        fitness_mode: Option<String>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-validate every record of a trajectory CSV against the stability
    /// predicate.
    Check {
        #[command(flatten)]
        common: ConfigFlags,
        /// Input trajectory CSV.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Render trajectory channels as an SVG plot.
    Plot {
        /// Input trajectory CSV.
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated channel names ("com" expands to com_x,com_y).
        #[arg(long)]
        channel: String,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-channel RMSE between two trajectories (or trajectory vs marker
    /// capture).
    Compare {
        /// First trajectory CSV.
        #[arg(long)]
        a: PathBuf,
        /// Second trajectory CSV or marker CSV.
        #[arg(long)]
        b: PathBuf,
    },
    /// Closed-form sagittal two-link inverse kinematics.
    Ik {
        /// Hip position as x,y,z.
        #[arg(long)]
        hip: String,
        /// Target ankle position as x,y,z.
        #[arg(long)]
        target: String,
        /// Walker body height (sets femur and tibia lengths).
        #[arg(long, default_value_t = 1.70)]
        height: f64,
    },
}

/// Prints to stdout, quietly tolerating a closed pipe (`... | head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Resolves the run configuration: file values first, explicit flags win.
fn resolve_config(common: &ConfigFlags) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let bytes = read_file(path)?;
            load_config(&bytes).map_err(|e| Failure::input(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Some(height) = common.height {
        cfg.height = height;
    }
    if let Some(mass) = common.mass {
        cfg.mass = mass;
    }
    Ok(cfg)
}

fn parse_point(raw: &str, flag: &str) -> Result<Point3, Failure> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(Failure::usage(format!(
            "--{flag} expects x,y,z — got '{raw}'"
        )));
    }
    let mut xyz = [0.0; 3];
    for (slot, part) in xyz.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("--{flag}: '{part}' is not a number")))?;
    }
    Ok(Point3::new(xyz[0], xyz[1], xyz[2]))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Generate {
            common,
            steps,
            seed,
            fitness_mode,
            out,
        } => {
            let mut cfg = resolve_config(&common)?;
            if let Some(steps) = steps {
                cfg.gait.steps = steps;
            }
            if let Some(seed) = seed {
                cfg.gait.seed = seed;
            }
            if let Some(mode) = fitness_mode {
                cfg.gait.fitness_mode = match mode.as_str() {
                    "l1" => FitnessMode::L1,
                    "euclid" | "euclidean" => FitnessMode::Euclidean,
                    other => {
                        return Err(Failure::usage(format!(
                            "--fitness-mode must be l1 or euclid, got '{other}'"
                        )))
                    }
                };
            }
            let skeleton = cfg.skeleton().map_err(|e| Failure::input(e.to_string()))?;
            match generate_gait(&skeleton, &cfg.gait) {
                Ok(traj) => {
                    let csv =
                        export_trajectory(&traj).map_err(|e| Failure::input(e.to_string()))?;
                    write_file(&out, csv.as_bytes())?;
                    print_summary(&traj, cfg.gait.steps, cfg.gait.step_length);
                    say!("wrote {}", out.display());
                    Ok(())
                }
                Err(GaitError::StepInfeasible {
                    step,
                    via,
                    reason,
                    partial,
                }) => {
                    if !partial.is_empty() {
                        let csv = export_trajectory(&partial)
                            .map_err(|e| Failure::input(e.to_string()))?;
                        write_file(&out, csv.as_bytes())?;
                        say!(
                            "partial trajectory ({} records) written to {}",
                            partial.records.len(),
                            out.display()
                        );
                    }
                    Err(Failure {
                        code: 3,
                        message: format!("step {step} infeasible at via-point {via}: {reason}"),
                    })
                }
                Err(e) => Err(Failure::input(e.to_string())),
            }
        }

        Command::Check { common, input } => {
            let cfg = resolve_config(&common)?;
            let skeleton = cfg.skeleton().map_err(|e| Failure::input(e.to_string()))?;
            let bytes = read_file(&input)?;
            let traj = import_trajectory(&bytes).map_err(|e| Failure::input(e.to_string()))?;
            let mut failures = 0usize;
            for (i, r) in traj.records.iter().enumerate() {
                let verdict = is_statically_stable(
                    &r.posture,
                    &skeleton.masses,
                    &skeleton.lengths,
                    cfg.gait.polygon_mode,
                    cfg.gait.footprint_forward_offset,
                );
                let ok = matches!(&verdict, Ok(report) if report.stable) && r.stable;
                if !ok {
                    failures += 1;
                }
                say!(
                    "record {i} (step {}, via {}, {}): {}",
                    r.step,
                    r.via,
                    r.phase,
                    if ok { "pass" } else { "FAIL" }
                );
            }
            if failures > 0 {
                return Err(Failure::input(format!(
                    "{failures}/{} records fail the stability check",
                    traj.records.len()
                )));
            }
            say!("all {} records pass", traj.records.len());
            Ok(())
        }

        Command::Plot {
            input,
            channel,
            out,
        } => {
            let bytes = read_file(&input)?;
            let traj = import_trajectory(&bytes).map_err(|e| Failure::input(e.to_string()))?;
            let svg = emit_plot(&traj, &channel).map_err(|e| Failure::input(e.to_string()))?;
            write_file(&out, svg.as_bytes())?;
            say!("wrote {}", out.display());
            Ok(())
        }

        Command::Compare { a, b } => {
            let bytes_a = read_file(&a)?;
            let traj_a = import_trajectory(&bytes_a).map_err(|e| Failure::input(e.to_string()))?;
            let bytes_b = read_file(&b)?;
            let channels_b = if bytes_b.starts_with(b"frame,marker,x,y,z") {
                import_markers(&bytes_b)
                    .map_err(|e| Failure::input(e.to_string()))?
                    .channels()
            } else {
                import_trajectory(&bytes_b)
                    .map_err(|e| Failure::input(e.to_string()))?
                    .channels()
            };
            let report = compare_channel_sets(&traj_a.channels(), &channels_b)
                .map_err(|e| Failure::input(e.to_string()))?;
            say!("{:<20} {:>14} {:>14}", "channel", "rmse", "max_abs");
            for c in &report.channels {
                say!("{:<20} {:>14.6e} {:>14.6e}", c.channel, c.rmse, c.max_abs);
            }
            Ok(())
        }

        Command::Ik {
            hip,
            target,
            height,
        } => {
            let hip = parse_point(&hip, "hip")?;
            let target = parse_point(&target, "target")?;
            let lengths = segment_lengths(height).map_err(|e| Failure::input(e.to_string()))?;
            match two_link_ik(hip, target, lengths.femur, lengths.tibia) {
                Ok((theta_hip, theta_knee)) => {
                    say!(
                        "theta_hip = {theta_hip} rad ({:.3} deg)",
                        theta_hip.to_degrees()
                    );
                    say!(
                        "theta_knee = {theta_knee} rad ({:.3} deg)",
                        theta_knee.to_degrees()
                    );
                    Ok(())
                }
                Err(e) => Err(Failure::input(format!("Unreachable: {e}"))),
            }
        }
    }
}

fn print_summary(traj: &GaitTrajectory, steps: usize, step_length: f64) {
    let total = traj.records.len();
    let stable = traj.records.iter().filter(|r| r.stable).count();
    let first_x = traj
        .records
        .first()
        .map(|r| r.posture.pelvis.x)
        .unwrap_or(0.0);
    let last_x = traj
        .records
        .last()
        .map(|r| r.posture.pelvis.x)
        .unwrap_or(0.0);
    let mean_fitness = traj.records.iter().map(|r| r.fitness).sum::<f64>() / total.max(1) as f64;
    say!("steps: {steps} (step length {step_length} m)");
    say!(
        "records: {total}, stable: {stable}/{total} ({:.1}%)",
        100.0 * stable as f64 / total.max(1) as f64
    );
    say!("pelvis advance: {:.4} m", last_x - first_x);
    say!("mean stability fitness: {mean_fitness:.6}");
}
