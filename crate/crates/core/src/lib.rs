//! Statically stable biped gait generation via hierarchical multi-swarm PSO.
//!
//! Instead of solving the leg kinematics in closed form, each joint of the
//! swing leg owns a small particle swarm that searches joint-angle space for
//! the next stable, forward-advancing posture. A walker skeleton is derived
//! from body height through standard anthropometric ratios, candidate
//! postures are screened with a support-polygon static-stability test, and
//! accepted postures are committed to per-joint memories that seed the next
//! step.
//!
//! The crate is organized along the pipeline:
//!
//! * [`anthro`] — skeleton construction (segment lengths, masses, limits)
//! * [`kinematics`] — rotation matrices, forward kinematics, two-link IK
//! * [`stability`] — footprints, support polygons, COM projection, fitness
//! * [`swarm`] — the seeded PSO core (memory + search particles)
//! * [`gaitgen`] — step planning, sub-swarm orchestration, gait assembly
//! * [`gaitio`] — config / trajectory / marker file formats and SVG plots

pub mod anthro;
pub mod gaitgen;
pub mod gaitio;
pub mod kinematics;
pub mod rng;
pub mod stability;
pub mod swarm;

pub use anthro::{build_skeleton, segment_lengths, Skeleton};
pub use gaitgen::{generate_gait, GaitConfig, GaitError, GaitTrajectory};
pub use gaitio::{export_trajectory, import_trajectory, load_config, RunConfig};
