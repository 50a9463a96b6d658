//! File formats: JSON run configuration, CSV trajectory export/import, CSV
//! reference-marker import and SVG plot emission.
//!
//! All three formats are bit-exact contracts: numbers are written as
//! shortest round-trip decimals, column order is fixed, and identical
//! inputs always produce identical bytes.

mod config;
mod markers;
mod plot;
mod trajectory;

pub use config::{load_config, serialize_config, ConfigError, MassFractions, RunConfig};
pub use markers::{import_markers, MarkerError, ReferenceTrajectory, REQUIRED_MARKERS};
pub use plot::{emit_plot, PlotError};
pub use trajectory::{export_trajectory, import_trajectory, TrajectoryError};
