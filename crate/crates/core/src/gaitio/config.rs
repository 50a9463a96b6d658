//! JSON run configuration: every knob of a gait run in one document.
//!
//! Loading fills defaults for absent keys, rejects unknown keys, and
//! validates every cross-field invariant before anything runs. A serialized
//! config always carries every field, so serialize-then-load is lossless.

use crate::anthro::{
    build_skeleton, JointLimits, MassOverrides, Skeleton, SkeletonOverrides,
    DEFAULT_FEMUR_FRACTION, DEFAULT_FOOT_FRACTION, DEFAULT_TIBIA_FRACTION, DEFAULT_TRUNK_FRACTION,
};
use crate::gaitgen::GaitConfig;
use crate::stability::{FitnessMode, PolygonMode};
use crate::swarm::SwarmConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("malformed JSON: {0}")]
    ParseError(String),
    #[error("schema violation: {0}")]
    SchemaError(String),
    #[error("invalid value for '{key}': {message}")]
    InvariantError { key: String, message: String },
}

/// Symmetric per-segment mass fractions and the COM location fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassFractions {
    pub foot: f64,
    pub tibia: f64,
    pub femur: f64,
    pub trunk: f64,
    pub com_location: f64,
}

impl Default for MassFractions {
    fn default() -> Self {
        Self {
            foot: DEFAULT_FOOT_FRACTION,
            tibia: DEFAULT_TIBIA_FRACTION,
            femur: DEFAULT_FEMUR_FRACTION,
            trunk: DEFAULT_TRUNK_FRACTION,
            com_location: 0.5,
        }
    }
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub height: f64,
    pub mass: f64,
    pub mass_fractions: MassFractions,
    /// Joint limits in radians.
    pub joint_limits: JointLimits,
    pub gait: GaitConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            height: 1.70,
            mass: 70.0,
            mass_fractions: MassFractions::default(),
            joint_limits: JointLimits::default(),
            gait: GaitConfig::default(),
        }
    }
}

impl RunConfig {
    /// Builds the walker this config describes.
    pub fn skeleton(&self) -> Result<Skeleton, ConfigError> {
        let overrides = SkeletonOverrides {
            masses: Some(MassOverrides {
                foot: Some(self.mass_fractions.foot),
                tibia: Some(self.mass_fractions.tibia),
                femur: Some(self.mass_fractions.femur),
                trunk: Some(self.mass_fractions.trunk),
                com_location: Some(self.mass_fractions.com_location),
            }),
            limits: Some(self.joint_limits),
        };
        build_skeleton(self.height, self.mass, Some(overrides)).map_err(anthro_key)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let skeleton = self.skeleton()?;
        self.gait.validate(&skeleton).map_err(|e| {
            let message = e.to_string();
            let detail = message
                .strip_prefix("invalid gait config: ")
                .unwrap_or(&message);
            let key = detail.split_whitespace().next().unwrap_or("gait");
            ConfigError::InvariantError {
                key: key.to_string(),
                message: detail.to_string(),
            }
        })
    }
}

fn anthro_key(e: crate::anthro::AnthroError) -> ConfigError {
    use crate::anthro::AnthroError::*;
    let key = match &e {
        NonPositiveHeight(_) | HeightOutOfRange(_) => "height",
        NonPositiveMass(_) => "mass",
        BadMassFractions { .. } => "mass_fractions",
        BadLimits { .. } => "joint_limits",
    };
    ConfigError::InvariantError {
        key: key.to_string(),
        message: e.to_string(),
    }
}

/// The on-disk document; every key optional, unknown keys rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    height: Option<f64>,
    mass: Option<f64>,
    seed: Option<u64>,
    steps: Option<usize>,
    step_length: Option<f64>,
    ground_clearance: Option<f64>,
    via_points_per_step: Option<usize>,
    max_retries: Option<usize>,
    transfer_factor: Option<f64>,
    pelvis_height_factor: Option<f64>,
    footprint_forward_offset: Option<f64>,
    fitness_mode: Option<FitnessModeTag>,
    polygon_mode: Option<PolygonModeTag>,
    swarm: Option<SwarmFile>,
    mass_fractions: Option<MassFractionsFile>,
    joint_limits: Option<JointLimits>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
enum FitnessModeTag {
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "euclid", alias = "euclidean")]
    Euclid,
}

impl From<FitnessModeTag> for FitnessMode {
    fn from(tag: FitnessModeTag) -> Self {
        match tag {
            FitnessModeTag::L1 => FitnessMode::L1,
            FitnessModeTag::Euclid => FitnessMode::Euclidean,
        }
    }
}

impl From<FitnessMode> for FitnessModeTag {
    fn from(mode: FitnessMode) -> Self {
        match mode {
            FitnessMode::L1 => FitnessModeTag::L1,
            FitnessMode::Euclidean => FitnessModeTag::Euclid,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
enum PolygonModeTag {
    #[serde(rename = "footprints")]
    Footprints,
    #[serde(rename = "ankle_segment")]
    AnkleSegment,
}

impl From<PolygonModeTag> for PolygonMode {
    fn from(tag: PolygonModeTag) -> Self {
        match tag {
            PolygonModeTag::Footprints => PolygonMode::Footprints,
            PolygonModeTag::AnkleSegment => PolygonMode::AnkleSegment,
        }
    }
}

impl From<PolygonMode> for PolygonModeTag {
    fn from(mode: PolygonMode) -> Self {
        match mode {
            PolygonMode::Footprints => PolygonModeTag::Footprints,
            PolygonMode::AnkleSegment => PolygonModeTag::AnkleSegment,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwarmFile {
    c1: Option<f64>,
    c2: Option<f64>,
    particle_count: Option<usize>,
    max_iterations: Option<usize>,
    velocity_clamp: Option<f64>,
    init_radius: Option<f64>,
    convergence_eps: Option<f64>,
    parallel: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MassFractionsFile {
    foot: Option<f64>,
    tibia: Option<f64>,
    femur: Option<f64>,
    trunk: Option<f64>,
    com_location: Option<f64>,
}

/// Parses and validates a JSON run configuration, filling defaults.
pub fn load_config(bytes: &[u8]) -> Result<RunConfig, ConfigError> {
    let file: ConfigFile = serde_json::from_slice(bytes).map_err(|e| {
        if e.classify() == serde_json::error::Category::Data {
            ConfigError::SchemaError(e.to_string())
        } else {
            ConfigError::ParseError(e.to_string())
        }
    })?;

    let defaults = RunConfig::default();
    let swarm_defaults = SwarmConfig::default();
    let swarm_file = file.swarm.unwrap_or_default();
    let swarm = SwarmConfig {
        c1: swarm_file.c1.unwrap_or(swarm_defaults.c1),
        c2: swarm_file.c2.unwrap_or(swarm_defaults.c2),
        particle_count: swarm_file
            .particle_count
            .unwrap_or(swarm_defaults.particle_count),
        max_iterations: swarm_file
            .max_iterations
            .unwrap_or(swarm_defaults.max_iterations),
        velocity_clamp: swarm_file
            .velocity_clamp
            .unwrap_or(swarm_defaults.velocity_clamp),
        init_radius: swarm_file.init_radius.unwrap_or(swarm_defaults.init_radius),
        convergence_eps: swarm_file
            .convergence_eps
            .unwrap_or(swarm_defaults.convergence_eps),
        parallel: swarm_file.parallel.unwrap_or(swarm_defaults.parallel),
    };

    let fractions_file = file.mass_fractions.unwrap_or_default();
    let fraction_defaults = MassFractions::default();
    let mass_fractions = MassFractions {
        foot: fractions_file.foot.unwrap_or(fraction_defaults.foot),
        tibia: fractions_file.tibia.unwrap_or(fraction_defaults.tibia),
        femur: fractions_file.femur.unwrap_or(fraction_defaults.femur),
        trunk: fractions_file.trunk.unwrap_or(fraction_defaults.trunk),
        com_location: fractions_file
            .com_location
            .unwrap_or(fraction_defaults.com_location),
    };

    let gait_defaults = defaults.gait;
    let config = RunConfig {
        height: file.height.unwrap_or(defaults.height),
        mass: file.mass.unwrap_or(defaults.mass),
        mass_fractions,
        joint_limits: file.joint_limits.unwrap_or(defaults.joint_limits),
        gait: GaitConfig {
            step_length: file.step_length.unwrap_or(gait_defaults.step_length),
            ground_clearance: file
                .ground_clearance
                .unwrap_or(gait_defaults.ground_clearance),
            via_points_per_step: file
                .via_points_per_step
                .unwrap_or(gait_defaults.via_points_per_step),
            steps: file.steps.unwrap_or(gait_defaults.steps),
            max_retries: file.max_retries.unwrap_or(gait_defaults.max_retries),
            swarm,
            fitness_mode: file
                .fitness_mode
                .map(FitnessMode::from)
                .unwrap_or(gait_defaults.fitness_mode),
            polygon_mode: file
                .polygon_mode
                .map(PolygonMode::from)
                .unwrap_or(gait_defaults.polygon_mode),
            transfer_factor: file
                .transfer_factor
                .unwrap_or(gait_defaults.transfer_factor),
            pelvis_height_factor: file
                .pelvis_height_factor
                .unwrap_or(gait_defaults.pelvis_height_factor),
            footprint_forward_offset: file
                .footprint_forward_offset
                .unwrap_or(gait_defaults.footprint_forward_offset),
            seed: file.seed.unwrap_or(gait_defaults.seed),
        },
    };
    config.validate()?;
    Ok(config)
}

/// Serializes a config with every field present; parses back to an equal
/// config under [`load_config`].
pub fn serialize_config(cfg: &RunConfig) -> String {
    let doc = serde_json::json!({
        "height": cfg.height,
        "mass": cfg.mass,
        "seed": cfg.gait.seed,
        "steps": cfg.gait.steps,
        "step_length": cfg.gait.step_length,
        "ground_clearance": cfg.gait.ground_clearance,
        "via_points_per_step": cfg.gait.via_points_per_step,
        "max_retries": cfg.gait.max_retries,
        "transfer_factor": cfg.gait.transfer_factor,
        "pelvis_height_factor": cfg.gait.pelvis_height_factor,
        "footprint_forward_offset": cfg.gait.footprint_forward_offset,
        "fitness_mode": FitnessModeTag::from(cfg.gait.fitness_mode),
        "polygon_mode": PolygonModeTag::from(cfg.gait.polygon_mode),
        "swarm": {
            "c1": cfg.gait.swarm.c1,
            "c2": cfg.gait.swarm.c2,
            "particle_count": cfg.gait.swarm.particle_count,
            "max_iterations": cfg.gait.swarm.max_iterations,
            "velocity_clamp": cfg.gait.swarm.velocity_clamp,
            "init_radius": cfg.gait.swarm.init_radius,
            "convergence_eps": cfg.gait.swarm.convergence_eps,
            "parallel": cfg.gait.swarm.parallel,
        },
        "mass_fractions": cfg.mass_fractions,
        "joint_limits": cfg.joint_limits,
    });
    serde_json::to_string_pretty(&doc).expect("config serialization cannot fail")
}
