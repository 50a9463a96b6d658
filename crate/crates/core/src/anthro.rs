//! Walker skeleton construction from body height and mass.
//!
//! Segment dimensions follow standard anthropometric ratios of total body
//! height; masses are distributed over seven segments (two feet, two tibiae,
//! two femora, one pelvis-plus-upper-body lump) as configurable fractions of
//! the total mass.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Anthropometric ratios, as fractions of body height.
pub const FOOT_LENGTH_RATIO: f64 = 0.152;
pub const FOOT_BREADTH_RATIO: f64 = 0.055;
pub const TIBIA_LENGTH_RATIO: f64 = 0.246;
pub const LEG_LENGTH_RATIO: f64 = 0.53;
pub const INTER_HIP_RATIO: f64 = 0.191;

/// Default mass fractions (implementer defaults, not anthropometric data;
/// configurable through [`MassOverrides`]). One entry per side where paired.
pub const DEFAULT_FOOT_FRACTION: f64 = 0.0145;
pub const DEFAULT_TIBIA_FRACTION: f64 = 0.0465;
pub const DEFAULT_FEMUR_FRACTION: f64 = 0.100;
pub const DEFAULT_TRUNK_FRACTION: f64 = 0.678;

const FRACTION_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum AnthroError {
    #[error("body height must be positive, got {0}")]
    NonPositiveHeight(f64),
    #[error("body height {0} m outside sanity bounds [0.5, 2.5] m")]
    HeightOutOfRange(f64),
    #[error("total mass must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("mass fractions must sum to 1 within 1e-9, got {sum} ({detail})")]
    BadMassFractions { sum: f64, detail: String },
    #[error("joint limit range invalid for {joint}: min {min} >= max {max}")]
    BadLimits { joint: String, min: f64, max: f64 },
}

/// Leg and foot segment dimensions in meters, all linear in body height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentLengths {
    /// Foot length.
    pub foot_length: f64,
    /// Foot breadth.
    pub foot_breadth: f64,
    /// Knee-to-ankle length.
    pub tibia: f64,
    /// Hip-to-ankle length.
    pub leg: f64,
    /// Distance between the two hip joints.
    pub inter_hip: f64,
    /// Hip-to-knee length, defined so femur + tibia span exactly the leg.
    pub femur: f64,
}

/// One body segment carrying mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Segment {
    FootLeft,
    FootRight,
    TibiaLeft,
    TibiaRight,
    FemurLeft,
    FemurRight,
    /// Pelvis plus everything above it, lumped at the pelvis midpoint.
    Trunk,
}

impl Segment {
    pub const ALL: [Segment; 7] = [
        Segment::FootLeft,
        Segment::FootRight,
        Segment::TibiaLeft,
        Segment::TibiaRight,
        Segment::FemurLeft,
        Segment::FemurRight,
        Segment::Trunk,
    ];
}

/// Mass distribution over the seven segments.
///
/// `com_location` is the fractional position of a segment's own center of
/// mass measured from its proximal end (0 = proximal joint, 1 = distal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassModel {
    pub total_mass: f64,
    fractions: [f64; 7],
    com_locations: [f64; 7],
}

impl MassModel {
    pub fn new(
        total_mass: f64,
        fractions: [f64; 7],
        com_locations: [f64; 7],
    ) -> Result<Self, AnthroError> {
        if total_mass <= 0.0 {
            return Err(AnthroError::NonPositiveMass(total_mass));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > FRACTION_SUM_TOL {
            return Err(AnthroError::BadMassFractions {
                sum,
                detail: format!("{fractions:?}"),
            });
        }
        for (i, &f) in fractions.iter().enumerate() {
            if !(f > 0.0 && f < 1.0) {
                return Err(AnthroError::BadMassFractions {
                    sum,
                    detail: format!("fraction {f} for {:?} not in (0, 1)", Segment::ALL[i]),
                });
            }
        }
        for (i, &c) in com_locations.iter().enumerate() {
            if !(0.0..=1.0).contains(&c) {
                return Err(AnthroError::BadMassFractions {
                    sum,
                    detail: format!("com_location {c} for {:?} not in [0, 1]", Segment::ALL[i]),
                });
            }
        }
        Ok(Self {
            total_mass,
            fractions,
            com_locations,
        })
    }

    pub fn fraction(&self, segment: Segment) -> f64 {
        self.fractions[segment_index(segment)]
    }

    pub fn com_location(&self, segment: Segment) -> f64 {
        self.com_locations[segment_index(segment)]
    }

    pub fn mass(&self, segment: Segment) -> f64 {
        self.fraction(segment) * self.total_mass
    }

    pub fn fractions(&self) -> &[f64; 7] {
        &self.fractions
    }
}

fn segment_index(segment: Segment) -> usize {
    Segment::ALL.iter().position(|&s| s == segment).unwrap()
}

/// One of the three articulated joints of a leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Joint {
    Hip,
    Knee,
    Ankle,
}

impl Joint {
    pub const ALL: [Joint; 3] = [Joint::Hip, Joint::Knee, Joint::Ankle];

    pub fn index(self) -> usize {
        match self {
            Joint::Hip => 0,
            Joint::Knee => 1,
            Joint::Ankle => 2,
        }
    }
}

/// An inclusive angular range in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub min: f64,
    pub max: f64,
}

impl AngleRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min, self.max)
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min && value <= self.max
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }
}

/// Sagittal (theta) and frontal (alpha) ranges for one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairLimits {
    pub theta: AngleRange,
    pub alpha: AngleRange,
}

/// Angular limits per joint, shared by both legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub hip: PairLimits,
    pub knee: PairLimits,
    pub ankle: PairLimits,
}

impl Default for JointLimits {
    /// Conservative walking-range envelopes; the knee is flexion-only.
    fn default() -> Self {
        let deg = std::f64::consts::PI / 180.0;
        let frontal = AngleRange::new(-15.0 * deg, 15.0 * deg);
        Self {
            hip: PairLimits {
                theta: AngleRange::new(-35.0 * deg, 35.0 * deg),
                alpha: frontal,
            },
            knee: PairLimits {
                theta: AngleRange::new(0.0, 70.0 * deg),
                alpha: frontal,
            },
            ankle: PairLimits {
                theta: AngleRange::new(-20.0 * deg, 20.0 * deg),
                alpha: frontal,
            },
        }
    }
}

impl JointLimits {
    pub fn for_joint(&self, joint: Joint) -> &PairLimits {
        match joint {
            Joint::Hip => &self.hip,
            Joint::Knee => &self.knee,
            Joint::Ankle => &self.ankle,
        }
    }

    fn validate(&self) -> Result<(), AnthroError> {
        let pairs = [
            ("hip.theta", self.hip.theta),
            ("hip.alpha", self.hip.alpha),
            ("knee.theta", self.knee.theta),
            ("knee.alpha", self.knee.alpha),
            ("ankle.theta", self.ankle.theta),
            ("ankle.alpha", self.ankle.alpha),
        ];
        for (name, range) in pairs {
            if range.min >= range.max {
                return Err(AnthroError::BadLimits {
                    joint: name.to_string(),
                    min: range.min,
                    max: range.max,
                });
            }
        }
        // No hyperextension: flexion-only knee under our sign convention.
        if self.knee.theta.min < 0.0 {
            return Err(AnthroError::BadLimits {
                joint: "knee.theta (hyperextension)".to_string(),
                min: self.knee.theta.min,
                max: self.knee.theta.max,
            });
        }
        Ok(())
    }
}

/// The walker's full static description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub height: f64,
    pub lengths: SegmentLengths,
    pub masses: MassModel,
    pub limits: JointLimits,
}

/// Symmetric mass-fraction / COM-location overrides (applied to both sides).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MassOverrides {
    pub foot: Option<f64>,
    pub tibia: Option<f64>,
    pub femur: Option<f64>,
    pub trunk: Option<f64>,
    pub com_location: Option<f64>,
}

/// Optional configuration for [`build_skeleton`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SkeletonOverrides {
    pub masses: Option<MassOverrides>,
    pub limits: Option<JointLimits>,
}

/// Derives all segment dimensions from body height.
pub fn segment_lengths(height: f64) -> Result<SegmentLengths, AnthroError> {
    if height <= 0.0 {
        return Err(AnthroError::NonPositiveHeight(height));
    }
    if !(0.5..=2.5).contains(&height) {
        return Err(AnthroError::HeightOutOfRange(height));
    }
    let tibia = TIBIA_LENGTH_RATIO * height;
    let leg = LEG_LENGTH_RATIO * height;
    Ok(SegmentLengths {
        foot_length: FOOT_LENGTH_RATIO * height,
        foot_breadth: FOOT_BREADTH_RATIO * height,
        tibia,
        leg,
        inter_hip: INTER_HIP_RATIO * height,
        femur: leg - tibia,
    })
}

/// Assembles a full skeleton, applying defaults where overrides are absent.
pub fn build_skeleton(
    height: f64,
    total_mass: f64,
    overrides: Option<SkeletonOverrides>,
) -> Result<Skeleton, AnthroError> {
    let lengths = segment_lengths(height)?;
    let overrides = overrides.unwrap_or_default();

    let m = overrides.masses.unwrap_or_default();
    let foot = m.foot.unwrap_or(DEFAULT_FOOT_FRACTION);
    let tibia = m.tibia.unwrap_or(DEFAULT_TIBIA_FRACTION);
    let femur = m.femur.unwrap_or(DEFAULT_FEMUR_FRACTION);
    let trunk = m.trunk.unwrap_or(DEFAULT_TRUNK_FRACTION);
    let loc = m.com_location.unwrap_or(0.5);
    let masses = MassModel::new(
        total_mass,
        [foot, foot, tibia, tibia, femur, femur, trunk],
        [loc; 7],
    )?;

    let limits = overrides.limits.unwrap_or_default();
    limits.validate()?;

    Ok(Skeleton {
        height,
        lengths,
        masses,
        limits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_height_returns_the_ratios() {
        let l = segment_lengths(1.0).unwrap();
        assert_eq!(l.foot_length, 0.152);
        assert_eq!(l.foot_breadth, 0.055);
        assert_eq!(l.tibia, 0.246);
        assert_eq!(l.leg, 0.53);
        assert_eq!(l.inter_hip, 0.191);
    }

    #[test]
    fn lengths_for_170cm_walker() {
        let l = segment_lengths(1.70).unwrap();
        assert_relative_eq!(l.foot_length, 0.2584, max_relative = 1e-12);
        assert_relative_eq!(l.foot_breadth, 0.0935, max_relative = 1e-12);
        assert_relative_eq!(l.tibia, 0.4182, max_relative = 1e-12);
        assert_relative_eq!(l.leg, 0.901, max_relative = 1e-12);
        assert_relative_eq!(l.inter_hip, 0.3247, max_relative = 1e-12);
        assert_relative_eq!(l.femur, 0.4828, max_relative = 1e-12);
    }

    #[test]
    fn femur_plus_tibia_spans_the_leg() {
        for h in [0.5, 0.9, 1.3, 1.7, 2.1, 2.5] {
            let l = segment_lengths(h).unwrap();
            assert_relative_eq!(l.femur + l.tibia, l.leg, max_relative = 1e-12);
        }
    }

    #[test]
    fn lengths_scale_linearly_with_height() {
        let a = segment_lengths(0.9).unwrap();
        let b = segment_lengths(1.8).unwrap();
        for (x, y) in [
            (a.foot_length, b.foot_length),
            (a.foot_breadth, b.foot_breadth),
            (a.tibia, b.tibia),
            (a.leg, b.leg),
            (a.inter_hip, b.inter_hip),
            (a.femur, b.femur),
        ] {
            assert_relative_eq!(2.0 * x, y, max_relative = 1e-12);
        }
    }

    #[test]
    fn height_bounds_reject_unit_mistakes() {
        assert_eq!(
            segment_lengths(-1.0),
            Err(AnthroError::NonPositiveHeight(-1.0))
        );
        assert_eq!(
            segment_lengths(170.0),
            Err(AnthroError::HeightOutOfRange(170.0))
        );
        assert_eq!(
            segment_lengths(0.017),
            Err(AnthroError::HeightOutOfRange(0.017))
        );
    }

    #[test]
    fn default_fractions_sum_to_one() {
        let s = build_skeleton(1.70, 70.0, None).unwrap();
        let sum: f64 = s.masses.fractions().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "sum = {sum}");
        // Hand sum of the chosen default set: 2*(0.0145+0.0465+0.100) + 0.678.
        assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bad_fraction_sum_is_rejected() {
        let overrides = SkeletonOverrides {
            masses: Some(MassOverrides {
                trunk: Some(0.578), // sums to 0.9
                ..Default::default()
            }),
            limits: None,
        };
        match build_skeleton(1.70, 70.0, Some(overrides)) {
            Err(AnthroError::BadMassFractions { sum, .. }) => {
                assert_relative_eq!(sum, 0.9, epsilon = 1e-12)
            }
            other => panic!("expected BadMassFractions, got {other:?}"),
        }
    }

    #[test]
    fn inverted_limits_are_rejected() {
        let mut limits = JointLimits::default();
        limits.hip.theta = AngleRange::new(0.5, -0.5);
        let overrides = SkeletonOverrides {
            masses: None,
            limits: Some(limits),
        };
        assert!(matches!(
            build_skeleton(1.70, 70.0, Some(overrides)),
            Err(AnthroError::BadLimits { .. })
        ));
    }

    #[test]
    fn knee_hyperextension_is_rejected() {
        let mut limits = JointLimits::default();
        limits.knee.theta = AngleRange::new(-0.1, 1.0);
        let overrides = SkeletonOverrides {
            masses: None,
            limits: Some(limits),
        };
        assert!(matches!(
            build_skeleton(1.70, 70.0, Some(overrides)),
            Err(AnthroError::BadLimits { .. })
        ));
    }

    #[test]
    fn build_is_deterministic() {
        let a = build_skeleton(1.70, 70.0, None).unwrap();
        let b = build_skeleton(1.70, 70.0, None).unwrap();
        assert_eq!(a, b);
    }
}
