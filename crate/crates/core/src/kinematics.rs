//! Rotation matrices and forward kinematics of the leg chain, plus the
//! closed-form two-link inverse kinematics used for seeding and testing.
//!
//! World frame: x points along the walking direction, y laterally (left
//! positive), z vertically up; the ground plane is z = 0. Each joint carries
//! a sagittal rotation `theta` and a frontal rotation `alpha`; a segment at
//! rest hangs straight down, so a child joint sits at
//! `parent + sagittal_rotation(theta) * frontal_rotation(alpha) * (0, 0, -l)`.
//! Angles are relative to the parent joint: the rotation applied to a tibia
//! is built from the summed hip-plus-knee angles in each plane.

use crate::anthro::Skeleton;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KinError {
    #[error("segment length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("target at distance {distance} outside reach [{min}, {max}]")]
    Unreachable { distance: f64, min: f64, max: f64 },
    #[error("hip and target must share a sagittal plane, y differs by {0}")]
    OutOfPlane(f64),
}

/// Sagittal (`theta`) and frontal (`alpha`) rotation of one joint, radians.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct JointAngles {
    pub theta: f64,
    pub alpha: f64,
}

impl JointAngles {
    pub fn new(theta: f64, alpha: f64) -> Self {
        Self { theta, alpha }
    }

    pub fn zero() -> Self {
        Self::default()
    }
}

impl std::ops::Add for JointAngles {
    type Output = JointAngles;
    fn add(self, rhs: JointAngles) -> JointAngles {
        JointAngles::new(self.theta + rhs.theta, self.alpha + rhs.alpha)
    }
}

/// A 3D point in the world frame, meters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

impl std::ops::Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, k: f64) -> Point3 {
        Point3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// A 3x3 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Matrix3 {
    pub fn identity() -> Self {
        Matrix3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn mul_vec(&self, v: Point3) -> Point3 {
        let m = &self.0;
        Point3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, rhs: &Matrix3) -> Matrix3 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Matrix3(out)
    }

    pub fn transpose(&self) -> Matrix3 {
        let m = &self.0;
        Matrix3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Rotation in the sagittal (x-z) plane.
pub fn sagittal_rotation(theta: f64) -> Matrix3 {
    let (s, c) = theta.sin_cos();
    Matrix3([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])
}

/// Rotation in the frontal (y-z) plane.
pub fn frontal_rotation(alpha: f64) -> Matrix3 {
    let (s, c) = alpha.sin_cos();
    Matrix3([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
}

/// Position of a child joint at the end of a segment of length `l` hanging
/// from `parent`, rotated by the given joint angles.
///
/// Expanding the rotated rest vector gives the offset
/// `l * (sin(theta) cos(alpha), sin(alpha), -cos(theta) cos(alpha))`, which
/// has norm `l` for any angles.
pub fn child_joint_position(
    parent: Point3,
    angles: JointAngles,
    length: f64,
) -> Result<Point3, KinError> {
    if length <= 0.0 {
        return Err(KinError::NonPositiveLength(length));
    }
    let rest = Point3::new(0.0, 0.0, -length);
    let rotated = sagittal_rotation(angles.theta)
        .mul_mat(&frontal_rotation(angles.alpha))
        .mul_vec(rest);
    Ok(parent + rotated)
}

/// Which leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Sign of this side's lateral (y) offset from the pelvis midpoint.
    pub fn lateral_sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// Support-phase label of a posture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Double,
    SingleLeft,
    SingleRight,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Double => "double",
            Phase::SingleLeft => "single_left",
            Phase::SingleRight => "single_right",
        })
    }
}

impl std::str::FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double" => Ok(Phase::Double),
            "single_left" => Ok(Phase::SingleLeft),
            "single_right" => Ok(Phase::SingleRight),
            other => Err(format!("unknown phase label '{other}'")),
        }
    }
}

impl Phase {
    pub fn single(side: Side) -> Phase {
        match side {
            Side::Left => Phase::SingleLeft,
            Side::Right => Phase::SingleRight,
        }
    }

    /// Sides bearing weight in this phase.
    pub fn support_sides(self) -> &'static [Side] {
        match self {
            Phase::Double => &[Side::Left, Side::Right],
            Phase::SingleLeft => &[Side::Left],
            Phase::SingleRight => &[Side::Right],
        }
    }
}

/// Joint angles for one leg.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LegAngles {
    pub hip: JointAngles,
    pub knee: JointAngles,
    pub ankle: JointAngles,
}

/// Joint angles for both legs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PostureAngles {
    pub left: LegAngles,
    pub right: LegAngles,
}

impl PostureAngles {
    pub fn leg(&self, side: Side) -> &LegAngles {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn leg_mut(&mut self, side: Side) -> &mut LegAngles {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }
}

/// Joint positions and angles for one leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegPose {
    pub hip: Point3,
    pub knee: Point3,
    pub ankle: Point3,
    pub angles: LegAngles,
}

/// One full joint configuration of the walker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Posture {
    pub pelvis: Point3,
    pub left: LegPose,
    pub right: LegPose,
    pub phase: Phase,
}

impl Posture {
    pub fn leg(&self, side: Side) -> &LegPose {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn angles(&self) -> PostureAngles {
        PostureAngles {
            left: self.left.angles,
            right: self.right.angles,
        }
    }
}

/// Position of one hip given the pelvis midpoint.
pub fn hip_position(pelvis: Point3, inter_hip: f64, side: Side) -> Point3 {
    Point3::new(
        pelvis.x,
        pelvis.y + side.lateral_sign() * inter_hip / 2.0,
        pelvis.z,
    )
}

fn forward_leg(
    skeleton: &Skeleton,
    pelvis: Point3,
    side: Side,
    angles: LegAngles,
) -> Result<LegPose, KinError> {
    let hip = hip_position(pelvis, skeleton.lengths.inter_hip, side);
    let knee = child_joint_position(hip, angles.hip, skeleton.lengths.femur)?;
    let ankle = child_joint_position(knee, angles.hip + angles.knee, skeleton.lengths.tibia)?;
    Ok(LegPose {
        hip,
        knee,
        ankle,
        angles,
    })
}

/// Forward kinematics for the whole walker: pelvis -> hips -> knees -> ankles.
pub fn forward_posture(
    skeleton: &Skeleton,
    pelvis: Point3,
    angles: &PostureAngles,
    phase: Phase,
) -> Result<Posture, KinError> {
    Ok(Posture {
        pelvis,
        left: forward_leg(skeleton, pelvis, Side::Left, angles.left)?,
        right: forward_leg(skeleton, pelvis, Side::Right, angles.right)?,
        phase,
    })
}

/// Closed-form sagittal-plane two-link inverse kinematics.
///
/// Solves for hip and knee sagittal angles placing the ankle at
/// `target_ankle`, both points in the same sagittal plane (equal y). The
/// knee solution is flexion-only (`theta_knee >= 0`).
pub fn two_link_ik(
    hip: Point3,
    target_ankle: Point3,
    femur: f64,
    tibia: f64,
) -> Result<(f64, f64), KinError> {
    if femur <= 0.0 {
        return Err(KinError::NonPositiveLength(femur));
    }
    if tibia <= 0.0 {
        return Err(KinError::NonPositiveLength(tibia));
    }
    let dy = target_ankle.y - hip.y;
    if dy.abs() > 1e-9 {
        return Err(KinError::OutOfPlane(dy));
    }
    planar_two_link(target_ankle.x - hip.x, target_ankle.z - hip.z, femur, tibia)
}

/// Two-link solve in a single (x, z) plane. `dx`/`dz` are the target offset
/// from the hip.
fn planar_two_link(dx: f64, dz: f64, femur: f64, tibia: f64) -> Result<(f64, f64), KinError> {
    let d2 = dx * dx + dz * dz;
    let d = d2.sqrt();
    let max = femur + tibia;
    let min = (femur - tibia).abs();
    // Tiny slack so exact-reach targets built in floating point still solve.
    let slack = 1e-12 * max.max(1.0);
    if d > max + slack || d < min - slack {
        return Err(KinError::Unreachable {
            distance: d,
            min,
            max,
        });
    }
    let cos_knee = ((d2 - femur * femur - tibia * tibia) / (2.0 * femur * tibia)).clamp(-1.0, 1.0);
    let theta_knee = cos_knee.acos();
    // Angle of the target direction under the "rest hangs down" convention.
    let phi = dx.atan2(-dz);
    let beta = (tibia * theta_knee.sin()).atan2(femur + tibia * cos_knee);
    Ok((phi - beta, theta_knee))
}

/// Full-leg inverse kinematics with a frontal lean.
///
/// The frontal component is carried entirely by the hip (`alpha_knee = 0`):
/// the chain's lateral offset is `(femur + tibia) * sin(alpha_hip)`, and the
/// remaining sagittal problem reduces to [`two_link_ik`] on the target
/// scaled by `1 / cos(alpha_hip)`. Used by the step planner for seeding and
/// to close the support leg onto its pinned ankle; the returned angles
/// reproduce the target by forward chaining to machine precision.
pub fn leg_ik(
    hip: Point3,
    target_ankle: Point3,
    femur: f64,
    tibia: f64,
) -> Result<(JointAngles, JointAngles), KinError> {
    if femur <= 0.0 {
        return Err(KinError::NonPositiveLength(femur));
    }
    if tibia <= 0.0 {
        return Err(KinError::NonPositiveLength(tibia));
    }
    let delta = target_ankle - hip;
    let reach = femur + tibia;
    let sin_alpha = delta.y / reach;
    if sin_alpha.abs() > 1.0 {
        return Err(KinError::Unreachable {
            distance: delta.norm(),
            min: (femur - tibia).abs(),
            max: reach,
        });
    }
    let alpha = sin_alpha.asin();
    let cos_alpha = alpha.cos();
    let (theta_hip, theta_knee) =
        planar_two_link(delta.x / cos_alpha, delta.z / cos_alpha, femur, tibia)?;
    Ok((
        JointAngles::new(theta_hip, alpha),
        JointAngles::new(theta_knee, 0.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anthro::build_skeleton;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_matrix_eq(a: &Matrix3, b: &Matrix3, eps: f64) {
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(a.0[i][j], b.0[i][j], epsilon = eps);
            }
        }
    }

    #[test]
    fn zero_rotations_are_identity() {
        assert_matrix_eq(&sagittal_rotation(0.0), &Matrix3::identity(), 0.0);
        assert_matrix_eq(&frontal_rotation(0.0), &Matrix3::identity(), 0.0);
    }

    #[test]
    fn quarter_turn_sagittal() {
        let m = sagittal_rotation(FRAC_PI_2);
        let expected = Matrix3([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]);
        assert_matrix_eq(&m, &expected, 1e-15);
    }

    #[test]
    fn quarter_turn_frontal() {
        let m = frontal_rotation(FRAC_PI_2);
        let expected = Matrix3([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]);
        assert_matrix_eq(&m, &expected, 1e-15);
    }

    #[test]
    fn straight_down_offset_at_zero_angles() {
        let parent = Point3::new(0.0, 0.0, 0.901);
        let child = child_joint_position(parent, JointAngles::zero(), 0.4828).unwrap();
        assert_abs_diff_eq!(child.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(child.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(child.z, 0.4182, epsilon = 1e-15);
    }

    #[test]
    fn quarter_sagittal_swing_points_forward() {
        let parent = Point3::new(0.0, 0.0, 0.901);
        let child = child_joint_position(parent, JointAngles::new(FRAC_PI_2, 0.0), 0.4828).unwrap();
        assert_abs_diff_eq!(child.x, 0.4828, epsilon = 1e-12);
        assert_abs_diff_eq!(child.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(child.z, 0.901, epsilon = 1e-12);
    }

    #[test]
    fn nonpositive_length_rejected() {
        let r = child_joint_position(Point3::default(), JointAngles::zero(), 0.0);
        assert_eq!(r, Err(KinError::NonPositiveLength(0.0)));
    }

    #[test]
    fn standing_posture_puts_ankles_on_ground() {
        let skeleton = build_skeleton(1.70, 70.0, None).unwrap();
        let pelvis = Point3::new(0.0, 0.0, skeleton.lengths.leg);
        let posture =
            forward_posture(&skeleton, pelvis, &PostureAngles::default(), Phase::Double).unwrap();
        for leg in [&posture.left, &posture.right] {
            assert_abs_diff_eq!(leg.ankle.z, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(leg.ankle.x, leg.hip.x, epsilon = 1e-15);
            assert_abs_diff_eq!(leg.ankle.y, leg.hip.y, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(
            posture.left.hip.y - posture.right.hip.y,
            skeleton.lengths.inter_hip,
            epsilon = 1e-15
        );
    }

    #[test]
    fn mirrored_angles_give_a_symmetric_posture() {
        let skeleton = build_skeleton(1.70, 70.0, None).unwrap();
        let pelvis = Point3::new(0.3, 0.0, 0.85);
        let leg = LegAngles {
            hip: JointAngles::new(0.2, 0.0),
            knee: JointAngles::new(0.4, 0.0),
            ankle: JointAngles::new(-0.1, 0.0),
        };
        let angles = PostureAngles {
            left: leg,
            right: leg,
        };
        let posture = forward_posture(&skeleton, pelvis, &angles, Phase::Double).unwrap();
        for (l, r) in [
            (posture.left.knee, posture.right.knee),
            (posture.left.ankle, posture.right.ankle),
        ] {
            assert_abs_diff_eq!(l.x, r.x, epsilon = 1e-15);
            assert_abs_diff_eq!(l.z, r.z, epsilon = 1e-15);
            assert_abs_diff_eq!(l.y - pelvis.y, pelvis.y - r.y, epsilon = 1e-15);
        }
    }

    #[test]
    fn ik_fully_extended_straight_down() {
        let hip = Point3::new(0.0, 0.0, 0.901);
        let (theta_hip, theta_knee) =
            two_link_ik(hip, Point3::new(0.0, 0.0, 0.0), 0.4828, 0.4182).unwrap();
        // At exact full reach the angles are zero up to acos rounding near 1.
        assert_abs_diff_eq!(theta_hip, 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(theta_knee, 0.0, epsilon = 1e-7);
        let knee = child_joint_position(hip, JointAngles::new(theta_hip, 0.0), 0.4828).unwrap();
        let ankle =
            child_joint_position(knee, JointAngles::new(theta_hip + theta_knee, 0.0), 0.4182)
                .unwrap();
        assert!(ankle.distance(&Point3::new(0.0, 0.0, 0.0)) < 1e-9);
    }

    #[test]
    fn ik_beyond_reach_is_unreachable() {
        let hip = Point3::new(0.0, 0.0, 0.901);
        let r = two_link_ik(hip, Point3::new(0.0, 0.0, -0.1), 0.4828, 0.4182);
        assert!(matches!(r, Err(KinError::Unreachable { .. })));
    }

    #[test]
    fn ik_out_of_plane_is_rejected() {
        let hip = Point3::new(0.0, 0.0, 0.901);
        let r = two_link_ik(hip, Point3::new(0.1, 0.01, 0.2), 0.4828, 0.4182);
        assert!(matches!(r, Err(KinError::OutOfPlane(_))));
    }

    #[test]
    fn ik_solution_verified_by_forward_chaining() {
        let hip = Point3::new(0.0, 0.0, 0.901);
        let target = Point3::new(0.2, 0.0, 0.2);
        let (theta_hip, theta_knee) = two_link_ik(hip, target, 0.4828, 0.4182).unwrap();
        assert!(theta_knee >= 0.0);
        let knee = child_joint_position(hip, JointAngles::new(theta_hip, 0.0), 0.4828).unwrap();
        let ankle =
            child_joint_position(knee, JointAngles::new(theta_hip + theta_knee, 0.0), 0.4182)
                .unwrap();
        assert!(ankle.distance(&target) < 1e-9);
    }

    #[test]
    fn leg_ik_handles_lateral_targets() {
        let hip = Point3::new(0.0, 0.1624, 0.8379);
        let target = Point3::new(-0.25, 0.0, 0.0);
        let (hip_angles, knee_angles) = leg_ik(hip, target, 0.4828, 0.4182).unwrap();
        assert!(knee_angles.theta >= 0.0);
        assert_eq!(knee_angles.alpha, 0.0);
        let knee = child_joint_position(hip, hip_angles, 0.4828).unwrap();
        let ankle = child_joint_position(knee, hip_angles + knee_angles, 0.4182).unwrap();
        assert!(ankle.distance(&target) < 1e-12);
    }

    proptest! {
        #[test]
        fn rotations_are_orthogonal_with_unit_det(angle in -PI..PI) {
            for m in [sagittal_rotation(angle), frontal_rotation(angle)] {
                let mtm = m.transpose().mul_mat(&m);
                assert_matrix_eq(&mtm, &Matrix3::identity(), 1e-12);
                prop_assert!((m.det() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn child_offset_preserves_length(
            theta in -PI..PI,
            alpha in -PI..PI,
            length in 0.05f64..2.0,
            px in -1.0f64..1.0,
            py in -1.0f64..1.0,
            pz in -1.0f64..1.0,
        ) {
            let parent = Point3::new(px, py, pz);
            let child =
                child_joint_position(parent, JointAngles::new(theta, alpha), length).unwrap();
            prop_assert!((child.distance(&parent) - length).abs() < 1e-12);
        }

        #[test]
        fn ik_round_trips_in_limit_angles(
            theta_hip in -0.6f64..0.6,
            theta_knee in 0.0f64..1.2,
        ) {
            let femur = 0.4828;
            let tibia = 0.4182;
            let hip = Point3::new(0.0, 0.0, 0.901);
            let knee =
                child_joint_position(hip, JointAngles::new(theta_hip, 0.0), femur).unwrap();
            let ankle = child_joint_position(
                knee,
                JointAngles::new(theta_hip + theta_knee, 0.0),
                tibia,
            )
            .unwrap();
            let (h, k) = two_link_ik(hip, ankle, femur, tibia).unwrap();
            let knee2 = child_joint_position(hip, JointAngles::new(h, 0.0), femur).unwrap();
            let ankle2 =
                child_joint_position(knee2, JointAngles::new(h + k, 0.0), tibia).unwrap();
            prop_assert!(ankle2.distance(&ankle) < 1e-9);
        }

        #[test]
        fn zero_angles_put_ankle_leg_length_below_pelvis(pz in 0.89f64..1.4) {
            let skeleton = build_skeleton(1.70, 70.0, None).unwrap();
            let pelvis = Point3::new(0.0, 0.0, pz);
            let posture = forward_posture(
                &skeleton,
                pelvis,
                &PostureAngles::default(),
                Phase::Double,
            )
            .unwrap();
            prop_assert!(
                (posture.left.ankle.z - (pz - skeleton.lengths.leg)).abs() < 1e-12
            );
        }
    }
}
