//! Gait-cycle assembly: step planning, hierarchical sub-swarm solving,
//! stability validation, memory commits and support-leg alternation.
//!
//! A half-step works through three phases:
//!
//! 1. a double-support *shift* via-point that moves the pelvis over this
//!    step's support foot (both ankles stay pinned; both legs close onto
//!    their ankles in closed form),
//! 2. single-support *swing* via-points tracking a lift-advance-land ankle
//!    arc, solved by the swing leg's hip -> knee -> ankle sub-swarms while
//!    the support leg holds its memory angles with the support ankle pinned
//!    to the ground (the pelvis consequently stays over the support foot),
//! 3. a double-support *landing* via-point that puts the swing ankle back on
//!    the ground, one step length ahead of its previous footfall.
//!
//! Every via-point must pass the static-stability check before it is
//! adopted; a failed solve or a rejected posture re-derives the RNG
//! substreams and retries. Committing a landing toggles the support leg and
//! mirrors the final swarm velocities onto the next swing leg.
//!
//! Sub-swarms communicate down the chain: the hip swarm's selected angles
//! fix the knee position that the knee swarm chains from, and so on. The
//! ankle joint's angle pair orients the foot, which has no kinematic child
//! in this model, so its swarm sees a flat landscape and keeps its
//! incumbent; it is retained for the three-per-leg structure and the
//! dynamics transfer.

use crate::anthro::{Joint, Skeleton};
use crate::kinematics::{
    child_joint_position, forward_posture, hip_position, leg_ik, JointAngles, KinError, LegAngles,
    Phase, Point3, Posture, PostureAngles, Side,
};
use crate::rng::mix;
use crate::stability::{
    is_statically_stable, posture_fitness, FitnessMode, Point2, PolygonMode, StabilityError,
};
use crate::swarm::{local_fitness, run_subswarm, JointId, SubSwarm, SwarmConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GaitError {
    #[error("invalid gait config: {0}")]
    BadConfig(String),
    #[error("step {step} via-point {via} unreachable: {source}")]
    TargetUnreachable {
        step: usize,
        via: usize,
        source: KinError,
    },
    #[error("{joint:?} residual {residual} above tolerance after the iteration budget")]
    NoConvergence { joint: Joint, residual: f64 },
    #[error("{joint:?} angles ({theta}, {alpha}) outside the joint limits")]
    OutsideLimits { joint: Joint, theta: f64, alpha: f64 },
    #[error("swing ankle advance {advance} is not forward")]
    NotForward { advance: f64 },
    #[error("step {step} infeasible after retries at via-point {via}: {reason}")]
    StepInfeasible {
        step: usize,
        via: usize,
        reason: String,
        /// Everything validated before the failure.
        partial: GaitTrajectory,
    },
    #[error(transparent)]
    Kinematics(#[from] KinError),
}

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("trajectory has no records")]
    EmptyTrajectory,
    #[error("no common channels between the two trajectories")]
    ChannelMismatch,
}

/// Everything that shapes one gait run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitConfig {
    /// Forward advance of the swing ankle per half-step, meters.
    pub step_length: f64,
    /// Peak swing-ankle lift, meters.
    pub ground_clearance: f64,
    /// Intermediate swing via-points per step (the landing is extra).
    pub via_points_per_step: usize,
    /// Number of half-steps to take.
    pub steps: usize,
    /// Retries per via-point with re-derived RNG substreams.
    pub max_retries: usize,
    pub swarm: SwarmConfig,
    pub fitness_mode: FitnessMode,
    pub polygon_mode: PolygonMode,
    /// Scale on mirrored swarm velocities carried to the next swing leg.
    pub transfer_factor: f64,
    /// Walking pelvis height as a fraction of leg length.
    pub pelvis_height_factor: f64,
    /// Forward shift of each footprint from its ankle projection, meters.
    pub footprint_forward_offset: f64,
    pub seed: u64,
}

impl Default for GaitConfig {
    fn default() -> Self {
        Self {
            step_length: 0.25,
            ground_clearance: 0.05,
            via_points_per_step: 3,
            steps: 8,
            max_retries: 5,
            swarm: SwarmConfig::default(),
            fitness_mode: FitnessMode::default(),
            polygon_mode: PolygonMode::default(),
            transfer_factor: 0.5,
            pelvis_height_factor: 0.93,
            footprint_forward_offset: 0.0,
            seed: 42,
        }
    }
}

impl GaitConfig {
    pub fn validate(&self, skeleton: &Skeleton) -> Result<(), GaitError> {
        if self.step_length <= 0.0 {
            return Err(GaitError::BadConfig(format!(
                "step_length must be positive, got {}",
                self.step_length
            )));
        }
        if self.step_length >= skeleton.lengths.leg {
            return Err(GaitError::BadConfig(format!(
                "step_length {} not below leg length {}",
                self.step_length, skeleton.lengths.leg
            )));
        }
        if self.ground_clearance < 0.0 {
            return Err(GaitError::BadConfig(format!(
                "ground_clearance must be non-negative, got {}",
                self.ground_clearance
            )));
        }
        if self.via_points_per_step < 2 {
            return Err(GaitError::BadConfig(format!(
                "via_points_per_step must be at least 2, got {}",
                self.via_points_per_step
            )));
        }
        if !(0.0..=1.0).contains(&self.transfer_factor) {
            return Err(GaitError::BadConfig(format!(
                "transfer_factor must be in [0, 1], got {}",
                self.transfer_factor
            )));
        }
        if !(0.5..1.0).contains(&self.pelvis_height_factor) {
            return Err(GaitError::BadConfig(format!(
                "pelvis_height_factor must be in [0.5, 1), got {}",
                self.pelvis_height_factor
            )));
        }
        if self.swarm.particle_count < 2 {
            return Err(GaitError::BadConfig(format!(
                "particle_count must be at least 2, got {}",
                self.swarm.particle_count
            )));
        }
        if self.swarm.max_iterations < 1 {
            return Err(GaitError::BadConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.swarm.c1 < 0.0 || self.swarm.c2 < 0.0 {
            return Err(GaitError::BadConfig(
                "c1 and c2 must be non-negative".into(),
            ));
        }
        if self.swarm.velocity_clamp <= 0.0 {
            return Err(GaitError::BadConfig(
                "velocity_clamp must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Positions of both feet on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footfalls {
    pub left: Point2,
    pub right: Point2,
}

impl Footfalls {
    pub fn get(&self, side: Side) -> Point2 {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    fn set(&mut self, side: Side, p: Point2) {
        match side {
            Side::Left => self.left = p,
            Side::Right => self.right = p,
        }
    }
}

/// Committed walker state between via-points.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitState {
    /// Per-joint committed memories.
    pub angles: PostureAngles,
    pub support: Side,
    pub footfalls: Footfalls,
    pub pelvis: Point3,
    pub step_index: usize,
    /// Initial sub-swarm velocities for the next swing leg (hip, knee,
    /// ankle), already mirrored and scaled by the dynamics transfer.
    pub carried_velocities: [[f64; 2]; 3],
}

impl GaitState {
    /// Standing double-support start: zero angles, pelvis one leg length
    /// above the ground, feet under the hips.
    pub fn standing(skeleton: &Skeleton) -> Self {
        let half = skeleton.lengths.inter_hip / 2.0;
        Self {
            angles: PostureAngles::default(),
            support: Side::Left,
            footfalls: Footfalls {
                left: Point2::new(0.0, half),
                right: Point2::new(0.0, -half),
            },
            pelvis: Point3::new(0.0, 0.0, skeleton.lengths.leg),
            step_index: 0,
            carried_velocities: [[0.0; 2]; 3],
        }
    }
}

/// What a via-point does within a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViaKind {
    /// Double support; the pelvis moves over this step's support foot.
    Shift,
    /// Single support; the swing ankle tracks its arc.
    Swing,
    /// Double support; the swing ankle lands one step length ahead.
    Landing,
}

/// Targets for one via-point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViaPoint {
    pub kind: ViaKind,
    pub phase: Phase,
    pub pelvis: Point3,
    pub swing_hip: Point3,
    pub swing_knee: Point3,
    pub swing_ankle: Point3,
}

/// The ordered targets of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ViaPointPlan {
    pub swing: Side,
    pub via_points: Vec<ViaPoint>,
}

/// Symmetric clearance bump over normalized swing progress, peaking at the
/// midpoint.
fn clearance_bump(u: f64) -> f64 {
    4.0 * u * (1.0 - u)
}

fn plan_via(
    skeleton: &Skeleton,
    kind: ViaKind,
    phase: Phase,
    pelvis: Point3,
    swing: Side,
    ankle_target: Point3,
) -> Result<ViaPoint, KinError> {
    let hip = hip_position(pelvis, skeleton.lengths.inter_hip, swing);
    // The closed-form solve both proves the target reachable and derives
    // the knee target the hip sub-swarm will chase; the swarms still search.
    let (hip_seed, _knee_seed) = leg_ik(
        hip,
        ankle_target,
        skeleton.lengths.femur,
        skeleton.lengths.tibia,
    )?;
    let knee = child_joint_position(hip, hip_seed, skeleton.lengths.femur)?;
    Ok(ViaPoint {
        kind,
        phase,
        pelvis,
        swing_hip: hip,
        swing_knee: knee,
        swing_ankle: ankle_target,
    })
}

/// Lays out the shift, swing-arc and landing targets for the next step.
///
/// Swing-ankle targets interpolate x linearly over the step length with a
/// symmetric clearance bump in z; the pelvis target sits over the support
/// foot at the configured walking height and stays there for the whole
/// step. Hip and knee targets come from the closed-form leg solve and seed
/// the swarms; the swarms still search.
pub fn plan_step_targets(
    state: &GaitState,
    skeleton: &Skeleton,
    cfg: &GaitConfig,
) -> Result<ViaPointPlan, KinError> {
    let swing = state.support.opposite();
    let support_foot = state.footfalls.get(state.support);
    let swing_foot = state.footfalls.get(swing);
    let pelvis = Point3::new(
        support_foot.x,
        support_foot.y,
        cfg.pelvis_height_factor * skeleton.lengths.leg,
    );

    let mut via_points = Vec::with_capacity(cfg.via_points_per_step + 2);
    via_points.push(plan_via(
        skeleton,
        ViaKind::Shift,
        Phase::Double,
        pelvis,
        swing,
        Point3::new(swing_foot.x, swing_foot.y, 0.0),
    )?);

    let m = cfg.via_points_per_step;
    for k in 1..=m {
        let u = k as f64 / (m + 1) as f64;
        let target = Point3::new(
            swing_foot.x + cfg.step_length * u,
            swing_foot.y,
            cfg.ground_clearance * clearance_bump(u),
        );
        via_points.push(plan_via(
            skeleton,
            ViaKind::Swing,
            Phase::single(state.support),
            pelvis,
            swing,
            target,
        )?);
    }

    via_points.push(plan_via(
        skeleton,
        ViaKind::Landing,
        Phase::Double,
        pelvis,
        swing,
        Point3::new(swing_foot.x + cfg.step_length, swing_foot.y, 0.0),
    )?);

    Ok(ViaPointPlan { swing, via_points })
}

/// Pelvis position implied by rooting the support chain at its pinned
/// ankle. This is the one source of truth for the pelvis between commits.
fn derive_pelvis(skeleton: &Skeleton, support: Side, footfall: Point2, leg: &LegAngles) -> Point3 {
    let ankle = Point3::new(footfall.x, footfall.y, 0.0);
    let origin = Point3::default();
    let femur_offset =
        child_joint_position(origin, leg.hip, skeleton.lengths.femur).expect("positive femur");
    let tibia_offset = child_joint_position(origin, leg.hip + leg.knee, skeleton.lengths.tibia)
        .expect("positive tibia");
    let hip = ankle - tibia_offset - femur_offset;
    Point3::new(
        hip.x,
        hip.y - support.lateral_sign() * skeleton.lengths.inter_hip / 2.0,
        hip.z,
    )
}

/// Builds the full posture for the committed angles, with the support ankle
/// pinned at its footfall.
fn build_posture(
    skeleton: &Skeleton,
    support: Side,
    footfalls: &Footfalls,
    angles: &PostureAngles,
    phase: Phase,
) -> Result<Posture, KinError> {
    let pelvis = derive_pelvis(
        skeleton,
        support,
        footfalls.get(support),
        angles.leg(support),
    );
    forward_posture(skeleton, pelvis, angles, phase)
}

/// Hip and knee angles closing a leg from the pelvis onto a pinned ankle.
/// Committed postures must respect the joint limits, so a closed-form
/// solution outside them is an error, not a clamp.
fn close_leg(
    skeleton: &Skeleton,
    pelvis: Point3,
    side: Side,
    ankle: Point3,
    prev: &LegAngles,
) -> Result<LegAngles, GaitError> {
    let hip = hip_position(pelvis, skeleton.lengths.inter_hip, side);
    let (hip_angles, knee_angles) =
        leg_ik(hip, ankle, skeleton.lengths.femur, skeleton.lengths.tibia)?;
    for (joint, angles) in [(Joint::Hip, hip_angles), (Joint::Knee, knee_angles)] {
        let limits = skeleton.limits.for_joint(joint);
        if !limits.theta.contains(angles.theta) || !limits.alpha.contains(angles.alpha) {
            return Err(GaitError::OutsideLimits {
                joint,
                theta: angles.theta,
                alpha: angles.alpha,
            });
        }
    }
    Ok(LegAngles {
        hip: hip_angles,
        knee: knee_angles,
        ankle: prev.ankle,
    })
}

/// A solved via-point before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedPosture {
    pub posture: Posture,
    pub angles: PostureAngles,
    /// Tracking error per joint (left hip..right ankle), meters.
    pub residuals: [f64; 6],
    /// Final global-best velocities of the swing sub-swarms (hip, knee,
    /// ankle), for the dynamics transfer.
    pub swarm_velocities: [[f64; 2]; 3],
}

fn residual_slot(side: Side, joint: Joint) -> usize {
    match side {
        Side::Left => joint.index(),
        Side::Right => 3 + joint.index(),
    }
}

/// Solves one via-point.
///
/// Shift via-points close both legs onto their pinned ankles in closed form
/// under the new pelvis. Swing and landing via-points run the swing leg's
/// three sub-swarms in chain order; landings (and any via-point whose ankle
/// target touches the ground) are then snapped onto the target with the
/// closed-form solve so ground contact is exact.
pub fn solve_posture(
    skeleton: &Skeleton,
    state: &GaitState,
    swing: Side,
    via: &ViaPoint,
    cfg: &GaitConfig,
    substream_seed: u64,
) -> Result<SolvedPosture, GaitError> {
    let support = swing.opposite();
    let mut angles = state.angles;
    let mut residuals = [0.0; 6];

    if via.kind == ViaKind::Shift {
        *angles.leg_mut(support) = close_leg(
            skeleton,
            via.pelvis,
            support,
            Point3::new(
                state.footfalls.get(support).x,
                state.footfalls.get(support).y,
                0.0,
            ),
            angles.leg(support),
        )?;
        *angles.leg_mut(swing) = close_leg(
            skeleton,
            via.pelvis,
            swing,
            via.swing_ankle,
            angles.leg(swing),
        )?;
        let posture = build_posture(skeleton, support, &state.footfalls, &angles, via.phase)?;
        let leg = posture.leg(swing);
        residuals[residual_slot(swing, Joint::Hip)] = leg.hip.distance(&via.swing_hip);
        residuals[residual_slot(swing, Joint::Knee)] = leg.knee.distance(&via.swing_knee);
        residuals[residual_slot(swing, Joint::Ankle)] = leg.ankle.distance(&via.swing_ankle);
        return Ok(SolvedPosture {
            posture,
            angles,
            residuals,
            swarm_velocities: [[0.0; 2]; 3],
        });
    }

    // The pelvis is frozen for the whole swing: it follows from the pinned
    // support ankle and the support leg's memory angles.
    let pelvis = derive_pelvis(
        skeleton,
        support,
        state.footfalls.get(support),
        angles.leg(support),
    );
    let swing_hip = hip_position(pelvis, skeleton.lengths.inter_hip, swing);
    let memory = *state.angles.leg(swing);
    let femur = skeleton.lengths.femur;
    let tibia = skeleton.lengths.tibia;
    let eps = cfg.swarm.convergence_eps;

    let new_swarm = |joint: Joint, memory_pos: [f64; 2]| -> Result<SubSwarm, GaitError> {
        SubSwarm::new(
            JointId { side: swing, joint },
            memory_pos,
            &cfg.swarm,
            skeleton.limits.for_joint(joint),
            mix(substream_seed, joint.index() as u64),
            state.carried_velocities[joint.index()],
        )
        .map_err(|e| GaitError::BadConfig(e.to_string()))
    };

    // Hip sub-swarm: its angles place the knee.
    let knee_target = via.swing_knee;
    let mut hip_swarm = new_swarm(Joint::Hip, [memory.hip.theta, memory.hip.alpha])?;
    let hip_outcome = run_subswarm(
        &mut hip_swarm,
        |p| {
            child_joint_position(swing_hip, JointAngles::new(p[0], p[1]), femur)
                .map(|knee| local_fitness(knee, knee_target))
                .unwrap_or(f64::INFINITY)
        },
        &cfg.swarm,
        skeleton.limits.for_joint(Joint::Hip),
    );
    if hip_outcome.best_fitness > eps {
        return Err(GaitError::NoConvergence {
            joint: Joint::Knee,
            residual: hip_outcome.best_fitness,
        });
    }
    let hip_angles = JointAngles::new(hip_outcome.best_position[0], hip_outcome.best_position[1]);
    let knee_pos = child_joint_position(swing_hip, hip_angles, femur)?;

    // Knee sub-swarm: chains from the hip swarm's selected knee position.
    let ankle_target = via.swing_ankle;
    let mut knee_swarm = new_swarm(Joint::Knee, [memory.knee.theta, memory.knee.alpha])?;
    let knee_outcome = run_subswarm(
        &mut knee_swarm,
        |p| {
            child_joint_position(knee_pos, hip_angles + JointAngles::new(p[0], p[1]), tibia)
                .map(|ankle| local_fitness(ankle, ankle_target))
                .unwrap_or(f64::INFINITY)
        },
        &cfg.swarm,
        skeleton.limits.for_joint(Joint::Knee),
    );
    if knee_outcome.best_fitness > eps {
        return Err(GaitError::NoConvergence {
            joint: Joint::Ankle,
            residual: knee_outcome.best_fitness,
        });
    }
    let knee_angles =
        JointAngles::new(knee_outcome.best_position[0], knee_outcome.best_position[1]);
    let ankle_pos = child_joint_position(knee_pos, hip_angles + knee_angles, tibia)?;

    // Ankle sub-swarm: the foot has no kinematic child, so the landscape is
    // flat and the incumbent survives; it still reports the chain residual.
    let ankle_residual = local_fitness(ankle_pos, ankle_target);
    let mut ankle_swarm = new_swarm(Joint::Ankle, [memory.ankle.theta, memory.ankle.alpha])?;
    let ankle_outcome = run_subswarm(
        &mut ankle_swarm,
        |_| ankle_residual,
        &cfg.swarm,
        skeleton.limits.for_joint(Joint::Ankle),
    );
    let ankle_angles = JointAngles::new(
        ankle_outcome.best_position[0],
        ankle_outcome.best_position[1],
    );

    let mut swing_leg = LegAngles {
        hip: hip_angles,
        knee: knee_angles,
        ankle: ankle_angles,
    };
    // Ground-contact targets are constraints: refine the swarm solution with
    // the exact closed-form solve so the landed ankle touches down at z = 0.
    if via.swing_ankle.z == 0.0 && ankle_residual > 1e-12 {
        swing_leg = close_leg(skeleton, pelvis, swing, via.swing_ankle, &swing_leg)?;
    }
    *angles.leg_mut(swing) = swing_leg;

    let posture = build_posture(skeleton, support, &state.footfalls, &angles, via.phase)?;
    let leg = posture.leg(swing);
    residuals[residual_slot(swing, Joint::Hip)] = leg.hip.distance(&via.swing_hip);
    residuals[residual_slot(swing, Joint::Knee)] = hip_outcome.best_fitness;
    residuals[residual_slot(swing, Joint::Ankle)] = knee_outcome.best_fitness;

    Ok(SolvedPosture {
        posture,
        angles,
        residuals,
        swarm_velocities: [
            hip_outcome.best_velocity,
            knee_outcome.best_velocity,
            ankle_outcome.best_velocity,
        ],
    })
}

/// Why a candidate posture was rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RejectReason {
    ComOutsidePolygon { margin: f64 },
    SupportFootAirborne { side: Side, z: f64 },
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::ComOutsidePolygon { margin } => {
                write!(f, "COM outside support polygon by {} m", -margin)
            }
            RejectReason::SupportFootAirborne { side, z } => {
                write!(f, "support foot {side:?} airborne at z = {z}")
            }
        }
    }
}

/// A candidate that passed the stability check, with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedStep {
    pub com: Point2,
    pub fitness: f64,
    pub margin: f64,
}

/// Outcome of checking one candidate posture.
#[derive(Debug, Clone, PartialEq)]
pub enum StepValidation {
    Validated(ValidatedStep),
    Rejected(RejectReason),
}

/// Stability screen for one candidate: COM projection inside the phase's
/// support polygon, scored with the configured fitness mode.
pub fn validate_step(posture: &Posture, skeleton: &Skeleton, cfg: &GaitConfig) -> StepValidation {
    let report = match is_statically_stable(
        posture,
        &skeleton.masses,
        &skeleton.lengths,
        cfg.polygon_mode,
        cfg.footprint_forward_offset,
    ) {
        Ok(report) => report,
        Err(StabilityError::SupportFootAirborne { side, z }) => {
            return StepValidation::Rejected(RejectReason::SupportFootAirborne { side, z })
        }
        Err(StabilityError::Degenerate(_)) => {
            return StepValidation::Rejected(RejectReason::ComOutsidePolygon { margin: 0.0 })
        }
    };
    if !report.stable {
        return StepValidation::Rejected(RejectReason::ComOutsidePolygon {
            margin: report.margin,
        });
    }
    let fitness = posture_fitness(report.com, &report.polygon, cfg.fitness_mode);
    StepValidation::Validated(ValidatedStep {
        com: report.com,
        fitness,
        margin: report.margin,
    })
}

/// Mirror (negate the frontal component) and scale per-joint velocities for
/// the opposite leg's sub-swarms.
pub fn transfer_particle_dynamics(
    velocities: &[[f64; 2]; 3],
    transfer_factor: f64,
) -> [[f64; 2]; 3] {
    velocities.map(|v| [transfer_factor * v[0], -transfer_factor * v[1]])
}

/// Commits a validated landing: updates the memories and footfall, toggles
/// the support leg, and carries the mirrored swarm velocities over.
pub fn commit_step(
    state: &mut GaitState,
    skeleton: &Skeleton,
    cfg: &GaitConfig,
    swing: Side,
    solved: &SolvedPosture,
) -> Result<(), GaitError> {
    let landed = solved.posture.leg(swing).ankle;
    let advance = landed.x - state.footfalls.get(swing).x;
    if advance <= 0.0 {
        return Err(GaitError::NotForward { advance });
    }
    state.angles = solved.angles;
    state.footfalls.set(swing, Point2::new(landed.x, landed.y));
    state.support = swing;
    state.step_index += 1;
    state.carried_velocities =
        transfer_particle_dynamics(&solved.swarm_velocities, cfg.transfer_factor);
    state.pelvis = derive_pelvis(
        skeleton,
        state.support,
        state.footfalls.get(state.support),
        state.angles.leg(state.support),
    );
    Ok(())
}

/// One recorded via-point of a gait.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub via: usize,
    pub phase: Phase,
    pub posture: Posture,
    pub com: Point2,
    pub stable: bool,
    pub fitness: f64,
    /// Tracking error per joint at commit (left hip..right ankle), meters.
    pub residuals: [f64; 6],
}

/// Time-ordered committed postures of a walk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaitTrajectory {
    pub records: Vec<TrajectoryRecord>,
}

/// Joint order used by exports, plots and comparisons.
pub const JOINT_CHANNEL_ORDER: [(Side, Joint); 6] = [
    (Side::Left, Joint::Hip),
    (Side::Left, Joint::Knee),
    (Side::Left, Joint::Ankle),
    (Side::Right, Joint::Hip),
    (Side::Right, Joint::Knee),
    (Side::Right, Joint::Ankle),
];

pub fn joint_channel_name(side: Side, joint: Joint) -> &'static str {
    match (side, joint) {
        (Side::Left, Joint::Hip) => "hip_left",
        (Side::Left, Joint::Knee) => "knee_left",
        (Side::Left, Joint::Ankle) => "ankle_left",
        (Side::Right, Joint::Hip) => "hip_right",
        (Side::Right, Joint::Knee) => "knee_right",
        (Side::Right, Joint::Ankle) => "ankle_right",
    }
}

impl GaitTrajectory {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Named scalar channels: per joint x/y/z/theta/alpha, pelvis x/y/z,
    /// COM x/y and the stability fitness.
    pub fn channels(&self) -> Vec<(String, Vec<f64>)> {
        let mut out = Vec::new();
        let pull = |f: &dyn Fn(&TrajectoryRecord) -> f64| -> Vec<f64> {
            self.records.iter().map(f).collect()
        };
        for (side, joint) in JOINT_CHANNEL_ORDER {
            let name = joint_channel_name(side, joint);
            let point = move |r: &TrajectoryRecord| -> Point3 {
                let leg = r.posture.leg(side);
                match joint {
                    Joint::Hip => leg.hip,
                    Joint::Knee => leg.knee,
                    Joint::Ankle => leg.ankle,
                }
            };
            let angles = move |r: &TrajectoryRecord| -> JointAngles {
                let leg = r.posture.leg(side);
                match joint {
                    Joint::Hip => leg.angles.hip,
                    Joint::Knee => leg.angles.knee,
                    Joint::Ankle => leg.angles.ankle,
                }
            };
            out.push((format!("{name}_x"), pull(&|r| point(r).x)));
            out.push((format!("{name}_y"), pull(&|r| point(r).y)));
            out.push((format!("{name}_z"), pull(&|r| point(r).z)));
            out.push((format!("{name}_theta"), pull(&|r| angles(r).theta)));
            out.push((format!("{name}_alpha"), pull(&|r| angles(r).alpha)));
        }
        out.push(("pelvis_x".into(), pull(&|r| r.posture.pelvis.x)));
        out.push(("pelvis_y".into(), pull(&|r| r.posture.pelvis.y)));
        out.push(("pelvis_z".into(), pull(&|r| r.posture.pelvis.z)));
        out.push(("com_x".into(), pull(&|r| r.com.x)));
        out.push(("com_y".into(), pull(&|r| r.com.y)));
        out.push(("fitness".into(), pull(&|r| r.fitness)));
        out
    }
}

fn record_via(
    records: &mut Vec<TrajectoryRecord>,
    step: usize,
    via: usize,
    solved: &SolvedPosture,
    validated: &ValidatedStep,
) {
    records.push(TrajectoryRecord {
        step,
        via,
        phase: solved.posture.phase,
        posture: solved.posture,
        com: validated.com,
        stable: true,
        fitness: validated.fitness,
        residuals: solved.residuals,
    });
}

/// Runs the full gait loop: alternating half-steps, each planned, solved
/// per via-point with retry-on-rejection, validated and committed.
///
/// On step failure the error carries the partial trajectory accumulated so
/// far.
pub fn generate_gait(skeleton: &Skeleton, cfg: &GaitConfig) -> Result<GaitTrajectory, GaitError> {
    cfg.validate(skeleton)?;
    let mut state = GaitState::standing(skeleton);
    let mut records = Vec::new();

    let initial = build_posture(
        skeleton,
        state.support,
        &state.footfalls,
        &state.angles,
        Phase::Double,
    )?;
    match validate_step(&initial, skeleton, cfg) {
        StepValidation::Validated(v) => {
            let solved = SolvedPosture {
                posture: initial,
                angles: state.angles,
                residuals: [0.0; 6],
                swarm_velocities: [[0.0; 2]; 3],
            };
            record_via(&mut records, 0, 0, &solved, &v);
        }
        StepValidation::Rejected(reason) => {
            return Err(GaitError::StepInfeasible {
                step: 0,
                via: 0,
                reason: reason.to_string(),
                partial: GaitTrajectory { records },
            })
        }
    }

    for step in 1..=cfg.steps {
        let plan = match plan_step_targets(&state, skeleton, cfg) {
            Ok(plan) => plan,
            Err(source) => {
                return Err(GaitError::StepInfeasible {
                    step,
                    via: 0,
                    reason: GaitError::TargetUnreachable {
                        step,
                        via: 0,
                        source,
                    }
                    .to_string(),
                    partial: GaitTrajectory { records },
                })
            }
        };

        let mut landing: Option<SolvedPosture> = None;
        for (via_index, via) in plan.via_points.iter().enumerate() {
            let mut adopted = false;
            let mut last_reason = String::new();
            // Shift via-points are closed-form and deterministic; retrying
            // them cannot change the outcome.
            let attempts = if via.kind == ViaKind::Shift {
                1
            } else {
                1 + cfg.max_retries
            };
            for retry in 0..attempts {
                let substream_seed = mix(
                    mix(mix(cfg.seed, step as u64), via_index as u64),
                    retry as u64,
                );
                let solved =
                    match solve_posture(skeleton, &state, plan.swing, via, cfg, substream_seed) {
                        Ok(solved) => solved,
                        Err(e) => {
                            last_reason = e.to_string();
                            continue;
                        }
                    };
                match validate_step(&solved.posture, skeleton, cfg) {
                    StepValidation::Validated(v) => {
                        state.angles = solved.angles;
                        state.pelvis = solved.posture.pelvis;
                        record_via(&mut records, step, via_index, &solved, &v);
                        if via.kind == ViaKind::Landing {
                            landing = Some(solved);
                        }
                        adopted = true;
                        break;
                    }
                    StepValidation::Rejected(reason) => {
                        last_reason = reason.to_string();
                        continue;
                    }
                }
            }
            if !adopted {
                return Err(GaitError::StepInfeasible {
                    step,
                    via: via_index,
                    reason: last_reason,
                    partial: GaitTrajectory { records },
                });
            }
        }

        let solved = landing.expect("every plan ends with a landing via-point");
        if let Err(e) = commit_step(&mut state, skeleton, cfg, plan.swing, &solved) {
            return Err(GaitError::StepInfeasible {
                step,
                via: plan.via_points.len() - 1,
                reason: e.to_string(),
                partial: GaitTrajectory { records },
            });
        }
    }

    Ok(GaitTrajectory { records })
}

/// Per-channel deviation between two trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub channel: String,
    pub rmse: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub channels: Vec<ChannelStats>,
}

/// Samples a channel at grid node `numer / denom` of normalized time by
/// linear interpolation. Index-based normalization keeps grid nodes exact,
/// so equal-length inputs compare sample-for-sample.
fn sample_channel(values: &[f64], numer: usize, denom: usize) -> f64 {
    let n = values.len();
    if n == 1 {
        return values[0];
    }
    let t = (numer as f64 * (n - 1) as f64) / denom as f64;
    let i = (t.floor() as usize).min(n - 2);
    let frac = t - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

/// RMSE and max absolute deviation per common channel, both inputs
/// time-normalized to [0, 1] and resampled onto a shared uniform grid.
pub fn compare_channel_sets(
    a: &[(String, Vec<f64>)],
    b: &[(String, Vec<f64>)],
) -> Result<CompareReport, CompareError> {
    let len_a = a.first().map(|(_, v)| v.len()).unwrap_or(0);
    let len_b = b.first().map(|(_, v)| v.len()).unwrap_or(0);
    if len_a == 0 || len_b == 0 {
        return Err(CompareError::EmptyTrajectory);
    }
    let grid = len_a.max(len_b);
    let mut channels = Vec::new();
    for (name, va) in a {
        let Some((_, vb)) = b.iter().find(|(n, _)| n == name) else {
            continue;
        };
        let mut sq_sum = 0.0;
        let mut max_abs: f64 = 0.0;
        for k in 0..grid {
            let xa = sample_channel(va, k, grid - 1);
            let xb = sample_channel(vb, k, grid - 1);
            let d = xa - xb;
            sq_sum += d * d;
            max_abs = max_abs.max(d.abs());
        }
        channels.push(ChannelStats {
            channel: name.clone(),
            rmse: (sq_sum / grid as f64).sqrt(),
            max_abs,
        });
    }
    if channels.is_empty() {
        return Err(CompareError::ChannelMismatch);
    }
    Ok(CompareReport { channels })
}

/// Compares a generated gait against a reference channel set (another gait
/// or imported markers).
pub fn compare_trajectories(
    a: &GaitTrajectory,
    b: &[(String, Vec<f64>)],
) -> Result<CompareReport, CompareError> {
    if a.is_empty() {
        return Err(CompareError::EmptyTrajectory);
    }
    compare_channel_sets(&a.channels(), b)
}
