//! CSV trajectory export and import.
//!
//! One header row, then one row per record. Column order is fixed:
//! `step,via,phase`, then x/y/z/theta/alpha for each of the six joints in
//! channel order, then `pelvis_x,pelvis_y,pelvis_z,com_x,com_y,stable,
//! fitness`. Floats are written as shortest round-trip decimals, so an
//! exported file imports back bit-exactly.

use crate::gaitgen::{joint_channel_name, GaitTrajectory, TrajectoryRecord, JOINT_CHANNEL_ORDER};
use crate::kinematics::{JointAngles, LegAngles, LegPose, Phase, Point3, Posture};
use crate::stability::Point2;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("trajectory has no records")]
    EmptyTrajectory,
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
}

fn header() -> String {
    let mut cols = vec!["step".to_string(), "via".to_string(), "phase".to_string()];
    for (side, joint) in JOINT_CHANNEL_ORDER {
        let name = joint_channel_name(side, joint);
        for suffix in ["x", "y", "z", "theta", "alpha"] {
            cols.push(format!("{name}_{suffix}"));
        }
    }
    for extra in [
        "pelvis_x", "pelvis_y", "pelvis_z", "com_x", "com_y", "stable", "fitness",
    ] {
        cols.push(extra.to_string());
    }
    cols.join(",")
}

/// Serializes a trajectory to CSV text.
pub fn export_trajectory(traj: &GaitTrajectory) -> Result<String, TrajectoryError> {
    if traj.records.is_empty() {
        return Err(TrajectoryError::EmptyTrajectory);
    }
    let mut out = String::new();
    out.push_str(&header());
    out.push('\n');
    for r in &traj.records {
        write!(out, "{},{},{}", r.step, r.via, r.phase).unwrap();
        for (side, joint) in JOINT_CHANNEL_ORDER {
            let leg = r.posture.leg(side);
            let (p, a) = match joint {
                crate::anthro::Joint::Hip => (leg.hip, leg.angles.hip),
                crate::anthro::Joint::Knee => (leg.knee, leg.angles.knee),
                crate::anthro::Joint::Ankle => (leg.ankle, leg.angles.ankle),
            };
            write!(out, ",{},{},{},{},{}", p.x, p.y, p.z, a.theta, a.alpha).unwrap();
        }
        write!(
            out,
            ",{},{},{},{},{},{},{}",
            r.posture.pelvis.x,
            r.posture.pelvis.y,
            r.posture.pelvis.z,
            r.com.x,
            r.com.y,
            u8::from(r.stable),
            r.fitness
        )
        .unwrap();
        out.push('\n');
    }
    Ok(out)
}

fn parse_f64(field: &str, line: usize, col: &str) -> Result<f64, TrajectoryError> {
    field.parse().map_err(|_| TrajectoryError::ParseError {
        line,
        message: format!("column '{col}': expected a number, got '{field}'"),
    })
}

/// Parses CSV text produced by [`export_trajectory`]. Per-joint residuals
/// are not part of the format and come back as zeros.
pub fn import_trajectory(bytes: &[u8]) -> Result<GaitTrajectory, TrajectoryError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TrajectoryError::ParseError {
        line: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(TrajectoryError::ParseError {
        line: 0,
        message: "empty file".to_string(),
    })?;
    let expected = header();
    if first != expected {
        return Err(TrajectoryError::ParseError {
            line: 1,
            message: "header does not match the trajectory schema".to_string(),
        });
    }
    let columns: Vec<&str> = expected.split(',').collect();

    let mut records = Vec::new();
    for (idx, row) in lines {
        let line = idx + 1;
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != columns.len() {
            return Err(TrajectoryError::ParseError {
                line,
                message: format!("expected {} fields, got {}", columns.len(), fields.len()),
            });
        }
        let step: usize = fields[0].parse().map_err(|_| TrajectoryError::ParseError {
            line,
            message: format!("column 'step': expected an integer, got '{}'", fields[0]),
        })?;
        let via: usize = fields[1].parse().map_err(|_| TrajectoryError::ParseError {
            line,
            message: format!("column 'via': expected an integer, got '{}'", fields[1]),
        })?;
        let phase: Phase = fields[2]
            .parse()
            .map_err(|message| TrajectoryError::ParseError { line, message })?;

        let mut at = 3;
        let next = |col: usize| -> Result<f64, TrajectoryError> {
            parse_f64(fields[col], line, columns[col])
        };
        let mut joints: Vec<(Point3, JointAngles)> = Vec::with_capacity(6);
        for _ in 0..6 {
            let x = next(at)?;
            let y = next(at + 1)?;
            let z = next(at + 2)?;
            let theta = next(at + 3)?;
            let alpha = next(at + 4)?;
            joints.push((Point3::new(x, y, z), JointAngles::new(theta, alpha)));
            at += 5;
        }
        let pelvis = Point3::new(next(at)?, next(at + 1)?, next(at + 2)?);
        let com = Point2::new(next(at + 3)?, next(at + 4)?);
        let stable = match fields[at + 5] {
            "0" => false,
            "1" => true,
            other => {
                return Err(TrajectoryError::ParseError {
                    line,
                    message: format!("column 'stable': expected 0 or 1, got '{other}'"),
                })
            }
        };
        let fitness = next(at + 6)?;

        let leg = |base: usize| LegPose {
            hip: joints[base].0,
            knee: joints[base + 1].0,
            ankle: joints[base + 2].0,
            angles: LegAngles {
                hip: joints[base].1,
                knee: joints[base + 1].1,
                ankle: joints[base + 2].1,
            },
        };
        records.push(TrajectoryRecord {
            step,
            via,
            phase,
            posture: Posture {
                pelvis,
                left: leg(0),
                right: leg(3),
                phase,
            },
            com,
            stable,
            fitness,
            residuals: [0.0; 6],
        });
    }
    if records.is_empty() {
        return Err(TrajectoryError::EmptyTrajectory);
    }
    Ok(GaitTrajectory { records })
}
