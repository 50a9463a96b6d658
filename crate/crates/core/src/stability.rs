//! Static stability-checking: footprints, sustentation polygons, center-of-mass
//! projection onto the floor plane, and the posture fitness that scores how
//! close the COM projection sits to the polygon center.
//!
//! A posture is statically stable when the COM projection lies inside the
//! support polygon — one rectangular footprint in single support, the convex
//! hull of both footprints in double support. Containment is the hard
//! predicate; closeness to the polygon centroid is the soft objective scored
//! by [`posture_fitness`].

use crate::anthro::{MassModel, Segment, SegmentLengths};
use crate::kinematics::{Point3, Posture, Side};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Distance tolerance for "on the boundary" half-plane tests, meters.
pub const CONTAINMENT_TOL: f64 = 1e-9;
/// Height tolerance for "on the floor", meters.
pub const GROUND_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum StabilityError {
    #[error("fewer than 3 distinct non-collinear points ({0} effective)")]
    Degenerate(usize),
    #[error("support foot ({side:?}) airborne at z = {z}")]
    SupportFootAirborne { side: Side, z: f64 },
}

/// A point on the ground plane, meters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Cross product of (b - a) and (c - a); positive when c lies left of a->b.
fn cross(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// How the support region is modeled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolygonMode {
    /// Rectangular footprints; hull of both in double support.
    #[default]
    Footprints,
    /// Constrained variant: the segment joining the two ankle projections.
    AnkleSegment,
}

/// Which distance form the posture fitness uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitnessMode {
    /// |dx| + |dy|, the literal nested-square-root form.
    #[default]
    L1,
    /// sqrt(dx^2 + dy^2).
    Euclidean,
}

/// A rectangular ground-contact patch under one foot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    /// Corners in counter-clockwise order.
    pub corners: [Point2; 4],
}

/// Axis-aligned rectangle of foot-length by foot-breadth centered at the
/// ankle projection, optionally shifted forward by `forward_offset`.
///
/// Only meaningful for an ankle on or above the ground (z >= -1e-6); the
/// rectangle is the ground projection either way.
pub fn footprint(ankle: Point3, lengths: &SegmentLengths, forward_offset: f64) -> Footprint {
    let cx = ankle.x + forward_offset;
    let cy = ankle.y;
    let hx = lengths.foot_length / 2.0;
    let hy = lengths.foot_breadth / 2.0;
    Footprint {
        corners: [
            Point2::new(cx - hx, cy - hy),
            Point2::new(cx + hx, cy - hy),
            Point2::new(cx + hx, cy + hy),
            Point2::new(cx - hx, cy + hy),
        ],
    }
}

/// The convex region of ground contact with its centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPolygon {
    /// Convex, counter-clockwise; exactly 2 vertices in ankle-segment mode.
    pub vertices: Vec<Point2>,
    pub phase: crate::kinematics::Phase,
    pub centroid: Point2,
}

/// Minimal counter-clockwise convex hull (monotone chain).
pub fn convex_hull(points: &[Point2]) -> Result<Vec<Point2>, StabilityError> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() < 3 {
        return Err(StabilityError::Degenerate(pts.len()));
    }

    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(StabilityError::Degenerate(lower.len()));
    }
    Ok(lower)
}

/// Area-weighted centroid of a counter-clockwise polygon; midpoint for the
/// 2-vertex ankle-segment mode.
fn polygon_centroid(vertices: &[Point2]) -> Point2 {
    if vertices.len() == 2 {
        return Point2::new(
            (vertices[0].x + vertices[1].x) / 2.0,
            (vertices[0].y + vertices[1].y) / 2.0,
        );
    }
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let w = a.x * b.y - b.x * a.y;
        area2 += w;
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
    }
    Point2::new(cx / (3.0 * area2), cy / (3.0 * area2))
}

/// Builds the sustentation polygon for a phase from the ankle projections.
pub fn support_polygon(
    phase: crate::kinematics::Phase,
    left_ankle: Point3,
    right_ankle: Point3,
    lengths: &SegmentLengths,
    mode: PolygonMode,
    forward_offset: f64,
) -> Result<SupportPolygon, StabilityError> {
    use crate::kinematics::Phase;
    let vertices = match mode {
        PolygonMode::AnkleSegment => vec![
            Point2::new(left_ankle.x, left_ankle.y),
            Point2::new(right_ankle.x, right_ankle.y),
        ],
        PolygonMode::Footprints => match phase {
            Phase::SingleLeft => footprint(left_ankle, lengths, forward_offset)
                .corners
                .to_vec(),
            Phase::SingleRight => footprint(right_ankle, lengths, forward_offset)
                .corners
                .to_vec(),
            Phase::Double => {
                let mut corners = footprint(left_ankle, lengths, forward_offset)
                    .corners
                    .to_vec();
                corners.extend(footprint(right_ankle, lengths, forward_offset).corners);
                convex_hull(&corners)?
            }
        },
    };
    let centroid = polygon_centroid(&vertices);
    Ok(SupportPolygon {
        vertices,
        phase,
        centroid,
    })
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return p.distance(&a);
    }
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / len2).clamp(0.0, 1.0);
    p.distance(&Point2::new(a.x + t * abx, a.y + t * aby))
}

impl SupportPolygon {
    /// Closed-set containment: boundary points count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        self.margin(p).0 >= -CONTAINMENT_TOL
    }

    /// Signed distance to the polygon boundary (positive inside) and the
    /// outward unit normal of the binding edge.
    ///
    /// In ankle-segment mode the "inside" is the segment itself within
    /// [`CONTAINMENT_TOL`], so the margin is `CONTAINMENT_TOL - distance`.
    pub fn margin(&self, p: Point2) -> (f64, [f64; 2]) {
        if self.vertices.len() == 2 {
            let a = self.vertices[0];
            let b = self.vertices[1];
            let d = point_segment_distance(p, a, b);
            let normal = if d > 0.0 {
                let t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y))
                    / ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).max(f64::MIN_POSITIVE);
                let t = t.clamp(0.0, 1.0);
                let qx = a.x + t * (b.x - a.x);
                let qy = a.y + t * (b.y - a.y);
                [(p.x - qx) / d, (p.y - qy) / d]
            } else {
                let len = a.distance(&b).max(f64::MIN_POSITIVE);
                [-(b.y - a.y) / len, (b.x - a.x) / len]
            };
            return (CONTAINMENT_TOL - d, normal);
        }
        let n = self.vertices.len();
        let mut min_margin = f64::INFINITY;
        let mut normal = [0.0, 0.0];
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let len = a.distance(&b);
            if len == 0.0 {
                continue;
            }
            // Signed distance of p left of edge a->b (inside for CCW).
            let d = cross(a, b, p) / len;
            if d < min_margin {
                min_margin = d;
                normal = [(b.y - a.y) / len, -(b.x - a.x) / len];
            }
        }
        (min_margin, normal)
    }
}

/// Area-weighted polygon centroid (segment midpoint in degenerate mode).
pub fn centroid(polygon: &SupportPolygon) -> Point2 {
    polygon.centroid
}

/// Mass-weighted mean of planar points.
pub fn weighted_planar_mean(points: &[(f64, Point2)]) -> Point2 {
    let total: f64 = points.iter().map(|(m, _)| m).sum();
    let x = points.iter().map(|(m, p)| m * p.x).sum::<f64>() / total;
    let y = points.iter().map(|(m, p)| m * p.y).sum::<f64>() / total;
    Point2::new(x, y)
}

fn lerp3(a: Point3, b: Point3, t: f64) -> Point3 {
    a + (b - a) * t
}

/// Ground-plane COM point of each mass-bearing segment.
///
/// Leg segments place their COM at the configured fraction between proximal
/// and distal joints; feet are point masses at the ankle (the model has no
/// foot orientation); the trunk lump sits at the pelvis midpoint.
pub fn segment_com_points(posture: &Posture, masses: &MassModel) -> [(f64, Point2); 7] {
    let seg_point = |segment: Segment| -> Point3 {
        let loc = masses.com_location(segment);
        match segment {
            Segment::FootLeft => posture.left.ankle,
            Segment::FootRight => posture.right.ankle,
            Segment::TibiaLeft => lerp3(posture.left.knee, posture.left.ankle, loc),
            Segment::TibiaRight => lerp3(posture.right.knee, posture.right.ankle, loc),
            Segment::FemurLeft => lerp3(posture.left.hip, posture.left.knee, loc),
            Segment::FemurRight => lerp3(posture.right.hip, posture.right.knee, loc),
            Segment::Trunk => posture.pelvis,
        }
    };
    Segment::ALL.map(|segment| {
        let p = seg_point(segment);
        (masses.mass(segment), Point2::new(p.x, p.y))
    })
}

/// Projection of the walker's center of mass on the floor plane.
pub fn com_projection(posture: &Posture, masses: &MassModel) -> Point2 {
    weighted_planar_mean(&segment_com_points(posture, masses))
}

/// Outcome of a stability check, with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub com: Point2,
    pub polygon: SupportPolygon,
    /// Signed distance from the COM to the polygon boundary, positive inside.
    pub margin: f64,
    /// Outward unit normal of the binding edge; perturbing the COM by
    /// `margin + eps` along it flips the verdict.
    pub binding_normal: [f64; 2],
}

/// Static-stability predicate: the COM projection must lie inside (or on)
/// the support polygon of the posture's phase.
pub fn is_statically_stable(
    posture: &Posture,
    masses: &MassModel,
    lengths: &SegmentLengths,
    mode: PolygonMode,
    forward_offset: f64,
) -> Result<StabilityReport, StabilityError> {
    for &side in posture.phase.support_sides() {
        let z = posture.leg(side).ankle.z;
        if z > GROUND_TOL {
            return Err(StabilityError::SupportFootAirborne { side, z });
        }
    }
    let polygon = support_polygon(
        posture.phase,
        posture.left.ankle,
        posture.right.ankle,
        lengths,
        mode,
        forward_offset,
    )?;
    let com = com_projection(posture, masses);
    let (margin, binding_normal) = polygon.margin(com);
    Ok(StabilityReport {
        stable: margin >= -CONTAINMENT_TOL,
        com,
        polygon,
        margin,
        binding_normal,
    })
}

/// Distance from the COM projection to the polygon center, the "best
/// posture" score to minimize. The default literal form is |dx| + |dy|;
/// Euclidean distance is available behind the mode switch.
pub fn posture_fitness(com: Point2, polygon: &SupportPolygon, mode: FitnessMode) -> f64 {
    let dx = com.x - polygon.centroid.x;
    let dy = com.y - polygon.centroid.y;
    match mode {
        FitnessMode::L1 => dy.abs() + dx.abs(),
        FitnessMode::Euclidean => dx.hypot(dy),
    }
}
