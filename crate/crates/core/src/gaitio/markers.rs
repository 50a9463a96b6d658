//! Import of captured reference gaits in marker CSV form.
//!
//! The format is `frame,marker,x,y,z` with one row per marker per frame.
//! Eight markers are required (hip, knee, ankle and foot on each side);
//! rows may arrive in any order, but every marker must cover the same
//! gap-free frame range.

use std::collections::BTreeMap;
use thiserror::Error;

/// Markers every reference capture must provide.
pub const REQUIRED_MARKERS: [&str; 8] = [
    "hip_left",
    "knee_left",
    "ankle_left",
    "foot_left",
    "hip_right",
    "knee_right",
    "ankle_right",
    "foot_right",
];

#[derive(Debug, Error, PartialEq)]
pub enum MarkerError {
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("required marker '{0}' missing")]
    MissingMarker(String),
    #[error("marker '{marker}': {message}")]
    NonMonotoneFrames { marker: String, message: String },
}

/// A captured gait: per-marker 3D tracks over a common frame range.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    /// Frames per second of the capture; the CSV carries no rate, so
    /// imports use 1.0 (frame-indexed time).
    pub frame_rate: f64,
    /// First frame number of the capture.
    pub first_frame: i64,
    /// Marker tracks, ordered required-first, frame-sorted.
    pub markers: Vec<(String, Vec<[f64; 3]>)>,
    /// Frame indices (relative to `first_frame`) where cycles begin.
    pub cycle_starts: Vec<usize>,
}

impl ReferenceTrajectory {
    pub fn frames(&self) -> usize {
        self.markers.first().map(|(_, v)| v.len()).unwrap_or(0)
    }

    /// Flattens marker tracks into named scalar channels (`<marker>_x` ...),
    /// matching the trajectory channel naming for joint markers.
    pub fn channels(&self) -> Vec<(String, Vec<f64>)> {
        let mut out = Vec::with_capacity(self.markers.len() * 3);
        for (name, track) in &self.markers {
            for (axis, pick) in [("x", 0usize), ("y", 1), ("z", 2)] {
                out.push((
                    format!("{name}_{axis}"),
                    track.iter().map(|p| p[pick]).collect(),
                ));
            }
        }
        out
    }
}

/// Parses a marker CSV capture.
pub fn import_markers(bytes: &[u8]) -> Result<ReferenceTrajectory, MarkerError> {
    let text = std::str::from_utf8(bytes).map_err(|e| MarkerError::ParseError {
        line: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(MarkerError::ParseError {
        line: 0,
        message: "empty file".to_string(),
    })?;
    if first != "frame,marker,x,y,z" {
        return Err(MarkerError::ParseError {
            line: 1,
            message: "header must be 'frame,marker,x,y,z'".to_string(),
        });
    }

    let mut tracks: BTreeMap<String, Vec<(i64, [f64; 3])>> = BTreeMap::new();
    for (idx, row) in lines {
        let line = idx + 1;
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 5 {
            return Err(MarkerError::ParseError {
                line,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let frame: i64 = fields[0].parse().map_err(|_| MarkerError::ParseError {
            line,
            message: format!("frame '{}' is not an integer", fields[0]),
        })?;
        let mut xyz = [0.0; 3];
        for (slot, field) in xyz.iter_mut().zip(&fields[2..5]) {
            *slot = field.parse().map_err(|_| MarkerError::ParseError {
                line,
                message: format!("coordinate '{field}' is not a number"),
            })?;
        }
        tracks
            .entry(fields[1].to_string())
            .or_default()
            .push((frame, xyz));
    }

    for required in REQUIRED_MARKERS {
        if !tracks.contains_key(required) {
            return Err(MarkerError::MissingMarker(required.to_string()));
        }
    }

    // All markers must cover one gap-free frame range.
    let mut sorted: BTreeMap<String, Vec<(i64, [f64; 3])>> = BTreeMap::new();
    let mut range: Option<(i64, usize)> = None;
    for (marker, mut rows) in tracks {
        rows.sort_by_key(|(frame, _)| *frame);
        for pair in rows.windows(2) {
            let (a, b) = (pair[0].0, pair[1].0);
            if b == a {
                return Err(MarkerError::NonMonotoneFrames {
                    marker,
                    message: format!("duplicate frame {a}"),
                });
            }
            if b != a + 1 {
                return Err(MarkerError::NonMonotoneFrames {
                    marker,
                    message: format!("gap between frames {a} and {b}"),
                });
            }
        }
        let this = (rows[0].0, rows.len());
        match range {
            None => range = Some(this),
            Some(expected) if expected != this => {
                return Err(MarkerError::NonMonotoneFrames {
                    marker,
                    message: format!(
                        "covers frames {}..{} but other markers cover {}..{}",
                        this.0,
                        this.0 + this.1 as i64 - 1,
                        expected.0,
                        expected.0 + expected.1 as i64 - 1
                    ),
                });
            }
            Some(_) => {}
        }
        sorted.insert(marker, rows);
    }
    let (first_frame, _) = range.expect("required markers guarantee at least one track");

    // Required markers first in canonical order, extras alphabetically.
    let mut markers: Vec<(String, Vec<[f64; 3]>)> = Vec::with_capacity(sorted.len());
    for name in REQUIRED_MARKERS {
        let rows = sorted.remove(name).unwrap();
        markers.push((name.to_string(), rows.into_iter().map(|(_, p)| p).collect()));
    }
    for (name, rows) in sorted {
        markers.push((name, rows.into_iter().map(|(_, p)| p).collect()));
    }

    Ok(ReferenceTrajectory {
        frame_rate: 1.0,
        first_frame,
        markers,
        cycle_starts: vec![0],
    })
}
