use std::fmt::Write as _;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use super::Sample;
use crate::error::{Error, Result};

const POSITION_HEADER: [&str; 4] = ["t", "x", "y", "z"];
const ORIENTATION_HEADER: [&str; 4] = ["qw", "qx", "qy", "qz"];

/// Quaternions further than this from unit norm are rejected rather than
/// silently renormalized.
const QUATERNION_NORM_TOLERANCE: f64 = 1e-6;

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::TrajectoryParse {
        line,
        message: message.into(),
    }
}

pub(super) fn parse(text: &str) -> Result<Vec<Sample>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| parse_error(1, e.to_string()))?.clone();
    let header_line = header.position().map_or(1, |p| p.line());
    let names: Vec<&str> = header.iter().collect();
    let with_orientation = match names.len() {
        4 if names == POSITION_HEADER => false,
        8 if names[..4] == POSITION_HEADER && names[4..] == ORIENTATION_HEADER => true,
        _ => {
            return Err(parse_error(
                header_line,
                format!("expected header t,x,y,z[,qw,qx,qy,qz], got {}", names.join(",")),
            ))
        }
    };

    let mut samples: Vec<Sample> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != names.len() {
            return Err(parse_error(line, format!("expected {} fields, got {}", names.len(), record.len())));
        }
        let mut v = [0.0; 8];
        for (i, field) in record.iter().enumerate() {
            v[i] = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_error(line, format!("column {}: '{field}' is not a finite number", names[i])))?;
        }
        let orientation = if with_orientation {
            let q = Quaternion::new(v[4], v[5], v[6], v[7]);
            if (q.norm() - 1.0).abs() > QUATERNION_NORM_TOLERANCE {
                return Err(parse_error(line, format!("quaternion norm {} is not 1", q.norm())));
            }
            UnitQuaternion::new_normalize(q)
        } else {
            UnitQuaternion::identity()
        };
        if let Some(prev) = samples.last() {
            if v[0] <= prev.t {
                return Err(Error::TrajectoryValidation {
                    line,
                    message: format!("time {} does not increase past {}", v[0], prev.t),
                });
            }
        }
        samples.push(Sample {
            t: v[0],
            position: Vector3::new(v[1], v[2], v[3]),
            orientation,
        });
    }
    Ok(samples)
}

/// Shortest round-trip formatting, so a written stream reloads bit-exactly.
/// Orientation columns are emitted only when some sample is not identity.
pub(super) fn render(samples: &[Sample]) -> String {
    let with_orientation = samples.iter().any(|s| s.orientation != UnitQuaternion::identity());
    let mut out = String::from("t,x,y,z");
    if with_orientation {
        out.push_str(",qw,qx,qy,qz");
    }
    out.push('\n');
    for s in samples {
        let p = &s.position;
        let _ = write!(out, "{},{},{},{}", s.t, p.x, p.y, p.z);
        if with_orientation {
            let q = s.orientation.quaternion();
            let _ = write!(out, ",{},{},{},{}", q.w, q.i, q.j, q.k);
        }
        out.push('\n');
    }
    out
}
