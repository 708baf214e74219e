//! Timed via-point streams: CSV ingestion, space-time scaling, playback with
//! finite-difference tangential speed, and synthetic stand-in trajectories.

mod csv_io;
mod synth;

pub use synth::{synth_trajectory, SynthKind, SynthSpec};

use std::path::Path;

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{Error, Result};

/// Recording rate assumed for streams with fewer than two samples.
pub const DEFAULT_RATE: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Sample {
    pub fn new(t: f64, position: Vector3<f64>) -> Self {
        Self {
            t,
            position,
            orientation: UnitQuaternion::identity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStream {
    samples: Vec<Sample>,
    /// Playback sampling frequency (Hz).
    pub rate: f64,
    /// Accumulated space scale.
    pub s_x: f64,
    /// Accumulated time scale.
    pub s_t: f64,
}

/// Via point issued at a given instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub index: usize,
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    /// Finite-difference velocity of the recording.
    pub velocity: Vector3<f64>,
    /// Tangential speed, `‖velocity‖`.
    pub speed: f64,
}

impl TrajectoryStream {
    /// Stream from samples; the rate is inferred from the mean sample spacing.
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        let rate = if samples.len() >= 2 {
            (samples.len() - 1) as f64 / (samples[samples.len() - 1].t - samples[0].t)
        } else {
            DEFAULT_RATE
        };
        Self::with_rate(samples, rate)
    }

    pub fn with_rate(samples: Vec<Sample>, rate: f64) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.position.iter().all(|v| v.is_finite())) {
                return Err(Error::TrajectoryValidation {
                    line: i as u64 + 1,
                    message: "non-finite sample".into(),
                });
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(Error::TrajectoryValidation {
                    line: i as u64 + 1,
                    message: format!("time {} does not increase past {}", s.t, samples[i - 1].t),
                });
            }
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("stream rate must be positive, got {rate}")));
        }
        Ok(Self {
            samples,
            rate,
            s_x: 1.0,
            s_t: 1.0,
        })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::new(csv_io::parse(text)?)
    }

    pub fn to_csv_string(&self) -> String {
        csv_io::render(&self.samples)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    /// Load a path, or generate from a `synth:` spec.
    pub fn resolve(source: &str) -> Result<Self> {
        match source.strip_prefix("synth:") {
            Some(spec) => synth_trajectory(&spec.parse()?),
            None => Self::load_csv(source),
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    /// Time from the first sample to the end of the last hold interval.
    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t + 1.0 / self.rate,
            _ => 0.0,
        }
    }

    pub fn centroid(&self) -> Vector3<f64> {
        if self.samples.is_empty() {
            return Vector3::zeros();
        }
        self.samples.iter().map(|s| s.position).sum::<Vector3<f64>>() / self.samples.len() as f64
    }

    pub fn positions(&self) -> Vec<Vector3<f64>> {
        self.samples.iter().map(|s| s.position).collect()
    }

    /// Positions scaled by `s_x` about the centroid; playback rate multiplied
    /// by `s_t`, so `s_t < 1` stretches timestamps by `1/s_t` from the start.
    pub fn scale(&self, s_x: f64, s_t: f64) -> Result<Self> {
        if !(s_x > 0.0 && s_x.is_finite() && s_t > 0.0 && s_t.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale factors must be positive (S_x {s_x}, S_t {s_t})")));
        }
        let c = self.centroid();
        let t0 = self.start_time();
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                t: t0 + (s.t - t0) / s_t,
                // Exact identity for unit scale; the centroid round trip is not.
                position: if s_x == 1.0 { s.position } else { c + (s.position - c) * s_x },
                orientation: s.orientation,
            })
            .collect();
        Ok(Self {
            samples,
            rate: self.rate * s_t,
            s_x: self.s_x * s_x,
            s_t: self.s_t * s_t,
        })
    }

    /// Same stream with every position moved by `offset`.
    pub fn translated(&self, offset: &Vector3<f64>) -> Self {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.position += offset;
        }
        out
    }

    /// Finite-difference velocity at sample `k`: central inside, one-sided at
    /// the ends, zero for a single sample.
    pub fn velocity_at(&self, k: usize) -> Vector3<f64> {
        let n = self.samples.len();
        if n < 2 {
            return Vector3::zeros();
        }
        let (a, b) = if k == 0 {
            (0, 1)
        } else if k + 1 >= n {
            (n - 2, n - 1)
        } else {
            (k - 1, k + 1)
        };
        let (sa, sb) = (&self.samples[a], &self.samples[b]);
        (sb.position - sa.position) / (sb.t - sa.t)
    }

    /// Via point held at `t_now` (zero-order hold). Before the first sample the
    /// first point is issued; past the last sample the last point is held with
    /// zero velocity. `None` for an empty stream.
    pub fn stream_targets(&self, t_now: f64) -> Option<Target> {
        let last = self.samples.len().checked_sub(1)?;
        let k = self.samples.partition_point(|s| s.t <= t_now).saturating_sub(1);
        let s = &self.samples[k];
        let past_end = k == last && t_now > s.t;
        let velocity = if past_end { Vector3::zeros() } else { self.velocity_at(k) };
        Some(Target {
            index: k,
            position: s.position,
            orientation: s.orientation,
            velocity,
            speed: velocity.norm(),
        })
    }
}

/// Point set with the centroid removed and scaled to unit RMS radius.
/// Degenerate sets (all points coincident) come back centred but unscaled.
pub fn normalize_shape(points: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    if points.is_empty() {
        return Vec::new();
    }
    let c = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    let rms = rms_radius(points);
    let s = if rms > 0.0 { 1.0 / rms } else { 1.0 };
    points.iter().map(|p| (p - c) * s).collect()
}

/// RMS distance of a point set from its centroid.
pub fn rms_radius(points: &[Vector3<f64>]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let c = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    (points.iter().map(|p| (p - c).norm_squared()).sum::<f64>() / points.len() as f64).sqrt()
}
