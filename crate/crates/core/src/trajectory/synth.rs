//! Synthetic stand-ins for recorded demonstrations. All kinds sample the
//! motion plane `x = 0` (y horizontal, z vertical) at `rate` Hz.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Sample, TrajectoryStream};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Circle,
    Figure8,
    Script,
    Letter,
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Self::Circle),
            "figure8" => Ok(Self::Figure8),
            "script" => Ok(Self::Script),
            "letter" => Ok(Self::Letter),
            other => Err(Error::InvalidParameter(format!(
                "unknown synthetic trajectory '{other}' (expected circle, figure8, script, letter)"
            ))),
        }
    }
}

/// `kind[:key=value,...]`, e.g. `circle:r=0.05,period=4` or `letter:ch=B`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub params: BTreeMap<String, String>,
}

impl SynthSpec {
    pub fn new(kind: SynthKind) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    fn allowed_keys(&self) -> &'static [&'static str] {
        match self.kind {
            SynthKind::Circle => &["r", "cy", "cz", "period", "revs", "rate"],
            SynthKind::Figure8 => &["a", "b", "period", "revs", "rate"],
            SynthKind::Script => &["seed", "duration", "amp", "f_lo", "f_hi", "components", "drift", "rate"],
            SynthKind::Letter => &["ch", "height", "speed", "rate"],
        }
    }

    fn num(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("synthetic parameter {key}='{v}' is not a number"))),
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.num(key, default)?;
        if v <= 0.0 {
            return Err(Error::InvalidParameter(format!("synthetic parameter {key} must be positive, got {v}")));
        }
        Ok(v)
    }
}

impl FromStr for SynthSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.strip_prefix("synth:").unwrap_or(s);
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut spec = SynthSpec::new(kind.trim().parse()?);
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("synthetic parameter '{pair}' is not key=value")))?;
            let k = k.trim();
            if !spec.allowed_keys().contains(&k) {
                return Err(Error::InvalidParameter(format!(
                    "unknown parameter '{k}' for {kind} (allowed: {})",
                    spec.allowed_keys().join(", ")
                )));
            }
            spec.params.insert(k.to_string(), v.trim().to_string());
        }
        Ok(spec)
    }
}

/// Seed of the bundled script stand-in.
pub const DEFAULT_SCRIPT_SEED: u64 = 7;

pub fn synth_trajectory(spec: &SynthSpec) -> Result<TrajectoryStream> {
    let rate = spec.positive("rate", 100.0)?;
    let points = match spec.kind {
        SynthKind::Circle => {
            let (r, period, revs) = (spec.positive("r", 0.1)?, spec.positive("period", 2.0)?, spec.positive("revs", 1.0)?);
            let c = Vector2::new(spec.num("cy", 0.0)?, spec.num("cz", 0.0)?);
            let n = (period * revs * rate).round() as usize;
            (0..n)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / (period * rate);
                    c + r * Vector2::new(th.cos(), th.sin())
                })
                .collect()
        }
        SynthKind::Figure8 => {
            let (a, b) = (spec.positive("a", 0.1)?, spec.positive("b", 0.1)?);
            let (period, revs) = (spec.positive("period", 4.0)?, spec.positive("revs", 1.0)?);
            let n = (period * revs * rate).round() as usize;
            (0..n)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / (period * rate);
                    Vector2::new(a * th.sin(), b * (2.0 * th).sin())
                })
                .collect()
        }
        SynthKind::Script => script(spec, rate)?,
        SynthKind::Letter => {
            let ch = spec.params.get("ch").map_or("B", String::as_str);
            let strokes = letter_strokes(ch)?;
            let h = spec.positive("height", 0.1)?;
            let step = spec.positive("speed", 0.2)? / rate;
            resample_polyline(&strokes.iter().map(|p| p * h).collect::<Vec<_>>(), step)
        }
    };
    let samples = points
        .into_iter()
        .enumerate()
        .map(|(k, p)| Sample::new(k as f64 / rate, Vector3::new(0.0, p.x, p.y)))
        .collect();
    TrajectoryStream::with_rate(samples, rate)
}

/// Band-limited sum of sinusoids per axis plus a steady left-to-right drift,
/// faded in and out over the first and last half second so the pen starts
/// and ends at rest.
fn script(spec: &SynthSpec, rate: f64) -> Result<Vec<Vector2<f64>>> {
    let seed = spec.num("seed", DEFAULT_SCRIPT_SEED as f64)?;
    if seed < 0.0 || seed.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("script seed must be a non-negative integer, got {seed}")));
    }
    let duration = spec.positive("duration", 6.0)?;
    let amp = spec.positive("amp", 0.02)?;
    let (f_lo, f_hi) = (spec.positive("f_lo", 0.4)?, spec.positive("f_hi", 1.6)?);
    if f_hi < f_lo {
        return Err(Error::InvalidParameter(format!("script band is empty: f_lo {f_lo} > f_hi {f_hi}")));
    }
    let components = spec.positive("components", 4.0)?.round() as usize;
    let drift = spec.num("drift", 0.015)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let mut axis = || -> Vec<(f64, f64, f64)> {
        (0..components)
            .map(|_| (amp * rng.random_range(0.3..1.0), rng.random_range(f_lo..=f_hi), rng.random_range(0.0..2.0 * PI)))
            .collect()
    };
    let (ys, zs) = (axis(), axis());
    let eval = |terms: &[(f64, f64, f64)], t: f64| -> f64 {
        terms.iter().map(|&(a, f, ph)| a * ((2.0 * PI * f * t + ph).sin() - ph.sin())).sum()
    };
    let n = (duration * rate).round() as usize;
    let ramp = 0.5f64.min(duration / 4.0);
    Ok((0..n)
        .map(|k| {
            let t = k as f64 / rate;
            // Time warp with zero speed at both ends.
            let warp = |t: f64| {
                if t < ramp {
                    t * t / (2.0 * ramp)
                } else if t > duration - ramp {
                    let r = duration - t;
                    duration - ramp - r * r / (2.0 * ramp)
                } else {
                    t - ramp / 2.0
                }
            };
            let w = warp(t);
            Vector2::new(eval(&ys, w) + drift * w, eval(&zs, w))
        })
        .collect())
}

/// Single continuous pen path per letter on a unit-height grid, 0.6 wide,
/// with the pen retracing rather than lifting.
fn letter_strokes(ch: &str) -> Result<Vec<Vector2<f64>>> {
    let v = |y: f64, z: f64| Vector2::new(y, z);
    let arc = |c: Vector2<f64>, r: f64, from: f64, to: f64| -> Vec<Vector2<f64>> {
        (0..=32)
            .map(|k| {
                let a = from + (to - from) * k as f64 / 32.0;
                c + r * Vector2::new(a.cos(), a.sin())
            })
            .collect()
    };
    let path = match ch {
        "B" | "b" => {
            let mut p = vec![v(0.0, 0.0), v(0.0, 1.0), v(0.3, 1.0)];
            p.extend(arc(v(0.3, 0.75), 0.25, PI / 2.0, -PI / 2.0));
            p.extend([v(0.0, 0.5), v(0.35, 0.5)]);
            p.extend(arc(v(0.35, 0.25), 0.25, PI / 2.0, -PI / 2.0));
            p.push(v(0.0, 0.0));
            p
        }
        "F" | "f" => vec![v(0.0, 0.0), v(0.0, 1.0), v(0.6, 1.0), v(0.0, 1.0), v(0.0, 0.5), v(0.45, 0.5)],
        "H" | "h" => vec![v(0.0, 1.0), v(0.0, 0.0), v(0.0, 0.5), v(0.6, 0.5), v(0.6, 1.0), v(0.6, 0.0)],
        other => return Err(Error::InvalidParameter(format!("no stroke data for letter '{other}' (B, F, H)"))),
    };
    // Centre the glyph box on the origin.
    Ok(path.into_iter().map(|p| p - v(0.3, 0.5)).collect())
}

/// Points at constant arc-length spacing `step` along the polyline, both
/// ends included.
fn resample_polyline(path: &[Vector2<f64>], step: f64) -> Vec<Vector2<f64>> {
    let mut out = vec![path[0]];
    let mut carry = 0.0;
    for w in path.windows(2) {
        let seg = w[1] - w[0];
        let len = seg.norm();
        let mut s = step - carry;
        while s <= len {
            out.push(w[0] + seg * (s / len));
            s += step;
        }
        carry = len - (s - step);
    }
    if out.last() != path.last() {
        out.push(path[path.len() - 1]);
    }
    out
}
