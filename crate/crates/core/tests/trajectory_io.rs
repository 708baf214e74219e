use std::f64::consts::PI;

use hfic_core::trajectory::{normalize_shape, synth_trajectory, Sample, SynthKind, SynthSpec, TrajectoryStream};
use hfic_core::Error;
use nalgebra::Vector3;
use proptest::prelude::*;

fn circle(r: f64) -> TrajectoryStream {
    synth_trajectory(&SynthSpec::new(SynthKind::Circle).with("r", r)).unwrap()
}

#[test]
fn loads_file_and_rejects_missing_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("three.csv");
    std::fs::write(&path, "t,x,y,z\n0,0.5,0,0\n0.01,0.5,0.001,0\n0.02,0.5,0.002,0\n").unwrap();
    let s = TrajectoryStream::load_csv(&path).unwrap();
    assert_eq!(s.len(), 3);
    assert!((s.rate - 100.0).abs() < 1e-9);
    assert!(matches!(TrajectoryStream::load_csv(dir.path().join("nope.csv")), Err(Error::MissingFile(_))));
}

#[test]
fn write_then_load_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig8.csv");
    let s = synth_trajectory(&"figure8".parse().unwrap()).unwrap();
    s.write_csv(&path).unwrap();
    let back = TrajectoryStream::load_csv(&path).unwrap();
    assert_eq!(back.samples(), s.samples());
}

#[test]
fn half_scale_circle_keeps_centroid() {
    let s = circle(0.1).translated(&Vector3::new(0.5, 0.1, 0.4));
    let c = s.centroid();
    let half = s.scale(0.5, 1.0).unwrap();
    assert!((half.centroid() - c).norm() < 1e-12);
    for p in half.samples() {
        assert!(((p.position - c).norm() - 0.05).abs() < 1e-12);
    }
}

#[test]
fn quarter_speed_playback() {
    let s = circle(0.1);
    let slow = s.scale(1.0, 0.25).unwrap();
    assert!((slow.duration() - 8.0).abs() < 1e-9);
    assert_eq!(slow.positions(), s.positions());
    // Finite-difference speed of the scaled stream against the analytic r·ω/4.
    for k in 0..50 {
        let t = slow.samples()[k * 4].t;
        let v = slow.stream_targets(t).unwrap().speed;
        assert!((v - 0.25 * 0.1 * PI).abs() <= 0.01 * 0.25 * 0.1 * PI, "{v}");
    }
}

#[test]
fn resolve_accepts_paths_and_specs() {
    assert_eq!(TrajectoryStream::resolve("synth:circle").unwrap().len(), 200);
    assert!(TrajectoryStream::resolve("synth:blob").is_err());
    assert!(matches!(TrajectoryStream::resolve("/nonexistent/x.csv"), Err(Error::MissingFile(_))));
}

fn random_stream() -> impl Strategy<Value = TrajectoryStream> {
    prop::collection::vec((0.001f64..0.05, -0.2f64..0.2, -0.2f64..0.2, -0.2f64..0.2), 2..60).prop_map(|rows| {
        let mut t = 0.0;
        let samples = rows
            .into_iter()
            .map(|(dt, x, y, z)| {
                t += dt;
                Sample::new(t, Vector3::new(x, y, z))
            })
            .collect();
        TrajectoryStream::new(samples).unwrap()
    })
}

proptest! {
    #[test]
    fn scale_then_unscale_restores_positions(s in random_stream(), sx in 0.05f64..20.0, st in 0.05f64..4.0) {
        let back = s.scale(sx, st).unwrap().scale(1.0 / sx, 1.0 / st).unwrap();
        for (a, b) in s.samples().iter().zip(back.samples()) {
            prop_assert!((a.position - b.position).amax() <= 1e-12);
        }
    }

    #[test]
    fn scaling_preserves_normalized_shape(s in random_stream(), sx in 0.05f64..20.0, st in 0.05f64..4.0) {
        let before = normalize_shape(&s.positions());
        let after = normalize_shape(&s.scale(sx, st).unwrap().positions());
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).amax() <= 1e-12);
        }
    }

    #[test]
    fn targets_are_piecewise_constant_and_ordered(s in random_stream(), u in 0.0f64..1.0, w in 0.0f64..1.0) {
        let samples = s.samples();
        let k = ((u * (samples.len() - 1) as f64) as usize).min(samples.len() - 2);
        let (t0, t1) = (samples[k].t, samples[k + 1].t);
        let t = t0 + w * (t1 - t0) * 0.999;
        let a = s.stream_targets(t0).unwrap();
        let b = s.stream_targets(t).unwrap();
        prop_assert_eq!(&a, &b);
        let later = s.stream_targets(t1).unwrap();
        prop_assert!(later.index > a.index);
    }

    #[test]
    fn csv_round_trip(s in random_stream()) {
        let back = TrajectoryStream::from_csv_str(&s.to_csv_string()).unwrap();
        prop_assert_eq!(back.samples(), s.samples());
    }
}
