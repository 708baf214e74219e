use hfic_core::fic::FicParams;
use hfic_core::harness::*;
use hfic_core::kinematics::RobotModel;
use hfic_core::trajectory::{synth_trajectory, Sample, TrajectoryStream};
use nalgebra::Vector3;

fn circle_config(duration: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new("arm7", "synth:circle");
    c.s_t = 0.25;
    c.duration = Some(duration);
    c
}

#[test]
fn identical_configs_give_identical_logs() {
    let c = circle_config(1.5);
    let a = run_closed_loop(&c).unwrap();
    let b = run_closed_loop(&c).unwrap();
    assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
    assert_eq!(a.rows.len(), 1500);
}

#[test]
fn holding_a_point_does_not_drift() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hold.csv");
    let hold = TrajectoryStream::new((0..500).map(|k| Sample::new(k as f64 * 0.01, Vector3::new(0.0, 0.02, -0.01))).collect()).unwrap();
    hold.write_csv(&path).unwrap();
    let mut c = ExperimentConfig::new("arm7", path.to_str().unwrap());
    c.duration = Some(5.0);
    let log = run_closed_loop(&c).unwrap();
    let start = log.rows[0].ee_position;
    let drift = log.rows.iter().map(|r| (r.ee_position - start).norm()).fold(0.0, f64::max);
    assert!(drift <= 1e-4, "drift {drift}");
}

#[test]
fn limits_and_perturbation_windows_hold_in_the_log() {
    let mut c = circle_config(4.0);
    c.perturbations.impulse.push(ImpulsePerturbation {
        t_start: 2.0,
        duration: 0.1,
        force: [0.0, 0.0, -20.0],
        torque: [0.0, 0.5, 0.0],
    });
    let m = RobotModel::arm7().unwrap();
    let log = run_closed_loop(&c).unwrap();
    for r in &log.rows {
        for i in 0..7 {
            let j = &m.joints[i];
            assert!(r.q_des[i] >= j.q_min - 1e-12 && r.q_des[i] <= j.q_max + 1e-12);
            assert!(r.tau[i].abs() <= j.tau_max);
        }
        assert_eq!(r.external.iter().any(|v| *v != 0.0), r.perturbed, "t {}", r.t);
        assert!(r.q.iter().chain(r.qd.iter()).all(|v| v.is_finite()));
    }
    let windows = log.perturbation_windows();
    assert_eq!(windows.len(), 1);
    assert!((windows[0].0 - 2.0).abs() < 1e-9 && (windows[0].1 - 2.099).abs() < 1e-9);
}

#[test]
fn unperturbed_fic_wrench_stays_bounded() {
    for preset in ["set1", "set2"] {
        let mut c = circle_config(8.0);
        c.fic = preset.into();
        let log = run_closed_loop(&c).unwrap();
        let p = FicParams::preset(preset).unwrap();
        let a = FicParams::angular_default();
        for r in &log.rows {
            assert!(r.fic_wrench.fixed_rows::<3>(0).amax() <= p.f_max);
            assert!(r.fic_wrench.fixed_rows::<3>(3).amax() <= a.f_max);
        }
    }
}

#[test]
fn board_shift_moves_the_reference_only_inside_its_ramp() {
    let mut c = circle_config(3.0);
    c.perturbations.board_shift.push(BoardShift {
        t_start: 1.0,
        ramp: 0.5,
        offset: [0.0, 0.0, 0.02],
    });
    let shifted = run_closed_loop(&c).unwrap();
    let plain = run_closed_loop(&circle_config(3.0)).unwrap();
    for (a, b) in shifted.rows.iter().zip(&plain.rows) {
        let dz = a.reference.z - b.reference.z;
        let expected = if a.t < 1.0 { 0.0 } else { (0.02 * (a.t - 1.0) / 0.5).min(0.02) };
        assert!((dz - expected).abs() < 1e-12, "t {} dz {dz}", a.t);
        assert!(a.external.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn log_round_trips_and_reports_render() {
    let log = run_closed_loop(&circle_config(1.0)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.csv");
    log.write_csv(&path).unwrap();
    let back = SimLog::load_csv(&path).unwrap();
    assert_eq!(back, log);
    let report = Report::from_log("run", &back, &compute_metrics(&back, 0.5));
    let svgs = emit_report(&report, ReportFormat::Svg, &dir.path().join("out")).unwrap();
    assert_eq!(svgs.len(), 3);
    for f in svgs {
        roxmltree::Document::parse(&std::fs::read_to_string(f).unwrap()).unwrap();
    }
    let csvs = emit_report(&report, ReportFormat::Csv, &dir.path().join("out")).unwrap();
    assert!(std::fs::read_to_string(&csvs[0]).unwrap().starts_with("metric,value\nrmse_x,"));
}

#[test]
fn identical_log_has_zero_rmse() {
    let mut log = run_closed_loop(&circle_config(0.5)).unwrap();
    for r in &mut log.rows {
        r.ee_position = r.planner_position;
    }
    let m = compute_metrics(&log, 0.0);
    assert_eq!(m.rmse, Vector3::zeros());
    assert_eq!(m.max_error, 0.0);
}

#[test]
fn constant_offset_gives_that_rmse() {
    let mut log = run_closed_loop(&circle_config(0.5)).unwrap();
    for r in &mut log.rows {
        r.ee_position = r.planner_position + Vector3::new(0.0, 0.001, 0.0);
    }
    let m = compute_metrics(&log, 0.0);
    assert!((m.rmse.y - 0.001).abs() < 1e-12 && m.rmse.x < 1e-12);
}

#[test]
fn comparison_report_matches_table_layout() {
    let traj = synth_trajectory(&"script".parse().unwrap()).unwrap();
    let (rows, report) = compare_planners_protocol(&traj).unwrap();
    assert_eq!(rows.len(), 6);
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&report, ReportFormat::Csv, dir.path()).unwrap();
    assert_eq!(files.len(), 2);
    for f in &files {
        let text = std::fs::read_to_string(f).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TABLE_HEADER));
        assert_eq!(lines.count(), 6);
    }
}

#[test]
fn planner_replayed_against_its_own_output_has_zero_error() {
    let traj = synth_trajectory(&"figure8".parse().unwrap()).unwrap();
    let set = hfic_core::planner::PlannerSet::by_index(3).unwrap();
    let plan = plan_trajectory(PlannerKind::Harmonic, &set, &traj).unwrap();
    let again = plan_trajectory(PlannerKind::Harmonic, &set, &traj).unwrap();
    let y = |p: &PlannedPath| p.position.iter().map(|v| v.y).collect::<Vec<_>>();
    assert_eq!(rmse(&y(&plan), &y(&again)), 0.0);
}

#[test]
fn config_file_paths_are_relative_to_the_file() {
    let dir = tempfile::tempdir().unwrap();
    synth_trajectory(&"circle:r=0.05".parse().unwrap()).unwrap().write_csv(dir.path().join("c.csv")).unwrap();
    std::fs::write(
        dir.path().join("exp.toml"),
        "model = \"arm7\"\ntrajectory = \"c.csv\"\nfic = \"set1\"\ns_t = 0.5\nduration = 0.2\noutput_dir = \"out\"\n\n[[perturbations.impulse]]\nt_start = 0.1\nduration = 0.05\nforce = [5.0, 0.0, 0.0]\n",
    )
    .unwrap();
    let c = ExperimentConfig::load(dir.path().join("exp.toml")).unwrap();
    assert_eq!(c.output_dir.as_deref(), Some(dir.path().join("out").as_path()));
    assert_eq!(run_closed_loop(&c).unwrap().rows.len(), 200);
    std::fs::write(dir.path().join("bad.toml"), "model = \"arm7\"\ntrajectory = \"missing.csv\"\n").unwrap();
    assert!(matches!(ExperimentConfig::load(dir.path().join("bad.toml")), Err(hfic_core::Error::MissingFile(_))));
}
