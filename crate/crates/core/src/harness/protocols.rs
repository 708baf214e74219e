//! Bundled experiment protocols: planner comparison, letters at reduced
//! speed with both FIC presets, and the board with and without
//! perturbations.

use nalgebra::Vector3;

use super::closed_loop::run_closed_loop;
use super::config::{ExperimentConfig, ImpulsePerturbation};
use super::metrics::{compute_metrics, shape_overlap, ClosedLoopMetrics};
use super::planner_cmp::{run_all_sets, PlannerComparison};
use super::report::Report;
use super::sim_log::SimLog;
use crate::error::Result;
use crate::trajectory::{rms_radius, TrajectoryStream};

/// Playback speed of the robot experiments relative to the recording.
pub const ROBOT_TIME_SCALE: f64 = 0.25;

/// Six-set comparison of both planners on `traj`.
pub fn compare_planners_protocol(traj: &TrajectoryStream) -> Result<(Vec<PlannerComparison>, Report)> {
    let rows = run_all_sets(traj)?;
    let report = Report::from_comparison("compare_planners", &rows);
    Ok((rows, report))
}

fn executed(log: &SimLog) -> Vec<Vector3<f64>> {
    log.rows.iter().map(|r| r.ee_position).collect()
}

fn reference(log: &SimLog) -> Vec<Vector3<f64>> {
    log.rows.iter().map(|r| r.reference).collect()
}

#[derive(Debug, Clone)]
pub struct LetterOutcome {
    pub letter: String,
    pub fic: String,
    pub metrics: ClosedLoopMetrics,
    /// RMS radius of the executed path over that of the reference.
    pub size_ratio: f64,
    pub overlap_with_reference: f64,
    pub log: SimLog,
}

/// Letters B, F and H at quarter speed with the compliant and the stiff
/// preset.
pub fn letters_protocol(model: &str) -> Result<(Vec<LetterOutcome>, Report)> {
    let mut out = Vec::new();
    let mut report = Report::new("letters");
    for letter in ["B", "F", "H"] {
        for fic in ["set1", "set2"] {
            let mut cfg = ExperimentConfig::new(model, &format!("synth:letter:ch={letter}"));
            cfg.s_t = ROBOT_TIME_SCALE;
            cfg.fic = fic.into();
            let log = run_closed_loop(&cfg)?;
            let metrics = compute_metrics(&log, cfg.settle);
            let (ee, rf) = (executed(&log), reference(&log));
            let size_ratio = rms_radius(&ee) / rms_radius(&rf);
            let overlap_with_reference = shape_overlap(&ee, &rf);
            report.summary.push((format!("{letter}_{fic}_steady_max_error"), metrics.steady_max_error));
            report.summary.push((format!("{letter}_{fic}_size_ratio"), size_ratio));
            report.summary.push((format!("{letter}_{fic}_overlap"), overlap_with_reference));
            let mut sub = Report::from_log(&format!("{letter}_{fic}"), &log, &metrics);
            for f in &mut sub.figures {
                f.name = format!("{letter}_{fic}_{}", f.name);
            }
            report.figures.extend(sub.figures);
            out.push(LetterOutcome {
                letter: letter.into(),
                fic: fic.into(),
                metrics,
                size_ratio,
                overlap_with_reference,
                log,
            });
        }
    }
    Ok((out, report))
}

#[derive(Debug, Clone)]
pub struct BoardOutcome {
    pub shape: String,
    pub fic: String,
    pub perturbed: bool,
    pub metrics: ClosedLoopMetrics,
    pub overlap_with_reference: f64,
    pub log: SimLog,
}

/// End-effector push of 20 N for 0.1 s.
pub fn default_impulse(t_start: f64) -> ImpulsePerturbation {
    ImpulsePerturbation {
        t_start,
        duration: 0.1,
        force: [0.0, 20.0, 0.0],
        torque: [0.0; 3],
    }
}

/// Circle and figure-eight at quarter speed with both presets, each once
/// unperturbed and once with a push half way through the drawing.
pub fn board_protocol(model: &str) -> Result<(Vec<BoardOutcome>, Report)> {
    let mut out = Vec::new();
    let mut report = Report::new("board");
    for shape in ["circle", "figure8"] {
        for fic in ["set2", "set1"] {
            for perturbed in [false, true] {
                let mut cfg = ExperimentConfig::new(model, &format!("synth:{shape}"));
                cfg.s_t = ROBOT_TIME_SCALE;
                cfg.fic = fic.into();
                if perturbed {
                    let mid = TrajectoryStream::resolve(&cfg.trajectory)?.scale(1.0, cfg.s_t)?.duration() / 2.0;
                    cfg.perturbations.impulse.push(default_impulse(mid));
                }
                let log = run_closed_loop(&cfg)?;
                let metrics = compute_metrics(&log, cfg.settle);
                let overlap_with_reference = shape_overlap(&executed(&log), &reference(&log));
                let tag = format!("{shape}_{fic}_{}", if perturbed { "pert" } else { "unpert" });
                report.summary.push((format!("{tag}_steady_max_error"), metrics.steady_max_error));
                report.summary.push((format!("{tag}_max_fic_force"), metrics.max_fic_force));
                if let Some(rec) = metrics.recoveries.first() {
                    report.summary.push((format!("{tag}_recovery"), rec.time.unwrap_or(f64::NAN)));
                }
                let mut sub = Report::from_log(&tag, &log, &metrics);
                for f in &mut sub.figures {
                    f.name = format!("{tag}_{}", f.name);
                }
                report.figures.extend(sub.figures);
                out.push(BoardOutcome {
                    shape: shape.into(),
                    fic: fic.into(),
                    perturbed,
                    metrics,
                    overlap_with_reference,
                    log,
                });
            }
        }
    }
    Ok((out, report))
}
