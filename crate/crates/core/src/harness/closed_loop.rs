use nalgebra::{DVector, Vector3, Vector6};

use super::config::ExperimentConfig;
use super::sim_log::{SimLog, SimRow};
use super::{PlannerDriver, CONTROL_DT};
use crate::dynamics::{clamp_torques, step_forward_dynamics, DynState};
use crate::error::{Error, Result};
use crate::fic::{torque_command, ControllerGains, TaskFic};
use crate::ik::{ik_solve, ik_step, IkState, IkWeights};
use crate::kinematics::{forward_kinematics, so3_log, Pose, RobotModel};
use crate::trajectory::TrajectoryStream;

/// Iterations allowed to pre-solve the start posture.
const START_POSTURE_ITERATIONS: usize = 5000;
/// Pose error accepted for the pre-solved start posture.
const START_POSTURE_TOLERANCE: f64 = 1e-6;

/// Joint posture placing the end effector at `x_d`, solved from home.
pub fn start_posture(model: &RobotModel, x_d: &Pose) -> Result<DVector<f64>> {
    let w = IkWeights::defaults(model.dof(), 0.01);
    let (s, err) = ik_solve(model, &IkState::new(model, model.home.clone())?, x_d, &w, START_POSTURE_ITERATIONS)?;
    if err.norm() > START_POSTURE_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "trajectory start is not reachable from the home posture (residual {:.3e})",
            err.norm()
        )));
    }
    Ok(s.q_d)
}

fn fault(t: f64, e: Error) -> Error {
    match e {
        Error::SimulationFault { .. } => e,
        other => Error::SimulationFault {
            t,
            message: other.to_string(),
        },
    }
}

/// Full pipeline: via points at the stream rate, planner integration, IK,
/// torque command and plant step every `CONTROL_DT`. The desired
/// orientation is the home orientation composed with the sample orientation.
pub fn run_closed_loop(cfg: &ExperimentConfig) -> Result<SimLog> {
    cfg.validate()?;
    let model = RobotModel::resolve(&cfg.model)?;
    let stream = TrajectoryStream::resolve(&cfg.trajectory)?.scale(cfg.s_x, cfg.s_t)?;
    if stream.is_empty() {
        return Err(Error::Config("trajectory has no samples".into()));
    }
    let set = cfg.planner_set_values()?;
    let (linear, angular) = cfg.fic_params()?;
    let gains = ControllerGains::defaults(&model)?;
    let weights = cfg.ik_weights(model.dof(), CONTROL_DT)?;
    let external = cfg.perturbations.external_wrench()?;

    let home = forward_kinematics(&model, &model.home)?;
    let origin = cfg.board_origin.map_or(home.translation, Vector3::from);
    let t0 = stream.start_time();
    let desired_pose = |t: f64, x: Vector3<f64>| -> (Pose, Vector3<f64>) {
        let target = stream.stream_targets(t0 + t).expect("stream is non-empty");
        let rotation = home.rotation * target.orientation.to_rotation_matrix().into_inner();
        (Pose::new(rotation, x), origin + cfg.perturbations.board_offset(t) + target.position)
    };

    let (first, x_start) = desired_pose(0.0, Vector3::zeros());
    let q0 = start_posture(&model, &Pose::new(first.rotation, x_start))?;
    let mut plant = DynState::at_rest(q0.clone());
    let mut ik = IkState::new(&model, q0)?;
    let mut fic = TaskFic::new(linear, angular)?;
    let mut planner = PlannerDriver::new(cfg.planner, &set, x_start)?;

    let duration = cfg.duration.unwrap_or(stream.duration() + 1.0);
    let ticks = (duration / CONTROL_DT).round() as usize;
    let mut rows = Vec::with_capacity(ticks);
    let mut issued: Option<(usize, Vector3<f64>)> = None;
    for i in 0..ticks {
        let t = i as f64 * CONTROL_DT;
        let target = stream.stream_targets(t0 + t).expect("stream is non-empty");
        let (_, reference) = desired_pose(t, Vector3::zeros());
        // New via point, or the board moved under the held one.
        if issued != Some((target.index, reference)) {
            planner.issue(reference, target.speed);
            issued = Some((target.index, reference));
        }
        let (x_p, v_p) = planner.step(CONTROL_DT);
        let (x_d, _) = desired_pose(t, x_p);
        let (next_ik, _) = ik_step(&model, &ik, &x_d, &weights).map_err(|e| fault(t, e))?;
        ik = next_ik;
        let out = torque_command(&model, &gains, &fic, &plant.q, &plant.qd, &ik.q_d, &x_d).map_err(|e| fault(t, e))?;
        fic = out.fic;
        let tau = clamp_torques(&model, &out.tau);
        let ee = forward_kinematics(&model, &plant.q).map_err(|e| fault(t, e))?;
        let w_ext = external.at(t);
        rows.push(SimRow {
            t,
            reference,
            planner_position: x_p,
            planner_velocity: v_p,
            desired_rotation: so3_log(&x_d.rotation),
            q_des: ik.q_d.clone(),
            q: plant.q.clone(),
            qd: plant.qd.clone(),
            ee_position: ee.translation,
            ee_rotation: so3_log(&ee.rotation),
            tau: tau.clone(),
            external: Vector6::from(w_ext.to_vector()),
            fic_wrench: out.wrench,
            perturbed: cfg.perturbations.active(t),
        });
        plant.t = t;
        plant = step_forward_dynamics(&model, &plant, &tau, &external, CONTROL_DT)?;
    }
    Ok(SimLog { dof: model.dof(), rows })
}
