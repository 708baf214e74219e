//! Joint-limit-aware inverse kinematics as a box-constrained least-squares
//! problem solved once per planner tick.

mod box_qp;

pub use box_qp::{kkt_residual, solve_box_ls, KKT_TOLERANCE};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::kinematics::{chain_frames, forward_kinematics, jacobian_from_frames, pose_error, Pose, RobotModel, Twist};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkWeights {
    pub w_task: f64,
    pub w_reg: f64,
    /// Tick length (s); `Δq` is a joint rate applied over it.
    pub dt: f64,
}

impl IkWeights {
    /// `w_task = 1`, `w_reg = 1e-4·n`.
    pub fn defaults(dof: usize, dt: f64) -> Self {
        Self {
            w_task: 1.0,
            w_reg: 1e-4 * dof as f64,
            dt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_task >= 0.0 && self.w_task.is_finite()) {
            return Err(Error::InvalidParameter(format!("w_task must be ≥ 0, got {}", self.w_task)));
        }
        if !(self.w_reg > 0.0 && self.w_reg.is_finite()) {
            return Err(Error::InvalidParameter(format!("w_reg must be > 0, got {}", self.w_reg)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("IK dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Desired posture; always inside the joint limits.
#[derive(Debug, Clone, PartialEq)]
pub struct IkState {
    pub q_d: DVector<f64>,
}

impl IkState {
    /// Start from `q`, clamped into the limits.
    pub fn new(model: &RobotModel, q: DVector<f64>) -> Result<Self> {
        check_len("joint positions", model.dof(), q.len())?;
        let (lo, hi) = (model.q_min(), model.q_max());
        Ok(Self {
            q_d: DVector::from_fn(q.len(), |i, _| q[i].clamp(lo[i], hi[i])),
        })
    }
}

/// Rate bounds from the position box over one tick intersected with the
/// velocity box. Nonempty whenever `q_d` is inside the limits.
pub fn rate_bounds(model: &RobotModel, q_d: &DVector<f64>, dt: f64) -> (DVector<f64>, DVector<f64>) {
    let n = model.dof();
    let mut lo = DVector::zeros(n);
    let mut hi = DVector::zeros(n);
    for (i, j) in model.joints.iter().enumerate() {
        lo[i] = (-j.qd_max).max((j.q_min - q_d[i]) / dt);
        hi[i] = j.qd_max.min((j.q_max - q_d[i]) / dt);
    }
    (lo, hi)
}

/// Joint rate minimizing `w_task‖J·Δq − e/dt‖² + w_reg‖Δq‖²` inside
/// `[lo, hi]`. Scaling the error by the tick length makes `Δq·dt` close
/// the task error within one tick when unconstrained.
pub fn ik_increment(
    jac: &DMatrix<f64>,
    err: &DVector<f64>,
    weights: &IkWeights,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_len("task error", jac.nrows(), err.len())?;
    let n = jac.ncols();
    let jt = jac.transpose();
    let h = (&jt * jac) * weights.w_task + DMatrix::identity(n, n) * weights.w_reg;
    let g = -(jt * err) * (weights.w_task / weights.dt);
    solve_box_ls(&h, &g, lo, hi)
}

/// One QP-IK tick toward `x_d`. Returns the new posture and the pose error
/// remaining after the update.
pub fn ik_step(model: &RobotModel, state: &IkState, x_d: &Pose, weights: &IkWeights) -> Result<(IkState, Twist)> {
    weights.validate()?;
    check_len("desired posture", model.dof(), state.q_d.len())?;
    let frames = chain_frames(model, &state.q_d)?;
    let jac = jacobian_from_frames(&frames);
    let err = DVector::from_column_slice(pose_error(&frames.end_effector, x_d).to_vector().as_slice());
    let (lo, hi) = rate_bounds(model, &state.q_d, weights.dt);
    let dq = ik_increment(&jac, &err, weights, &lo, &hi)?;
    let (qmin, qmax) = (model.q_min(), model.q_max());
    let q_d = DVector::from_fn(dq.len(), |i, _| (state.q_d[i] + dq[i] * weights.dt).clamp(qmin[i], qmax[i]));
    let achieved = pose_error(&forward_kinematics(model, &q_d)?, x_d);
    Ok((IkState { q_d }, achieved))
}

/// Repeat `ik_step` against a fixed pose until the error stops improving or
/// `max_iter` is reached.
pub fn ik_solve(model: &RobotModel, start: &IkState, x_d: &Pose, weights: &IkWeights, max_iter: usize) -> Result<(IkState, Twist)> {
    let mut state = start.clone();
    let mut err = pose_error(&forward_kinematics(model, &state.q_d)?, x_d);
    for _ in 0..max_iter {
        let (next, e) = ik_step(model, &state, x_d, weights)?;
        let moved = (&next.q_d - &state.q_d).amax();
        state = next;
        err = e;
        if moved < 1e-13 {
            break;
        }
    }
    Ok((state, err))
}
