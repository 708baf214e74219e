//! Rigid-transform algebra and serial-chain kinematics.
//!
//! Conventions used throughout the crate:
//! - all vectors, Jacobians and wrenches are expressed in the world frame;
//! - 6-row quantities put the linear part first and the angular part second.

mod model;
mod pose;

pub use model::{Joint, RobotModel};
pub use pose::{axis_angle, pose_error, rpy_to_matrix, skew, so3_exp, so3_log, Pose, Twist};

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{check_finite, check_len, Result};

/// World-frame geometry of one joint at a given configuration.
#[derive(Debug, Clone, Copy)]
pub struct JointFrame {
    /// Link frame after the joint rotation.
    pub link: Pose,
    /// Joint axis in the world frame.
    pub axis: Vector3<f64>,
    /// Joint origin in the world frame.
    pub origin: Vector3<f64>,
}

/// Link frames of every joint plus the end-effector pose.
#[derive(Debug, Clone)]
pub struct ChainFrames {
    pub joints: Vec<JointFrame>,
    pub end_effector: Pose,
}

pub fn chain_frames(model: &RobotModel, q: &DVector<f64>) -> Result<ChainFrames> {
    check_len("joint positions", model.dof(), q.len())?;
    check_finite("joint positions", q.iter())?;
    let mut current = Pose::identity();
    let mut joints = Vec::with_capacity(model.dof());
    for (joint, &angle) in model.joints.iter().zip(q.iter()) {
        let base = current.compose(&joint.parent_transform);
        let axis = base.rotation * joint.axis;
        current = base.compose(&Pose::new(axis_angle(&joint.axis, angle), Vector3::zeros()));
        joints.push(JointFrame {
            link: current,
            axis,
            origin: base.translation,
        });
    }
    Ok(ChainFrames {
        end_effector: current.compose(&model.tool),
        joints,
    })
}

pub fn forward_kinematics(model: &RobotModel, q: &DVector<f64>) -> Result<Pose> {
    Ok(chain_frames(model, q)?.end_effector)
}

/// 6×n world-frame Jacobian of the end-effector point; rows 0..3 linear,
/// rows 3..6 angular.
pub fn geometric_jacobian(model: &RobotModel, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    Ok(jacobian_from_frames(&chain_frames(model, q)?))
}

pub fn jacobian_from_frames(frames: &ChainFrames) -> DMatrix<f64> {
    let p_ee = frames.end_effector.translation;
    let mut jac = DMatrix::zeros(6, frames.joints.len());
    for (i, f) in frames.joints.iter().enumerate() {
        let lin = f.axis.cross(&(p_ee - f.origin));
        jac.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
        jac.fixed_view_mut::<3, 1>(3, i).copy_from(&f.axis);
    }
    jac
}
