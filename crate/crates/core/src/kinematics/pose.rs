//! Rigid transforms and the pose-difference operator.
//!
//! Twists are stored as separate linear and angular parts. When flattened to
//! a 6-vector the linear part comes first, matching the row order of
//! [`geometric_jacobian`](super::geometric_jacobian).

use std::f64::consts::PI;
use std::ops::{Mul, Neg};

use nalgebra::{Matrix3, UnitQuaternion, Vector3, Vector6};

const SMALL_ANGLE: f64 = 1e-9;
const NEAR_PI: f64 = 1e-6;

/// Element of SE(3): rotation followed by translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

/// Linear and angular components of a velocity or small displacement,
/// expressed in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist {
    pub angular: Vector3<f64>,
    pub linear: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// URDF-style fixed-axis roll/pitch/yaw: `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.
    pub fn from_xyz_rpy(xyz: Vector3<f64>, rpy: Vector3<f64>) -> Self {
        Self {
            rotation: rpy_to_matrix(rpy),
            translation: xyz,
        }
    }

    pub fn from_quaternion(q: &UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation: q.to_rotation_matrix().into_inner(),
            translation,
        }
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Apply a world-frame twist: `R' = exp(ω) R`, `t' = t + v`.
    pub fn perturbed(&self, twist: &Twist) -> Pose {
        Pose {
            rotation: so3_exp(&twist.angular) * self.rotation,
            translation: self.translation + twist.linear,
        }
    }

    /// Decoupled logarithm relative to the identity.
    pub fn log(&self) -> Twist {
        Twist {
            angular: so3_log(&self.rotation),
            linear: self.translation,
        }
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let r = &self.rotation;
        let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
        ortho <= tol && (r.determinant() - 1.0).abs() <= tol && self.translation.iter().all(|v| v.is_finite())
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

impl Twist {
    pub fn new(linear: Vector3<f64>, angular: Vector3<f64>) -> Self {
        Self { angular, linear }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `[linear; angular]`.
    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.linear.x,
            self.linear.y,
            self.linear.z,
            self.angular.x,
            self.angular.y,
            self.angular.z,
        )
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            linear: Vector3::new(v[0], v[1], v[2]),
            angular: Vector3::new(v[3], v[4], v[5]),
        }
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }

    pub fn exp(&self) -> Pose {
        Pose::identity().perturbed(self)
    }
}

impl Neg for Twist {
    type Output = Twist;
    fn neg(self) -> Twist {
        Twist {
            angular: -self.angular,
            linear: -self.linear,
        }
    }
}

/// Twist `e` such that `current.perturbed(&e) == desired`.
///
/// Rotation error is the world-frame rotation vector of `R_d R_cᵀ`; at an
/// angle of exactly π the axis is taken from the largest diagonal entry with
/// a positive sign.
pub fn pose_error(current: &Pose, desired: &Pose) -> Twist {
    Twist {
        linear: desired.translation - current.translation,
        angular: so3_log(&(desired.rotation * current.rotation.transpose())),
    }
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rodrigues' formula.
pub fn so3_exp(omega: &Vector3<f64>) -> Matrix3<f64> {
    let theta = omega.norm();
    let k = skew(omega);
    if theta < SMALL_ANGLE {
        return Matrix3::identity() + k + 0.5 * k * k;
    }
    let a = theta.sin() / theta;
    let b = (1.0 - theta.cos()) / (theta * theta);
    Matrix3::identity() + a * k + b * k * k
}

pub fn axis_angle(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    so3_exp(&(axis * angle))
}

/// Principal rotation vector, angle in [0, π].
pub fn so3_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let vee = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = (0.5 * vee.norm()).atan2(cos);
    if theta < SMALL_ANGLE {
        return 0.5 * vee;
    }
    if PI - theta < NEAR_PI {
        // R ≈ 2aaᵀ − I; recover the axis from the dominant diagonal entry.
        let mut i = 0;
        for k in 1..3 {
            if r[(k, k)] > r[(i, i)] {
                i = k;
            }
        }
        let ai = ((r[(i, i)] + 1.0) * 0.5).max(0.0).sqrt();
        let mut axis = Vector3::zeros();
        for j in 0..3 {
            axis[j] = if j == i {
                ai
            } else {
                (r[(i, j)] + r[(j, i)]) / (4.0 * ai)
            };
        }
        axis.normalize_mut();
        // Below rounding level the skew part carries no sign information.
        if vee.norm() > 1e-10 && axis.dot(&vee) < 0.0 {
            axis = -axis;
        }
        return axis * theta;
    }
    vee * (theta / (2.0 * theta.sin()))
}

pub fn rpy_to_matrix(rpy: Vector3<f64>) -> Matrix3<f64> {
    let rx = axis_angle(&Vector3::x(), rpy.x);
    let ry = axis_angle(&Vector3::y(), rpy.y);
    let rz = axis_angle(&Vector3::z(), rpy.z);
    rz * ry * rx
}
