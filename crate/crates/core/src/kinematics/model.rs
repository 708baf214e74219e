//! Serial-chain robot description and its TOML model file.

use std::path::Path;

use nalgebra::{DVector, Matrix3, Vector3};
use serde::Deserialize;

use super::pose::Pose;
use crate::error::{Error, Result};

const PLANAR2_SRC: &str = include_str!("../../models/planar2.model");
const ARM7_SRC: &str = include_str!("../../models/arm7.model");

/// One revolute joint and the link it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    /// Unit rotation axis in the joint frame.
    pub axis: Vector3<f64>,
    /// Joint frame relative to the previous link frame at zero angle.
    pub parent_transform: Pose,
    pub mass: f64,
    /// Centre of mass in the link frame.
    pub com: Vector3<f64>,
    /// Inertia about the centre of mass, link frame.
    pub inertia: Matrix3<f64>,
    pub q_min: f64,
    pub q_max: f64,
    pub qd_max: f64,
    pub tau_max: f64,
    /// Viscous joint friction (N·m·s/rad), zero unless set in the model file.
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub joints: Vec<Joint>,
    pub gravity: Vector3<f64>,
    /// End-effector frame relative to the last link frame.
    pub tool: Pose,
    /// Nominal posture used to seed experiments.
    pub home: DVector<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    gravity: [f64; 3],
    #[serde(default)]
    tool_xyz: Option<[f64; 3]>,
    #[serde(default)]
    tool_rpy: Option<[f64; 3]>,
    #[serde(default)]
    home: Option<Vec<f64>>,
    #[serde(default, rename = "joint")]
    joints: Vec<JointRecord>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointRecord {
    name: String,
    axis: [f64; 3],
    origin_xyz: [f64; 3],
    origin_rpy: [f64; 3],
    mass: f64,
    com: [f64; 3],
    /// ixx, ixy, ixz, iyy, iyz, izz
    inertia: [f64; 6],
    q_min: f64,
    q_max: f64,
    qd_max: f64,
    tau_max: f64,
    #[serde(default)]
    damping: f64,
}

impl RobotModel {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn from_toml_str(src: &str) -> Result<Self> {
        let file: ModelFile = toml::from_str(src).map_err(|e| Error::InvalidModel(e.to_string()))?;
        let joints = file
            .joints
            .into_iter()
            .map(|j| {
                let axis = Vector3::from(j.axis);
                let norm = axis.norm();
                if !(norm > 0.0) {
                    return Err(Error::InvalidModel(format!("joint {}: zero axis", j.name)));
                }
                let [ixx, ixy, ixz, iyy, iyz, izz] = j.inertia;
                Ok(Joint {
                    axis: axis / norm,
                    parent_transform: Pose::from_xyz_rpy(j.origin_xyz.into(), j.origin_rpy.into()),
                    mass: j.mass,
                    com: j.com.into(),
                    inertia: Matrix3::new(ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz),
                    q_min: j.q_min,
                    q_max: j.q_max,
                    qd_max: j.qd_max,
                    tau_max: j.tau_max,
                    damping: j.damping,
                    name: j.name,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = joints.len();
        let tool = Pose::from_xyz_rpy(
            file.tool_xyz.unwrap_or_default().into(),
            file.tool_rpy.unwrap_or_default().into(),
        );
        let home = match file.home {
            Some(h) => DVector::from_vec(h),
            None => DVector::zeros(n),
        };
        let model = RobotModel {
            joints,
            gravity: file.gravity.into(),
            tool,
            home,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Bundled model by name (`planar2` or `arm7`), or a path to a model file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match name_or_path {
            "planar2" | "planar2.model" => Self::planar2(),
            "arm7" | "arm7.model" => Self::arm7(),
            path => Self::load(path),
        }
    }

    /// Two unit links rotating about z in the x-y plane.
    pub fn planar2() -> Result<Self> {
        Self::from_toml_str(PLANAR2_SRC)
    }

    /// Seven-joint arm used by the closed-loop experiments.
    pub fn arm7() -> Result<Self> {
        Self::from_toml_str(ARM7_SRC)
    }

    pub fn validate(&self) -> Result<()> {
        let all: Vec<f64> = self
            .gravity
            .iter()
            .chain(self.tool.translation.iter())
            .chain(self.home.iter())
            .copied()
            .collect();
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite global value".into()));
        }
        if self.home.len() != self.dof() {
            return Err(Error::InvalidModel(format!(
                "home has {} entries for {} joints",
                self.home.len(),
                self.dof()
            )));
        }
        for (i, j) in self.joints.iter().enumerate() {
            if !(j.q_min < j.q_max) {
                return Err(Error::InvalidModel(format!("joint {}: q_min must be < q_max", j.name)));
            }
            if !(j.mass > 0.0) {
                return Err(Error::InvalidModel(format!("joint {}: mass must be > 0", j.name)));
            }
            if !(j.qd_max > 0.0) || !(j.tau_max > 0.0) || !(j.damping >= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "joint {}: qd_max and tau_max must be > 0, damping >= 0",
                    j.name
                )));
            }
            let eig = j.inertia.symmetric_eigenvalues();
            let scale = j.inertia.abs().max().max(1.0);
            if eig.iter().any(|&e| e < -1e-12 * scale) {
                return Err(Error::InvalidModel(format!(
                    "joint {}: inertia is not positive semi-definite",
                    j.name
                )));
            }
            if self.home[i] < j.q_min || self.home[i] > j.q_max {
                return Err(Error::InvalidModel(format!("joint {}: home outside limits", j.name)));
            }
        }
        Ok(())
    }

    pub fn q_min(&self) -> DVector<f64> {
        DVector::from_iterator(self.dof(), self.joints.iter().map(|j| j.q_min))
    }

    pub fn q_max(&self) -> DVector<f64> {
        DVector::from_iterator(self.dof(), self.joints.iter().map(|j| j.q_max))
    }

    pub fn qd_max(&self) -> DVector<f64> {
        DVector::from_iterator(self.dof(), self.joints.iter().map(|j| j.qd_max))
    }

    pub fn tau_max(&self) -> DVector<f64> {
        DVector::from_iterator(self.dof(), self.joints.iter().map(|j| j.tau_max))
    }

    pub fn with_gravity(mut self, gravity: Vector3<f64>) -> Self {
        self.gravity = gravity;
        self
    }
}
