use nalgebra::{DVector, Vector6};

use super::{fic_attractor, FicAxisState, FicParams};
use crate::dynamics::{bias_terms, mass_matrix};
use crate::error::{check_finite, check_len, Error, Result};
use crate::kinematics::{chain_frames, jacobian_from_frames, pose_error, Pose, RobotModel, Twist};

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerGains {
    /// Postural stiffness per joint (N·m/rad).
    pub k_js: DVector<f64>,
    /// Postural damping per joint (N·m·s/rad).
    pub d_js: DVector<f64>,
    /// Task-space damping, linear rows then angular rows.
    pub d_ts: Vector6<f64>,
    /// Feed forward Coriolis and gravity torques.
    pub nldc_enabled: bool,
}

impl ControllerGains {
    /// `K_JS = 10`, `D_JS = 2·√(K_JS·M_ii)` at the home posture, `D_TS` 5
    /// linear and 0.5 angular, compensation on.
    pub fn defaults(model: &RobotModel) -> Result<Self> {
        let n = model.dof();
        let k_js = DVector::from_element(n, 10.0);
        let m = mass_matrix(model, &model.home)?;
        let d_js = DVector::from_fn(n, |i, _| 2.0 * (k_js[i] * m[(i, i)]).sqrt());
        Ok(Self {
            k_js,
            d_js,
            d_ts: Vector6::new(5.0, 5.0, 5.0, 0.5, 0.5, 0.5),
            nldc_enabled: true,
        })
    }

    pub fn validate(&self, dof: usize) -> Result<()> {
        check_len("postural stiffness", dof, self.k_js.len())?;
        check_len("postural damping", dof, self.d_js.len())?;
        let all = self.k_js.iter().chain(self.d_js.iter()).chain(self.d_ts.iter());
        if all.clone().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter("controller gains must be finite and ≥ 0".into()));
        }
        Ok(())
    }
}

/// Six fractal impedance axes: three translational, three rotational.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskFic {
    pub linear: FicParams,
    pub angular: FicParams,
    pub axes: [FicAxisState; 6],
}

impl TaskFic {
    pub fn new(linear: FicParams, angular: FicParams) -> Result<Self> {
        linear.validate()?;
        angular.validate()?;
        Ok(Self {
            linear,
            angular,
            axes: [FicAxisState::default(); 6],
        })
    }

    /// Swap parameters and keep the phase machine.
    pub fn set_params(&mut self, linear: FicParams, angular: FicParams) -> Result<()> {
        linear.validate()?;
        angular.validate()?;
        self.linear = linear;
        self.angular = angular;
        Ok(())
    }

    /// Per-axis attractor wrench for a pose error; returns the advanced bank.
    pub fn wrench(&self, err: &Twist) -> (Vector6<f64>, TaskFic) {
        let e = err.to_vector();
        let mut next = self.clone();
        let mut w = Vector6::zeros();
        for i in 0..6 {
            let p = if i < 3 { &self.linear } else { &self.angular };
            let (f, s) = fic_attractor(p, &self.axes[i], e[i]);
            w[i] = f;
            next.axes[i] = s;
        }
        (w, next)
    }
}

#[derive(Debug, Clone)]
pub struct TorqueOutput {
    /// Commanded joint torques before actuator saturation.
    pub tau: DVector<f64>,
    /// FIC wrench, force then torque.
    pub wrench: Vector6<f64>,
    /// Pose error `X_d ⊖ X(q)` the wrench was computed from.
    pub error: Twist,
    pub fic: TaskFic,
}

/// `τ = [C + G] + K_JS(q_d − q) − D_JS·q̇ + Jᵀ(W_FIC − D_TS·J·q̇)`.
pub fn torque_command(
    model: &RobotModel,
    gains: &ControllerGains,
    fic: &TaskFic,
    q: &DVector<f64>,
    qd: &DVector<f64>,
    q_d: &DVector<f64>,
    x_d: &Pose,
) -> Result<TorqueOutput> {
    let n = model.dof();
    check_len("joint velocities", n, qd.len())?;
    check_len("desired posture", n, q_d.len())?;
    check_finite("joint velocities", qd.iter())?;
    check_finite("desired posture", q_d.iter())?;
    gains.validate(n)?;
    let frames = chain_frames(model, q)?;
    let jac = jacobian_from_frames(&frames);
    let error = pose_error(&frames.end_effector, x_d);
    let (wrench, fic) = fic.wrench(&error);
    let x_dot = &jac * qd;
    let task = DVector::from_fn(6, |i, _| wrench[i] - gains.d_ts[i] * x_dot[i]);
    let mut tau = jac.transpose() * task;
    for i in 0..n {
        tau[i] += gains.k_js[i] * (q_d[i] - q[i]) - gains.d_js[i] * qd[i];
    }
    if gains.nldc_enabled {
        let b = bias_terms(model, q, qd)?;
        tau += b.coriolis + b.gravity;
    }
    Ok(TorqueOutput { tau, wrench, error, fic })
}
