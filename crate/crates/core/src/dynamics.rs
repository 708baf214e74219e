//! Inverse and forward dynamics of the serial chain.
//!
//! Inverse dynamics uses the recursive Newton-Euler algorithm, the mass
//! matrix comes from the composite-rigid-body algorithm. Both run on the
//! world-frame link geometry from [`chain_frames`].

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{check_finite, check_len, Error, Result};
use crate::kinematics::{chain_frames, jacobian_from_frames, ChainFrames, RobotModel};

/// Largest plant step accepted by [`step_forward_dynamics`].
pub const MAX_PLANT_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct DynState {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub t: f64,
}

impl DynState {
    pub fn at_rest(q: DVector<f64>) -> Self {
        let n = q.len();
        Self {
            q,
            qd: DVector::zeros(n),
            t: 0.0,
        }
    }
}

/// Force and torque applied by the environment at the end-effector point,
/// world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn new(force: Vector3<f64>, torque: Vector3<f64>) -> Self {
        Self { force, torque }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.force == Vector3::zeros() && self.torque == Vector3::zeros()
    }

    /// `[force; torque]`, matching the Jacobian row order.
    pub fn to_vector(&self) -> nalgebra::Vector6<f64> {
        let mut v = nalgebra::Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.force);
        v.fixed_rows_mut::<3>(3).copy_from(&self.torque);
        v
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force + rhs.force, self.torque + rhs.torque)
    }
}

/// A wrench active on the half-open window `[t_start, t_end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrenchPulse {
    pub t_start: f64,
    pub t_end: f64,
    pub wrench: Wrench,
}

/// Time schedule of end-effector wrenches; overlapping pulses add.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalWrench {
    pub schedule: Vec<WrenchPulse>,
}

impl ExternalWrench {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(schedule: Vec<WrenchPulse>) -> Result<Self> {
        for p in &schedule {
            if !(p.t_start < p.t_end) {
                return Err(Error::InvalidParameter(format!(
                    "wrench pulse window [{}, {}) is empty",
                    p.t_start, p.t_end
                )));
            }
        }
        Ok(Self { schedule })
    }

    pub fn at(&self, t: f64) -> Wrench {
        self.schedule
            .iter()
            .filter(|p| t >= p.t_start && t < p.t_end)
            .fold(Wrench::zero(), |acc, p| acc + p.wrench)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasTerms {
    pub coriolis: DVector<f64>,
    pub gravity: DVector<f64>,
}

struct LinkGeometry {
    com: Vector3<f64>,
    inertia: Matrix3<f64>,
}

fn link_geometry(model: &RobotModel, frames: &ChainFrames) -> Vec<LinkGeometry> {
    model
        .joints
        .iter()
        .zip(&frames.joints)
        .map(|(j, f)| {
            let r = f.link.rotation;
            LinkGeometry {
                com: f.link.transform_point(&j.com),
                inertia: r * j.inertia * r.transpose(),
            }
        })
        .collect()
}

fn rnea(
    model: &RobotModel,
    frames: &ChainFrames,
    qd: &DVector<f64>,
    qdd: &DVector<f64>,
    gravity: &Vector3<f64>,
    external: Option<&Wrench>,
) -> DVector<f64> {
    let n = model.dof();
    let links = link_geometry(model, frames);
    let mut forces = Vec::with_capacity(n);
    let mut moments = Vec::with_capacity(n);

    let mut omega = Vector3::zeros();
    let mut alpha = Vector3::zeros();
    let mut acc_origin = -gravity;
    let mut prev_origin = Vector3::zeros();
    for i in 0..n {
        let f = &frames.joints[i];
        let d = f.origin - prev_origin;
        acc_origin += alpha.cross(&d) + omega.cross(&omega.cross(&d));
        let spin = f.axis * qd[i];
        alpha += f.axis * qdd[i] + omega.cross(&spin);
        omega += spin;
        let r = links[i].com - f.origin;
        let acc_com = acc_origin + alpha.cross(&r) + omega.cross(&omega.cross(&r));
        let m = model.joints[i].mass;
        let inertia = &links[i].inertia;
        forces.push(m * acc_com);
        moments.push(inertia * alpha + omega.cross(&(inertia * omega)));
        prev_origin = f.origin;
    }

    // Backward pass: wrench transmitted through each joint, moments about its origin.
    let (mut f_next, mut n_next, mut p_next) = match external {
        Some(w) => (-w.force, -w.torque, frames.end_effector.translation),
        None => (Vector3::zeros(), Vector3::zeros(), frames.end_effector.translation),
    };
    let mut tau = DVector::zeros(n);
    for i in (0..n).rev() {
        let f = &frames.joints[i];
        let r = links[i].com - f.origin;
        let f_i = forces[i] + f_next;
        let n_i = moments[i] + r.cross(&forces[i]) + n_next + (p_next - f.origin).cross(&f_next);
        tau[i] = f.axis.dot(&n_i);
        f_next = f_i;
        n_next = n_i;
        p_next = f.origin;
    }
    tau
}

/// `τ = M(q)q̈ + C(q, q̇) + G(q) − Jᵀw`.
pub fn inverse_dynamics(
    model: &RobotModel,
    q: &DVector<f64>,
    qd: &DVector<f64>,
    qdd: &DVector<f64>,
    external: Option<&Wrench>,
) -> Result<DVector<f64>> {
    check_len("joint velocities", model.dof(), qd.len())?;
    check_len("joint accelerations", model.dof(), qdd.len())?;
    check_finite("joint velocities", qd.iter())?;
    check_finite("joint accelerations", qdd.iter())?;
    if let Some(w) = external {
        check_finite("external wrench", w.force.iter().chain(w.torque.iter()))?;
    }
    let frames = chain_frames(model, q)?;
    Ok(rnea(model, &frames, qd, qdd, &model.gravity, external))
}

/// Joint-space inertia matrix by composite rigid bodies.
pub fn mass_matrix(model: &RobotModel, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    let frames = chain_frames(model, q)?;
    Ok(crba(model, &frames))
}

fn crba(model: &RobotModel, frames: &ChainFrames) -> DMatrix<f64> {
    let n = model.dof();
    let links = link_geometry(model, frames);
    let mut m = DMatrix::zeros(n, n);

    // Composite of links j..n: mass, first moment, and inertia about the world origin.
    let mut mass = 0.0;
    let mut first_moment = Vector3::zeros();
    let mut inertia_origin = Matrix3::zeros();
    for j in (0..n).rev() {
        let mk = model.joints[j].mass;
        let c = links[j].com;
        mass += mk;
        first_moment += mk * c;
        inertia_origin += links[j].inertia + mk * (c.norm_squared() * Matrix3::identity() - c * c.transpose());

        let z = frames.joints[j].axis;
        let p = frames.joints[j].origin;
        let force = z.cross(&(first_moment - mass * p));
        let moment_origin = inertia_origin * z - first_moment.cross(&z.cross(&p));
        for i in 0..=j {
            let fi = &frames.joints[i];
            let v = fi.axis.dot(&(moment_origin - fi.origin.cross(&force)));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn bias_terms(model: &RobotModel, q: &DVector<f64>, qd: &DVector<f64>) -> Result<BiasTerms> {
    check_len("joint velocities", model.dof(), qd.len())?;
    check_finite("joint velocities", qd.iter())?;
    let frames = chain_frames(model, q)?;
    Ok(bias_from_frames(model, &frames, qd))
}

fn bias_from_frames(model: &RobotModel, frames: &ChainFrames, qd: &DVector<f64>) -> BiasTerms {
    let n = model.dof();
    let zero = DVector::zeros(n);
    BiasTerms {
        coriolis: rnea(model, frames, qd, &zero, &Vector3::zeros(), None),
        gravity: rnea(model, frames, &zero, &zero, &model.gravity, None),
    }
}

pub fn kinetic_energy(model: &RobotModel, q: &DVector<f64>, qd: &DVector<f64>) -> Result<f64> {
    check_len("joint velocities", model.dof(), qd.len())?;
    let m = mass_matrix(model, q)?;
    Ok(0.5 * qd.dot(&(m * qd)))
}

/// Gravitational potential energy relative to the world origin.
pub fn potential_energy(model: &RobotModel, q: &DVector<f64>) -> Result<f64> {
    let frames = chain_frames(model, q)?;
    Ok(link_geometry(model, &frames)
        .iter()
        .zip(&model.joints)
        .map(|(l, j)| -j.mass * model.gravity.dot(&l.com))
        .sum())
}

pub fn clamp_torques(model: &RobotModel, tau: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        tau.len(),
        tau.iter()
            .zip(&model.joints)
            .map(|(t, j)| t.clamp(-j.tau_max, j.tau_max)),
    )
}

/// Joint accelerations under already-saturated torques, an end-effector
/// wrench and viscous joint friction.
pub fn forward_dynamics(
    model: &RobotModel,
    state: &DynState,
    tau: &DVector<f64>,
    wrench: &Wrench,
) -> Result<DVector<f64>> {
    let n = model.dof();
    check_len("joint velocities", n, state.qd.len())?;
    check_len("joint torques", n, tau.len())?;
    check_finite("joint velocities", state.qd.iter())?;
    check_finite("joint torques", tau.iter())?;
    let frames = chain_frames(model, &state.q)?;
    let m = crba(model, &frames);
    let bias = bias_from_frames(model, &frames, &state.qd);
    let jac = jacobian_from_frames(&frames);
    let friction = DVector::from_iterator(n, model.joints.iter().zip(state.qd.iter()).map(|(j, v)| j.damping * v));
    let rhs = tau + jac.transpose() * wrench.to_vector() - bias.coriolis - bias.gravity - friction;
    let chol = m.cholesky().ok_or_else(|| Error::SimulationFault {
        t: state.t,
        message: "mass matrix is not positive definite".into(),
    })?;
    Ok(chol.solve(&rhs))
}

/// One semi-implicit Euler step of the plant with actuator saturation.
pub fn step_forward_dynamics(
    model: &RobotModel,
    state: &DynState,
    tau: &DVector<f64>,
    external: &ExternalWrench,
    dt: f64,
) -> Result<DynState> {
    if !(dt > 0.0 && dt <= MAX_PLANT_DT) {
        return Err(Error::InvalidParameter(format!("plant dt {dt} outside (0, {MAX_PLANT_DT}]")));
    }
    check_len("joint torques", model.dof(), tau.len())?;
    let tau = clamp_torques(model, tau);
    let qdd = forward_dynamics(model, state, &tau, &external.at(state.t))?;
    let qd = &state.qd + qdd * dt;
    let q = &state.q + &qd * dt;
    if q.iter().chain(qd.iter()).any(|v| !v.is_finite()) {
        return Err(Error::SimulationFault {
            t: state.t,
            message: "non-finite plant state".into(),
        });
    }
    Ok(DynState { q, qd, t: state.t + dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    pub(crate) fn pendulum() -> RobotModel {
        RobotModel::from_toml_str(
            r#"
gravity = [0.0, -9.81, 0.0]
tool_xyz = [1.0, 0.0, 0.0]
[[joint]]
name = "pivot"
axis = [0.0, 0.0, 1.0]
origin_xyz = [0.0, 0.0, 0.0]
origin_rpy = [0.0, 0.0, 0.0]
mass = 1.0
com = [1.0, 0.0, 0.0]
inertia = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
q_min = -10.0
q_max = 10.0
qd_max = 10.0
tau_max = 100.0
"#,
        )
        .unwrap()
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn static_zero_gravity_needs_no_torque() {
        let m = RobotModel::arm7().unwrap().with_gravity(Vector3::zeros());
        let q = v(&[0.3, -0.2, 0.5, 1.0, -0.4, 0.8, 0.1]);
        let z = DVector::zeros(7);
        let tau = inverse_dynamics(&m, &q, &z, &z, None).unwrap();
        assert!(tau.amax() < 1e-15);
    }

    #[test]
    fn pendulum_gravity_torque() {
        // q = 0 puts the point mass horizontal: θ = π/2 from the hanging vertical.
        let m = pendulum();
        let z = DVector::zeros(1);
        let tau = inverse_dynamics(&m, &z, &z, &z, None).unwrap();
        assert_relative_eq!(tau[0], 9.81, epsilon = 1e-12);
        let mm = mass_matrix(&m, &v(&[0.7])).unwrap();
        assert_relative_eq!(mm[(0, 0)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coriolis_vanishes_at_rest() {
        let m = RobotModel::arm7().unwrap();
        let b = bias_terms(&m, &m.home, &DVector::zeros(7)).unwrap();
        assert!(b.coriolis.amax() < 1e-15);
        let m0 = m.clone().with_gravity(Vector3::zeros());
        let b0 = bias_terms(&m0, &m.home, &DVector::from_element(7, 0.5)).unwrap();
        assert!(b0.gravity.amax() < 1e-15);
    }

    #[test]
    fn gravity_hold_keeps_state() {
        let m = RobotModel::arm7().unwrap();
        let s = DynState::at_rest(m.home.clone());
        let g = bias_terms(&m, &s.q, &s.qd).unwrap().gravity;
        let next = step_forward_dynamics(&m, &s, &g, &ExternalWrench::none(), 1e-3).unwrap();
        assert!((&next.q - &s.q).amax() < 1e-12);
        assert!(next.qd.amax() < 1e-12);
        assert_relative_eq!(next.t, 1e-3);
    }

    #[test]
    fn torques_saturate() {
        let m = pendulum().with_gravity(Vector3::zeros());
        let s = DynState::at_rest(v(&[0.0]));
        let next = step_forward_dynamics(&m, &s, &v(&[1e6]), &ExternalWrench::none(), 1e-3).unwrap();
        // qdd = tau_max / (m l²)
        assert_relative_eq!(next.qd[0], 100.0 * 1e-3, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_dt_and_nonfinite() {
        let m = pendulum();
        let s = DynState::at_rest(v(&[0.0]));
        assert!(step_forward_dynamics(&m, &s, &v(&[0.0]), &ExternalWrench::none(), 0.02).is_err());
        assert!(step_forward_dynamics(&m, &s, &v(&[0.0]), &ExternalWrench::none(), 0.0).is_err());
        let z = DVector::zeros(1);
        assert!(matches!(
            inverse_dynamics(&m, &v(&[f64::NAN]), &z, &z, None),
            Err(Error::NonFinite(_))
        ));
        assert!(inverse_dynamics(&m, &z, &v(&[f64::INFINITY]), &z, None).is_err());
    }

    #[test]
    fn external_force_enters_through_jacobian_transpose() {
        let m = RobotModel::planar2().unwrap();
        let q = v(&[0.3, FRAC_PI_2]);
        let z = DVector::zeros(2);
        let w = Wrench::new(Vector3::new(1.5, -2.0, 0.0), Vector3::new(0.0, 0.0, 0.7));
        let tau_w = inverse_dynamics(&m, &q, &z, &z, Some(&w)).unwrap();
        let tau_0 = inverse_dynamics(&m, &q, &z, &z, None).unwrap();
        let jac = crate::kinematics::geometric_jacobian(&m, &q).unwrap();
        let expected = -(jac.transpose() * w.to_vector());
        assert!((tau_w - tau_0 - expected).amax() < 1e-12);
    }

    #[test]
    fn schedule_windows_are_half_open() {
        let w = Wrench::new(Vector3::new(20.0, 0.0, 0.0), Vector3::zeros());
        let s = ExternalWrench::new(vec![WrenchPulse {
            t_start: 1.0,
            t_end: 1.1,
            wrench: w,
        }])
        .unwrap();
        assert!(s.at(0.999).is_zero());
        assert_eq!(s.at(1.0), w);
        assert!(s.at(1.1).is_zero());
        assert!(ExternalWrench::new(vec![WrenchPulse {
            t_start: 2.0,
            t_end: 2.0,
            wrench: w
        }])
        .is_err());
    }
}
