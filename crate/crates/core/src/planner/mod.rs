//! Task-space trajectory planners.
//!
//! The harmonic planner turns a stream of via points into a smooth,
//! speed-bounded trajectory by driving a unit point mass with a
//! saturated spring (divergence) that hands over to a mid-point spring
//! (convergence) once the error starts shrinking. Its gains follow from a
//! damping ratio and natural frequency. A trapezoidal bang-bang tracker is
//! provided as the comparison baseline.

mod bangbang;
mod harmonic;

pub use bangbang::{step_bangbang, BangBangPlanner, BangBangState};
pub use harmonic::{axis_acceleration, step_harmonic, HarmonicPlanner, HarmonicState, PlannerAxisState};

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Ratio between the peak speed bound and the requested speed.
pub const SPEED_BOUND_FACTOR: f64 = 1.595;

/// Distances below this do not define a new target direction.
pub const MIN_TARGET_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Divergence,
    Convergence,
}

/// Convergence iff the error shrinks in magnitude without changing sign.
pub fn detect_phase(prev_err: f64, err: f64) -> Phase {
    if err.abs() < prev_err.abs() && err * prev_err > 0.0 {
        Phase::Convergence
    } else {
        Phase::Divergence
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerParams {
    /// Damping ratio.
    pub zeta: f64,
    /// Natural frequency (Hz).
    pub f_n: f64,
    /// Per-axis acceleration cap (m/s²).
    pub a_cap: f64,
    /// Desired tangential speed (m/s), used when the stream supplies none.
    pub v_d: f64,
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.zeta, self.f_n, self.a_cap, self.v_d].iter().all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("planner parameters must be positive: {self:?}")))
        }
    }

    pub fn omega_n(&self) -> f64 {
        2.0 * PI * self.f_n
    }
}

/// One row of the planner comparison parameter table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerSet {
    pub index: usize,
    pub zeta: f64,
    pub f_n: f64,
    /// Acceleration limit shared by both planners (m/s²).
    pub a_max: f64,
    /// Speed limit of the bang-bang planner (m/s).
    pub v_max: f64,
}

pub const PLANNER_SETS: [PlannerSet; 6] = [
    PlannerSet { index: 1, zeta: 0.005, f_n: 4.0, a_max: 10.0, v_max: 0.3 },
    PlannerSet { index: 2, zeta: 0.010, f_n: 10.0, a_max: 10.0, v_max: 0.4 },
    PlannerSet { index: 3, zeta: 0.010, f_n: 5.0, a_max: 5.0, v_max: 0.3 },
    PlannerSet { index: 4, zeta: 0.050, f_n: 4.0, a_max: 5.0, v_max: 0.3 },
    PlannerSet { index: 5, zeta: 0.050, f_n: 10.0, a_max: 2.0, v_max: 0.4 },
    PlannerSet { index: 6, zeta: 0.100, f_n: 4.0, a_max: 3.0, v_max: 0.3 },
];

impl PlannerSet {
    /// Table row by its 1-based index.
    pub fn by_index(index: usize) -> Result<PlannerSet> {
        PLANNER_SETS
            .iter()
            .find(|s| s.index == index)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("planner parameter set {index} not in 1..=6")))
    }

    pub fn harmonic_params(&self) -> PlannerParams {
        PlannerParams {
            zeta: self.zeta,
            f_n: self.f_n,
            a_cap: self.a_max,
            v_d: self.v_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedGains {
    /// Stiffness per unit inertia (1/s²).
    pub k: f64,
    /// Viscosity (1/s).
    pub mu: f64,
    /// Tangential speed bound (m/s).
    pub v_max: f64,
    /// Per-axis acceleration limits (m/s²), signed along the target direction.
    pub a_max_vec: Vector3<f64>,
}

/// Gains for a new target at offset `d` from the planner; `None` when `d`
/// is too short to define a direction and the previous gains stay in force.
pub fn derive_gains(params: &PlannerParams, d: &Vector3<f64>) -> Option<DerivedGains> {
    let dist = d.norm();
    if !(dist >= MIN_TARGET_DISTANCE) {
        return None;
    }
    let omega = params.omega_n();
    let v_max = SPEED_BOUND_FACTOR * params.v_d.min(omega * dist);
    let a_max_vec = (2.0 * (v_max / dist).powi(2) * d).map(|a| a.clamp(-params.a_cap, params.a_cap));
    Some(DerivedGains {
        k: omega * omega,
        mu: 2.0 * params.zeta * omega,
        v_max,
        a_max_vec,
    })
}
