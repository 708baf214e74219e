use nalgebra::Vector3;

use super::{derive_gains, detect_phase, DerivedGains, Phase, PlannerParams};
use crate::error::Result;

/// One axis of the harmonic planner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerAxisState {
    pub x: f64,
    pub v: f64,
    pub phase: Phase,
    /// Error latched when the last divergence ended; nonzero in Convergence.
    pub x_t0: f64,
    /// Signed acceleration at `x_t0`, latched with it.
    pub a_max: f64,
    pub prev_err: f64,
}

impl PlannerAxisState {
    pub fn at_rest(x: f64) -> Self {
        Self {
            x,
            v: 0.0,
            phase: Phase::Divergence,
            x_t0: 0.0,
            a_max: 0.0,
            prev_err: 0.0,
        }
    }
}

fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Acceleration of one axis for error `err = x_t − x` and the phase it
/// evaluates to, together with the state carrying any newly latched anchor.
/// The convergence spring is measured in error coordinates: it pushes with
/// `a_max` at `x_t0` and is zero at `x_t0 / 2`.
pub fn axis_acceleration(state: &PlannerAxisState, k: f64, mu: f64, a_axis: f64, err: f64) -> (f64, PlannerAxisState) {
    let mut next = *state;
    let phase = detect_phase(state.prev_err, err);
    if phase == Phase::Convergence && state.phase == Phase::Divergence {
        next.x_t0 = state.prev_err;
        next.a_max = signum0(state.prev_err) * (k * state.prev_err.abs()).min(a_axis.abs());
    }
    next.phase = phase;
    let spring = match phase {
        Phase::Divergence => signum0(err) * (k * err.abs()).min(a_axis.abs()),
        Phase::Convergence => 2.0 * next.a_max / next.x_t0 * (err - 0.5 * next.x_t0),
    };
    (spring - mu * state.v, next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicState {
    pub axes: [PlannerAxisState; 3],
}

impl HarmonicState {
    pub fn at_rest(x: &Vector3<f64>) -> Self {
        Self {
            axes: [0, 1, 2].map(|i| PlannerAxisState::at_rest(x[i])),
        }
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::from_fn(|i, _| self.axes[i].x)
    }

    pub fn velocity(&self) -> Vector3<f64> {
        Vector3::from_fn(|i, _| self.axes[i].v)
    }

    /// Restart every axis in Divergence against a freshly issued target.
    pub fn retarget(&mut self, x_t: &Vector3<f64>) {
        for (i, axis) in self.axes.iter_mut().enumerate() {
            axis.phase = Phase::Divergence;
            axis.prev_err = x_t[i] - axis.x;
        }
    }
}

/// One planner tick: per-axis accelerations, velocity integration, a shared
/// clamp of the speed to `gains.v_max`, then position integration.
pub fn step_harmonic(state: &HarmonicState, gains: &DerivedGains, x_t: &Vector3<f64>, dt: f64) -> HarmonicState {
    let mut next = *state;
    let mut v = Vector3::zeros();
    for i in 0..3 {
        let s = &state.axes[i];
        let err = x_t[i] - s.x;
        let (acc, latched) = axis_acceleration(s, gains.k, gains.mu, gains.a_max_vec[i], err);
        next.axes[i] = latched;
        next.axes[i].prev_err = err;
        v[i] = s.v + acc * dt;
    }
    let speed = v.norm();
    if speed > gains.v_max {
        v *= gains.v_max / speed;
    }
    for i in 0..3 {
        next.axes[i].v = v[i];
        next.axes[i].x += v[i] * dt;
    }
    next
}

/// Streaming harmonic planner: re-derives gains and restarts divergence on
/// every new via point.
#[derive(Debug, Clone)]
pub struct HarmonicPlanner {
    params: PlannerParams,
    state: HarmonicState,
    gains: Option<DerivedGains>,
    target: Vector3<f64>,
}

impl HarmonicPlanner {
    pub fn new(params: PlannerParams, start: Vector3<f64>) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            state: HarmonicState::at_rest(&start),
            gains: None,
            target: start,
        })
    }

    pub fn params(&self) -> &PlannerParams {
        &self.params
    }

    pub fn state(&self) -> &HarmonicState {
        &self.state
    }

    pub fn gains(&self) -> Option<&DerivedGains> {
        self.gains.as_ref()
    }

    pub fn target(&self) -> Vector3<f64> {
        self.target
    }

    /// Issue a via point. `v_d` overrides the configured desired speed.
    /// Returns whether the target changed.
    pub fn set_target(&mut self, x_t: Vector3<f64>, v_d: Option<f64>) -> bool {
        if x_t == self.target && self.gains.is_some() {
            return false;
        }
        let mut params = self.params;
        if let Some(v) = v_d.filter(|v| v.is_finite() && *v > 0.0) {
            params.v_d = v;
        }
        let d = x_t - self.state.position();
        if let Some(g) = derive_gains(&params, &d) {
            self.gains = Some(g);
        }
        self.target = x_t;
        self.state.retarget(&x_t);
        true
    }

    /// Advance by `dt`; returns (position, velocity) of the desired point.
    pub fn step(&mut self, dt: f64) -> (Vector3<f64>, Vector3<f64>) {
        if let Some(g) = &self.gains {
            self.state = step_harmonic(&self.state, g, &self.target, dt);
        }
        (self.state.position(), self.state.velocity())
    }
}
