use nalgebra::Vector3;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BangBangState {
    pub x: Vector3<f64>,
    pub v: Vector3<f64>,
}

impl BangBangState {
    pub fn at_rest(x: Vector3<f64>) -> Self {
        Self { x, v: Vector3::zeros() }
    }
}

/// Speed from which decrements of `a·dt` per tick stop exactly within `s`:
/// the positive root of `v² + a·dt·v − 2·a·s = 0`. Tends to `√(2·a·s)`.
fn braking_speed(s: f64, a: f64, dt: f64) -> f64 {
    let dv = a * dt;
    0.5 * (-dv + (dv * dv + 8.0 * a * s).sqrt())
}

/// Trapezoidal tracking of `x_t`: the velocity is rate limited by `a_cap`
/// toward the braking curve `min(v_cap, √(2·a_cap·s))` along the direction
/// to the target. The target is reached exactly, at zero velocity.
pub fn step_bangbang(state: &BangBangState, x_t: &Vector3<f64>, a_cap: f64, v_cap: f64, dt: f64) -> BangBangState {
    let d = x_t - state.x;
    let s = d.norm();
    let dv_max = a_cap * dt;
    if s == 0.0 && state.v.norm() <= dv_max {
        return BangBangState::at_rest(*x_t);
    }
    let v_des = if s > 0.0 {
        d * (braking_speed(s, a_cap, dt).min(v_cap) / s)
    } else {
        Vector3::zeros()
    };
    let mut dv = v_des - state.v;
    let n = dv.norm();
    if n > dv_max {
        dv *= dv_max / n;
    }
    let v = state.v + dv;
    let step = v * dt;
    if s > 0.0 && step.dot(&d) >= s * s * (1.0 - 1e-9) {
        return BangBangState::at_rest(*x_t);
    }
    BangBangState { x: state.x + step, v }
}

#[derive(Debug, Clone)]
pub struct BangBangPlanner {
    pub a_cap: f64,
    pub v_cap: f64,
    state: BangBangState,
    target: Vector3<f64>,
}

impl BangBangPlanner {
    pub fn new(a_cap: f64, v_cap: f64, start: Vector3<f64>) -> Result<Self> {
        if !(a_cap > 0.0 && v_cap > 0.0 && a_cap.is_finite() && v_cap.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bang-bang limits must be positive (a_cap {a_cap}, v_cap {v_cap})"
            )));
        }
        Ok(Self {
            a_cap,
            v_cap,
            state: BangBangState::at_rest(start),
            target: start,
        })
    }

    pub fn state(&self) -> &BangBangState {
        &self.state
    }

    pub fn set_target(&mut self, x_t: Vector3<f64>) {
        self.target = x_t;
    }

    pub fn step(&mut self, dt: f64) -> (Vector3<f64>, Vector3<f64>) {
        self.state = step_bangbang(&self.state, &self.target, self.a_cap, self.v_cap, dt);
        (self.state.x, self.state.v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rest_to_rest(dist: f64, a: f64, vc: f64, dt: f64) -> (f64, f64) {
        let target = Vector3::new(dist, 0.0, 0.0);
        let mut s = BangBangState::at_rest(Vector3::zeros());
        let mut t = 0.0;
        let mut peak: f64 = 0.0;
        while s.x != target {
            s = step_bangbang(&s, &target, a, vc, dt);
            t += dt;
            peak = peak.max(s.v.norm());
            assert!(t < 100.0);
        }
        assert_eq!(s.v, Vector3::zeros());
        (t, peak)
    }

    #[test]
    fn stays_at_target() {
        let s = BangBangState::at_rest(Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(step_bangbang(&s, &s.x, 1.0, 0.4, 0.01), s);
    }

    #[test]
    fn triangular_profile() {
        let (t, peak) = rest_to_rest(0.1, 1.0, 0.4, 1e-4);
        assert_relative_eq!(peak, 0.1f64.sqrt(), epsilon = 2e-3);
        assert_relative_eq!(t, 2.0 * 0.1f64.sqrt(), epsilon = 2e-3);
    }

    #[test]
    fn trapezoidal_profile() {
        let (t, peak) = rest_to_rest(1.0, 1.0, 0.4, 1e-4);
        assert_relative_eq!(peak, 0.4, epsilon = 1e-9);
        assert_relative_eq!(t, 2.9, epsilon = 2e-3);
    }

    #[test]
    fn rejects_bad_limits() {
        assert!(BangBangPlanner::new(0.0, 1.0, Vector3::zeros()).is_err());
        assert!(BangBangPlanner::new(1.0, -1.0, Vector3::zeros()).is_err());
    }

    proptest! {
        #[test]
        fn limits_hold(
            targets in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5, -0.5f64..0.5), 1..10),
            a in 0.5f64..10.0,
            vc in 0.1f64..0.5,
        ) {
            let mut p = BangBangPlanner::new(a, vc, Vector3::zeros()).unwrap();
            let dt = 0.01;
            let mut prev_v = Vector3::zeros();
            for (x, y, z) in targets {
                p.set_target(Vector3::new(x, y, z));
                for _ in 0..30 {
                    let (_, v) = p.step(dt);
                    prop_assert!(v.norm() <= vc + 1e-12);
                    if v != Vector3::zeros() {
                        prop_assert!((v - prev_v).norm() <= a * dt + 1e-12);
                    }
                    prev_v = v;
                }
            }
        }
    }
}
