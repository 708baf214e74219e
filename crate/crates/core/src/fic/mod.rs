//! Fractal impedance control: a per-axis saturating force law with a
//! divergence/convergence attractor, and the joint torque command built on it.

mod controller;

pub use controller::{torque_command, ControllerGains, TaskFic, TorqueOutput};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::planner::{detect_phase, Phase};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FicParams {
    /// Stiffness of the linear region (N/m or N·m/rad).
    pub k0: f64,
    /// Error at which the force saturates (m or rad).
    pub x_b: f64,
    /// Saturation force (N or N·m).
    pub f_max: f64,
    /// Fraction of `x_b` where saturation starts, in [0, 1].
    pub xi: f64,
}

pub const DEFAULT_XI: f64 = 0.9;

impl FicParams {
    pub fn new(k0: f64, x_b: f64, f_max: f64, xi: f64) -> Result<Self> {
        let p = Self { k0, x_b, f_max, xi };
        p.validate()?;
        Ok(p)
    }

    /// Compliant preset: x_b 0.05 m, K0 200 N/m, F_max 20 N.
    pub fn set1() -> Self {
        Self { k0: 200.0, x_b: 0.05, f_max: 20.0, xi: DEFAULT_XI }
    }

    /// Stiff preset: x_b 0.02 m, K0 1200 N/m, F_max 30 N.
    pub fn set2() -> Self {
        Self { k0: 1200.0, x_b: 0.02, f_max: 30.0, xi: DEFAULT_XI }
    }

    /// Rotational axes: x_b 0.1 rad, K0 10 N·m/rad, F_max 5 N·m.
    pub fn angular_default() -> Self {
        Self { k0: 10.0, x_b: 0.1, f_max: 5.0, xi: DEFAULT_XI }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "set1" => Ok(Self::set1()),
            "set2" => Ok(Self::set2()),
            "angular" => Ok(Self::angular_default()),
            other => Err(Error::InvalidParameter(format!("unknown FIC preset '{other}' (expected set1, set2)"))),
        }
    }

    pub fn with_xi(mut self, xi: f64) -> Result<Self> {
        self.xi = xi;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.k0, self.x_b, self.f_max, self.xi].iter().all(|v| v.is_finite());
        if !finite || self.k0 <= 0.0 || self.x_b <= 0.0 || !(0.0..=1.0).contains(&self.xi) || self.delta_f() <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "FIC parameters need K0 > 0, x_b > 0, ξ ∈ [0, 1] and F_max > ξ·K0·x_b: {self:?}"
            )));
        }
        Ok(())
    }

    /// Force at the start of saturation, `ξ·K0·x_b`.
    pub fn f0(&self) -> f64 {
        self.xi * self.k0 * self.x_b
    }

    pub fn delta_f(&self) -> f64 {
        self.f_max - self.f0()
    }

    /// Width of the saturation transition, `(1 − ξ)·x_b / (2π)`.
    pub fn s_prime(&self) -> f64 {
        (1.0 - self.xi) * self.x_b / (2.0 * PI)
    }
}

/// Saturating force for error `x`: linear up to `ξ·x_b`, then a tanh ramp
/// from about `F0` to `F_max` reached at `x_b`. Odd in `x`.
pub fn fic_force(p: &FicParams, x: f64) -> f64 {
    let a = x.abs();
    let mag = if a <= p.xi * p.x_b {
        p.k0 * a
    } else {
        let s = p.s_prime();
        if s == 0.0 {
            p.f_max
        } else {
            0.5 * p.delta_f() * (((a - p.x_b) / s + PI).tanh() + 1.0) + p.f0()
        }
    };
    if x < 0.0 {
        -mag
    } else {
        mag
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FicAxisState {
    pub phase: Phase,
    /// Error latched when the current convergence began; 0 in Divergence.
    pub x_tilde_max: f64,
    pub prev_err: f64,
    /// Largest-magnitude error of the running divergence.
    pub peak: f64,
}

impl Default for FicAxisState {
    fn default() -> Self {
        Self {
            phase: Phase::Divergence,
            x_tilde_max: 0.0,
            prev_err: 0.0,
            peak: 0.0,
        }
    }
}

/// Attractor force for error `x`. Divergence follows `fic_force`; on the
/// switch to Convergence the divergence peak is latched and the force
/// follows the line through `(x̃_max, F_c(x̃_max))` and `(x̃_max/2, 0)`.
pub fn fic_attractor(p: &FicParams, state: &FicAxisState, x: f64) -> (f64, FicAxisState) {
    let phase = detect_phase(state.prev_err, x);
    let mut next = FicAxisState {
        phase,
        prev_err: x,
        ..*state
    };
    match phase {
        Phase::Convergence => {
            if state.phase == Phase::Divergence {
                next.x_tilde_max = if state.peak.abs() >= state.prev_err.abs() && state.peak * state.prev_err > 0.0 {
                    state.peak
                } else {
                    state.prev_err
                };
            }
            let xm = next.x_tilde_max;
            (2.0 * fic_force(p, xm) / xm * (x - 0.5 * xm), next)
        }
        Phase::Divergence => {
            let new_cycle = state.phase == Phase::Convergence || x * state.peak <= 0.0;
            next.x_tilde_max = 0.0;
            next.peak = if new_cycle || x.abs() > state.peak.abs() { x } else { state.peak };
            (fic_force(p, x), next)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn presets() {
        let s1 = FicParams::set1();
        assert_eq!((s1.x_b, s1.k0, s1.f_max), (0.05, 200.0, 20.0));
        let s2 = FicParams::set2();
        assert_eq!((s2.x_b, s2.k0, s2.f_max), (0.02, 1200.0, 30.0));
        assert!(FicParams::preset("set3").is_err());
        assert!(s1.validate().is_ok() && s2.validate().is_ok());
        assert!(FicParams::angular_default().validate().is_ok());
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(FicParams::new(200.0, 0.05, 9.0, 0.9).is_err());
        assert!(FicParams::new(200.0, 0.0, 20.0, 0.9).is_err());
        assert!(FicParams::new(200.0, 0.05, 20.0, 1.2).is_err());
    }

    #[test]
    fn zero_error_zero_force() {
        assert_eq!(fic_force(&FicParams::set1(), 0.0), 0.0);
    }

    #[test]
    fn set1_reference_values() {
        let p = FicParams::set1();
        assert_relative_eq!(fic_force(&p, 0.045), 9.0, epsilon = 1e-12);
        // Saturation branch evaluated at the junction: tanh(−π).
        let sat = 0.5 * p.delta_f() * ((-PI).tanh() + 1.0) + p.f0();
        assert_relative_eq!(sat, 9.0205, epsilon = 1e-4);
        assert_relative_eq!(fic_force(&p, 0.05), 19.979, epsilon = 1e-3);
        assert_relative_eq!(fic_force(&p, 0.05), 0.5 * 11.0 * (PI.tanh() + 1.0) + 9.0, epsilon = 1e-12);
    }

    #[test]
    fn full_saturation_bound() {
        let p = FicParams::set2().with_xi(1.0).unwrap();
        assert_eq!(fic_force(&p, 0.03), 30.0);
        assert_relative_eq!(fic_force(&p, 0.02), 24.0);
    }

    #[test]
    fn attractor_switches_and_latches_peak() {
        let p = FicParams::set1();
        let mut s = FicAxisState::default();
        for x in [0.01, 0.02, 0.03] {
            let (f, n) = fic_attractor(&p, &s, x);
            assert_eq!(f, fic_force(&p, x));
            s = n;
        }
        assert_eq!(s.peak, 0.03);
        let (f, n) = fic_attractor(&p, &s, 0.029);
        assert_eq!(n.phase, Phase::Convergence);
        assert_eq!(n.x_tilde_max, 0.03);
        assert_relative_eq!(f, 2.0 * fic_force(&p, 0.03) / 0.03 * (0.029 - 0.015), epsilon = 1e-12);
        // Crossing zero starts a new divergence cycle.
        let (_, n2) = fic_attractor(&p, &n, -0.001);
        assert_eq!(n2.phase, Phase::Divergence);
        assert_eq!(n2.peak, -0.001);
        assert_eq!(n2.x_tilde_max, 0.0);
    }

    #[test]
    fn convergence_anchor_values() {
        let p = FicParams::set2();
        for xm in [0.005, 0.018, 0.04, -0.03] {
            let s = FicAxisState {
                phase: Phase::Convergence,
                x_tilde_max: xm,
                prev_err: xm * 1.01,
                peak: xm,
            };
            let (at_max, _) = fic_attractor(&p, &s, xm);
            assert_eq!(at_max, fic_force(&p, xm));
            let s = FicAxisState { prev_err: xm * 0.6, ..s };
            let (at_mid, _) = fic_attractor(&p, &s, xm * 0.5);
            assert_eq!(at_mid, 0.0);
        }
    }

    proptest! {
        #[test]
        fn force_is_odd_and_bounded(x in -1.0f64..1.0, xi in 0.0f64..1.0) {
            for base in [FicParams::set1(), FicParams::set2(), FicParams::angular_default()] {
                let p = base.with_xi(xi).unwrap();
                prop_assert_eq!(fic_force(&p, -x), -fic_force(&p, x));
                prop_assert!(fic_force(&p, x).abs() <= p.f_max * 1.001);
            }
        }

        #[test]
        fn force_is_monotone(a in 0.0f64..0.2, b in 0.0f64..0.2) {
            let p = FicParams::set1();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(fic_force(&p, lo) <= fic_force(&p, hi));
        }
    }
}
