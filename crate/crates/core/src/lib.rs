//! Motion imitation for torque-controlled serial manipulators.
//!
//! Recorded end-effector trajectories are streamed through a harmonic
//! task-space planner, resolved into joint postures by a box-constrained
//! least-squares inverse kinematics, and tracked by a fractal impedance
//! torque controller over a simulated rigid-body plant.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fic;
pub mod harness;
pub mod ik;
pub mod kinematics;
pub mod planner;
pub mod trajectory;

pub use error::{Error, Result};
