//! Experiment executive: planner comparison, the closed-loop pipeline over
//! the simulated plant, metrics and reports.

mod closed_loop;
mod config;
mod metrics;
mod planner_cmp;
mod protocols;
mod report;
mod sim_log;

pub use closed_loop::{run_closed_loop, start_posture};
pub use config::{BoardShift, ExperimentConfig, ImpulsePerturbation, IkOverrides, Perturbations, PlannerOverrides};
pub use metrics::{
    compute_metrics, point_to_polyline, recovery_time, rmse, shape_overlap, ClosedLoopMetrics, Recovery,
    RECOVERY_ALLOWANCE, SHAPE_TOLERANCE,
};
pub use planner_cmp::{
    best_set, plan_trajectory, replay_planner, run_all_sets, run_planner_comparison, ComparisonRow, PlannedPath,
    PlannerComparison,
};
pub use protocols::{board_protocol, compare_planners_protocol, letters_protocol, BoardOutcome, LetterOutcome};
pub use report::{emit_report, Figure, Report, ReportFormat, Series, TABLE_HEADER};
pub use sim_log::{SimLog, SimRow};

use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{BangBangPlanner, HarmonicPlanner, PlannerSet};

/// Torque controller and plant period (s).
pub const CONTROL_DT: f64 = 1e-3;

/// Lower bound on the streamed tangential speed handed to the harmonic
/// planner, so that pauses and the end-of-stream hold still converge.
pub const V_D_FLOOR: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Harmonic,
    #[serde(alias = "bang-bang")]
    Bangbang,
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "harmonic" => Ok(Self::Harmonic),
            "bangbang" | "bang-bang" => Ok(Self::Bangbang),
            other => Err(Error::InvalidParameter(format!("unknown planner '{other}' (expected harmonic, bangbang)"))),
        }
    }
}

impl PlannerKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Harmonic => "harmonic",
            Self::Bangbang => "bangbang",
        }
    }
}

/// Either planner behind one interface. Targets arrive at the stream rate;
/// `step` integrates at whatever period the caller runs.
#[derive(Debug, Clone)]
pub(crate) enum PlannerDriver {
    Harmonic(HarmonicPlanner),
    Bangbang(BangBangPlanner),
}

impl PlannerDriver {
    pub(crate) fn new(kind: PlannerKind, set: &PlannerSet, start: Vector3<f64>) -> Result<Self> {
        Ok(match kind {
            PlannerKind::Harmonic => Self::Harmonic(HarmonicPlanner::new(set.harmonic_params(), start)?),
            PlannerKind::Bangbang => Self::Bangbang(BangBangPlanner::new(set.a_max, set.v_max, start)?),
        })
    }

    pub(crate) fn issue(&mut self, x_t: Vector3<f64>, speed: f64) {
        match self {
            Self::Harmonic(p) => {
                p.set_target(x_t, Some(speed.max(V_D_FLOOR)));
            }
            Self::Bangbang(p) => p.set_target(x_t),
        }
    }

    pub(crate) fn step(&mut self, dt: f64) -> (Vector3<f64>, Vector3<f64>) {
        match self {
            Self::Harmonic(p) => p.step(dt),
            Self::Bangbang(p) => p.step(dt),
        }
    }
}
