use nalgebra::Vector3;

use super::metrics::rmse;
use super::{PlannerDriver, PlannerKind, CONTROL_DT};
use crate::error::Result;
use crate::planner::{PlannerSet, PLANNER_SETS};
use crate::trajectory::TrajectoryStream;

/// One table line: RMSE of y, z, ẏ, ż on the motion plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub set: usize,
    pub rmse_y: f64,
    pub rmse_z: f64,
    pub rmse_vy: f64,
    pub rmse_vz: f64,
}

impl ComparisonRow {
    pub fn values(&self) -> [f64; 4] {
        [self.rmse_y, self.rmse_z, self.rmse_vy, self.rmse_vz]
    }

    /// Planar position RMSE, `√(RMSE(y)² + RMSE(z)²)`.
    pub fn position(&self) -> f64 {
        self.rmse_y.hypot(self.rmse_z)
    }

    pub fn velocity(&self) -> f64 {
        self.rmse_vy.hypot(self.rmse_vz)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerComparison {
    pub harmonic: ComparisonRow,
    pub bangbang: ComparisonRow,
}

/// Planner output sampled once per stream period.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    pub t: Vec<f64>,
    pub position: Vec<Vector3<f64>>,
    pub velocity: Vec<Vector3<f64>>,
}

/// Kinematic replay of one planner against the stream. Each via point is
/// held for one stream period while the planner is integrated at
/// `CONTROL_DT`; the state just before the next via point is recorded.
pub fn plan_trajectory(kind: PlannerKind, set: &PlannerSet, traj: &TrajectoryStream) -> Result<PlannedPath> {
    let samples = traj.samples();
    let mut out = PlannedPath {
        t: Vec::with_capacity(samples.len()),
        position: Vec::with_capacity(samples.len()),
        velocity: Vec::with_capacity(samples.len()),
    };
    let Some(first) = samples.first() else {
        return Ok(out);
    };
    let mut planner = PlannerDriver::new(kind, set, first.position)?;
    let period = 1.0 / traj.rate;
    let substeps = ((period / CONTROL_DT).round() as usize).max(1);
    let dt = period / substeps as f64;
    let mut state = (first.position, Vector3::zeros());
    for (k, s) in samples.iter().enumerate() {
        planner.issue(s.position, traj.velocity_at(k).norm());
        for _ in 0..substeps {
            state = planner.step(dt);
        }
        out.t.push(s.t + period);
        out.position.push(state.0);
        out.velocity.push(state.1);
    }
    Ok(out)
}

/// Planned path against the held via points and the finite-difference
/// stream velocity, on the motion plane.
pub fn replay_planner(kind: PlannerKind, set: &PlannerSet, traj: &TrajectoryStream) -> Result<ComparisonRow> {
    let plan = plan_trajectory(kind, set, traj)?;
    let reference_v: Vec<Vector3<f64>> = (0..traj.len()).map(|k| traj.velocity_at(k)).collect();
    let axis = |xs: &[Vector3<f64>], i: usize| -> Vec<f64> { xs.iter().map(|v| v[i]).collect() };
    let ref_p = traj.positions();
    Ok(ComparisonRow {
        set: set.index,
        rmse_y: rmse(&axis(&plan.position, 1), &axis(&ref_p, 1)),
        rmse_z: rmse(&axis(&plan.position, 2), &axis(&ref_p, 2)),
        rmse_vy: rmse(&axis(&plan.velocity, 1), &axis(&reference_v, 1)),
        rmse_vz: rmse(&axis(&plan.velocity, 2), &axis(&reference_v, 2)),
    })
}

/// Both planners on one Table I set.
pub fn run_planner_comparison(traj: &TrajectoryStream, params_index: usize) -> Result<PlannerComparison> {
    let set = PlannerSet::by_index(params_index)?;
    Ok(PlannerComparison {
        harmonic: replay_planner(PlannerKind::Harmonic, &set, traj)?,
        bangbang: replay_planner(PlannerKind::Bangbang, &set, traj)?,
    })
}

/// All six sets, in table order.
pub fn run_all_sets(traj: &TrajectoryStream) -> Result<Vec<PlannerComparison>> {
    PLANNER_SETS.iter().map(|s| run_planner_comparison(traj, s.index)).collect()
}

/// Set whose harmonic planner has the lowest planar position RMSE.
pub fn best_set(rows: &[PlannerComparison]) -> Option<&PlannerComparison> {
    rows.iter().min_by(|a, b| a.harmonic.position().total_cmp(&b.harmonic.position()))
}
