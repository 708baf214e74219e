use nalgebra::Vector3;

use super::sim_log::SimLog;
use crate::trajectory::normalize_shape;

/// Distance, in units of the normalized RMS radius, within which a point
/// counts as lying on the other path.
pub const SHAPE_TOLERANCE: f64 = 0.1;

/// Root mean square of `a − b`; 0 for empty input. Lengths must match.
pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "rmse over series of different length");
    if a.is_empty() {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Distance from `p` to the nearest point of the polyline through `path`.
pub fn point_to_polyline(p: &Vector3<f64>, path: &[Vector3<f64>]) -> f64 {
    match path {
        [] => f64::INFINITY,
        [only] => (p - only).norm(),
        _ => path
            .windows(2)
            .map(|w| {
                let seg = w[1] - w[0];
                let len2 = seg.norm_squared();
                let s = if len2 > 0.0 { ((p - w[0]).dot(&seg) / len2).clamp(0.0, 1.0) } else { 0.0 };
                (p - (w[0] + seg * s)).norm()
            })
            .fold(f64::INFINITY, f64::min),
    }
}

fn covered_fraction(a: &[Vector3<f64>], b: &[Vector3<f64>], tol: f64) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    a.iter().filter(|p| point_to_polyline(p, b) <= tol).count() as f64 / a.len() as f64
}

/// Symmetric overlap of two paths after centroid and scale removal: the
/// smaller of the fractions of each path's points lying within
/// `SHAPE_TOLERANCE` of the other path. 1 means the shapes coincide.
pub fn shape_overlap(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    let (na, nb) = (normalize_shape(a), normalize_shape(b));
    covered_fraction(&na, &nb, SHAPE_TOLERANCE).min(covered_fraction(&nb, &na, SHAPE_TOLERANCE))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub t_start: f64,
    pub t_end: f64,
    /// Largest tracking error in the steady-state window before the pulse.
    pub pre_max: f64,
    /// Time after release until the error falls below `pre_max` for good;
    /// `None` if it never does within the evaluation horizon.
    pub time: Option<f64>,
}

/// First time after `t_end` from which `errors` stays at or below
/// `threshold` up to `horizon`, measured from `t_end`.
pub fn recovery_time(ts: &[f64], errors: &[f64], t_end: f64, horizon: f64, threshold: f64) -> Option<f64> {
    let mut candidate = None;
    for (&t, &e) in ts.iter().zip(errors) {
        if t < t_end || t > horizon {
            continue;
        }
        if e <= threshold {
            candidate.get_or_insert(t);
        } else {
            candidate = None;
        }
    }
    candidate.map(|t| t - t_end)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopMetrics {
    /// End-effector vs planner output, per world axis.
    pub rmse: Vector3<f64>,
    pub max_error: f64,
    /// Largest error from `settle` on, outside perturbation windows and
    /// their recovery allowance.
    pub steady_max_error: f64,
    /// End-effector vs streamed via points, per world axis.
    pub reference_rmse: Vector3<f64>,
    /// `(t, ‖F_FIC‖)` of the translational FIC force.
    pub force_series: Vec<(f64, f64)>,
    pub max_fic_force: f64,
    pub max_fic_torque: f64,
    pub recoveries: Vec<Recovery>,
}

/// Seconds after a perturbation window during which the error is excluded
/// from the steady-state maximum.
pub const RECOVERY_ALLOWANCE: f64 = 2.0;

/// Metrics of a closed-loop log. `settle` marks the start of steady state.
pub fn compute_metrics(log: &SimLog, settle: f64) -> ClosedLoopMetrics {
    let rows = &log.rows;
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let errors: Vec<f64> = rows.iter().map(|r| (r.ee_position - r.planner_position).norm()).collect();
    let axis_rmse = |f: &dyn Fn(&super::SimRow) -> Vector3<f64>| {
        let mut acc = Vector3::zeros();
        for r in rows {
            acc += f(r).component_mul(&f(r));
        }
        if rows.is_empty() {
            acc
        } else {
            (acc / rows.len() as f64).map(f64::sqrt)
        }
    };
    let windows = log.perturbation_windows();
    let excluded = |t: f64| windows.iter().any(|&(a, b)| t >= a && t <= b + RECOVERY_ALLOWANCE);
    let steady_max_error = ts
        .iter()
        .zip(&errors)
        .filter(|(t, _)| **t >= settle && !excluded(**t))
        .map(|(_, e)| *e)
        .fold(0.0, f64::max);
    let end = ts.last().copied().unwrap_or(0.0);
    let recoveries = windows
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let pre_start = windows[..i].last().map_or(settle, |w| w.1 + RECOVERY_ALLOWANCE).max(settle);
            let pre_max = ts
                .iter()
                .zip(&errors)
                .filter(|(t, _)| **t >= pre_start && **t < a)
                .map(|(_, e)| *e)
                .fold(0.0, f64::max);
            let horizon = windows.get(i + 1).map_or(end, |w| w.0);
            Recovery {
                t_start: a,
                t_end: b,
                pre_max,
                time: recovery_time(&ts, &errors, b, horizon, pre_max),
            }
        })
        .collect();
    ClosedLoopMetrics {
        rmse: axis_rmse(&|r| r.ee_position - r.planner_position),
        max_error: errors.iter().copied().fold(0.0, f64::max),
        steady_max_error,
        reference_rmse: axis_rmse(&|r| r.ee_position - r.reference),
        force_series: rows.iter().map(|r| (r.t, r.fic_wrench.fixed_rows::<3>(0).norm())).collect(),
        max_fic_force: rows.iter().map(|r| r.fic_wrench.fixed_rows::<3>(0).amax()).fold(0.0, f64::max),
        max_fic_torque: rows.iter().map(|r| r.fic_wrench.fixed_rows::<3>(3).amax()).fold(0.0, f64::max),
        recoveries,
    }
}
