use nalgebra::{DMatrix, DVector};

use crate::error::{check_finite, check_len, Error, Result};

/// KKT tolerance the solver is expected to meet.
pub const KKT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Free,
    Lower,
    Upper,
}

/// Minimizer of `½xᵀHx + gᵀx` subject to `lo ≤ x ≤ hi` by primal
/// active-set iteration.
///
/// The iterate stays feasible. Each pass solves the equality-constrained
/// subproblem on the free set; if the step leaves the box the first
/// blocking bound is added, otherwise the working bound with the most
/// negative multiplier is released.
pub fn solve_box_ls(h: &DMatrix<f64>, g: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>) -> Result<DVector<f64>> {
    let n = g.len();
    check_len("hessian rows", n, h.nrows())?;
    check_len("hessian columns", n, h.ncols())?;
    check_len("lower bounds", n, lo.len())?;
    check_len("upper bounds", n, hi.len())?;
    check_finite("hessian", h.iter())?;
    check_finite("gradient", g.iter())?;
    for i in 0..n {
        if lo[i].is_nan() || hi[i].is_nan() || lo[i] > hi[i] {
            return Err(Error::InfeasibleBounds { index: i, lo: lo[i], hi: hi[i] });
        }
    }
    if (h - h.transpose()).amax() > 1e-9 * h.amax().max(1.0) || h.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }

    let mut x = DVector::from_fn(n, |i, _| 0.0f64.clamp(lo[i], hi[i]));
    let mut set = vec![Bound::Free; n];
    for i in 0..n {
        if lo[i] == hi[i] {
            set[i] = Bound::Lower;
        }
    }

    let max_iter = 50 * (n + 1);
    for _ in 0..max_iter {
        let free: Vec<usize> = (0..n).filter(|&i| set[i] == Bound::Free).collect();
        let step = free_step(h, g, &x, &free)?;
        let scale = 1.0 + x.amax();
        if step.iter().all(|p| p.abs() <= 1e-13 * scale) {
            let grad = h * &x + g;
            let mut worst = None;
            let mut worst_val = 0.0;
            for i in 0..n {
                // Multiplier sign: at lo the gradient must be ≥ 0, at hi ≤ 0.
                let violation = match set[i] {
                    Bound::Free => 0.0,
                    Bound::Lower if lo[i] == hi[i] => 0.0,
                    Bound::Lower => -grad[i],
                    Bound::Upper => grad[i],
                };
                if violation > worst_val {
                    worst_val = violation;
                    worst = Some(i);
                }
            }
            match worst {
                Some(i) if worst_val > 1e-14 * (1.0 + grad.amax()) => set[i] = Bound::Free,
                _ => return Ok(x),
            }
            continue;
        }
        let mut alpha = 1.0;
        let mut blocking = None;
        for (k, &i) in free.iter().enumerate() {
            let p = step[k];
            let room = if p < 0.0 {
                (lo[i] - x[i]) / p
            } else if p > 0.0 {
                (hi[i] - x[i]) / p
            } else {
                f64::INFINITY
            };
            if room < alpha {
                alpha = room.max(0.0);
                blocking = Some((i, if p < 0.0 { Bound::Lower } else { Bound::Upper }));
            }
        }
        for (k, &i) in free.iter().enumerate() {
            x[i] = (x[i] + alpha * step[k]).clamp(lo[i], hi[i]);
        }
        if let Some((i, b)) = blocking {
            set[i] = b;
            x[i] = if b == Bound::Lower { lo[i] } else { hi[i] };
        }
    }
    Err(Error::SolverDidNotConverge(max_iter))
}

/// Step on the free coordinates toward the subproblem minimizer with the
/// other coordinates held.
fn free_step(h: &DMatrix<f64>, g: &DVector<f64>, x: &DVector<f64>, free: &[usize]) -> Result<DVector<f64>> {
    let m = free.len();
    if m == 0 {
        return Ok(DVector::zeros(0));
    }
    let grad = h * x + g;
    let hff = DMatrix::from_fn(m, m, |r, c| h[(free[r], free[c])]);
    let rhs = DVector::from_fn(m, |r, _| -grad[free[r]]);
    let chol = hff.cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.solve(&rhs))
}

/// `‖x − clamp(x − (Hx + g))‖∞`, zero exactly at the box-QP optimum.
pub fn kkt_residual(h: &DMatrix<f64>, g: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let grad = h * x + g;
    (0..x.len())
        .map(|i| (x[i] - (x[i] - grad[i]).clamp(lo[i], hi[i])).abs())
        .fold(0.0, f64::max)
}
