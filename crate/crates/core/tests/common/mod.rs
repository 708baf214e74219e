#![allow(dead_code)]

use hfic_core::fic::{fic_attractor, FicAxisState, FicParams};
use hfic_core::planner::Phase;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Running energy account of one attractor axis along an error trajectory.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnergyAccount {
    /// Work absorbed during divergence.
    pub stored: f64,
    /// Work returned during convergence.
    pub released: f64,
    /// Largest `released − stored` seen at any sample.
    pub worst_excess: f64,
}

/// Trapezoidal quadrature of `F dx̃` per interval, attributed to the phase
/// the interval ends in. Both endpoints are evaluated on that phase's branch
/// so a switch never mixes the two laws inside one interval.
pub fn energy_account(p: &FicParams, xs: &[f64]) -> EnergyAccount {
    let mut acc = EnergyAccount::default();
    let Some(&first) = xs.first() else { return acc };
    let (_, mut s) = fic_attractor(p, &FicAxisState::default(), first);
    let mut prev = first;
    for &x in &xs[1..] {
        let (f1, n) = fic_attractor(p, &s, x);
        let f0 = match n.phase {
            Phase::Convergence => {
                let xm = n.x_tilde_max;
                2.0 * hfic_core::fic::fic_force(p, xm) / xm * (prev - 0.5 * xm)
            }
            Phase::Divergence => hfic_core::fic::fic_force(p, prev),
        };
        let w = 0.5 * (f0 + f1) * (x - prev);
        match n.phase {
            Phase::Divergence => acc.stored += w,
            Phase::Convergence => acc.released -= w,
        }
        acc.worst_excess = acc.worst_excess.max(acc.released - acc.stored);
        s = n;
        prev = x;
    }
    acc
}

/// Smooth episode from rest: a random sum of sinusoids offset to start at 0.
pub fn sinusoid_episode(rng: &mut ChaCha8Rng, x_b: f64, samples: usize) -> Vec<f64> {
    let k = rng.random_range(1..6);
    let comps: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| (rng.random_range(0.0..1.2) * x_b, rng.random_range(0.5..8.0), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    (0..samples)
        .map(|i| {
            let t = i as f64 * 1e-3;
            comps.iter().map(|(a, w, ph)| a * ((w * t + ph).sin() - ph.sin())).sum()
        })
        .collect()
}

/// Piecewise-linear episode through random waypoints, including partial
/// returns at arbitrary depth and zero crossings.
pub fn waypoint_episode(rng: &mut ChaCha8Rng, x_b: f64) -> Vec<f64> {
    let mut xs = vec![0.0];
    let mut cur = 0.0;
    for _ in 0..rng.random_range(2..30) {
        let next = rng.random_range(-1.5..1.5) * x_b;
        let steps = rng.random_range(10..80);
        for k in 1..=steps {
            xs.push(cur + (next - cur) * k as f64 / steps as f64);
        }
        cur = next;
    }
    xs
}
