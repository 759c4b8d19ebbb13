use nalgebra::DVector;
use serde::Serialize;

use super::integrate::{Trajectory, TrajectoryKind};
use super::scenario::Scenario;
use crate::error::Result;

const BISECTION_MAX_ITERS: usize = 60;
/// Accuracy of located crossing times.
pub const CROSSING_TIME_TOL: f64 = 1e-6;
const MIN_BAND: f64 = 1e-6;

/// Closed time interval `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Contact structure of a trajectory: `I_∂`, its complement `I_0`, crossing
/// times and the first contact time `t̄`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryStructure {
    pub crossing_times: Vec<f64>,
    pub i_boundary: Vec<Interval>,
    pub i_interior: Vec<Interval>,
    pub t_bar: Option<f64>,
    /// `|d_S|` tolerance used to assemble `I_∂`.
    pub band: f64,
    pub horizon: f64,
}

impl BoundaryStructure {
    /// `I_∂` is one interval reaching `T`.
    pub fn is_terminal_interval(&self, tol: f64) -> bool {
        self.i_boundary.len() == 1 && (self.i_boundary[0].end - self.horizon).abs() <= tol
    }

    /// `I_∂ ⊆ {0}`.
    pub fn is_subset_of_zero(&self, tol: f64) -> bool {
        self.i_boundary
            .iter()
            .all(|i| i.start <= tol && i.end <= tol)
    }

    pub fn on_boundary(&self, t: f64) -> bool {
        self.i_boundary.iter().any(|i| i.contains(t))
    }
}

/// Band around `∂C(t)` counted as contact for a trajectory of this kind.
pub fn contact_band(scenario: &Scenario, traj: &Trajectory) -> f64 {
    match traj.kind {
        TrajectoryKind::Regularized { epsilon } => {
            (2.0 * epsilon * (scenario.beta() + scenario.gamma())).max(MIN_BAND)
        }
        TrajectoryKind::CatchingUp => MIN_BAND,
    }
}

struct Interpolant<'a> {
    scenario: &'a Scenario,
    traj: &'a Trajectory,
}

impl Interpolant<'_> {
    fn signed(&self, k: usize, theta: f64) -> Result<f64> {
        let h = self.traj.step();
        let t = self.traj.times[k] + theta * h;
        let x: DVector<f64> =
            &self.traj.states[k] * (1.0 - theta) + &self.traj.states[k + 1] * theta;
        self.scenario.set.signed_distance_sample(t, &x)
    }

    /// Time in step `k` where `level(d_S)` changes sign, by bisection.
    fn bisect(&self, k: usize, level: impl Fn(f64) -> f64) -> Result<f64> {
        let h = self.traj.step();
        let (mut lo, mut hi) = (0.0, 1.0);
        let s_lo = level(self.signed(k, 0.0)?) >= 0.0;
        for _ in 0..BISECTION_MAX_ITERS {
            if (hi - lo) * h <= CROSSING_TIME_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if (level(self.signed(k, mid)?) >= 0.0) == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(self.traj.times[k] + 0.5 * (lo + hi) * h)
    }
}

/// Locates boundary crossings and assembles `I_∂` / `I_0`.
///
/// A crossing is a sign change of `d_S + τ_b` between nodes, with `τ_b` the
/// set's boundary tolerance. `I_∂` collects maximal runs of nodes with
/// `|d_S| <= band`, with interior endpoints refined by bisection.
pub fn detect_crossings(scenario: &Scenario, traj: &Trajectory) -> Result<BoundaryStructure> {
    let interp = Interpolant { scenario, traj };
    let tau = scenario.set.boundary_tolerance();
    let band = contact_band(scenario, traj);
    let horizon = scenario.horizon;
    let last = traj.signed.len() - 1;

    let mut crossing_times = Vec::new();
    for k in 0..last {
        let a = traj.signed[k] + tau >= 0.0;
        let b = traj.signed[k + 1] + tau >= 0.0;
        if a != b {
            crossing_times.push(interp.bisect(k, |s| s + tau)?);
        }
    }

    let member: Vec<bool> = traj.signed.iter().map(|s| s.abs() <= band).collect();
    let mut i_boundary = Vec::new();
    let mut k = 0;
    while k <= last {
        if !member[k] {
            k += 1;
            continue;
        }
        let first = k;
        while k < last && member[k + 1] {
            k += 1;
        }
        let start = if first == 0 {
            0.0
        } else {
            interp.bisect(first - 1, |s| band - s.abs())?
        };
        let end = if k == last {
            horizon
        } else {
            interp.bisect(k, |s| band - s.abs())?
        };
        i_boundary.push(Interval { start, end });
        k += 1;
    }

    let mut i_interior = Vec::new();
    let mut cursor = 0.0;
    for iv in &i_boundary {
        if iv.start > cursor {
            i_interior.push(Interval {
                start: cursor,
                end: iv.start,
            });
        }
        cursor = iv.end;
    }
    if cursor < horizon {
        i_interior.push(Interval {
            start: cursor,
            end: horizon,
        });
    }

    let t_bar = crossing_times
        .first()
        .copied()
        .or_else(|| i_boundary.first().map(|i| i.start));
    Ok(BoundaryStructure {
        crossing_times,
        i_boundary,
        i_interior,
        t_bar,
        band,
        horizon,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PenetrationReport {
    /// `max_k d(t_k) / [ε(β+γ)(1 - e^{-t_k/ε})]`.
    pub max_ratio: f64,
    /// Largest sampled distance to the set.
    pub max_distance: f64,
    /// `ε(β+γ)`.
    pub bound: f64,
    /// `1 + 10 h/ε`.
    pub ratio_limit: f64,
    pub pass: bool,
}

pub fn penetration_report(
    traj: &Trajectory,
    epsilon: f64,
    beta: f64,
    gamma: f64,
) -> PenetrationReport {
    let bound = epsilon * (beta + gamma);
    let mut max_ratio: f64 = 0.0;
    for (t, d) in traj.times.iter().zip(traj.distance.iter()) {
        if *d <= 0.0 {
            continue;
        }
        let denom = bound * -(-t / epsilon).exp_m1();
        let ratio = if denom > 0.0 {
            d / denom
        } else {
            f64::INFINITY
        };
        max_ratio = max_ratio.max(ratio);
    }
    let ratio_limit = 1.0 + 10.0 * traj.step() / epsilon;
    PenetrationReport {
        max_ratio,
        max_distance: traj.max_distance(),
        bound,
        ratio_limit,
        pass: max_ratio <= ratio_limit,
    }
}
