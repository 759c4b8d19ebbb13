use serde::Serialize;

use super::multipliers::Jump;
use super::path::{integrate_adjoint, AdjointPath};
use crate::dynamics::{
    detect_crossings, integrate_regularized, BoundaryStructure, ControlSignal, GridPolicy,
    Scenario, Trajectory,
};
use crate::error::{Error, Result};

/// Factor by which the local slope must grow between successive `ε` for a
/// jump of the finest curve to be confirmed.
const SLOPE_GROWTH: f64 = 2.0;

pub struct LimitMember {
    pub epsilon: f64,
    pub traj: Trajectory,
    pub path: AdjointPath,
    pub structure: BoundaryStructure,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfirmedJump {
    #[serde(flatten)]
    pub jump: Jump,
    /// Peak local slope near the jump for each schedule entry.
    pub slopes: Vec<f64>,
}

pub struct LimitStudy {
    /// One member per schedule entry, coarsest first.
    pub members: Vec<LimitMember>,
    pub jump_table: Vec<ConfirmedJump>,
    /// `sup |p^N|` of the finest curve over `I_∂` away from `t̄` and `T`.
    pub normal_component_sup: Option<f64>,
}

impl LimitStudy {
    /// The finest curve, used as the pointwise limit estimate.
    pub fn limit(&self) -> &LimitMember {
        self.members.last().expect("schedule is nonempty")
    }
}

pub fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::validation(
            "numerics.eps_schedule",
            "must be nonempty",
        ));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::validation(
            "numerics.eps_schedule",
            "must be strictly decreasing",
        ));
    }
    Ok(())
}

/// `sup |p^N(t)|` over nodes in `I_∂ ∩ [t̄ + margin, T - margin]`.
pub fn normal_component_sup(
    path: &AdjointPath,
    structure: &BoundaryStructure,
    margin: f64,
) -> Option<f64> {
    let t_bar = structure.t_bar?;
    let (a, b) = (t_bar + margin, structure.horizon - margin);
    let mut sup: Option<f64> = None;
    for k in path.node_range(a, b) {
        let t = path.times[k];
        if !structure.on_boundary(t) {
            continue;
        }
        if let Some(pn) = path.p_normal[k] {
            sup = Some(sup.unwrap_or(0.0).max(pn.abs()));
        }
    }
    sup
}

fn peak_slope_near(path: &AdjointPath, time: f64, radius: f64) -> f64 {
    let h = path.step();
    let range = path.node_range(time - radius, time + radius);
    let (lo, hi) = (*range.start(), *range.end());
    (lo..hi.min(path.p.len() - 1))
        .map(|k| (&path.p[k + 1] - &path.p[k]).norm() / h)
        .fold(0.0, f64::max)
}

/// Runs the regularized forward/adjoint pair for each `ε` of a strictly
/// decreasing schedule, estimates the limit adjoint by the finest curve and
/// keeps the finest curve's jumps whose local slope grows along the schedule.
pub fn limit_study(
    scenario: &Scenario,
    u: &ControlSignal,
    schedule: &[f64],
    grid: GridPolicy,
) -> Result<LimitStudy> {
    check_schedule(schedule)?;
    let mut members = Vec::with_capacity(schedule.len());
    for &epsilon in schedule {
        let m = grid.steps_per_interval(scenario.horizon, epsilon)?;
        let traj = integrate_regularized(scenario, u, epsilon, m)?;
        let path = integrate_adjoint(scenario, &traj, u, epsilon)?;
        let structure = detect_crossings(scenario, &traj)?;
        members.push(LimitMember {
            epsilon,
            traj,
            path,
            structure,
        });
    }
    let finest = members.last().expect("schedule is nonempty");
    let radius = super::jump_window(Some(finest.epsilon), finest.path.step());
    let jump_table = finest
        .path
        .jumps
        .iter()
        .filter_map(|jump| {
            let slopes: Vec<f64> = members
                .iter()
                .map(|m| peak_slope_near(&m.path, jump.time, radius))
                .collect();
            let growing = slopes.windows(2).all(|w| w[1] >= SLOPE_GROWTH * w[0]);
            growing.then(|| ConfirmedJump {
                jump: jump.clone(),
                slopes,
            })
        })
        .collect();
    let margin = 0.01 * scenario.horizon;
    let normal_component_sup = normal_component_sup(&finest.path, &finest.structure, margin);
    Ok(LimitStudy {
        members,
        jump_table,
        normal_component_sup,
    })
}
