use nalgebra::DVector;
use serde::Serialize;

use super::pointing::{PointingReport, PointingVerdict};
use super::weak::WeakEquationReport;
use crate::adjoint::{normal_component_sup, AdjointPath};
use crate::dynamics::{BoundaryStructure, ControlSignal, Scenario, Trajectory, CROSSING_TIME_TOL};
use crate::error::Result;

/// Angular tolerance for a jump to count as normal.
const JUMP_ANGLE_TOL: f64 = 1e-6;
/// Relative tolerance on the local variation of `p` around `t̄`.
const CONTINUITY_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub transversality: f64,
    pub maximality: f64,
    pub normal_component: f64,
    pub weak_equation: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            transversality: 1e-8,
            maximality: 1e-6,
            normal_component: 1e-3,
            weak_equation: 1e-2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    /// Nothing to check (for instance an empty contact set).
    Vacuous,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn from_option(ok: Option<bool>) -> Self {
        ok.map_or(Status::Vacuous, Self::from_bool)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

/// Range of the maximizing control over the checked nodes, per coordinate.
#[derive(Clone, Debug, Serialize)]
pub struct Selection {
    pub coordinate: usize,
    pub min: f64,
    pub max: f64,
    pub ties: usize,
    pub nodes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureFlags {
    pub i_boundary_is_terminal_interval: Option<bool>,
    pub i_boundary_subset_zero: Option<bool>,
    pub jumps_normal_only: bool,
    pub continuous_at_tbar: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PmpReport {
    pub pointing: PointingReport,
    pub transversality_residual: f64,
    pub maximality_residual: f64,
    pub selection: Vec<Selection>,
    pub normal_component_sup: Option<f64>,
    pub weak_equation_residual: f64,
    pub structure: StructureFlags,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl PmpReport {
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Vacuous => "VACUOUS",
            };
            out.push_str(&format!("{tag:<8} {:<34} {}\n", c.name, c.detail));
        }
        out.push_str(if self.passed {
            "overall: PASS\n"
        } else {
            "overall: FAIL\n"
        });
        out
    }
}

/// Fills every field of [`PmpReport`].
///
/// `path` and `traj` are the finest regularized pair; `structure` describes
/// the reference (catching-up) trajectory. A.e. conditions skip the windows
/// `[0, w)` and `(T - w, T]` with `w = 0.01 T`.
#[allow(clippy::too_many_arguments)]
pub fn verify_theorem(
    scenario: &Scenario,
    traj: &Trajectory,
    u: &ControlSignal,
    path: &AdjointPath,
    structure: &BoundaryStructure,
    pointing: PointingReport,
    weak: &WeakEquationReport,
    thresholds: Thresholds,
) -> Result<PmpReport> {
    let horizon = scenario.horizon;
    let margin = 0.01 * horizon;
    let last = path.p.len() - 1;

    let transversality_residual =
        (&path.p[last] + scenario.cost.gradient(traj.final_state())).norm();

    let m = scenario.control_dim();
    let mut selection: Vec<Selection> = (0..m)
        .map(|coordinate| Selection {
            coordinate,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            ties: 0,
            nodes: 0,
        })
        .collect();
    let mut maximality_residual: f64 = 0.0;
    for k in path.node_range(margin, horizon - margin) {
        let t = path.times[k];
        let x = &traj.states[k];
        let uk = u.at(t);
        let c = scenario.dynamics.jacobian_u(x, uk).transpose() * &path.p[k];
        let best = scenario.control_set.argmax_linear(&c);
        maximality_residual = maximality_residual.max(c.dot(&best.point) - c.dot(uk));
        for (s, (v, tie)) in selection.iter_mut().zip(best.point.iter().zip(&best.ties)) {
            s.min = s.min.min(*v);
            s.max = s.max.max(*v);
            s.ties += usize::from(*tie);
            s.nodes += 1;
        }
    }

    let normal_sup = normal_component_sup(path, structure, margin);

    let jumps_normal_only = path.jumps.iter().all(|j| {
        let k = ((j.time / path.step()).round() as usize).min(last);
        let Ok(n) = scenario.set.signed_gradient(traj.times[k], &traj.states[k]) else {
            return false;
        };
        let size: DVector<f64> = j.size();
        let len = size.norm();
        len == 0.0 || (&size - &n * n.dot(&size)).norm() <= JUMP_ANGLE_TOL * len
    });

    let continuous_at_tbar = structure.t_bar.map(|t_bar| {
        let range = path.node_range(t_bar - margin, t_bar + margin);
        let mut lo = DVector::from_element(path.p[0].len(), f64::INFINITY);
        let mut hi = DVector::from_element(path.p[0].len(), f64::NEG_INFINITY);
        for k in range {
            lo = lo.inf(&path.p[k]);
            hi = hi.sup(&path.p[k]);
        }
        (hi - lo).norm() <= CONTINUITY_TOL * (1.0 + path.sup_norm())
    });

    let tol = 1e-6 * horizon;
    // Under inward pointing the normal speed is at least σ, so a state
    // starting on the boundary leaves the contact band within band/σ.
    let sigma = scenario.constants.sigma;
    let exit_tol = if sigma > 0.0 {
        tol + CROSSING_TIME_TOL + structure.band / sigma
    } else {
        tol
    };
    let flags = StructureFlags {
        i_boundary_is_terminal_interval: (pointing.verdict == PointingVerdict::M1)
            .then(|| structure.is_terminal_interval(tol)),
        i_boundary_subset_zero: (pointing.verdict == PointingVerdict::M2)
            .then(|| structure.is_subset_of_zero(exit_tol)),
        jumps_normal_only,
        continuous_at_tbar,
    };

    let mut checks = vec![
        Check {
            name: "pointing condition",
            status: match pointing.verdict {
                PointingVerdict::M1 | PointingVerdict::M2 => Status::Pass,
                PointingVerdict::Neither => Status::Fail,
                PointingVerdict::Vacuous => Status::Vacuous,
            },
            detail: format!(
                "{:?} ({} thresholds, min L = {:.6e}, max L = {:.6e})",
                pointing.verdict,
                pointing.threshold_mode.as_str(),
                pointing.min_l,
                pointing.max_l
            ),
        },
        Check {
            name: "transversality",
            status: Status::from_bool(transversality_residual <= thresholds.transversality),
            detail: format!(
                "{transversality_residual:.3e} <= {:.1e}",
                thresholds.transversality
            ),
        },
        Check {
            name: "maximality",
            status: Status::from_bool(maximality_residual <= thresholds.maximality),
            detail: format!("{maximality_residual:.3e} <= {:.1e}", thresholds.maximality),
        },
        Check {
            name: "normal component on contact set",
            status: Status::from_option(normal_sup.map(|s| s <= thresholds.normal_component)),
            detail: match normal_sup {
                Some(s) => format!("{s:.3e} <= {:.1e}", thresholds.normal_component),
                None => "no contact nodes away from the endpoints".into(),
            },
        },
        Check {
            name: "weak adjoint equation",
            status: Status::from_bool(weak.residual <= thresholds.weak_equation),
            detail: format!(
                "{:.3e} <= {:.1e} over {} test functions",
                weak.residual,
                thresholds.weak_equation,
                weak.defects.len()
            ),
        },
        Check {
            name: "jumps along the normal only",
            status: Status::from_bool(jumps_normal_only),
            detail: format!("{} jump(s)", path.jumps.len()),
        },
    ];
    if let Some(flag) = flags.i_boundary_is_terminal_interval {
        checks.push(Check {
            name: "contact set is [t_bar, T]",
            status: Status::from_bool(flag),
            detail: format!("{} interval(s)", structure.i_boundary.len()),
        });
    }
    if let Some(flag) = flags.i_boundary_subset_zero {
        checks.push(Check {
            name: "contact set within {0}",
            status: Status::from_bool(flag),
            detail: format!("{} interval(s)", structure.i_boundary.len()),
        });
    }
    if pointing.verdict == PointingVerdict::M1 {
        checks.push(Check {
            name: "adjoint continuous at t_bar",
            status: Status::from_option(continuous_at_tbar),
            detail: match structure.t_bar {
                Some(t) => format!("t_bar = {t:.6}"),
                None => "no contact".into(),
            },
        });
    }
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    Ok(PmpReport {
        pointing,
        transversality_residual,
        maximality_residual,
        selection,
        normal_component_sup: normal_sup,
        weak_equation_residual: weak.residual,
        structure: flags,
        checks,
        passed,
    })
}
