use std::f64::consts::PI;

use nalgebra::DVector;
use serde::Serialize;

use crate::adjoint::{AdjointPath, MultiplierReport};
use crate::dynamics::{ControlSignal, Scenario, Trajectory};
use crate::error::{Error, Result};

/// Scalar profiles multiplied with each coordinate direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Profile {
    One,
    T,
    T2,
    Sin,
    Cos,
}

impl Profile {
    pub const ALL: [Profile; 5] = [
        Profile::One,
        Profile::T,
        Profile::T2,
        Profile::Sin,
        Profile::Cos,
    ];

    fn eval(self, t: f64, horizon: f64) -> f64 {
        match self {
            Profile::One => 1.0,
            Profile::T => t,
            Profile::T2 => t * t,
            Profile::Sin => (PI * t / horizon).sin(),
            Profile::Cos => (PI * t / horizon).cos(),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Profile::One => "1",
            Profile::T => "t",
            Profile::T2 => "t^2",
            Profile::Sin => "sin(pi t/T)",
            Profile::Cos => "cos(pi t/T)",
        }
    }
}

/// Test functions `φ(t) = e_i · profile(t)`, optionally projected onto the
/// tangent space `I - n nᵀ` of the boundary wherever the state is in the
/// contact band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFamily {
    pub tangential: bool,
}

impl Default for TestFamily {
    fn default() -> Self {
        Self { tangential: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakDefect {
    pub name: String,
    pub defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakEquationReport {
    /// Largest normalized defect over the family.
    pub residual: f64,
    pub defects: Vec<WeakDefect>,
}

/// Defect of the weak adjoint equation
/// `∫<φ, dp> = ∫<φ, dμ> + ∫ η <φ, ∇²d p> dt - ∫ <φ, D_x fᵀ p> dt`
/// with `dp` as the Stieltjes sum over grid increments (`φ` at step
/// midpoints), the measure from windowed atoms (`φ` at atom centroids), and
/// both Lebesgue integrals by the trapezoid rule on the nodes. Each defect is
/// divided by `‖φ‖_∞`.
pub fn verify_weak_equation(
    scenario: &Scenario,
    traj: &Trajectory,
    u: &ControlSignal,
    path: &AdjointPath,
    multipliers: &MultiplierReport,
    family: TestFamily,
) -> Result<WeakEquationReport> {
    if path.p.len() != traj.states.len() {
        return Err(Error::DimensionMismatch {
            what: "adjoint nodes vs trajectory nodes",
            expected: traj.states.len(),
            got: path.p.len(),
        });
    }
    let horizon = scenario.horizon;
    let h = traj.step();
    let n = scenario.state_dim();
    let last = traj.states.len() - 1;

    // Node integrands of the two Lebesgue terms.
    let mut lebesgue = Vec::with_capacity(last + 1);
    for k in 0..=last {
        let t = traj.times[k];
        let x = &traj.states[k];
        let uk = u.at(t.min(horizon - 0.5 * h));
        let mut v = -(scenario.dynamics.jacobian_x(x, uk).transpose() * &path.p[k]);
        if path.eta[k] > 0.0 {
            v += scenario.set.distance_hessian(t, x)? * &path.p[k] * path.eta[k];
        }
        lebesgue.push(v);
    }

    let normals: Vec<Option<DVector<f64>>> = (0..=last)
        .map(|k| {
            path.p_normal[k]
                .map(|_| scenario.set.signed_gradient(traj.times[k], &traj.states[k]))
                .transpose()
        })
        .collect::<Result<_>>()?;
    let project = |k: usize, phi: DVector<f64>| -> DVector<f64> {
        match &normals[k] {
            Some(nv) => &phi - nv * nv.dot(&phi),
            None => phi,
        }
    };
    let node_of = |t: f64| ((t / h).round().max(0.0) as usize).min(last);

    let mut defects = Vec::new();
    let variants: &[bool] = if family.tangential {
        &[false, true]
    } else {
        &[false]
    };
    for &tangential in variants {
        for i in 0..n {
            for profile in Profile::ALL {
                let phi = |t: f64, k: usize| -> DVector<f64> {
                    let mut e = DVector::zeros(n);
                    e[i] = profile.eval(t, horizon);
                    if tangential {
                        project(k, e)
                    } else {
                        e
                    }
                };
                let mut sup: f64 = 0.0;
                let mut stieltjes = 0.0;
                let mut trapezoid = 0.0;
                for (k, leb) in lebesgue.iter().enumerate() {
                    let at_node = phi(traj.times[k], k);
                    sup = sup.max(at_node.amax());
                    let w = if k == 0 || k == last { 0.5 * h } else { h };
                    trapezoid += w * at_node.dot(leb);
                    if k < last {
                        let mid = traj.times[k] + 0.5 * h;
                        stieltjes += phi(mid, k).dot(&(&path.p[k + 1] - &path.p[k]));
                    }
                }
                let measure: f64 = multipliers
                    .atoms
                    .iter()
                    .map(|a| phi(a.centroid, node_of(a.centroid)).dot(&a.mass_vector()))
                    .sum();
                let name = format!("e{}*{}", i + 1, profile.label());
                let name = if tangential {
                    format!("tan({name})")
                } else {
                    name
                };
                let defect = if sup > 0.0 {
                    (stieltjes - measure - trapezoid).abs() / sup
                } else {
                    0.0
                };
                defects.push(WeakDefect { name, defect });
            }
        }
    }
    let residual = defects.iter().map(|d| d.defect).fold(0.0, f64::max);
    Ok(WeakEquationReport { residual, defects })
}
