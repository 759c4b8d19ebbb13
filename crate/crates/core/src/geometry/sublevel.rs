use nalgebra::{DMatrix, DVector};

use super::{tangent_projector, Foot, VectorPath};
use crate::error::{Error, Result};

const NEWTON_MAX_ITERS: usize = 50;
const NEWTON_TOL: f64 = 1e-12;
/// First-order depth beyond which a point is treated as interior without
/// solving for its boundary foot.
const INTERIOR_SHORTCUT_DEPTH: f64 = 1e-3;

/// Defining function `g(t, x)` of a sublevel set `{g <= 0}`.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelFunction {
    /// `g = Σ ((x_i - c_i(t)) / a_i)² - 1`.
    Ellipsoid {
        center: VectorPath,
        semi_axes: DVector<f64>,
    },
}

impl LevelFunction {
    pub fn name(&self) -> &'static str {
        match self {
            LevelFunction::Ellipsoid { .. } => "ellipsoid",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LevelFunction::Ellipsoid { center, .. } => center.dim(),
        }
    }

    pub(super) fn validate(&self) -> Result<()> {
        match self {
            LevelFunction::Ellipsoid { center, semi_axes } => {
                if center.dim() == 0 {
                    return Err(Error::validation("set.center", "must be nonempty"));
                }
                if semi_axes.len() != center.dim() {
                    return Err(Error::validation(
                        "set.semi_axes",
                        "must have the same dimension as the center",
                    ));
                }
                if center.rate.len() != center.dim() {
                    return Err(Error::validation(
                        "set.motion.center.rate",
                        "must have the same dimension as the center",
                    ));
                }
                if semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                    return Err(Error::validation("set.semi_axes", "must be positive"));
                }
                Ok(())
            }
        }
    }

    /// Smallest radius of curvature of the boundary.
    pub(super) fn natural_prox_radius(&self) -> f64 {
        match self {
            LevelFunction::Ellipsoid { semi_axes, .. } => {
                let a_min = semi_axes.min();
                let a_max = semi_axes.max();
                a_min * a_min / a_max
            }
        }
    }

    pub(super) fn motion_rate(&self) -> f64 {
        match self {
            LevelFunction::Ellipsoid { center, .. } => center.rate.norm(),
        }
    }

    pub fn value(&self, t: f64, x: &DVector<f64>) -> f64 {
        match self {
            LevelFunction::Ellipsoid { center, semi_axes } => {
                let c = center.at(t);
                x.iter()
                    .zip(c.iter())
                    .zip(semi_axes.iter())
                    .map(|((xi, ci), ai)| ((xi - ci) / ai).powi(2))
                    .sum::<f64>()
                    - 1.0
            }
        }
    }

    pub fn gradient(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        match self {
            LevelFunction::Ellipsoid { center, semi_axes } => {
                let c = center.at(t);
                DVector::from_iterator(
                    x.len(),
                    x.iter()
                        .zip(c.iter())
                        .zip(semi_axes.iter())
                        .map(|((xi, ci), ai)| 2.0 * (xi - ci) / (ai * ai)),
                )
            }
        }
    }

    pub fn hessian(&self, _t: f64, x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            LevelFunction::Ellipsoid { semi_axes, .. } => {
                debug_assert_eq!(x.len(), semi_axes.len());
                DMatrix::from_diagonal(&semi_axes.map(|a| 2.0 / (a * a)))
            }
        }
    }

    pub(super) fn clearly_interior(&self, t: f64, x: &DVector<f64>) -> bool {
        let g = self.value(t, x);
        if g >= 0.0 {
            return false;
        }
        let grad = self.gradient(t, x).norm();
        grad < 1e-12 || -g / grad > INTERIOR_SHORTCUT_DEPTH
    }

    /// First-order signed distance for deep interior points, capped at `-ρ`.
    pub(super) fn interior_estimate(&self, t: f64, x: &DVector<f64>, rho: f64) -> Option<f64> {
        let g = self.value(t, x);
        if g >= 0.0 {
            return None;
        }
        let grad = self.gradient(t, x).norm();
        if grad < 1e-12 {
            return Some(-rho);
        }
        Some((g / grad).max(-rho))
    }

    /// Newton solve of `y + μ ∇g(y) = x, g(y) = 0` started from `(x, 0)`.
    pub(super) fn boundary_foot(&self, t: f64, x: &DVector<f64>) -> Result<Foot> {
        let n = x.len();
        let scale = x.amax().max(1.0);
        let mut y = x.clone();
        let mut mu = 0.0;
        let mut residual = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITERS {
            let grad = self.gradient(t, &y);
            let mut rhs = DVector::zeros(n + 1);
            rhs.rows_mut(0, n).copy_from(&(&y + &grad * mu - x));
            rhs[n] = self.value(t, &y);
            residual = rhs.amax();
            if residual <= NEWTON_TOL * scale {
                let gnorm = grad.norm();
                return Ok(Foot {
                    signed: mu * gnorm,
                    normal: grad / gnorm,
                    point: y,
                });
            }
            let jac = self.kkt_matrix(t, &y, mu);
            let step = jac.lu().solve(&(-rhs)).ok_or(Error::ProjectionFailure {
                t,
                iterations: NEWTON_MAX_ITERS,
                residual,
            })?;
            y += step.rows(0, n);
            mu += step[n];
        }
        Err(Error::ProjectionFailure {
            t,
            iterations: NEWTON_MAX_ITERS,
            residual,
        })
    }

    fn kkt_matrix(&self, t: f64, y: &DVector<f64>, mu: f64) -> DMatrix<f64> {
        let n = y.len();
        let grad = self.gradient(t, y);
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let top = DMatrix::identity(n, n) + self.hessian(t, y) * mu;
        jac.view_mut((0, 0), (n, n)).copy_from(&top);
        jac.view_mut((0, n), (n, 1)).copy_from(&grad);
        jac.view_mut((n, 0), (1, n)).copy_from(&grad.transpose());
        jac
    }

    /// `∇²d_S = |∇g|⁻¹ (I - n nᵀ) ∇²g(y) ∂y/∂x`, with `∂y/∂x` from implicit
    /// differentiation of the foot equations.
    pub(super) fn signed_hessian(&self, t: f64, foot: &Foot) -> Result<DMatrix<f64>> {
        let n = foot.point.len();
        let grad = self.gradient(t, &foot.point);
        let mu = foot.signed / grad.norm();
        let jac = self.kkt_matrix(t, &foot.point, mu);
        let mut rhs = DMatrix::zeros(n + 1, n);
        rhs.view_mut((0, 0), (n, n)).fill_with_identity();
        let sens = jac.lu().solve(&rhs).ok_or(Error::ProjectionFailure {
            t,
            iterations: 0,
            residual: f64::NAN,
        })?;
        let dy = sens.rows(0, n);
        let h = tangent_projector(&foot.normal) * self.hessian(t, &foot.point) * dy / grad.norm();
        Ok((&h + h.transpose()) * 0.5)
    }
}
