//! Moving sets with smooth boundary: signed distance, metric projection and
//! the first two derivatives of the distance, for a small set of families.
//!
//! Sign convention: `d_S(t, x)` is positive outside `C(t)`, negative inside
//! and zero on the boundary. The distance gradient follows the boundary
//! convention of the theory: on `∂C(t)` it is the unit external normal, in
//! the strict interior it is the zero vector.

mod prox;
mod sublevel;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use prox::{prox_check, ProxReport};
pub use sublevel::LevelFunction;

/// Stand-in for "any ρ" on convex closed-form families.
pub const SENTINEL_PROX_RADIUS: f64 = 1e6;
/// `|d_S| <= tol` counts as "on the boundary" for closed-form families.
pub const CLOSED_FORM_BOUNDARY_TOL: f64 = 1e-9;
/// Same for sublevel sets, whose distance comes out of a Newton solve.
pub const SUBLEVEL_BOUNDARY_TOL: f64 = 1e-7;
/// Half-width of the symmetric time difference used for sublevel set velocity.
pub const SUBLEVEL_VELOCITY_STEP: f64 = 1e-6;

/// `s(t) = initial + rate * t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarPath {
    pub initial: f64,
    pub rate: f64,
}

impl ScalarPath {
    pub fn fixed(value: f64) -> Self {
        Self {
            initial: value,
            rate: 0.0,
        }
    }

    pub fn linear(initial: f64, rate: f64) -> Self {
        Self { initial, rate }
    }

    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        self.initial + self.rate * t
    }
}

/// `c(t) = initial + rate * t`, componentwise.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPath {
    pub initial: DVector<f64>,
    pub rate: DVector<f64>,
}

impl VectorPath {
    pub fn fixed(value: DVector<f64>) -> Self {
        let rate = DVector::zeros(value.len());
        Self {
            initial: value,
            rate,
        }
    }

    pub fn linear(initial: DVector<f64>, rate: DVector<f64>) -> Self {
        Self { initial, rate }
    }

    #[inline]
    pub fn at(&self, t: f64) -> DVector<f64> {
        &self.initial + &self.rate * t
    }

    pub fn dim(&self) -> usize {
        self.initial.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetKind {
    Halfspace,
    Ball,
    BallComplement,
    Sublevel,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SetShape {
    /// `{x : <normal, x> >= offset(t)}`, `normal` stored with unit length.
    Halfspace {
        normal: DVector<f64>,
        offset: ScalarPath,
    },
    /// `{x : |x - center(t)| <= radius(t)}`.
    Ball {
        center: VectorPath,
        radius: ScalarPath,
    },
    /// `{x : |x - center(t)| >= radius(t)}`.
    BallComplement {
        center: VectorPath,
        radius: ScalarPath,
    },
    /// `{x : g(t, x) <= 0}`.
    Sublevel(LevelFunction),
}

impl SetShape {
    pub fn kind(&self) -> SetKind {
        match self {
            SetShape::Halfspace { .. } => SetKind::Halfspace,
            SetShape::Ball { .. } => SetKind::Ball,
            SetShape::BallComplement { .. } => SetKind::BallComplement,
            SetShape::Sublevel(_) => SetKind::Sublevel,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SetShape::Halfspace { normal, .. } => normal.len(),
            SetShape::Ball { center, .. } | SetShape::BallComplement { center, .. } => center.dim(),
            SetShape::Sublevel(g) => g.dim(),
        }
    }
}

/// Nearest boundary point of `x` together with the signed distance and the
/// unit external normal there.
#[derive(Clone, Debug)]
pub struct Foot {
    pub signed: f64,
    pub point: DVector<f64>,
    pub normal: DVector<f64>,
}

#[derive(Clone, Debug)]
pub enum Location {
    /// Strictly inside. The signed distance is known unless the point sits
    /// too deep inside a sublevel set for the boundary solve.
    Interior {
        signed: Option<f64>,
    },
    Boundary(Foot),
    Exterior(Foot),
}

impl Location {
    pub fn foot(&self) -> Option<&Foot> {
        match self {
            Location::Interior { .. } => None,
            Location::Boundary(f) | Location::Exterior(f) => Some(f),
        }
    }

    pub fn is_interior(&self) -> bool {
        matches!(self, Location::Interior { .. })
    }
}

/// A smooth prox-regular moving set `C(t)`.
///
/// Immutable after construction; every query is a pure function of `(t, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MovingSetModel {
    shape: SetShape,
    prox_radius: f64,
    set_lipschitz: f64,
}

impl MovingSetModel {
    /// Builds the model with its natural prox radius and Lipschitz rate over
    /// `[0, horizon]`.
    pub fn new(shape: SetShape, horizon: f64) -> Result<Self> {
        validate_shape(&shape, horizon)?;
        let prox_radius = natural_prox_radius(&shape, horizon);
        let set_lipschitz = natural_lipschitz(&shape);
        Ok(Self {
            shape,
            prox_radius,
            set_lipschitz,
        })
    }

    pub fn halfspace(normal: DVector<f64>, offset: ScalarPath) -> Result<Self> {
        Self::new(SetShape::Halfspace { normal, offset }, 0.0)
    }

    /// Overrides ρ. Families that are not convex cannot be given a radius
    /// beyond their natural reach.
    pub fn with_prox_radius(mut self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::validation(
                "constants.rho",
                "must be positive and finite",
            ));
        }
        if matches!(self.shape, SetShape::BallComplement { .. }) && rho > self.prox_radius {
            return Err(Error::validation(
                "constants.rho",
                format!(
                    "{rho} exceeds the reach {} of the ball complement",
                    self.prox_radius
                ),
            ));
        }
        self.prox_radius = rho;
        Ok(self)
    }

    /// Overrides γ; it may only be raised above the rate implied by the motion.
    pub fn with_set_lipschitz(mut self, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::validation(
                "constants.gamma",
                "must be nonnegative and finite",
            ));
        }
        if gamma + 1e-12 < self.set_lipschitz {
            return Err(Error::validation(
                "constants.gamma",
                format!(
                    "{gamma} is below the motion rate {} of the set",
                    self.set_lipschitz
                ),
            ));
        }
        self.set_lipschitz = gamma;
        Ok(self)
    }

    pub fn shape(&self) -> &SetShape {
        &self.shape
    }

    pub fn kind(&self) -> SetKind {
        self.shape.kind()
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn prox_radius(&self) -> f64 {
        self.prox_radius
    }

    pub fn set_lipschitz(&self) -> f64 {
        self.set_lipschitz
    }

    pub fn boundary_tolerance(&self) -> f64 {
        match self.shape {
            SetShape::Sublevel(_) => SUBLEVEL_BOUNDARY_TOL,
            _ => CLOSED_FORM_BOUNDARY_TOL,
        }
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "state vector",
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn band_check(&self, t: f64, signed: f64) -> Result<()> {
        let limit = 0.5 * self.prox_radius;
        if signed >= limit {
            return Err(Error::OutOfProxBand {
                t,
                distance: signed,
                limit,
            });
        }
        Ok(())
    }

    /// Signed distance `d_S(t, x)`.
    pub fn signed_distance(&self, t: f64, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        match &self.shape {
            SetShape::Halfspace { normal, offset } => Ok(offset.at(t) - normal.dot(x)),
            SetShape::Ball { center, radius } => Ok((x - center.at(t)).norm() - radius.at(t)),
            SetShape::BallComplement { center, radius } => {
                Ok(radius.at(t) - (x - center.at(t)).norm())
            }
            SetShape::Sublevel(g) => Ok(g.boundary_foot(t, x)?.signed),
        }
    }

    /// Signed distance suitable for sampling along a trajectory: identical to
    /// [`signed_distance`](Self::signed_distance) except that points too deep
    /// inside a sublevel set get a first-order estimate instead of an error.
    pub fn signed_distance_sample(&self, t: f64, x: &DVector<f64>) -> Result<f64> {
        match &self.shape {
            SetShape::Sublevel(g) => match g.boundary_foot(t, x) {
                Ok(foot) => Ok(foot.signed),
                Err(e @ Error::ProjectionFailure { .. }) => {
                    g.interior_estimate(t, x, self.prox_radius).ok_or(e)
                }
                Err(e) => Err(e),
            },
            _ => self.signed_distance(t, x),
        }
    }

    /// Classifies `x` relative to `C(t)` and returns the boundary foot when
    /// it exists. Exterior points must lie in the `ρ/2` band.
    pub fn locate(&self, t: f64, x: &DVector<f64>) -> Result<Location> {
        self.check_dim(x)?;
        let tol = self.boundary_tolerance();
        let foot = match &self.shape {
            SetShape::Halfspace { normal, offset } => {
                let signed = offset.at(t) - normal.dot(x);
                Foot {
                    signed,
                    point: x + normal * signed,
                    normal: -normal,
                }
            }
            SetShape::Ball { center, radius } => {
                let c = center.at(t);
                let r = radius.at(t);
                let v = x - &c;
                let len = v.norm();
                if len == 0.0 {
                    return Ok(Location::Interior { signed: Some(-r) });
                }
                let n = v / len;
                Foot {
                    signed: len - r,
                    point: &c + &n * r,
                    normal: n,
                }
            }
            SetShape::BallComplement { center, radius } => {
                let c = center.at(t);
                let r = radius.at(t);
                let v = x - &c;
                let len = v.norm();
                let signed = r - len;
                self.band_check(t, signed)?;
                let n = v / len;
                Foot {
                    signed,
                    point: &c + &n * r,
                    normal: -n,
                }
            }
            SetShape::Sublevel(g) => {
                if g.clearly_interior(t, x) {
                    return Ok(Location::Interior { signed: None });
                }
                match g.boundary_foot(t, x) {
                    Ok(foot) => foot,
                    Err(Error::ProjectionFailure { .. }) if g.value(t, x) < 0.0 => {
                        return Ok(Location::Interior { signed: None })
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        self.band_check(t, foot.signed)?;
        Ok(if foot.signed.abs() <= tol {
            Location::Boundary(foot)
        } else if foot.signed > 0.0 {
            Location::Exterior(foot)
        } else {
            Location::Interior {
                signed: Some(foot.signed),
            }
        })
    }

    /// Metric projection onto `C(t)`; identity on the set.
    pub fn project(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self.locate(t, x)? {
            Location::Exterior(foot) => Ok(foot.point),
            _ => Ok(x.clone()),
        }
    }

    /// Gradient of the distance outside, unit external normal on the
    /// boundary, zero strictly inside.
    pub fn distance_gradient(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self.locate(t, x)? {
            Location::Interior { .. } => Ok(DVector::zeros(x.len())),
            Location::Boundary(foot) | Location::Exterior(foot) => Ok(foot.normal),
        }
    }

    /// Hessian of the distance outside, of the signed distance on the
    /// boundary, zero strictly inside.
    pub fn distance_hessian(&self, t: f64, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        match self.locate(t, x)? {
            Location::Interior { .. } => Ok(DMatrix::zeros(x.len(), x.len())),
            Location::Boundary(foot) | Location::Exterior(foot) => self.signed_hessian(t, x, &foot),
        }
    }

    /// `∇_x d_S(t, x)`, the external normal at the foot of `x`. Defined on
    /// both sides of the boundary inside the band.
    pub fn signed_gradient(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        match &self.shape {
            SetShape::Halfspace { normal, .. } => Ok(-normal),
            SetShape::Ball { center, .. } => Ok((x - center.at(t)).normalize()),
            SetShape::BallComplement { center, .. } => Ok(-(x - center.at(t)).normalize()),
            SetShape::Sublevel(g) => Ok(g.boundary_foot(t, x)?.normal),
        }
    }

    /// Hessian of `d_S(t, ·)` at `x`, given its boundary foot.
    pub fn signed_hessian(&self, t: f64, x: &DVector<f64>, foot: &Foot) -> Result<DMatrix<f64>> {
        let n = x.len();
        match &self.shape {
            SetShape::Halfspace { .. } => Ok(DMatrix::zeros(n, n)),
            SetShape::Ball { center, .. } => {
                let len = (x - center.at(t)).norm();
                Ok(tangent_projector(&foot.normal) / len)
            }
            SetShape::BallComplement { center, .. } => {
                let len = (x - center.at(t)).norm();
                Ok(tangent_projector(&foot.normal) / -len)
            }
            SetShape::Sublevel(g) => g.signed_hessian(t, foot),
        }
    }

    /// `∂d_S/∂t (t, x)`.
    pub fn set_velocity(&self, t: f64, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        match &self.shape {
            SetShape::Halfspace { offset, .. } => Ok(offset.rate),
            SetShape::Ball { center, radius } => {
                let v = x - center.at(t);
                let len = v.norm();
                let drift = if len > 0.0 {
                    v.dot(&center.rate) / len
                } else {
                    0.0
                };
                Ok(-drift - radius.rate)
            }
            SetShape::BallComplement { center, radius } => {
                let v = x - center.at(t);
                let len = v.norm();
                let drift = if len > 0.0 {
                    v.dot(&center.rate) / len
                } else {
                    0.0
                };
                Ok(drift + radius.rate)
            }
            SetShape::Sublevel(_) => {
                let dt = SUBLEVEL_VELOCITY_STEP;
                let ahead = self.signed_distance(t + dt, x)?;
                let behind = self.signed_distance(t - dt, x)?;
                Ok((ahead - behind) / (2.0 * dt))
            }
        }
    }
}

/// `I - n nᵀ`.
pub(crate) fn tangent_projector(normal: &DVector<f64>) -> DMatrix<f64> {
    let n = normal.len();
    DMatrix::identity(n, n) - normal * normal.transpose()
}

fn validate_shape(shape: &SetShape, horizon: f64) -> Result<()> {
    let endpoints = [0.0, horizon.max(0.0)];
    match shape {
        SetShape::Halfspace { normal, offset } => {
            if normal.is_empty() {
                return Err(Error::validation("set.normal", "must be nonempty"));
            }
            if normal.iter().any(|v| !v.is_finite()) || normal.norm() == 0.0 {
                return Err(Error::validation(
                    "set.normal",
                    "must be a finite nonzero vector",
                ));
            }
            if (normal.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::validation("set.normal", "must have unit length"));
            }
            if !offset.initial.is_finite() || !offset.rate.is_finite() {
                return Err(Error::validation("set.offset", "must be finite"));
            }
        }
        SetShape::Ball { center, radius } | SetShape::BallComplement { center, radius } => {
            if center.dim() == 0 || center.rate.len() != center.dim() {
                return Err(Error::validation(
                    "set.motion.center.rate",
                    "must have the same dimension as the center",
                ));
            }
            if endpoints
                .iter()
                .any(|&t| radius.at(t).is_nan() || radius.at(t) <= 0.0)
            {
                return Err(Error::validation(
                    "set.radius",
                    "radius must stay positive over the horizon",
                ));
            }
        }
        SetShape::Sublevel(g) => g.validate()?,
    }
    Ok(())
}

fn natural_prox_radius(shape: &SetShape, horizon: f64) -> f64 {
    match shape {
        SetShape::Halfspace { .. } | SetShape::Ball { .. } => SENTINEL_PROX_RADIUS,
        SetShape::BallComplement { radius, .. } => radius.at(0.0).min(radius.at(horizon.max(0.0))),
        SetShape::Sublevel(g) => g.natural_prox_radius(),
    }
}

fn natural_lipschitz(shape: &SetShape) -> f64 {
    match shape {
        SetShape::Halfspace { offset, .. } => offset.rate.abs(),
        SetShape::Ball { center, radius } | SetShape::BallComplement { center, radius } => {
            center.rate.norm() + radius.rate.abs()
        }
        SetShape::Sublevel(g) => g.motion_rate(),
    }
}
