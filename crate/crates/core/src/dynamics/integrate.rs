use nalgebra::{DMatrix, DVector};

use super::scenario::{ControlSignal, Scenario, TimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{Foot, Location, MovingSetModel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrajectoryKind {
    Regularized { epsilon: f64 },
    CatchingUp,
}

/// States on the integrator grid with distance diagnostics.
///
/// `predictor_signed[k]` is the signed distance of the explicit predictor
/// `x_k + h f(x_k, u_k)` to `C(t_{k+1})`; together with `signed` it fixes the
/// branch of every step so the adjoint pass can replay it exactly.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub grid: TimeGrid,
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub velocities: Vec<DVector<f64>>,
    pub distance: Vec<f64>,
    pub signed: Vec<f64>,
    pub predictor_signed: Vec<f64>,
}

impl Trajectory {
    pub fn step(&self) -> f64 {
        self.grid.step()
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self.kind {
            TrajectoryKind::Regularized { epsilon } => Some(epsilon),
            TrajectoryKind::CatchingUp => None,
        }
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states
            .last()
            .expect("trajectory has at least one node")
    }

    /// Piecewise-linear interpolant.
    pub fn state_at(&self, t: f64) -> DVector<f64> {
        let k_max = self.states.len() - 1;
        let s = (t / self.step()).clamp(0.0, k_max as f64);
        let k = (s.floor() as usize).min(k_max.saturating_sub(1));
        let theta = s - k as f64;
        if k == k_max {
            return self.states[k].clone();
        }
        &self.states[k] * (1.0 - theta) + &self.states[k + 1] * theta
    }

    /// `sup_t |x(t) - y(t)|` over the nodes of both trajectories.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        let one = self
            .times
            .iter()
            .zip(self.states.iter())
            .map(|(t, x)| (x - other.state_at(*t)).norm());
        let two = other
            .times
            .iter()
            .zip(other.states.iter())
            .map(|(t, y)| (y - self.state_at(*t)).norm());
        one.chain(two).fold(0.0, f64::max)
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_distance(&self) -> f64 {
        self.distance.iter().copied().fold(0.0, f64::max)
    }
}

/// Exponential-Euler weights for a step of length `h` against relaxation
/// time `ε`: `φ = (1 - e^{-λ})/λ` and `c = e^{-λ} - φ` with `λ = h/ε`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RelaxWeights {
    pub phi: f64,
    pub carry: f64,
}

impl RelaxWeights {
    pub fn new(h: f64, epsilon: f64) -> Self {
        let lambda = h / epsilon;
        let decay = -(-lambda).exp_m1();
        let phi = decay / lambda;
        Self {
            phi,
            carry: (-lambda).exp() - phi,
        }
    }

    /// Limit `ε → 0`: plain projection.
    pub fn catching_up() -> Self {
        Self {
            phi: 0.0,
            carry: 0.0,
        }
    }
}

fn signed_of(set: &MovingSetModel, t: f64, x: &DVector<f64>, loc: &Location) -> Result<f64> {
    match loc {
        Location::Interior { signed: Some(s) } => Ok(*s),
        Location::Interior { signed: None } => set.signed_distance_sample(t, x),
        Location::Boundary(f) | Location::Exterior(f) => Ok(f.signed),
    }
}

/// Foot of a point that lies strictly outside (`signed > 0`), else `None`.
fn outside_foot(loc: Location) -> Option<Foot> {
    match loc {
        Location::Boundary(f) | Location::Exterior(f) if f.signed > 0.0 => Some(f),
        _ => None,
    }
}

fn integrate(
    scenario: &Scenario,
    u: &ControlSignal,
    grid: TimeGrid,
    weights: RelaxWeights,
    kind: TrajectoryKind,
) -> Result<Trajectory> {
    if u.intervals() != grid.intervals {
        return Err(Error::DimensionMismatch {
            what: "control intervals vs integrator grid",
            expected: grid.intervals,
            got: u.intervals(),
        });
    }
    if u.dim() != scenario.control_dim() {
        return Err(Error::DimensionMismatch {
            what: "control dimension",
            expected: scenario.control_dim(),
            got: u.dim(),
        });
    }
    let set = &scenario.set;
    let steps = grid.steps();
    let h = grid.step();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut signed = Vec::with_capacity(steps + 1);
    let mut predictor_signed = Vec::with_capacity(steps);

    let mut x = scenario.x0.clone();
    let mut loc = set.locate(0.0, &x)?;
    for k in 0..steps {
        let t = grid.time(k);
        let t_next = grid.time(k + 1);
        times.push(t);
        signed.push(signed_of(set, t, &x, &loc)?);

        let uk = &u.values()[grid.interval_of_step(k)];
        let z = &x + scenario.dynamics.eval(&x, uk) * h;
        let z_loc = set.locate(t_next, &z)?;
        predictor_signed.push(signed_of(set, t_next, &z, &z_loc)?);
        let mut next = match outside_foot(z_loc) {
            Some(foot) => &foot.point + (&z - &foot.point) * weights.phi,
            None => z,
        };
        if weights.carry != 0.0 {
            if let Some(foot) = outside_foot(loc) {
                next += (&x - &foot.point) * weights.carry;
            }
        }
        states.push(x);
        x = next;
        loc = set.locate(t_next, &x)?;
    }
    times.push(grid.time(steps));
    signed.push(signed_of(set, grid.horizon, &x, &loc)?);
    states.push(x);

    let mut velocities: Vec<DVector<f64>> =
        states.windows(2).map(|w| (&w[1] - &w[0]) / h).collect();
    velocities.push(
        velocities
            .last()
            .cloned()
            .unwrap_or_else(|| DVector::zeros(scenario.state_dim())),
    );
    let distance = signed.iter().map(|s| s.max(0.0)).collect();
    Ok(Trajectory {
        kind,
        grid,
        times,
        states,
        velocities,
        distance,
        signed,
        predictor_signed,
    })
}

/// Integrates `ẋ = -(x - P_{C(t)}(x))/ε + f(x, u)`.
///
/// Each step takes the explicit predictor `z = x_k + h f(x_k, u_k)` and
/// relaxes its normal excess exactly over the step:
/// `x_{k+1} = P(z) + φ (z - P(z)) + c (x_k - P(x_k))`. Inside the set this is
/// explicit Euler; a static boundary layer sits at depth `ε |f_N|`.
pub fn integrate_regularized(
    scenario: &Scenario,
    u: &ControlSignal,
    epsilon: f64,
    steps_per_interval: usize,
) -> Result<Trajectory> {
    scenario.check_epsilon(epsilon)?;
    let grid = TimeGrid::new(scenario.horizon, u.intervals(), steps_per_interval)?;
    integrate(
        scenario,
        u,
        grid,
        RelaxWeights::new(grid.step(), epsilon),
        TrajectoryKind::Regularized { epsilon },
    )
}

/// Catching-up scheme `x_{k+1} = P(t_{k+1}, x_k + h f(x_k, u_k))`.
pub fn integrate_catching_up(
    scenario: &Scenario,
    u: &ControlSignal,
    steps_per_interval: usize,
) -> Result<Trajectory> {
    let grid = TimeGrid::new(scenario.horizon, u.intervals(), steps_per_interval)?;
    let reach = grid.step() * (scenario.beta() + scenario.gamma());
    if reach >= 0.5 * scenario.rho() {
        return Err(Error::validation(
            "numerics.steps_per_interval",
            format!("step reach {reach} is not below rho / 2"),
        ));
    }
    integrate(
        scenario,
        u,
        grid,
        RelaxWeights::catching_up(),
        TrajectoryKind::CatchingUp,
    )
}

/// Linearization of one forward step, `x_{k+1} = Q(z_k) + c R(x_k)`, with
/// `z_k = x_k + h f(x_k, u_k)`, `Q(z) = P(z) + φ (z - P(z))` outside and
/// `R(x) = x - P(x)` outside.
pub(crate) struct StepLinearization {
    /// `(n, d·∇²d)` at the predictor when it is outside.
    pub predictor: Option<(DVector<f64>, DMatrix<f64>)>,
    /// `(n, d·∇²d)` at `x_k` when it is outside (regularized runs only).
    pub current: Option<(DVector<f64>, DMatrix<f64>)>,
    pub fx: DMatrix<f64>,
    pub fu: DMatrix<f64>,
}

impl StepLinearization {
    pub fn at(
        scenario: &Scenario,
        traj: &Trajectory,
        u: &ControlSignal,
        weights: RelaxWeights,
        k: usize,
    ) -> Result<Self> {
        let set = &scenario.set;
        let grid = &traj.grid;
        let h = grid.step();
        let x = &traj.states[k];
        let uk = &u.values()[grid.interval_of_step(k)];
        let fx = scenario.dynamics.jacobian_x(x, uk);
        let fu = scenario.dynamics.jacobian_u(x, uk);
        let predictor = if traj.predictor_signed[k] > 0.0 {
            let t_next = grid.time(k + 1);
            let z = x + scenario.dynamics.eval(x, uk) * h;
            Some(normal_and_curvature(set, t_next, &z)?)
        } else {
            None
        };
        let current = if weights.carry != 0.0 && traj.signed[k] > 0.0 {
            Some(normal_and_curvature(set, grid.time(k), x)?)
        } else {
            None
        };
        Ok(Self {
            predictor,
            current,
            fx,
            fu,
        })
    }
}

fn normal_and_curvature(
    set: &MovingSetModel,
    t: f64,
    x: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let foot = match set.locate(t, x)? {
        Location::Boundary(f) | Location::Exterior(f) => f,
        Location::Interior { .. } => {
            let n = x.len();
            return Ok((DVector::zeros(n), DMatrix::zeros(n, n)));
        }
    };
    let hess = set.signed_hessian(t, x, &foot)? * foot.signed;
    Ok((foot.normal, hess))
}
