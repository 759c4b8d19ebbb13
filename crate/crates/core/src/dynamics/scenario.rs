use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::MovingSetModel;
use crate::optimizer::ControlSet;

/// Controlled vector field `f(x, u)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Dynamics {
    /// `f = u`.
    ControlDirect,
    /// `f = A x + B u + c`.
    Affine {
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DVector<f64>,
    },
    Custom(CustomDynamics),
}

/// Vector fields registered in code under a string name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CustomDynamics {
    /// `f_i = u_i + 0.5 tanh(x_{i+1 mod n})`.
    TanhCoupled,
}

impl CustomDynamics {
    pub const ALL: &'static [CustomDynamics] = &[CustomDynamics::TanhCoupled];

    pub fn name(self) -> &'static str {
        match self {
            CustomDynamics::TanhCoupled => "tanh_coupled",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|d| d.name() == name)
    }
}

impl Dynamics {
    pub fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        match self {
            Dynamics::ControlDirect => u.clone(),
            Dynamics::Affine { a, b, c } => a * x + b * u + c,
            Dynamics::Custom(CustomDynamics::TanhCoupled) => {
                let n = x.len();
                DVector::from_fn(n, |i, _| u[i] + 0.5 * x[(i + 1) % n].tanh())
            }
        }
    }

    /// `D_x f`, an `n × n` matrix.
    pub fn jacobian_x(&self, x: &DVector<f64>, _u: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        match self {
            Dynamics::ControlDirect => DMatrix::zeros(n, n),
            Dynamics::Affine { a, .. } => a.clone(),
            Dynamics::Custom(CustomDynamics::TanhCoupled) => {
                let mut j = DMatrix::zeros(n, n);
                for i in 0..n {
                    let s = x[(i + 1) % n].tanh();
                    j[(i, (i + 1) % n)] += 0.5 * (1.0 - s * s);
                }
                j
            }
        }
    }

    /// `D_u f`, an `n × m` matrix.
    pub fn jacobian_u(&self, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        match self {
            Dynamics::ControlDirect | Dynamics::Custom(CustomDynamics::TanhCoupled) => {
                DMatrix::identity(x.len(), u.len())
            }
            Dynamics::Affine { b, .. } => b.clone(),
        }
    }

    /// True when `D_x f` does not depend on the state.
    pub fn is_state_linear(&self) -> bool {
        !matches!(self, Dynamics::Custom(_))
    }

    fn check_dims(&self, n: usize, m: usize) -> Result<()> {
        let mismatch = |what, expected, got| Error::DimensionMismatch {
            what,
            expected,
            got,
        };
        match self {
            Dynamics::ControlDirect | Dynamics::Custom(_) => {
                if m != n {
                    return Err(mismatch("control dimension (f = u needs m = n)", n, m));
                }
            }
            Dynamics::Affine { a, b, c } => {
                if a.nrows() != n || a.ncols() != n {
                    return Err(Error::validation(
                        "dynamics.a",
                        format!("must be {n}x{n}, got {}x{}", a.nrows(), a.ncols()),
                    ));
                }
                if b.nrows() != n || b.ncols() != m {
                    return Err(Error::validation(
                        "dynamics.b",
                        format!("must be {n}x{m}, got {}x{}", b.nrows(), b.ncols()),
                    ));
                }
                if c.len() != n {
                    return Err(Error::validation(
                        "dynamics.c",
                        format!("must have length {n}, got {}", c.len()),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Terminal cost `h`.
#[derive(Clone, Debug, PartialEq)]
pub enum CostModel {
    /// `h(x) = <c, x>`.
    Linear { coefficients: DVector<f64> },
    /// `h(x) = ½ |x - target|²`.
    Quadratic { target: DVector<f64> },
}

impl CostModel {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match self {
            CostModel::Linear { coefficients } => coefficients.dot(x),
            CostModel::Quadratic { target } => 0.5 * (x - target).norm_squared(),
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            CostModel::Linear { coefficients } => coefficients.clone(),
            CostModel::Quadratic { target } => x - target,
        }
    }

    fn dim(&self) -> usize {
        match self {
            CostModel::Linear { coefficients } => coefficients.len(),
            CostModel::Quadratic { target } => target.len(),
        }
    }
}

/// `β`, `k` and `σ` of the standing assumptions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    /// Bound on `|f(x, u)|`.
    pub beta: f64,
    /// Lipschitz constant of `f`.
    pub k: f64,
    /// Pointing margin.
    pub sigma: f64,
}

/// Full problem datum. Construct through [`Scenario::new`], which enforces
/// feasibility of `x0` and consistency of `β`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub set: MovingSetModel,
    pub dynamics: Dynamics,
    pub control_set: ControlSet,
    pub cost: CostModel,
    pub horizon: f64,
    pub x0: DVector<f64>,
    pub constants: Constants,
}

impl Scenario {
    pub fn new(
        set: MovingSetModel,
        dynamics: Dynamics,
        control_set: ControlSet,
        cost: CostModel,
        horizon: f64,
        x0: DVector<f64>,
        constants: Constants,
    ) -> Result<Self> {
        let scenario = Self {
            set,
            dynamics,
            control_set,
            cost,
            horizon,
            x0,
            constants,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn state_dim(&self) -> usize {
        self.x0.len()
    }

    pub fn control_dim(&self) -> usize {
        self.control_set.dim()
    }

    pub fn beta(&self) -> f64 {
        self.constants.beta
    }

    pub fn gamma(&self) -> f64 {
        self.set.set_lipschitz()
    }

    pub fn rho(&self) -> f64 {
        self.set.prox_radius()
    }

    /// Largest `ε` for which `ε(β + γ) < ρ/2`.
    pub fn max_epsilon(&self) -> f64 {
        0.5 * self.rho() / (self.beta() + self.gamma()).max(f64::MIN_POSITIVE)
    }

    pub fn check_epsilon(&self, epsilon: f64) -> Result<()> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::validation("numerics.epsilon", "must be positive"));
        }
        if epsilon >= self.max_epsilon() {
            return Err(Error::validation(
                "numerics.epsilon",
                format!(
                    "epsilon {epsilon} violates eps (beta + gamma) < rho / 2 (limit {})",
                    self.max_epsilon()
                ),
            ));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::validation("horizon", "must be positive and finite"));
        }
        let n = self.set.dim();
        if self.x0.len() != n {
            return Err(Error::validation(
                "x0",
                format!("has length {}, set dimension is {n}", self.x0.len()),
            ));
        }
        if self.cost.dim() != n {
            return Err(Error::validation(
                "cost",
                format!("has dimension {}, state dimension is {n}", self.cost.dim()),
            ));
        }
        self.dynamics.check_dims(n, self.control_dim())?;
        let c = &self.constants;
        if !(c.beta >= 0.0 && c.beta.is_finite()) {
            return Err(Error::validation("constants.beta", "must be nonnegative"));
        }
        if !(c.k >= 0.0 && c.k.is_finite()) {
            return Err(Error::validation("constants.k", "must be nonnegative"));
        }
        if !(c.sigma > 0.0 && c.sigma.is_finite()) {
            return Err(Error::validation("constants.sigma", "must be positive"));
        }
        let d0 = self.set.signed_distance_sample(0.0, &self.x0)?;
        if d0 > self.set.boundary_tolerance() {
            return Err(Error::InfeasibleInitialState {
                signed_distance: d0,
            });
        }
        let observed = self.sampled_field_bound();
        if observed > c.beta * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::InconsistentBound {
                beta: c.beta,
                observed,
            });
        }
        Ok(())
    }

    /// `max |f(x, u)|` over the corners and center of `U` at `x0` and at
    /// `x0 ± βT e_i`.
    pub fn sampled_field_bound(&self) -> f64 {
        let n = self.state_dim();
        let reach = self.constants.beta * self.horizon;
        let mut probes = vec![self.x0.clone()];
        for i in 0..n {
            for s in [-1.0, 1.0] {
                let mut p = self.x0.clone();
                p[i] += s * reach;
                probes.push(p);
            }
        }
        let mut controls = self.control_set.vertices();
        controls.push(self.control_set.center());
        probes
            .iter()
            .flat_map(|x| {
                controls
                    .iter()
                    .map(move |u| self.dynamics.eval(x, u).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Piecewise-constant control on a uniform partition of `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSignal {
    horizon: f64,
    values: Vec<DVector<f64>>,
}

impl ControlSignal {
    pub fn new(horizon: f64, values: Vec<DVector<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation(
                "numerics.control_intervals",
                "a control signal needs at least one interval",
            ));
        }
        if horizon.is_nan() || horizon <= 0.0 {
            return Err(Error::validation("horizon", "must be positive"));
        }
        let m = values[0].len();
        if let Some(bad) = values.iter().position(|v| v.len() != m) {
            return Err(Error::validation(
                format!("control[{bad}]"),
                format!("has length {}, expected {m}", values[bad].len()),
            ));
        }
        Ok(Self { horizon, values })
    }

    pub fn constant(horizon: f64, intervals: usize, value: DVector<f64>) -> Result<Self> {
        Self::new(horizon, vec![value; intervals])
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.values.len()
    }

    pub fn interval_length(&self) -> f64 {
        self.horizon / self.values.len() as f64
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [DVector<f64>] {
        &mut self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn interval_of(&self, t: f64) -> usize {
        let j = (t / self.interval_length()).floor();
        (j.max(0.0) as usize).min(self.values.len() - 1)
    }

    pub fn at(&self, t: f64) -> &DVector<f64> {
        &self.values[self.interval_of(t)]
    }

    pub fn is_admissible(&self, set: &ControlSet) -> bool {
        self.values.iter().all(|v| set.contains(v, 1e-12))
    }

    /// `‖self - other‖_{L²}`, both on the same partition.
    pub fn l2_distance(&self, other: &ControlSignal) -> Result<f64> {
        self.check_same_grid(other)?;
        let dt = self.interval_length();
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm_squared() * dt)
            .sum::<f64>()
            .sqrt())
    }

    pub(crate) fn check_same_grid(&self, other: &ControlSignal) -> Result<()> {
        if self.intervals() != other.intervals() {
            return Err(Error::DimensionMismatch {
                what: "control intervals",
                expected: self.intervals(),
                got: other.intervals(),
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                what: "control dimension",
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

/// Integrator grid: each control interval split into `steps_per_interval`
/// equal steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub horizon: f64,
    pub intervals: usize,
    pub steps_per_interval: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, intervals: usize, steps_per_interval: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::validation(
                "numerics.control_intervals",
                "must be at least 1",
            ));
        }
        if steps_per_interval == 0 {
            return Err(Error::validation(
                "numerics.steps_per_interval",
                "must be at least 1",
            ));
        }
        Ok(Self {
            horizon,
            intervals,
            steps_per_interval,
        })
    }

    /// Smallest grid with step at most `ratio * epsilon`.
    pub fn for_epsilon(horizon: f64, intervals: usize, epsilon: f64, ratio: f64) -> Result<Self> {
        let target = ratio * epsilon;
        let per = (horizon / (intervals as f64 * target) - 1e-9)
            .ceil()
            .max(1.0) as usize;
        Self::new(horizon, intervals, per)
    }

    pub fn steps(&self) -> usize {
        self.intervals * self.steps_per_interval
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.horizon * k as f64 / self.steps() as f64
    }

    pub fn interval_of_step(&self, k: usize) -> usize {
        k / self.steps_per_interval
    }
}

/// How integrator steps are chosen for a given `ε`: a fixed number of steps
/// per control interval, or the smallest count with `h <= step_ratio · ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPolicy {
    pub intervals: usize,
    pub steps_per_interval: Option<usize>,
    pub step_ratio: f64,
}

impl GridPolicy {
    pub fn steps_per_interval(&self, horizon: f64, epsilon: f64) -> Result<usize> {
        match self.steps_per_interval {
            Some(m) => Ok(TimeGrid::new(horizon, self.intervals, m)?.steps_per_interval),
            None => {
                if self.step_ratio.is_nan() || self.step_ratio <= 0.0 {
                    return Err(Error::validation("numerics.step_ratio", "must be positive"));
                }
                Ok(
                    TimeGrid::for_epsilon(horizon, self.intervals, epsilon, self.step_ratio)?
                        .steps_per_interval,
                )
            }
        }
    }
}
