use nalgebra::DVector;

use super::multipliers::{detect_jumps, jump_window, Jump};
use crate::dynamics::{
    contact_band, ControlSignal, RelaxWeights, Scenario, StepLinearization, Trajectory,
    TrajectoryKind,
};
use crate::error::{Error, Result};

/// Exact split of one backward increment
/// `p_{k+1} - p_k = normal_mass + curvature + drift`.
#[derive(Clone, Debug)]
pub struct StepTerms {
    /// Rank-one normal part, the discrete counterpart of `(1/ε) ξ ∇d dt`.
    pub normal_mass: DVector<f64>,
    /// Curvature part, the counterpart of `η ∇²d p dt`.
    pub curvature: DVector<f64>,
    /// `-h D_x fᵀ q_k`.
    pub drift: DVector<f64>,
    /// `h D_u fᵀ q_k`; its interval sums give the cost sensitivity.
    pub control: DVector<f64>,
}

/// Backward adjoint of a discrete trajectory with multiplier samples.
#[derive(Clone, Debug)]
pub struct AdjointPath {
    pub epsilon: Option<f64>,
    pub times: Vec<f64>,
    pub p: Vec<DVector<f64>>,
    /// `ξ_k = <p_k, ∇d(x_k)>`, zero strictly inside.
    pub xi: Vec<f64>,
    /// `η_k = d(x_k)/ε`.
    pub eta: Vec<f64>,
    /// `<p_k, ∇d_S(x_k)>` where `x_k` is within the contact band or outside.
    pub p_normal: Vec<Option<f64>>,
    pub steps: Vec<StepTerms>,
    pub jumps: Vec<Jump>,
}

impl AdjointPath {
    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("path has nodes")
    }

    pub fn sup_norm(&self) -> f64 {
        self.p.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// `Σ_k |p_{k+1} - p_k|`.
    pub fn total_variation(&self) -> f64 {
        self.p.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
    }

    /// Piecewise-linear interpolant.
    pub fn at(&self, t: f64) -> DVector<f64> {
        let k_max = self.p.len() - 1;
        let s = (t / self.step()).clamp(0.0, k_max as f64);
        let k = (s.floor() as usize).min(k_max - 1);
        let theta = s - k as f64;
        &self.p[k] * (1.0 - theta) + &self.p[k + 1] * theta
    }

    /// Nodes with `t` in `[a, b]`.
    pub fn node_range(&self, a: f64, b: f64) -> std::ops::RangeInclusive<usize> {
        let h = self.step();
        let last = self.p.len() - 1;
        let lo = ((a / h).ceil().max(0.0) as usize).min(last);
        let hi = ((b / h).floor().max(0.0) as usize).min(last);
        lo..=hi
    }
}

/// Backward pass `p_K = -∇h(x_K)`, `p_k = (∂x_{k+1}/∂x_k)ᵀ p_{k+1}`: the
/// exact transpose of the forward step linearized at the branch recorded in
/// the trajectory.
pub fn integrate_adjoint(
    scenario: &Scenario,
    traj: &Trajectory,
    u: &ControlSignal,
    epsilon: f64,
) -> Result<AdjointPath> {
    let weights = match traj.kind {
        TrajectoryKind::Regularized { epsilon: e } => {
            if e != epsilon {
                return Err(Error::validation(
                    "epsilon",
                    format!(
                        "trajectory was integrated with epsilon {e}, adjoint asked for {epsilon}"
                    ),
                ));
            }
            RelaxWeights::new(traj.step(), epsilon)
        }
        TrajectoryKind::CatchingUp => RelaxWeights::catching_up(),
    };
    if u.intervals() != traj.grid.intervals {
        return Err(Error::DimensionMismatch {
            what: "control intervals vs trajectory grid",
            expected: traj.grid.intervals,
            got: u.intervals(),
        });
    }

    let n_steps = traj.grid.steps();
    let h = traj.step();
    let mut p = vec![DVector::zeros(scenario.state_dim()); n_steps + 1];
    p[n_steps] = -scenario.cost.gradient(traj.final_state());
    let mut steps = Vec::with_capacity(n_steps);
    for k in (0..n_steps).rev() {
        let lin = StepLinearization::at(scenario, traj, u, weights, k)?;
        let pn = &p[k + 1];
        let mut normal_mass = DVector::zeros(pn.len());
        let mut curvature = DVector::zeros(pn.len());
        if let Some((n, dh)) = &lin.predictor {
            let a = 1.0 - weights.phi;
            normal_mass += n * (a * n.dot(pn));
            curvature += dh * pn * a;
        }
        if let Some((n, dh)) = &lin.current {
            normal_mass -= n * (weights.carry * n.dot(pn));
            curvature -= dh * pn * weights.carry;
        }
        // q = DQ(z_k) p_{k+1}; the carry terms act on x_k directly.
        let mut q = pn.clone();
        if let Some((n, dh)) = &lin.predictor {
            let a = 1.0 - weights.phi;
            q -= n * (a * n.dot(pn)) + dh * pn * a;
        }
        let drift = -(lin.fx.transpose() * &q) * h;
        let control = lin.fu.transpose() * &q * h;
        p[k] = pn - &normal_mass - &curvature - &drift;
        steps.push(StepTerms {
            normal_mass,
            curvature,
            drift,
            control,
        });
    }
    steps.reverse();

    let band = contact_band(scenario, traj);
    let tol = scenario.set.boundary_tolerance();
    let mut xi = Vec::with_capacity(n_steps + 1);
    let mut p_normal = Vec::with_capacity(n_steps + 1);
    for (k, pk) in p.iter().enumerate() {
        let s = traj.signed[k];
        let normal = if s >= -band {
            Some(
                scenario
                    .set
                    .signed_gradient(traj.times[k], &traj.states[k])?,
            )
        } else {
            None
        };
        let pn = normal.as_ref().map(|n| pk.dot(n));
        xi.push(if s >= -tol { pn.unwrap_or(0.0) } else { 0.0 });
        p_normal.push(pn);
    }
    let eta = match traj.kind {
        TrajectoryKind::Regularized { epsilon } => {
            traj.distance.iter().map(|d| d / epsilon).collect()
        }
        TrajectoryKind::CatchingUp => vec![0.0; n_steps + 1],
    };
    let jumps = detect_jumps(&traj.times, &p, jump_window(traj.epsilon(), h));
    Ok(AdjointPath {
        epsilon: traj.epsilon(),
        times: traj.times.clone(),
        p,
        xi,
        eta,
        p_normal,
        steps,
        jumps,
    })
}
