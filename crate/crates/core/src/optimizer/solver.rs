use nalgebra::DVector;
use serde::Serialize;

use super::ControlSet;
use crate::adjoint::{check_schedule, integrate_adjoint, AdjointPath};
use crate::dynamics::{
    integrate_catching_up, integrate_regularized, ControlSignal, GridPolicy, Scenario, Trajectory,
};
use crate::error::{Error, Result};

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_HALVINGS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub step0: f64,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            step0: 1.0,
            tol: 1e-6,
        }
    }
}

/// `J = h(x(T)) + ½ ∫ |u - u_ref|² dt`.
pub fn penalized_cost(
    scenario: &Scenario,
    traj: &Trajectory,
    u: &ControlSignal,
    u_ref: &ControlSignal,
) -> Result<f64> {
    let gap = u.l2_distance(u_ref)?;
    Ok(scenario.cost.value(traj.final_state()) + 0.5 * gap * gap)
}

/// Derivative of the discrete `J` with respect to each interval value:
/// `g_j = -Σ_{k ∈ I_j} h D_u fᵀ q_k + Δ (u_j - u_ref_j)`.
pub fn cost_gradient(
    scenario: &Scenario,
    traj: &Trajectory,
    path: &AdjointPath,
    u: &ControlSignal,
    u_ref: &ControlSignal,
) -> Result<Vec<DVector<f64>>> {
    u.check_same_grid(u_ref)?;
    if u.intervals() != traj.grid.intervals || path.steps.len() != traj.grid.steps() {
        return Err(Error::DimensionMismatch {
            what: "control intervals vs trajectory grid",
            expected: traj.grid.intervals,
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
    let dt = u.interval_length();
    let mut g: Vec<DVector<f64>> = u
        .values()
        .iter()
        .zip(u_ref.values())
        .map(|(a, b)| (a - b) * dt)
        .collect();
    for (k, st) in path.steps.iter().enumerate() {
        g[traj.grid.interval_of_step(k)] -= &st.control;
    }
    Ok(g)
}

/// `‖u - P_U(u - G)‖_{L²}` with `G` the `L²` gradient.
pub fn stationarity(set: &ControlSet, u: &ControlSignal, l2_grad: &[DVector<f64>]) -> f64 {
    let dt = u.interval_length();
    u.values()
        .iter()
        .zip(l2_grad)
        .map(|(v, g)| (v - set.project(&(v - g))).norm_squared() * dt)
        .sum::<f64>()
        .sqrt()
}

/// `max_j [max_{v ∈ U} <-G_j, v> - <-G_j, u_j>]`, zero exactly when every
/// interval value minimizes the linearized penalized cost over `U`.
pub fn pmp_eps_residual(set: &ControlSet, u: &ControlSignal, l2_grad: &[DVector<f64>]) -> f64 {
    u.values()
        .iter()
        .zip(l2_grad)
        .map(|(v, g)| {
            let c = -g;
            c.dot(&set.argmax_linear(&c).point) - c.dot(v)
        })
        .fold(0.0, f64::max)
}

/// Forward pass, adjoint, cost and gradient at one control.
pub struct Evaluation {
    pub traj: Trajectory,
    pub path: AdjointPath,
    pub cost: f64,
    /// `L²` gradient `G_j = g_j / Δ`.
    pub gradient: Vec<DVector<f64>>,
}

pub fn evaluate(
    scenario: &Scenario,
    u: &ControlSignal,
    u_ref: &ControlSignal,
    epsilon: f64,
    steps_per_interval: usize,
) -> Result<Evaluation> {
    let traj = integrate_regularized(scenario, u, epsilon, steps_per_interval)?;
    let path = integrate_adjoint(scenario, &traj, u, epsilon)?;
    let cost = penalized_cost(scenario, &traj, u, u_ref)?;
    let dt = u.interval_length();
    let gradient = cost_gradient(scenario, &traj, &path, u, u_ref)?
        .into_iter()
        .map(|g| g / dt)
        .collect();
    Ok(Evaluation {
        traj,
        path,
        cost,
        gradient,
    })
}

fn cost_only(
    scenario: &Scenario,
    u: &ControlSignal,
    u_ref: &ControlSignal,
    epsilon: f64,
    steps_per_interval: usize,
) -> Result<f64> {
    let traj = integrate_regularized(scenario, u, epsilon, steps_per_interval)?;
    penalized_cost(scenario, &traj, u, u_ref)
}

pub struct SolveReport {
    pub epsilon: f64,
    pub u_opt: ControlSignal,
    pub traj: Trajectory,
    pub adjoint: AdjointPath,
    pub gradient: Vec<DVector<f64>>,
    pub cost_history: Vec<f64>,
    pub pmp_residual: f64,
    pub stationarity: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Projected gradient with Armijo backtracking on the penalized problem
/// anchored at `u_ref`, started from `u_ref`.
pub fn solve_penalized(
    scenario: &Scenario,
    u_ref: &ControlSignal,
    epsilon: f64,
    grid: GridPolicy,
    opts: SolverOptions,
) -> Result<SolveReport> {
    solve_penalized_from(scenario, u_ref, u_ref, epsilon, grid, opts)
}

/// As [`solve_penalized`] with an explicit starting control.
pub fn solve_penalized_from(
    scenario: &Scenario,
    u_ref: &ControlSignal,
    start: &ControlSignal,
    epsilon: f64,
    grid: GridPolicy,
    opts: SolverOptions,
) -> Result<SolveReport> {
    let set = &scenario.control_set;
    if !u_ref.is_admissible(set) {
        return Err(Error::validation(
            "numerics.reference_control",
            "reference control leaves the control set",
        ));
    }
    u_ref.check_same_grid(start)?;
    let m = grid.steps_per_interval(scenario.horizon, epsilon)?;
    let dt = u_ref.interval_length();

    let mut u = start.clone();
    for v in u.values_mut() {
        *v = set.project(v);
    }
    let mut eval = evaluate(scenario, &u, u_ref, epsilon, m)?;
    let mut cost_history = vec![eval.cost];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        if stationarity(set, &u, &eval.gradient) <= opts.tol {
            converged = true;
            break;
        }
        let mut step = opts.step0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = u.clone();
            let mut slope = 0.0;
            for ((t, v), g) in trial
                .values_mut()
                .iter_mut()
                .zip(u.values())
                .zip(&eval.gradient)
            {
                *t = set.project(&(v - g * step));
                slope += g.dot(&(&*t - v)) * dt;
            }
            let trial_cost = cost_only(scenario, &trial, u_ref, epsilon, m)?;
            if trial_cost <= eval.cost + ARMIJO_C * slope {
                accepted = Some(trial);
                break;
            }
            step *= BACKTRACK;
        }
        let Some(next) = accepted else {
            return Err(Error::NonDecreasingCost {
                iteration: iterations,
                halvings: MAX_HALVINGS,
            });
        };
        u = next;
        eval = evaluate(scenario, &u, u_ref, epsilon, m)?;
        cost_history.push(eval.cost);
        iterations += 1;
    }
    if !converged {
        converged = stationarity(set, &u, &eval.gradient) <= opts.tol;
    }
    Ok(SolveReport {
        epsilon,
        stationarity: stationarity(set, &u, &eval.gradient),
        pmp_residual: pmp_eps_residual(set, &u, &eval.gradient),
        u_opt: u,
        traj: eval.traj,
        adjoint: eval.path,
        gradient: eval.gradient,
        cost_history,
        iterations,
        converged,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationRow {
    pub epsilon: f64,
    /// `‖u_ε - u_ref‖_{L²}`.
    pub control_gap: f64,
    /// `sup_t |x_ε(t) - x_catch(t)|` for the catching-up run of `u_ε`.
    pub state_gap: f64,
    pub terminal_cost: f64,
    pub catching_up_cost: f64,
    pub cost_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub struct ContinuationReport {
    pub solves: Vec<SolveReport>,
    pub table: Vec<ContinuationRow>,
}

/// Solves along a decreasing `ε` schedule, warm-starting each solve from the
/// previous optimum while keeping the anchor `u_ref`.
pub fn continuation(
    scenario: &Scenario,
    u_ref: &ControlSignal,
    schedule: &[f64],
    grid: GridPolicy,
    opts: SolverOptions,
) -> Result<ContinuationReport> {
    check_schedule(schedule)?;
    let mut solves: Vec<SolveReport> = Vec::with_capacity(schedule.len());
    let mut table = Vec::with_capacity(schedule.len());
    for &epsilon in schedule {
        let start = solves.last().map_or(u_ref, |s| &s.u_opt);
        let solve = solve_penalized_from(scenario, u_ref, start, epsilon, grid, opts)?;
        let m = solve.traj.grid.steps_per_interval;
        let catch = integrate_catching_up(scenario, &solve.u_opt, m)?;
        let terminal_cost = scenario.cost.value(solve.traj.final_state());
        let catching_up_cost = scenario.cost.value(catch.final_state());
        table.push(ContinuationRow {
            epsilon,
            control_gap: solve.u_opt.l2_distance(u_ref)?,
            state_gap: solve.traj.sup_distance(&catch),
            terminal_cost,
            catching_up_cost,
            cost_gap: terminal_cost - catching_up_cost,
            iterations: solve.iterations,
            converged: solve.converged,
        });
        solves.push(solve);
    }
    Ok(ContinuationReport { solves, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Constants, CostModel, Dynamics};
    use crate::geometry::{MovingSetModel, ScalarPath};
    use nalgebra::dvector;

    fn example(y0: f64) -> Scenario {
        Scenario::new(
            MovingSetModel::halfspace(dvector![0.0, 1.0], ScalarPath::fixed(0.0)).unwrap(),
            Dynamics::ControlDirect,
            ControlSet::new(dvector![-1.0, -1.0], dvector![1.0, -0.5]).unwrap(),
            CostModel::Linear {
                coefficients: dvector![1.0, 1.0],
            },
            1.0,
            dvector![0.0, y0],
            Constants {
                beta: 2f64.sqrt(),
                k: 1.0,
                sigma: 0.5,
            },
        )
        .unwrap()
    }

    fn policy() -> GridPolicy {
        GridPolicy {
            intervals: 20,
            steps_per_interval: None,
            step_ratio: 0.25,
        }
    }

    #[test]
    fn anchored_optimum_is_stationary() {
        let s = example(0.5);
        let u_ref = ControlSignal::constant(1.0, 20, dvector![-1.0, -1.0]).unwrap();
        let rep = solve_penalized(&s, &u_ref, 1e-2, policy(), SolverOptions::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert!(rep.pmp_residual <= 1e-12);
    }

    #[test]
    fn slack_problem_moves_to_corner() {
        let s = example(2.0);
        let u_ref = ControlSignal::constant(1.0, 20, dvector![0.0, -0.75]).unwrap();
        let rep = solve_penalized(&s, &u_ref, 1e-2, policy(), SolverOptions::default()).unwrap();
        assert!(rep.converged);
        // gradient of x + y is (1, 1); the proximal step lands on u_ref - (1, 1) clamped
        for v in rep.u_opt.values() {
            assert!((v - dvector![-1.0, -1.0]).norm() < 1e-9);
        }
        assert!(rep.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }
}
