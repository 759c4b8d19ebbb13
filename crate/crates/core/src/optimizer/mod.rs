//! Projected-gradient solution of the penalized control problem.

mod control_set;
mod solver;

pub use control_set::{ControlSet, LinearMaximizer};
pub use solver::{
    continuation, cost_gradient, evaluate, penalized_cost, pmp_eps_residual, solve_penalized,
    solve_penalized_from, stationarity, ContinuationReport, ContinuationRow, Evaluation,
    SolveReport, SolverOptions,
};
