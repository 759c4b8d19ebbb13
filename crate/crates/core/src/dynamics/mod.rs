//! Scenario model and forward integration.

mod integrate;
mod scenario;
mod structure;

pub use integrate::{integrate_catching_up, integrate_regularized, Trajectory, TrajectoryKind};
pub(crate) use integrate::{RelaxWeights, StepLinearization};
pub use scenario::{
    Constants, ControlSignal, CostModel, CustomDynamics, Dynamics, GridPolicy, Scenario, TimeGrid,
};
pub use structure::{
    contact_band, detect_crossings, penetration_report, BoundaryStructure, Interval,
    PenetrationReport, CROSSING_TIME_TOL,
};
